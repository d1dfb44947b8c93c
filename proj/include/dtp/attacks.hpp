#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtp/binning.hpp"
#include "dtp/classifier.hpp"
#include "dtp/dataset.hpp"

namespace dtp {

enum class AttackKind { Untargeted, Distance, Frequency };

std::string attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

enum class ShadowModeKind { Untargeted, Paired };

struct ShadowModel {
    ClassifierPtr model;
    std::vector<char> in_training;  // membership bitmap over the candidate set
};

// Untargeted mode holds M shadow models trained on size-n samples of the
// candidate set. Paired mode holds M (in, out) pairs whose training sets
// differ exactly by the target record, plus the pairs' binned predictions at
// the target's features.
struct ShadowEnsemble {
    ShadowModeKind mode = ShadowModeKind::Untargeted;
    std::size_t pairs = 0;  // M
    std::int64_t target_id = -1;
    std::vector<double> target_x;
    std::vector<ShadowModel> in_models;
    std::vector<ShadowModel> out_models;  // empty in untargeted mode
    std::vector<PredictionVector> in_predictions;
    std::vector<PredictionVector> out_predictions;
};

ShadowEnsemble build_shadows_untargeted(const Dataset& candidate, const ClassifierSpec& spec,
                                        std::size_t models, std::size_t train_size,
                                        std::uint64_t seed);

ShadowEnsemble build_shadows_paired(const Dataset& candidate, const ClassifierSpec& spec,
                                    std::size_t pairs, std::size_t train_size,
                                    std::int64_t target_id, std::uint64_t seed);

enum class AttackDecision { H1Member, H0NonMember };

struct AttackVerdict {
    std::int64_t target_id = -1;
    AttackKind attack = AttackKind::Distance;
    AttackDecision decision = AttackDecision::H0NonMember;
    // untargeted: p_in - p_out; distance: KL(q||p_out) - KL(q||p_in);
    // frequency: the smoothed count-product likelihood ratio
    double score = 0.0;

    bool member() const { return decision == AttackDecision::H1Member; }
    nlohmann::json to_json() const;
};

// Labeled membership rows per the untargeted shadow-training procedure:
// every shadow model labels every candidate record (x, y one-hot, q) with
// in/out. The result is a numeric-feature dataset of M * |D| rows.
Dataset build_attack_rows(const ShadowEnsemble& ensemble, const Dataset& candidate);

struct UntargetedAttack {
    ClassifierPtr net;      // trained on attack rows
    SchemaPtr data_schema;  // schema of the attacked dataset
};

UntargetedAttack untargeted_attack_train(const ShadowEnsemble& ensemble, const Dataset& candidate,
                                         const ClassifierSpec& attack_net_spec);

// Default attack network from the evaluation setup: one hidden layer of 32
// rectifier units, log-softmax head, learning rate 0.01, 30 epochs.
ClassifierSpec default_attack_net_spec(std::uint64_t seed);

AttackVerdict untargeted_attack_decide(const UntargetedAttack& attack, std::int64_t target_id,
                                       const Record& target, const PredictionVector& q);

// Natural-log KL divergence; terms with p_i = 0 contribute 0.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

AttackVerdict distance_attack(const ShadowEnsemble& ensemble, const PredictionVector& q);

AttackVerdict frequency_attack(const ShadowEnsemble& ensemble, const PredictionVector& q);

}  // namespace dtp
