#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtp/attacks.hpp"
#include "dtp/classifier.hpp"
#include "dtp/dataset.hpp"
#include "dtp/metrics.hpp"
#include "dtp/stats.hpp"

namespace dtp {

struct ProtocolConfig {
    std::size_t iterations = 100;
    std::size_t pdtp_iterations = 10;
    std::size_t targets_per_iteration = 100;
    ClassifierSpec classifier;
    std::vector<AttackKind> attacks = {AttackKind::Distance};
    std::size_t untargeted_models = 20;  // shadow models behind the untargeted attack
    std::size_t paired_models = 5;       // shadow pairs per target for targeted attacks
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate(const Dataset& candidate) const;
    nlohmann::json to_json() const;
    static ProtocolConfig from_json(const nlohmann::json& j);
};

struct TargetReport {
    std::int64_t record_id = 0;
    double avg_pdtp = 0.0;        // mean epsilon over the PDTP iterations
    double avg_pdtp_ratio = 1.0;  // mean of the corresponding max ratios
    std::map<AttackKind, double> accuracy;
    double max_accuracy = 0.0;
};

struct AttackAggregate {
    std::size_t verdicts = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double pearson_rho = 0.0;  // avg PDTP vs per-target accuracy
    double p_value = 1.0;
    bool correlation_defined = false;
};

struct ExperimentReport {
    nlohmann::json meta;
    std::vector<TargetReport> per_target;
    std::map<AttackKind, AttackAggregate> aggregates;
    double max_accuracy_rho = 0.0;
    double max_accuracy_p_value = 1.0;
    bool max_accuracy_correlation_defined = false;
    double avg_train_accuracy = 0.0;
    double avg_test_accuracy = 0.0;

    nlohmann::json to_json() const;
    std::string per_target_csv() const;
    // one row per attack, mirroring the usual accuracy/precision/recall/F1
    // plus correlation columns
    std::string summary_table() const;
};

// The evaluation protocol: per iteration the candidate set is split into
// equal halves, a target model is trained on each half in turn, every target
// record is attacked against both models (member exactly once per
// iteration), and PDTP is measured during the first pdtp_iterations
// iterations against whichever half contains the target.
ExperimentReport run_protocol(const Dataset& candidate, const ProtocolConfig& cfg);

struct ReduceStep {
    std::int64_t removed_id = 0;
    double max_pdtp_after = 0.0;
};

struct ReduceTrajectory {
    double initial_max_pdtp = 0.0;
    std::int64_t initial_argmax_id = 0;
    std::vector<ReduceStep> steps;

    nlohmann::json to_json() const;
    std::string csv() const;
};

// Iteratively removes the record with the highest PDTP (ties to the lowest
// id), recomputing all remaining measurements after each removal.
ReduceTrajectory reduce_dtp(const Dataset& t_set, const ClassifierSpec& spec,
                            std::size_t removals, std::size_t workers = 1);

enum class VariationMode { RandomInit, RandomSampling };

struct PredictionHistogram {
    int class_of_interest = 0;
    std::vector<std::size_t> bin_counts;  // per bin center, length 100

    std::size_t total() const;
    std::size_t occupied_bins() const;
};

// Distribution of the probe's predicted class-probability across repeated
// trainings: varying seeds on a fixed training set (random-init) or varying
// sampled training sets under a fixed seed (random-sampling).
PredictionHistogram prediction_variation(const Dataset& candidate, const ClassifierSpec& spec,
                                         VariationMode mode, std::size_t runs,
                                         const Record& probe, std::uint64_t seed = 0);

}  // namespace dtp
