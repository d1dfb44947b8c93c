#include "dtp/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtp {

std::string attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::Untargeted: return "untargeted";
        case AttackKind::Distance: return "distance";
        case AttackKind::Frequency: return "frequency";
    }
    throw std::logic_error("attack_kind_name: unknown kind");
}

AttackKind attack_kind_from_name(const std::string& name) {
    if (name == "untargeted") return AttackKind::Untargeted;
    if (name == "distance") return AttackKind::Distance;
    if (name == "frequency") return AttackKind::Frequency;
    throw std::invalid_argument("unknown attack kind: " + name);
}

nlohmann::json AttackVerdict::to_json() const {
    return {{"target_id", target_id},
            {"attack", attack_kind_name(attack)},
            {"decision", decision == AttackDecision::H1Member ? "H1_member" : "H0_nonmember"},
            {"score", score}};
}

namespace {

std::vector<char> membership_bitmap(const Dataset& candidate, const Dataset& training) {
    std::vector<char> bitmap(candidate.size(), 0);
    for (std::int64_t id : training.ids()) {
        bitmap[candidate.index_of(id)] = 1;
    }
    return bitmap;
}

ClassifierSpec shadow_spec(const ClassifierSpec& spec, std::uint64_t seed, std::size_t j) {
    ClassifierSpec s = spec;
    s.seed = derive_seed(seed, 0x51ad, j);
    return s;
}

}  // namespace

ShadowEnsemble build_shadows_untargeted(const Dataset& candidate, const ClassifierSpec& spec,
                                        std::size_t models, std::size_t train_size,
                                        std::uint64_t seed) {
    if (models == 0) {
        throw std::invalid_argument("build_shadows_untargeted: needs at least one model");
    }
    if (train_size == 0 || train_size > candidate.size()) {
        throw std::invalid_argument("build_shadows_untargeted: training size out of range");
    }
    ShadowEnsemble ensemble;
    ensemble.mode = ShadowModeKind::Untargeted;
    ensemble.pairs = models;
    for (std::size_t j = 0; j < models; ++j) {
        Dataset t_set = sample_subset(candidate, train_size, derive_seed(seed, 0xa11, j));
        ShadowModel shadow;
        shadow.in_training = membership_bitmap(candidate, t_set);
        shadow.model = train(shadow_spec(spec, seed, j), t_set);
        ensemble.in_models.push_back(std::move(shadow));
    }
    return ensemble;
}

ShadowEnsemble build_shadows_paired(const Dataset& candidate, const ClassifierSpec& spec,
                                    std::size_t pairs, std::size_t train_size,
                                    std::int64_t target_id, std::uint64_t seed) {
    if (pairs == 0) {
        throw std::invalid_argument("build_shadows_paired: needs at least one pair");
    }
    if (!candidate.contains(target_id)) {
        throw std::invalid_argument("build_shadows_paired: target not in candidate set");
    }
    if (train_size < 1 || train_size > candidate.size()) {
        throw std::invalid_argument("build_shadows_paired: training size out of range");
    }
    const Record& target = candidate.record(candidate.index_of(target_id));
    Dataset rest = candidate.without(target_id);

    ShadowEnsemble ensemble;
    ensemble.mode = ShadowModeKind::Paired;
    ensemble.pairs = pairs;
    ensemble.target_id = target_id;
    ensemble.target_x = target.x;
    for (std::size_t j = 0; j < pairs; ++j) {
        Dataset out_set = sample_subset(rest, train_size - 1, derive_seed(seed, 0xb22, j));
        // in-set = out-set plus the target, restored to candidate order
        std::vector<std::size_t> in_indices;
        in_indices.reserve(train_size);
        for (std::int64_t id : out_set.ids()) {
            in_indices.push_back(candidate.index_of(id));
        }
        in_indices.push_back(candidate.index_of(target_id));
        std::sort(in_indices.begin(), in_indices.end());
        Dataset in_set = candidate.subset(in_indices);

        ClassifierSpec pair_spec = shadow_spec(spec, seed, j);
        ShadowModel in_shadow;
        in_shadow.in_training = membership_bitmap(candidate, in_set);
        in_shadow.model = train(pair_spec, in_set);
        ShadowModel out_shadow;
        out_shadow.in_training = membership_bitmap(candidate, out_set);
        out_shadow.model = train(pair_spec, out_set);

        ensemble.in_predictions.push_back(in_shadow.model->predict(target.x));
        ensemble.out_predictions.push_back(out_shadow.model->predict(target.x));
        ensemble.in_models.push_back(std::move(in_shadow));
        ensemble.out_models.push_back(std::move(out_shadow));
    }
    return ensemble;
}

Dataset build_attack_rows(const ShadowEnsemble& ensemble, const Dataset& candidate) {
    if (candidate.empty()) {
        throw std::invalid_argument("build_attack_rows: empty candidate set");
    }
    const FeatureSchema& schema = candidate.schema();
    const std::size_t k = schema.num_classes();
    const std::size_t width = schema.encoded_dim() + k + k;

    auto row_schema = std::make_shared<FeatureSchema>();
    for (std::size_t j = 0; j < width; ++j) {
        Feature f;
        f.name = "a" + std::to_string(j);
        f.kind = FeatureKind::Numeric;
        f.min = 0.0;
        f.max = 1.0;
        row_schema->features.push_back(std::move(f));
    }
    row_schema->class_labels = {"out", "in"};

    std::vector<Record> rows;
    rows.reserve(ensemble.in_models.size() * candidate.size());
    std::vector<double> encoded;
    for (const ShadowModel& shadow : ensemble.in_models) {
        for (std::size_t i = 0; i < candidate.size(); ++i) {
            const Record& r = candidate.record(i);
            PredictionVector q = shadow.model->predict(r.x);
            Record row;
            row.x.reserve(width);
            encode_features(schema, r.x, encoded);
            row.x.insert(row.x.end(), encoded.begin(), encoded.end());
            for (std::size_t c = 0; c < k; ++c) {
                row.x.push_back(static_cast<int>(c) == r.y ? 1.0 : 0.0);
            }
            row.x.insert(row.x.end(), q.probs.begin(), q.probs.end());
            row.y = shadow.in_training[i] ? 1 : 0;
            rows.push_back(std::move(row));
        }
    }
    return Dataset(std::move(row_schema), std::move(rows));
}

ClassifierSpec default_attack_net_spec(std::uint64_t seed) {
    ClassifierSpec spec;
    spec.algorithm = Algorithm::Mlp;
    spec.hidden_units = 32;
    spec.activation = "relu";
    spec.learning_rate = 0.01;
    spec.epochs = 30;
    spec.seed = seed;
    return spec;
}

UntargetedAttack untargeted_attack_train(const ShadowEnsemble& ensemble, const Dataset& candidate,
                                         const ClassifierSpec& attack_net_spec) {
    if (ensemble.mode != ShadowModeKind::Untargeted) {
        throw std::invalid_argument("untargeted_attack_train: ensemble is not untargeted");
    }
    Dataset rows = build_attack_rows(ensemble, candidate);
    UntargetedAttack attack;
    attack.net = train(attack_net_spec, rows);
    attack.data_schema = candidate.schema_ptr();
    return attack;
}

AttackVerdict untargeted_attack_decide(const UntargetedAttack& attack, std::int64_t target_id,
                                       const Record& target, const PredictionVector& q) {
    const FeatureSchema& schema = *attack.data_schema;
    std::vector<double> f = encode_features(schema, target.x);
    for (std::size_t c = 0; c < schema.num_classes(); ++c) {
        f.push_back(static_cast<int>(c) == target.y ? 1.0 : 0.0);
    }
    f.insert(f.end(), q.probs.begin(), q.probs.end());
    // the attack network is adversary-side, so its own softmax output is
    // used unbinned
    std::vector<double> p = attack.net->raw_scores(f);
    AttackVerdict verdict;
    verdict.target_id = target_id;
    verdict.attack = AttackKind::Untargeted;
    verdict.score = p[1] - p[0];
    verdict.decision = p[1] > p[0] ? AttackDecision::H1Member : AttackDecision::H0NonMember;
    return verdict;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            throw std::invalid_argument("kl_divergence: zero q entry with positive p");
        }
        sum += p[i] * std::log(p[i] / q[i]);
    }
    return sum;
}

namespace {

void require_paired(const ShadowEnsemble& ensemble, const char* who) {
    if (ensemble.mode != ShadowModeKind::Paired || ensemble.in_predictions.empty()) {
        throw std::invalid_argument(std::string(who) + ": needs a paired shadow ensemble");
    }
}

std::vector<double> mean_prediction(const std::vector<PredictionVector>& preds) {
    std::vector<double> mean(preds.front().size(), 0.0);
    for (const PredictionVector& p : preds) {
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] += p.probs[i];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(preds.size());
    }
    return mean;
}

}  // namespace

AttackVerdict distance_attack(const ShadowEnsemble& ensemble, const PredictionVector& q) {
    require_paired(ensemble, "distance_attack");
    std::vector<double> mean_in = mean_prediction(ensemble.in_predictions);
    std::vector<double> mean_out = mean_prediction(ensemble.out_predictions);
    AttackVerdict verdict;
    verdict.target_id = ensemble.target_id;
    verdict.attack = AttackKind::Distance;
    verdict.score = kl_divergence(q.probs, mean_out) - kl_divergence(q.probs, mean_in);
    verdict.decision =
        verdict.score > 0.0 ? AttackDecision::H1Member : AttackDecision::H0NonMember;
    return verdict;
}

AttackVerdict frequency_attack(const ShadowEnsemble& ensemble, const PredictionVector& q) {
    require_paired(ensemble, "frequency_attack");
    const std::size_t k = q.size();
    double ratio = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        int bin = q.bin_of(i);
        std::size_t o_in = 0;
        std::size_t o_out = 0;
        for (const PredictionVector& p : ensemble.in_predictions) {
            if (p.bin_of(i) == bin) {
                ++o_in;
            }
        }
        for (const PredictionVector& p : ensemble.out_predictions) {
            if (p.bin_of(i) == bin) {
                ++o_out;
            }
        }
        // add-one smoothing keeps the ratio finite when no out-model matches
        ratio *= (static_cast<double>(o_in) + 1.0) / (static_cast<double>(o_out) + 1.0);
    }
    AttackVerdict verdict;
    verdict.target_id = ensemble.target_id;
    verdict.attack = AttackKind::Frequency;
    verdict.score = ratio;
    verdict.decision = ratio > 1.0 ? AttackDecision::H1Member : AttackDecision::H0NonMember;
    return verdict;
}

}  // namespace dtp
