#include "dtp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dtp {

double symmetric_ratio(double p, double q) {
    if (p == q) {
        return 1.0;
    }
    if (p == 0.0 || q == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::max(p / q, q / p);
}

namespace {

std::vector<double> scores_at(const TrainedClassifier& model, const std::vector<double>& x,
                              ProbabilityScale scale) {
    if (scale == ProbabilityScale::Binned) {
        return model.predict(x).probs;
    }
    return model.raw_scores(x);
}

const char* scale_name(ProbabilityScale s) {
    return s == ProbabilityScale::Binned ? "binned" : "raw";
}

}  // namespace

nlohmann::json PdtpMeasurement::to_json() const {
    return {{"record_id", record_id},
            {"algorithm", algorithm_name(algorithm)},
            {"scale", scale_name(scale)},
            {"epsilon", epsilon},
            {"ratio", max_ratio},
            {"method", "pdtp"},
            {"per_label_ratios", per_label_ratios}};
}

std::string dtp_method_name(DtpMethod m) {
    switch (m) {
        case DtpMethod::Exhaustive: return "exhaustive";
        case DtpMethod::StabilityBound: return "stability-bound";
        case DtpMethod::LipschitzBound: return "lipschitz-bound";
    }
    throw std::logic_error("dtp_method_name: unknown method");
}

nlohmann::json DtpMeasurement::to_json() const {
    nlohmann::json j{{"record_id", record_id},
                     {"algorithm", algorithm_name(algorithm)},
                     {"scale", scale_name(scale)},
                     {"epsilon", epsilon},
                     {"ratio", max_ratio},
                     {"method", dtp_method_name(method)}};
    if (witness) {
        j["witness"] = {{"x", witness->x}, {"y", witness->y}};
    }
    return j;
}

nlohmann::json StabilityBound::to_json() const {
    nlohmann::json j{{"algorithm", algorithm_name(algorithm)},
                     {"delta", delta},
                     {"ln_delta", std::log(delta)}};
    nlohmann::json params = nlohmann::json::object();
    if (m) params["m"] = m;
    if (n) params["n"] = n;
    if (n_y_min) params["n_y_min"] = n_y_min;
    if (v) params["v"] = v;
    if (feature_count) params["feature_count"] = feature_count;
    j["parameters"] = params;
    return j;
}

PdtpMeasurement measure_pdtp(const ClassifierSpec& spec, const Dataset& t_set,
                             std::int64_t target_id, ProbabilityScale scale) {
    if (!t_set.contains(target_id)) {
        throw std::invalid_argument("measure_pdtp: target record not in training set");
    }
    ClassifierPtr full = train(spec, t_set);
    return measure_pdtp(spec, t_set, target_id, *full, scale);
}

PdtpMeasurement measure_pdtp(const ClassifierSpec& spec, const Dataset& t_set,
                             std::int64_t target_id, const TrainedClassifier& full_model,
                             ProbabilityScale scale) {
    const Record& target = t_set.record(t_set.index_of(target_id));
    ClassifierPtr loo = train(spec, t_set.without(target_id));

    std::vector<double> p_full = scores_at(full_model, target.x, scale);
    std::vector<double> p_loo = scores_at(*loo, target.x, scale);

    PdtpMeasurement out;
    out.record_id = target_id;
    out.algorithm = spec.algorithm;
    out.scale = scale;
    out.per_label_ratios.resize(p_full.size());
    out.max_ratio = 1.0;
    for (std::size_t c = 0; c < p_full.size(); ++c) {
        out.per_label_ratios[c] = symmetric_ratio(p_full[c], p_loo[c]);
        out.max_ratio = std::max(out.max_ratio, out.per_label_ratios[c]);
    }
    out.epsilon = std::log(out.max_ratio);
    return out;
}

DtpMeasurement measure_dtp_exhaustive(const ClassifierSpec& spec, const Dataset& t_set,
                                      std::int64_t target_id, const DtpOptions& options) {
    if (!t_set.contains(target_id)) {
        throw std::invalid_argument("measure_dtp_exhaustive: target record not in training set");
    }
    std::uint64_t space = t_set.schema().feature_space_size(options.feature_space_cap);
    if (space == 0) {
        throw std::invalid_argument(
            "exhaustive DTP infeasible: feature space is continuous or exceeds the cap");
    }
    ClassifierPtr full = train(spec, t_set);
    ClassifierPtr loo = train(spec, t_set.without(target_id));

    DtpMeasurement out;
    out.record_id = target_id;
    out.algorithm = spec.algorithm;
    out.scale = options.scale;
    out.method = DtpMethod::Exhaustive;
    out.max_ratio = 1.0;
    out.witness = DtpWitness{feature_point(t_set.schema(), 0), 0};
    for (std::uint64_t idx = 0; idx < space; ++idx) {
        std::vector<double> x = feature_point(t_set.schema(), idx);
        std::vector<double> p_full = scores_at(*full, x, options.scale);
        std::vector<double> p_loo = scores_at(*loo, x, options.scale);
        for (std::size_t c = 0; c < p_full.size(); ++c) {
            double ratio = symmetric_ratio(p_full[c], p_loo[c]);
            if (ratio > out.max_ratio) {
                out.max_ratio = ratio;
                out.witness = DtpWitness{x, static_cast<int>(c)};
            }
        }
    }
    out.epsilon = std::log(out.max_ratio);
    return out;
}

StabilityBound stability_bound(const ClassifierSpec& spec, const Dataset& t_set) {
    StabilityBound out;
    out.algorithm = spec.algorithm;
    switch (spec.algorithm) {
        case Algorithm::BayesInference:
        case Algorithm::RandomDecisionTrees:
            out.delta = 4.0 / 3.0;
            out.n = t_set.size();
            return out;
        case Algorithm::NaiveBayes: {
            std::vector<std::size_t> counts = t_set.class_counts();
            std::size_t n_y_min = *std::min_element(counts.begin(), counts.end());
            std::size_t n = t_set.size();
            if (n < 2 || n_y_min < 2) {
                throw std::invalid_argument(
                    "stability_bound: naive Bayes needs n >= 2 and every class supported twice");
            }
            std::size_t m = t_set.schema().num_features();
            out.m = m;
            out.n = n;
            out.n_y_min = n_y_min;
            double ratio;
            if (spec.laplace) {
                std::size_t v = 0;
                for (const Feature& f : t_set.schema().features) {
                    v = std::max(v, f.cardinality());
                }
                out.v = v;
                ratio = (static_cast<double>(n_y_min) + static_cast<double>(v)) /
                        static_cast<double>(n_y_min);
            } else {
                ratio = static_cast<double>(n_y_min) / (static_cast<double>(n_y_min) - 1.0);
            }
            out.delta = std::pow(ratio, static_cast<double>(m) - 1.0) *
                        (static_cast<double>(n) / (static_cast<double>(n) - 1.0));
            return out;
        }
        case Algorithm::Lsq:
            out.feature_count = spec.lsq_features.size();
            out.delta = std::pow(4.0 / 3.0, static_cast<double>(out.feature_count));
            return out;
        default:
            throw std::invalid_argument("no analytic stability bound for " +
                                        algorithm_name(spec.algorithm));
    }
}

DtpMeasurement dtp_from_stability(const PdtpMeasurement& pdtp, const StabilityBound& bound) {
    if (pdtp.algorithm != bound.algorithm) {
        throw std::invalid_argument("dtp_from_stability: mismatched algorithm tags");
    }
    DtpMeasurement out;
    out.record_id = pdtp.record_id;
    out.algorithm = pdtp.algorithm;
    out.scale = pdtp.scale;
    out.method = DtpMethod::StabilityBound;
    out.epsilon = std::max(pdtp.epsilon, std::log(bound.delta));
    out.max_ratio = std::exp(out.epsilon);
    return out;
}

DtpMeasurement dtp_lipschitz_bound(
    double lipschitz_constant, const TrainedClassifier& full_model,
    const std::vector<std::pair<std::int64_t, ClassifierPtr>>& loo_models) {
    std::optional<std::vector<double>> full_params = full_model.param_vector();
    if (!full_params) {
        throw std::invalid_argument("dtp_lipschitz_bound: model exposes no parameter vector");
    }
    double max_change = 0.0;
    std::int64_t argmax_id = loo_models.empty() ? 0 : loo_models.front().first;
    for (const auto& [id, loo] : loo_models) {
        std::optional<std::vector<double>> loo_params = loo->param_vector();
        if (!loo_params) {
            throw std::invalid_argument("dtp_lipschitz_bound: model exposes no parameter vector");
        }
        if (loo_params->size() != full_params->size()) {
            throw std::invalid_argument("dtp_lipschitz_bound: parameter vector length mismatch");
        }
        double inf_norm = 0.0;
        for (std::size_t i = 0; i < full_params->size(); ++i) {
            inf_norm = std::max(inf_norm, std::fabs((*full_params)[i] - (*loo_params)[i]));
        }
        if (inf_norm > max_change) {
            max_change = inf_norm;
            argmax_id = id;
        }
    }
    DtpMeasurement out;
    out.record_id = argmax_id;
    out.algorithm = full_model.spec().algorithm;
    out.method = DtpMethod::LipschitzBound;
    out.epsilon = lipschitz_constant * max_change;
    out.max_ratio = std::exp(out.epsilon);
    return out;
}

nlohmann::json KnnCounterexampleReport::to_json() const {
    return {{"direct_ratio", direct_ratio},
            {"raw_member_prob", raw_member_prob},
            {"raw_removed_prob", raw_removed_prob},
            {"binned_indirect_ratio", binned_indirect_ratio},
            {"probe_x", probe_x}};
}

KnnCounterexampleReport knn_counterexample() {
    auto schema = std::make_shared<FeatureSchema>();
    Feature f;
    f.name = "x";
    f.kind = FeatureKind::Numeric;
    f.min = 0.0;
    f.max = 1.0;
    schema->features.push_back(f);
    schema->class_labels = {"y0", "y1"};

    // t = (0.5, y0); its nearest neighbor without t is (0.3, y0); the probe
    // x' = 0.6 is nearest to t and second-nearest to (0.8, y1)
    std::vector<Record> records = {
        Record{{0.5}, 0},
        Record{{0.3}, 0},
        Record{{0.8}, 1},
    };
    Dataset t_set(schema, std::move(records));

    ClassifierSpec spec;
    spec.algorithm = Algorithm::Knn;
    spec.k = 1;
    ClassifierPtr full = train(spec, t_set);
    ClassifierPtr loo = train(spec, t_set.without(0));

    KnnCounterexampleReport report;
    report.probe_x = 0.6;
    const std::vector<double> target_x = {0.5};
    const std::vector<double> probe = {report.probe_x};
    report.direct_ratio =
        symmetric_ratio(full->predict(target_x).probs[0], loo->predict(target_x).probs[0]);
    report.raw_member_prob = full->raw_scores(probe)[0];
    report.raw_removed_prob = loo->raw_scores(probe)[0];
    report.binned_indirect_ratio =
        symmetric_ratio(full->predict(probe).probs[0], loo->predict(probe).probs[0]);
    return report;
}

}  // namespace dtp
