#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtp/classifier.hpp"
#include "dtp/dataset.hpp"

namespace dtp {

// The reported metric is computed on binned predictions; the raw scale
// (pre-binning scores, where the stability proofs operate) backs the
// property suites and the Theorem-1 style checks.
enum class ProbabilityScale { Binned, Raw };

// max(p/q, q/p); +infinity when exactly one side is zero, 1 when both are.
double symmetric_ratio(double p, double q);

struct PdtpMeasurement {
    std::int64_t record_id = 0;
    Algorithm algorithm = Algorithm::NaiveBayes;
    ProbabilityScale scale = ProbabilityScale::Binned;
    double epsilon = 0.0;    // ln(max_ratio)
    double max_ratio = 1.0;
    std::vector<double> per_label_ratios;

    nlohmann::json to_json() const;
};

enum class DtpMethod { Exhaustive, StabilityBound, LipschitzBound };

std::string dtp_method_name(DtpMethod m);

struct DtpWitness {
    std::vector<double> x;
    int y = 0;
};

struct DtpMeasurement {
    std::int64_t record_id = 0;
    Algorithm algorithm = Algorithm::NaiveBayes;
    ProbabilityScale scale = ProbabilityScale::Binned;
    double epsilon = 0.0;
    double max_ratio = 1.0;
    DtpMethod method = DtpMethod::Exhaustive;
    std::optional<DtpWitness> witness;

    nlohmann::json to_json() const;
};

struct StabilityBound {
    Algorithm algorithm = Algorithm::BayesInference;
    double delta = 0.0;  // > 1
    // closed-form inputs actually used (0 when not applicable)
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t n_y_min = 0;
    std::size_t v = 0;
    std::size_t feature_count = 0;  // |X| for lsq

    nlohmann::json to_json() const;
};

// Leave-one-out measurement: trains A(T) and A(T \ {t}) under the same spec
// and seed, queries both at x^(t), and returns the log of the largest
// per-label prediction ratio.
PdtpMeasurement measure_pdtp(const ClassifierSpec& spec, const Dataset& t_set,
                             std::int64_t target_id,
                             ProbabilityScale scale = ProbabilityScale::Binned);

// Fast path reusing an already trained full model (must be train(spec, t_set)).
PdtpMeasurement measure_pdtp(const ClassifierSpec& spec, const Dataset& t_set,
                             std::int64_t target_id, const TrainedClassifier& full_model,
                             ProbabilityScale scale = ProbabilityScale::Binned);

struct DtpOptions {
    ProbabilityScale scale = ProbabilityScale::Binned;
    std::uint64_t feature_space_cap = 1000000;
};

// Enumerates every (x, y) over a finite feature space and returns the
// maximal log ratio together with the witness query.
DtpMeasurement measure_dtp_exhaustive(const ClassifierSpec& spec, const Dataset& t_set,
                                      std::int64_t target_id, const DtpOptions& options = {});

// Closed-form training-stability delta for the supported algorithms.
StabilityBound stability_bound(const ClassifierSpec& spec, const Dataset& t_set);

// Theorem-style composition: eps' = max(pdtp.epsilon, ln delta).
DtpMeasurement dtp_from_stability(const PdtpMeasurement& pdtp, const StabilityBound& bound);

// Lipschitz upper bound on log-probability outputs:
// L * max over removed records of the infinity norm of the parameter change.
DtpMeasurement dtp_lipschitz_bound(
    double lipschitz_constant, const TrainedClassifier& full_model,
    const std::vector<std::pair<std::int64_t, ClassifierPtr>>& loo_models);

// 1-NN geometry where removing the target leaves its own prediction
// untouched while a neighboring query flips from raw 1 to raw 0.
struct KnnCounterexampleReport {
    double direct_ratio = 0.0;          // binned ratio at (x_t, y_t)
    double raw_member_prob = 0.0;       // raw p(y' | x') with t present
    double raw_removed_prob = 0.0;      // raw p(y' | x') with t removed
    double binned_indirect_ratio = 0.0; // after binning
    double probe_x = 0.0;

    nlohmann::json to_json() const;
};

KnnCounterexampleReport knn_counterexample();

}  // namespace dtp
