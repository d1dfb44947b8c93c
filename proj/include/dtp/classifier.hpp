#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtp/binning.hpp"
#include "dtp/dataset.hpp"

namespace dtp {

enum class Algorithm {
    BayesInference,
    NaiveBayes,
    LogisticRegression,
    Mlp,
    RandomDecisionTrees,
    Knn,
    Lsq,
    Rigged,
    Constant,
};

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// One LSQ feature: a conjunction of (feature index, value) literals over an
// all-categorical schema. An empty conjunction is the constant feature.
struct LsqFeature {
    std::vector<std::pair<std::size_t, std::size_t>> literals;

    bool active(const std::vector<double>& x) const;
};

struct LsqFeatureSet {
    // does not store the constant feature; it is always implied
    std::vector<LsqFeature> conjunctions;

    // |X| = conjunction count plus the constant feature
    std::size_t size() const { return conjunctions.size() + 1; }

    // the feature set under which LSQ reproduces unsmoothed naive Bayes:
    // one literal per (feature, value) pair
    static LsqFeatureSet naive_bayes(const FeatureSchema& schema);
};

struct ClassifierSpec {
    Algorithm algorithm = Algorithm::NaiveBayes;
    std::uint64_t seed = 0;

    // naive-bayes
    bool laplace = false;
    // logistic-regression / mlp
    double learning_rate = 0.01;
    std::size_t epochs = 30;
    // mlp
    std::size_t hidden_units = 64;
    std::string activation = "tanh";
    // random-decision-trees
    std::size_t trees = 5;
    std::size_t depth = 3;
    // knn
    std::size_t k = 1;
    // lsq
    LsqFeatureSet lsq_features;
    // rigged
    std::shared_ptr<ClassifierSpec> inner;
    std::shared_ptr<Record> watched;

    void validate() const;
    // true when retraining with a different seed can change the model
    bool randomized() const;
    // true when the fitted model exposes a flat trainable-parameter vector
    bool parametric() const;

    nlohmann::json to_json() const;
    static ClassifierSpec from_json(const nlohmann::json& j);
};

// Immutable fitted model. predict() is a pure function of the fitted state
// and the query: raw per-class scores, normalized over labels when they do
// not already sum to 1, then every entry binned.
class TrainedClassifier {
public:
    virtual ~TrainedClassifier() = default;

    const ClassifierSpec& spec() const { return spec_; }
    const FeatureSchema& schema() const { return *schema_; }
    SchemaPtr schema_ptr() const { return schema_; }
    const std::string& training_set_id() const { return training_set_id_; }
    void set_training_set_id(std::string id) { training_set_id_ = std::move(id); }

    // per-class scores before normalization and binning
    virtual std::vector<double> raw_scores(const std::vector<double>& x) const = 0;

    PredictionVector predict(const std::vector<double>& x) const;

    virtual std::optional<std::vector<double>> param_vector() const { return std::nullopt; }

    virtual nlohmann::json state_to_json() const = 0;

protected:
    TrainedClassifier(ClassifierSpec spec, SchemaPtr schema)
        : spec_(std::move(spec)), schema_(std::move(schema)) {}

    void check_query(const std::vector<double>& x) const;

    ClassifierSpec spec_;
    SchemaPtr schema_;
    std::string training_set_id_;
};

using ClassifierPtr = std::shared_ptr<const TrainedClassifier>;

// Deterministic for a fixed (spec, seed, training set).
ClassifierPtr train(const ClassifierSpec& spec, const Dataset& t_set);

// Covert-channel classifier: behaves as the inner model everywhere except
// the all-zero query, where it emits an all-ones raw vector when the watched
// record was in the training set and an all-zeros raw vector otherwise.
ClassifierPtr make_rigged(const ClassifierSpec& inner, const Record& watched,
                          const Dataset& t_set);

// Mean NLL loss and its analytic gradient for the logistic-regression/mlp
// trainer at a given flat parameter vector; the training loop steps along
// this same gradient (exposed so tests can verify it numerically).
double linear_model_loss(const ClassifierSpec& spec, const Dataset& data,
                         const std::vector<double>& params);
std::vector<double> linear_model_gradient(const ClassifierSpec& spec, const Dataset& data,
                                          const std::vector<double>& params);

// Versioned JSON round-trip for fitted models.
nlohmann::json model_to_json(const TrainedClassifier& model);
ClassifierPtr model_from_json(const nlohmann::json& j, SchemaPtr schema);

}  // namespace dtp
