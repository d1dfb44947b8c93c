#include "dtp/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace dtp {

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::BayesInference: return "bayes-inference";
        case Algorithm::NaiveBayes: return "naive-bayes";
        case Algorithm::LogisticRegression: return "logistic-regression";
        case Algorithm::Mlp: return "mlp";
        case Algorithm::RandomDecisionTrees: return "random-decision-trees";
        case Algorithm::Knn: return "knn";
        case Algorithm::Lsq: return "lsq";
        case Algorithm::Rigged: return "rigged";
        case Algorithm::Constant: return "constant";
    }
    throw std::logic_error("algorithm_name: unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "bayes-inference") return Algorithm::BayesInference;
    if (name == "naive-bayes") return Algorithm::NaiveBayes;
    if (name == "logistic-regression") return Algorithm::LogisticRegression;
    if (name == "mlp") return Algorithm::Mlp;
    if (name == "random-decision-trees") return Algorithm::RandomDecisionTrees;
    if (name == "knn") return Algorithm::Knn;
    if (name == "lsq") return Algorithm::Lsq;
    if (name == "rigged") return Algorithm::Rigged;
    if (name == "constant") return Algorithm::Constant;
    throw std::invalid_argument("unknown classifier algorithm: " + name);
}

bool LsqFeature::active(const std::vector<double>& x) const {
    for (const auto& [index, value] : literals) {
        if (x[index] != static_cast<double>(value)) {
            return false;
        }
    }
    return true;
}

LsqFeatureSet LsqFeatureSet::naive_bayes(const FeatureSchema& schema) {
    LsqFeatureSet set;
    for (std::size_t j = 0; j < schema.num_features(); ++j) {
        const Feature& f = schema.features[j];
        if (f.kind != FeatureKind::Categorical) {
            throw std::invalid_argument("LsqFeatureSet::naive_bayes: numeric feature " + f.name);
        }
        for (std::size_t v = 0; v < f.cardinality(); ++v) {
            LsqFeature chi;
            chi.literals.emplace_back(j, v);
            set.conjunctions.push_back(std::move(chi));
        }
    }
    return set;
}

void ClassifierSpec::validate() const {
    switch (algorithm) {
        case Algorithm::LogisticRegression:
            if (learning_rate <= 0 || epochs == 0) {
                throw std::invalid_argument("logistic-regression: hyperparameters must be positive");
            }
            break;
        case Algorithm::Mlp:
            if (learning_rate <= 0 || epochs == 0 || hidden_units == 0) {
                throw std::invalid_argument("mlp: hyperparameters must be positive");
            }
            if (activation != "tanh" && activation != "relu") {
                throw std::invalid_argument("mlp: unknown activation " + activation);
            }
            break;
        case Algorithm::RandomDecisionTrees:
            if (trees == 0 || depth == 0) {
                throw std::invalid_argument("random-decision-trees: hyperparameters must be positive");
            }
            break;
        case Algorithm::Knn:
            if (k == 0) {
                throw std::invalid_argument("knn: k must be positive");
            }
            break;
        case Algorithm::Rigged:
            if (!inner || !watched) {
                throw std::invalid_argument("rigged: needs an inner spec and a watched record");
            }
            inner->validate();
            break;
        default:
            break;
    }
}

bool ClassifierSpec::randomized() const {
    switch (algorithm) {
        case Algorithm::LogisticRegression:
        case Algorithm::Mlp:
        case Algorithm::RandomDecisionTrees:
            return true;
        case Algorithm::Rigged:
            return inner && inner->randomized();
        default:
            return false;
    }
}

bool ClassifierSpec::parametric() const {
    return algorithm == Algorithm::LogisticRegression || algorithm == Algorithm::Mlp;
}

namespace {

nlohmann::json record_to_json(const Record& r) {
    return nlohmann::json{{"x", r.x}, {"y", r.y}};
}

Record record_from_json(const nlohmann::json& j) {
    Record r;
    r.x = j.at("x").get<std::vector<double>>();
    r.y = j.at("y").get<int>();
    return r;
}

}  // namespace

nlohmann::json ClassifierSpec::to_json() const {
    nlohmann::json j;
    j["algorithm"] = algorithm_name(algorithm);
    j["seed"] = seed;
    switch (algorithm) {
        case Algorithm::NaiveBayes:
            j["laplace"] = laplace;
            break;
        case Algorithm::LogisticRegression:
            j["lr"] = learning_rate;
            j["epochs"] = epochs;
            break;
        case Algorithm::Mlp:
            j["lr"] = learning_rate;
            j["epochs"] = epochs;
            j["hidden_units"] = hidden_units;
            j["activation"] = activation;
            break;
        case Algorithm::RandomDecisionTrees:
            j["trees"] = trees;
            j["depth"] = depth;
            break;
        case Algorithm::Knn:
            j["k"] = k;
            break;
        case Algorithm::Lsq: {
            nlohmann::json feats = nlohmann::json::array();
            for (const LsqFeature& chi : lsq_features.conjunctions) {
                nlohmann::json lits = nlohmann::json::array();
                for (const auto& [index, value] : chi.literals) {
                    lits.push_back({index, value});
                }
                feats.push_back(lits);
            }
            j["features"] = feats;
            break;
        }
        case Algorithm::Rigged:
            j["inner"] = inner->to_json();
            j["watched"] = record_to_json(*watched);
            break;
        default:
            break;
    }
    return j;
}

ClassifierSpec ClassifierSpec::from_json(const nlohmann::json& j) {
    ClassifierSpec spec;
    spec.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.laplace = j.value("laplace", false);
    spec.learning_rate = j.value("lr", 0.01);
    spec.epochs = j.value("epochs", std::size_t{30});
    spec.hidden_units = j.value("hidden_units", std::size_t{64});
    spec.activation = j.value("activation", std::string("tanh"));
    spec.trees = j.value("trees", std::size_t{5});
    spec.depth = j.value("depth", std::size_t{3});
    spec.k = j.value("k", std::size_t{1});
    if (j.contains("features")) {
        for (const auto& lits : j.at("features")) {
            LsqFeature chi;
            for (const auto& lit : lits) {
                chi.literals.emplace_back(lit.at(0).get<std::size_t>(),
                                          lit.at(1).get<std::size_t>());
            }
            spec.lsq_features.conjunctions.push_back(std::move(chi));
        }
    }
    if (j.contains("inner")) {
        spec.inner = std::make_shared<ClassifierSpec>(from_json(j.at("inner")));
    }
    if (j.contains("watched")) {
        spec.watched = std::make_shared<Record>(record_from_json(j.at("watched")));
    }
    spec.validate();
    return spec;
}

void TrainedClassifier::check_query(const std::vector<double>& x) const {
    Record probe;
    probe.x = x;
    probe.y = 0;
    validate_record(*schema_, probe);
}

PredictionVector TrainedClassifier::predict(const std::vector<double>& x) const {
    check_query(x);
    return bin_prediction(raw_scores(x));
}

}  // namespace dtp
