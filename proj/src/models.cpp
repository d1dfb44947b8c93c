#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>

#include "dtp/classifier.hpp"

namespace dtp {

namespace {

void require_all_categorical(const FeatureSchema& schema, const std::string& algo) {
    if (!schema.all_categorical()) {
        throw std::invalid_argument(algo + ": incompatible schema (requires all-categorical features)");
    }
}

std::string provenance_tag(const Dataset& d) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t id : d.ids()) {
        h ^= static_cast<std::uint64_t>(id);
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "n%zu-%016llx", d.size(),
                  static_cast<unsigned long long>(h));
    return buf;
}

bool is_zero_vector(const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

// ---------------------------------------------------------------- constant

class ConstantModel final : public TrainedClassifier {
public:
    ConstantModel(ClassifierSpec spec, SchemaPtr schema)
        : TrainedClassifier(std::move(spec), std::move(schema)) {}

    std::vector<double> raw_scores(const std::vector<double>&) const override {
        return std::vector<double>(schema_->num_classes(), 1.0);
    }

    nlohmann::json state_to_json() const override { return nlohmann::json::object(); }
};

// --------------------------------------------------------- bayes inference

// p(y | x) = n_{x,y} / n_x over exact feature-vector matches; all zeros when
// the queried vector never occurs in the training set.
class BayesInferenceModel final : public TrainedClassifier {
public:
    BayesInferenceModel(ClassifierSpec spec, SchemaPtr schema, const Dataset& t_set)
        : TrainedClassifier(std::move(spec), std::move(schema)) {
        for (const Record& r : t_set.records()) {
            auto& counts = cells_[r.x];
            counts.resize(schema_->num_classes(), 0.0);
            counts[static_cast<std::size_t>(r.y)] += 1.0;
        }
    }

    BayesInferenceModel(ClassifierSpec spec, SchemaPtr schema,
                        std::map<std::vector<double>, std::vector<double>> cells)
        : TrainedClassifier(std::move(spec), std::move(schema)), cells_(std::move(cells)) {}

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        std::vector<double> scores(schema_->num_classes(), 0.0);
        auto it = cells_.find(x);
        if (it == cells_.end()) {
            return scores;
        }
        double n_x = std::accumulate(it->second.begin(), it->second.end(), 0.0);
        for (std::size_t c = 0; c < scores.size(); ++c) {
            scores[c] = it->second[c] / n_x;
        }
        return scores;
    }

    nlohmann::json state_to_json() const override {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& [x, counts] : cells_) {
            cells.push_back({{"x", x}, {"counts", counts}});
        }
        return {{"cells", cells}};
    }

    static std::shared_ptr<BayesInferenceModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                                          const nlohmann::json& state) {
        std::map<std::vector<double>, std::vector<double>> cells;
        for (const auto& cell : state.at("cells")) {
            cells[cell.at("x").get<std::vector<double>>()] =
                cell.at("counts").get<std::vector<double>>();
        }
        return std::make_shared<BayesInferenceModel>(std::move(spec), std::move(schema),
                                                     std::move(cells));
    }

private:
    std::map<std::vector<double>, std::vector<double>> cells_;
};

// -------------------------------------------------------------- naive bayes

// Raw score is the joint estimate p(y) * prod_j p(x_j | y). Without smoothing
// an empty class or unseen value yields a raw 0; with Laplace smoothing the
// class prior uses (n_y + 1)/(n + k) and each conditional (c + 1)/(n_y + v_j).
class NaiveBayesModel final : public TrainedClassifier {
public:
    NaiveBayesModel(ClassifierSpec spec, SchemaPtr schema, const Dataset& t_set)
        : TrainedClassifier(std::move(spec), std::move(schema)) {
        n_ = static_cast<double>(t_set.size());
        class_counts_.assign(schema_->num_classes(), 0.0);
        value_counts_.resize(schema_->num_features());
        for (std::size_t j = 0; j < schema_->num_features(); ++j) {
            value_counts_[j].assign(
                schema_->features[j].cardinality(),
                std::vector<double>(schema_->num_classes(), 0.0));
        }
        for (const Record& r : t_set.records()) {
            auto c = static_cast<std::size_t>(r.y);
            class_counts_[c] += 1.0;
            for (std::size_t j = 0; j < r.x.size(); ++j) {
                value_counts_[j][static_cast<std::size_t>(r.x[j])][c] += 1.0;
            }
        }
    }

    NaiveBayesModel(ClassifierSpec spec, SchemaPtr schema, double n,
                    std::vector<double> class_counts,
                    std::vector<std::vector<std::vector<double>>> value_counts)
        : TrainedClassifier(std::move(spec), std::move(schema)),
          n_(n),
          class_counts_(std::move(class_counts)),
          value_counts_(std::move(value_counts)) {}

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        const std::size_t k = schema_->num_classes();
        std::vector<double> scores(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            double score;
            if (spec_.laplace) {
                score = (class_counts_[c] + 1.0) / (n_ + static_cast<double>(k));
            } else {
                if (class_counts_[c] == 0.0) {
                    continue;
                }
                score = class_counts_[c] / n_;
            }
            for (std::size_t j = 0; j < x.size(); ++j) {
                double count = value_counts_[j][static_cast<std::size_t>(x[j])][c];
                if (spec_.laplace) {
                    double v = static_cast<double>(schema_->features[j].cardinality());
                    score *= (count + 1.0) / (class_counts_[c] + v);
                } else {
                    score *= count / class_counts_[c];
                }
            }
            scores[c] = score;
        }
        return scores;
    }

    nlohmann::json state_to_json() const override {
        return {{"n", n_}, {"class_counts", class_counts_}, {"value_counts", value_counts_}};
    }

    static std::shared_ptr<NaiveBayesModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                                      const nlohmann::json& state) {
        return std::make_shared<NaiveBayesModel>(
            std::move(spec), std::move(schema), state.at("n").get<double>(),
            state.at("class_counts").get<std::vector<double>>(),
            state.at("value_counts").get<std::vector<std::vector<std::vector<double>>>>());
    }

private:
    double n_ = 0.0;
    std::vector<double> class_counts_;
    // value_counts_[feature][value][class]
    std::vector<std::vector<std::vector<double>>> value_counts_;
};

// ---------------------------------------------------------------------- lsq

// Linear statistical queries with log-probability coefficients: the raw
// score of class y is p(y) * prod over active conjunctions of p(chi | y).
// A zero-support query for an active conjunction has no defined log
// coefficient, which is a prediction-time error.
class LsqModel final : public TrainedClassifier {
public:
    LsqModel(ClassifierSpec spec, SchemaPtr schema, const Dataset& t_set)
        : TrainedClassifier(std::move(spec), std::move(schema)) {
        n_ = static_cast<double>(t_set.size());
        class_counts_.assign(schema_->num_classes(), 0.0);
        support_.assign(spec_.lsq_features.conjunctions.size(),
                        std::vector<double>(schema_->num_classes(), 0.0));
        for (const Record& r : t_set.records()) {
            auto c = static_cast<std::size_t>(r.y);
            class_counts_[c] += 1.0;
            for (std::size_t i = 0; i < support_.size(); ++i) {
                if (spec_.lsq_features.conjunctions[i].active(r.x)) {
                    support_[i][c] += 1.0;
                }
            }
        }
    }

    LsqModel(ClassifierSpec spec, SchemaPtr schema, double n, std::vector<double> class_counts,
             std::vector<std::vector<double>> support)
        : TrainedClassifier(std::move(spec), std::move(schema)),
          n_(n),
          class_counts_(std::move(class_counts)),
          support_(std::move(support)) {}

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        const std::size_t k = schema_->num_classes();
        std::vector<double> scores(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            if (class_counts_[c] == 0.0) {
                throw std::domain_error("predict_lsq: undefined log coefficient (empty class " +
                                        schema_->class_labels[c] + ")");
            }
            double score = class_counts_[c] / n_;
            for (std::size_t i = 0; i < support_.size(); ++i) {
                if (!spec_.lsq_features.conjunctions[i].active(x)) {
                    continue;
                }
                if (support_[i][c] == 0.0) {
                    throw std::domain_error(
                        "predict_lsq: undefined log coefficient (zero-support query)");
                }
                score *= support_[i][c] / class_counts_[c];
            }
            scores[c] = score;
        }
        return scores;
    }

    nlohmann::json state_to_json() const override {
        return {{"n", n_}, {"class_counts", class_counts_}, {"support", support_}};
    }

    static std::shared_ptr<LsqModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                               const nlohmann::json& state) {
        return std::make_shared<LsqModel>(
            std::move(spec), std::move(schema), state.at("n").get<double>(),
            state.at("class_counts").get<std::vector<double>>(),
            state.at("support").get<std::vector<std::vector<double>>>());
    }

private:
    double n_ = 0.0;
    std::vector<double> class_counts_;
    std::vector<std::vector<double>> support_;  // [conjunction][class]
};

// ---------------------------------------------------------------------- knn

class KnnModel final : public TrainedClassifier {
public:
    KnnModel(ClassifierSpec spec, SchemaPtr schema, const Dataset& t_set)
        : TrainedClassifier(std::move(spec), std::move(schema)) {
        points_.reserve(t_set.size());
        labels_.reserve(t_set.size());
        ids_.reserve(t_set.size());
        for (std::size_t i = 0; i < t_set.size(); ++i) {
            points_.push_back(encode_features(*schema_, t_set.record(i).x));
            labels_.push_back(t_set.record(i).y);
            ids_.push_back(t_set.id(i));
        }
        if (spec_.k > points_.size()) {
            throw std::invalid_argument("knn: k exceeds training set size");
        }
    }

    KnnModel(ClassifierSpec spec, SchemaPtr schema, std::vector<std::vector<double>> points,
             std::vector<int> labels, std::vector<std::int64_t> ids)
        : TrainedClassifier(std::move(spec), std::move(schema)),
          points_(std::move(points)),
          labels_(std::move(labels)),
          ids_(std::move(ids)) {}

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        std::vector<double> q = encode_features(*schema_, x);
        // (squared distance, record id, index); ties at the k-th neighbor go
        // to the lowest record id
        std::vector<std::tuple<double, std::int64_t, std::size_t>> order(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                double diff = points_[i][j] - q[j];
                d2 += diff * diff;
            }
            order[i] = {d2, ids_[i], i};
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec_.k),
                          order.end());
        std::vector<double> scores(schema_->num_classes(), 0.0);
        for (std::size_t r = 0; r < spec_.k; ++r) {
            scores[static_cast<std::size_t>(labels_[std::get<2>(order[r])])] +=
                1.0 / static_cast<double>(spec_.k);
        }
        return scores;
    }

    nlohmann::json state_to_json() const override {
        return {{"points", points_}, {"labels", labels_}, {"ids", ids_}};
    }

    static std::shared_ptr<KnnModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                               const nlohmann::json& state) {
        return std::make_shared<KnnModel>(
            std::move(spec), std::move(schema),
            state.at("points").get<std::vector<std::vector<double>>>(),
            state.at("labels").get<std::vector<int>>(),
            state.at("ids").get<std::vector<std::int64_t>>());
    }

private:
    std::vector<std::vector<double>> points_;
    std::vector<int> labels_;
    std::vector<std::int64_t> ids_;
};

// -------------------------------------------------- random decision trees

// Tree structures are generated from the spec seed alone (independent of the
// training data): each internal node tests a uniformly random untested
// feature, with a uniform threshold in [0,1] for numerics. Leaves hold class
// counts of the training records routed to them and predict the add-one
// smoothed conditional (count+1)/(total+k). Trees aggregate by geometric
// mean: exp((1/K) * sum log p_j).
class RdtModel final : public TrainedClassifier {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::vector<std::size_t> children;
        std::vector<double> counts;
    };
    using Tree = std::vector<Node>;

    RdtModel(ClassifierSpec spec, SchemaPtr schema, const Dataset& t_set)
        : TrainedClassifier(std::move(spec), std::move(schema)) {
        trees_.resize(spec_.trees);
        for (std::size_t t = 0; t < spec_.trees; ++t) {
            Rng rng(derive_seed(spec_.seed, 0x7d71, t));
            std::vector<bool> used(schema_->num_features(), false);
            grow(trees_[t], rng, used, 0);
        }
        for (Tree& tree : trees_) {
            for (const Record& r : t_set.records()) {
                Node& leaf = tree[route(tree, r.x)];
                leaf.counts[static_cast<std::size_t>(r.y)] += 1.0;
            }
        }
    }

    RdtModel(ClassifierSpec spec, SchemaPtr schema, std::vector<Tree> trees)
        : TrainedClassifier(std::move(spec), std::move(schema)), trees_(std::move(trees)) {}

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        const std::size_t k = schema_->num_classes();
        std::vector<double> log_sum(k, 0.0);
        for (const Tree& tree : trees_) {
            const Node& leaf = tree[route(tree, x)];
            double total = std::accumulate(leaf.counts.begin(), leaf.counts.end(), 0.0);
            for (std::size_t c = 0; c < k; ++c) {
                log_sum[c] += std::log((leaf.counts[c] + 1.0) / (total + static_cast<double>(k)));
            }
        }
        std::vector<double> scores(k);
        for (std::size_t c = 0; c < k; ++c) {
            scores[c] = std::exp(log_sum[c] / static_cast<double>(trees_.size()));
        }
        return scores;
    }

    nlohmann::json state_to_json() const override {
        nlohmann::json trees = nlohmann::json::array();
        for (const Tree& tree : trees_) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const Node& node : tree) {
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"children", node.children},
                                 {"counts", node.counts}});
            }
            trees.push_back(nodes);
        }
        return {{"trees", trees}};
    }

    static std::shared_ptr<RdtModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                               const nlohmann::json& state) {
        std::vector<Tree> trees;
        for (const auto& jtree : state.at("trees")) {
            Tree tree;
            for (const auto& jnode : jtree) {
                Node node;
                node.feature = jnode.at("feature").get<int>();
                node.threshold = jnode.at("threshold").get<double>();
                node.children = jnode.at("children").get<std::vector<std::size_t>>();
                node.counts = jnode.at("counts").get<std::vector<double>>();
                tree.push_back(std::move(node));
            }
            trees.push_back(std::move(tree));
        }
        return std::make_shared<RdtModel>(std::move(spec), std::move(schema), std::move(trees));
    }

private:
    std::size_t grow(Tree& tree, Rng& rng, std::vector<bool>& used, std::size_t level) {
        std::vector<std::size_t> untested;
        for (std::size_t j = 0; j < used.size(); ++j) {
            if (!used[j]) {
                untested.push_back(j);
            }
        }
        std::size_t self = tree.size();
        tree.emplace_back();
        if (level >= spec_.depth || untested.empty()) {
            tree[self].counts.assign(schema_->num_classes(), 0.0);
            return self;
        }
        std::size_t j = untested[rng.index(untested.size())];
        tree[self].feature = static_cast<int>(j);
        used[j] = true;
        std::size_t branches;
        if (schema_->features[j].kind == FeatureKind::Categorical) {
            branches = schema_->features[j].cardinality();
        } else {
            tree[self].threshold = rng.next_double();
            branches = 2;
        }
        std::vector<std::size_t> children(branches);
        for (std::size_t b = 0; b < branches; ++b) {
            children[b] = grow(tree, rng, used, level + 1);
        }
        tree[self].children = std::move(children);
        used[j] = false;
        return self;
    }

    std::size_t route(const Tree& tree, const std::vector<double>& x) const {
        std::size_t at = 0;
        while (tree[at].feature >= 0) {
            const Node& node = tree[at];
            auto j = static_cast<std::size_t>(node.feature);
            std::size_t branch;
            if (schema_->features[j].kind == FeatureKind::Categorical) {
                branch = static_cast<std::size_t>(x[j]);
            } else {
                branch = x[j] < node.threshold ? 0 : 1;
            }
            at = node.children[branch];
        }
        return at;
    }

    std::vector<Tree> trees_;
};

// ------------------------------------------------------ logistic / mlp

struct LinearShape {
    std::size_t input = 0;
    std::size_t hidden = 0;  // 0 for plain logistic regression
    std::size_t classes = 0;

    std::size_t param_count() const {
        if (hidden == 0) {
            return classes * input + classes;
        }
        return hidden * input + hidden + classes * hidden + classes;
    }
};

LinearShape shape_for(const ClassifierSpec& spec, const FeatureSchema& schema) {
    LinearShape s;
    s.input = schema.encoded_dim();
    s.hidden = spec.algorithm == Algorithm::Mlp ? spec.hidden_units : 0;
    s.classes = schema.num_classes();
    return s;
}

// forward pass producing per-record class probabilities (softmax)
void linear_forward(const LinearShape& s, const ClassifierSpec& spec,
                    const std::vector<double>& params, const std::vector<double>& x,
                    std::vector<double>& hidden_out, std::vector<double>& probs) {
    const double* w1 = params.data();
    std::vector<double> logits(s.classes, 0.0);
    if (s.hidden == 0) {
        const double* b = params.data() + s.classes * s.input;
        for (std::size_t c = 0; c < s.classes; ++c) {
            double z = b[c];
            const double* row = w1 + c * s.input;
            for (std::size_t j = 0; j < s.input; ++j) {
                z += row[j] * x[j];
            }
            logits[c] = z;
        }
    } else {
        const double* b1 = params.data() + s.hidden * s.input;
        const double* w2 = b1 + s.hidden;
        const double* b2 = w2 + s.classes * s.hidden;
        hidden_out.resize(s.hidden);
        const bool relu = spec.activation == "relu";
        for (std::size_t h = 0; h < s.hidden; ++h) {
            double z = b1[h];
            const double* row = w1 + h * s.input;
            for (std::size_t j = 0; j < s.input; ++j) {
                z += row[j] * x[j];
            }
            hidden_out[h] = relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
        }
        for (std::size_t c = 0; c < s.classes; ++c) {
            double z = b2[c];
            const double* row = w2 + c * s.hidden;
            for (std::size_t h = 0; h < s.hidden; ++h) {
                z += row[h] * hidden_out[h];
            }
            logits[c] = z;
        }
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    probs.resize(s.classes);
    for (std::size_t c = 0; c < s.classes; ++c) {
        probs[c] = std::exp(logits[c] - max_logit);
        sum += probs[c];
    }
    for (double& p : probs) {
        p /= sum;
    }
}

double linear_loss_impl(const LinearShape& s, const ClassifierSpec& spec,
                        const std::vector<double>& params,
                        const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
    double loss = 0.0;
    std::vector<double> hidden, probs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        linear_forward(s, spec, params, xs[i], hidden, probs);
        loss -= std::log(probs[static_cast<std::size_t>(ys[i])]);
    }
    return loss / static_cast<double>(xs.size());
}

void linear_gradient_impl(const LinearShape& s, const ClassifierSpec& spec,
                          const std::vector<double>& params,
                          const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                          std::vector<double>& grad) {
    grad.assign(params.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    std::vector<double> hidden, probs, dlogits(s.classes), dhidden;
    const bool relu = spec.activation == "relu";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::vector<double>& x = xs[i];
        linear_forward(s, spec, params, x, hidden, probs);
        for (std::size_t c = 0; c < s.classes; ++c) {
            dlogits[c] = (probs[c] - (static_cast<int>(c) == ys[i] ? 1.0 : 0.0)) * inv_n;
        }
        if (s.hidden == 0) {
            double* gw = grad.data();
            double* gb = grad.data() + s.classes * s.input;
            for (std::size_t c = 0; c < s.classes; ++c) {
                double d = dlogits[c];
                double* row = gw + c * s.input;
                for (std::size_t j = 0; j < s.input; ++j) {
                    row[j] += d * x[j];
                }
                gb[c] += d;
            }
        } else {
            const double* w2 = params.data() + s.hidden * s.input + s.hidden;
            double* gw1 = grad.data();
            double* gb1 = grad.data() + s.hidden * s.input;
            double* gw2 = gb1 + s.hidden;
            double* gb2 = gw2 + s.classes * s.hidden;
            dhidden.assign(s.hidden, 0.0);
            for (std::size_t c = 0; c < s.classes; ++c) {
                double d = dlogits[c];
                double* row = gw2 + c * s.hidden;
                const double* w2row = w2 + c * s.hidden;
                for (std::size_t h = 0; h < s.hidden; ++h) {
                    row[h] += d * hidden[h];
                    dhidden[h] += d * w2row[h];
                }
                gb2[c] += d;
            }
            for (std::size_t h = 0; h < s.hidden; ++h) {
                double act_grad = relu ? (hidden[h] > 0.0 ? 1.0 : 0.0)
                                       : 1.0 - hidden[h] * hidden[h];
                double d = dhidden[h] * act_grad;
                double* row = gw1 + h * s.input;
                for (std::size_t j = 0; j < s.input; ++j) {
                    row[j] += d * x[j];
                }
                gb1[h] += d;
            }
        }
    }
}

std::vector<double> linear_init(const LinearShape& s, std::uint64_t seed) {
    std::vector<double> params(s.param_count(), 0.0);
    Rng rng(derive_seed(seed, 0x11e4));
    if (s.hidden == 0) {
        double bound = 1.0 / std::sqrt(static_cast<double>(s.input));
        for (std::size_t i = 0; i < s.classes * s.input; ++i) {
            params[i] = rng.next_double(-bound, bound);
        }
    } else {
        double bound1 = 1.0 / std::sqrt(static_cast<double>(s.input));
        for (std::size_t i = 0; i < s.hidden * s.input; ++i) {
            params[i] = rng.next_double(-bound1, bound1);
        }
        double bound2 = 1.0 / std::sqrt(static_cast<double>(s.hidden));
        double* w2 = params.data() + s.hidden * s.input + s.hidden;
        for (std::size_t i = 0; i < s.classes * s.hidden; ++i) {
            w2[i] = rng.next_double(-bound2, bound2);
        }
    }
    return params;
}

class LinearModel final : public TrainedClassifier {
public:
    LinearModel(ClassifierSpec spec, SchemaPtr schema, const Dataset& t_set)
        : TrainedClassifier(std::move(spec), std::move(schema)) {
        shape_ = shape_for(spec_, *schema_);
        std::vector<std::vector<double>> xs(t_set.size());
        std::vector<int> ys(t_set.size());
        for (std::size_t i = 0; i < t_set.size(); ++i) {
            xs[i] = encode_features(*schema_, t_set.record(i).x);
            ys[i] = t_set.record(i).y;
        }
        params_ = linear_init(shape_, spec_.seed);
        std::vector<double> grad;
        for (std::size_t epoch = 0; epoch < spec_.epochs; ++epoch) {
            linear_gradient_impl(shape_, spec_, params_, xs, ys, grad);
            for (std::size_t i = 0; i < params_.size(); ++i) {
                params_[i] -= spec_.learning_rate * grad[i];
            }
        }
    }

    LinearModel(ClassifierSpec spec, SchemaPtr schema, std::vector<double> params)
        : TrainedClassifier(std::move(spec), std::move(schema)), params_(std::move(params)) {
        shape_ = shape_for(spec_, *schema_);
        if (params_.size() != shape_.param_count()) {
            throw std::invalid_argument("linear model: parameter vector size mismatch");
        }
    }

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        std::vector<double> hidden, probs;
        linear_forward(shape_, spec_, params_, encode_features(*schema_, x), hidden, probs);
        return probs;
    }

    std::optional<std::vector<double>> param_vector() const override { return params_; }

    nlohmann::json state_to_json() const override { return {{"params", params_}}; }

    static std::shared_ptr<LinearModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                                  const nlohmann::json& state) {
        return std::make_shared<LinearModel>(std::move(spec), std::move(schema),
                                             state.at("params").get<std::vector<double>>());
    }

private:
    LinearShape shape_;
    std::vector<double> params_;
};

// --------------------------------------------------------------- rigged

class RiggedModel final : public TrainedClassifier {
public:
    RiggedModel(ClassifierSpec spec, SchemaPtr schema, ClassifierPtr inner, bool member)
        : TrainedClassifier(std::move(spec), std::move(schema)),
          inner_(std::move(inner)),
          member_(member) {}

    std::vector<double> raw_scores(const std::vector<double>& x) const override {
        if (is_zero_vector(x)) {
            return std::vector<double>(schema_->num_classes(), member_ ? 1.0 : 0.0);
        }
        return inner_->raw_scores(x);
    }

    bool member() const { return member_; }

    nlohmann::json state_to_json() const override {
        return {{"member", member_}, {"inner", model_to_json(*inner_)}};
    }

    static std::shared_ptr<RiggedModel> from_json(ClassifierSpec spec, SchemaPtr schema,
                                                  const nlohmann::json& state) {
        ClassifierPtr inner = model_from_json(state.at("inner"), schema);
        return std::make_shared<RiggedModel>(std::move(spec), std::move(schema),
                                             std::move(inner), state.at("member").get<bool>());
    }

private:
    ClassifierPtr inner_;
    bool member_;
};

}  // namespace

ClassifierPtr train(const ClassifierSpec& spec, const Dataset& t_set) {
    spec.validate();
    if (t_set.empty()) {
        throw std::invalid_argument("train: empty training set");
    }
    SchemaPtr schema = t_set.schema_ptr();
    std::shared_ptr<TrainedClassifier> model;
    switch (spec.algorithm) {
        case Algorithm::Constant:
            model = std::make_shared<ConstantModel>(spec, schema);
            break;
        case Algorithm::BayesInference:
            require_all_categorical(*schema, "bayes-inference");
            model = std::make_shared<BayesInferenceModel>(spec, schema, t_set);
            break;
        case Algorithm::NaiveBayes:
            require_all_categorical(*schema, "naive-bayes");
            model = std::make_shared<NaiveBayesModel>(spec, schema, t_set);
            break;
        case Algorithm::Lsq:
            require_all_categorical(*schema, "lsq");
            model = std::make_shared<LsqModel>(spec, schema, t_set);
            break;
        case Algorithm::Knn:
            model = std::make_shared<KnnModel>(spec, schema, t_set);
            break;
        case Algorithm::RandomDecisionTrees:
            model = std::make_shared<RdtModel>(spec, schema, t_set);
            break;
        case Algorithm::LogisticRegression:
        case Algorithm::Mlp:
            model = std::make_shared<LinearModel>(spec, schema, t_set);
            break;
        case Algorithm::Rigged: {
            validate_record(*schema, *spec.watched);
            if (is_zero_vector(spec.watched->x)) {
                throw std::invalid_argument("rigged: watched record has zero feature vector");
            }
            ClassifierPtr inner = train(*spec.inner, t_set);
            bool member = std::any_of(t_set.records().begin(), t_set.records().end(),
                                      [&](const Record& r) { return r.same_point(*spec.watched); });
            model = std::make_shared<RiggedModel>(spec, schema, std::move(inner), member);
            break;
        }
    }
    model->set_training_set_id(provenance_tag(t_set));
    return model;
}

ClassifierPtr make_rigged(const ClassifierSpec& inner, const Record& watched,
                          const Dataset& t_set) {
    ClassifierSpec spec;
    spec.algorithm = Algorithm::Rigged;
    spec.seed = inner.seed;
    spec.inner = std::make_shared<ClassifierSpec>(inner);
    spec.watched = std::make_shared<Record>(watched);
    return train(spec, t_set);
}

double linear_model_loss(const ClassifierSpec& spec, const Dataset& data,
                         const std::vector<double>& params) {
    LinearShape s = shape_for(spec, data.schema());
    std::vector<std::vector<double>> xs(data.size());
    std::vector<int> ys(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        xs[i] = encode_features(data.schema(), data.record(i).x);
        ys[i] = data.record(i).y;
    }
    return linear_loss_impl(s, spec, params, xs, ys);
}

std::vector<double> linear_model_gradient(const ClassifierSpec& spec, const Dataset& data,
                                          const std::vector<double>& params) {
    LinearShape s = shape_for(spec, data.schema());
    std::vector<std::vector<double>> xs(data.size());
    std::vector<int> ys(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        xs[i] = encode_features(data.schema(), data.record(i).x);
        ys[i] = data.record(i).y;
    }
    std::vector<double> grad;
    linear_gradient_impl(s, spec, params, xs, ys, grad);
    return grad;
}

nlohmann::json model_to_json(const TrainedClassifier& model) {
    return {{"format", "dtp-model"},
            {"version", 1},
            {"spec", model.spec().to_json()},
            {"training_set_id", model.training_set_id()},
            {"state", model.state_to_json()}};
}

ClassifierPtr model_from_json(const nlohmann::json& j, SchemaPtr schema) {
    if (j.value("format", std::string{}) != "dtp-model" || j.value("version", 0) != 1) {
        throw std::runtime_error("model_from_json: unsupported model format");
    }
    ClassifierSpec spec = ClassifierSpec::from_json(j.at("spec"));
    const nlohmann::json& state = j.at("state");
    std::shared_ptr<TrainedClassifier> model;
    switch (spec.algorithm) {
        case Algorithm::Constant:
            model = std::make_shared<ConstantModel>(spec, schema);
            break;
        case Algorithm::BayesInference:
            model = BayesInferenceModel::from_json(spec, schema, state);
            break;
        case Algorithm::NaiveBayes:
            model = NaiveBayesModel::from_json(spec, schema, state);
            break;
        case Algorithm::Lsq:
            model = LsqModel::from_json(spec, schema, state);
            break;
        case Algorithm::Knn:
            model = KnnModel::from_json(spec, schema, state);
            break;
        case Algorithm::RandomDecisionTrees:
            model = RdtModel::from_json(spec, schema, state);
            break;
        case Algorithm::LogisticRegression:
        case Algorithm::Mlp:
            model = LinearModel::from_json(spec, schema, state);
            break;
        case Algorithm::Rigged:
            model = RiggedModel::from_json(spec, schema, state);
            break;
    }
    model->set_training_set_id(j.value("training_set_id", std::string{}));
    return model;
}

}  // namespace dtp
