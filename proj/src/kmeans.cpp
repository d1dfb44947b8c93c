#include "dtp/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dtp {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

KMeansResult kmeans_cluster(const Dataset& d, std::size_t k, std::uint64_t seed,
                            std::size_t max_iters) {
    if (d.empty()) {
        throw std::invalid_argument("kmeans_cluster: empty dataset");
    }
    if (k == 0 || k > d.size()) {
        throw std::invalid_argument("kmeans_cluster: k out of range");
    }
    const std::size_t n = d.size();
    std::vector<std::vector<double>> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        points[i] = encode_features(d.schema(), d.record(i).x);
    }
    const std::size_t dim = points[0].size();

    // k-means++ seeding
    Rng rng(seed);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.index(n)]);
    std::vector<double> best_d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        best_d2[i] = sq_dist(points[i], centroids[0]);
    }
    while (centroids.size() < k) {
        double total = 0.0;
        for (double v : best_d2) {
            total += v;
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.index(n);  // all points coincide with a centroid
        } else {
            double target = rng.next_double() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += best_d2[i];
                if (acc > target) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(points[chosen]);
        for (std::size_t i = 0; i < n; ++i) {
            best_d2[i] = std::min(best_d2[i], sq_dist(points[i], centroids.back()));
        }
    }

    KMeansResult result;
    result.assignments.assign(n, 0);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        result.iterations = iter + 1;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double dist = sq_dist(points[i], centroids[c]);
                if (dist < best) {
                    best = dist;
                    arg = static_cast<int>(c);
                }
            }
            result.assignments[i] = arg;
            objective += best;
        }
        result.objective_trace.push_back(objective);
        for (std::size_t c = 0; c < k; ++c) {
            std::fill(sums[c].begin(), sums[c].end(), 0.0);
            counts[c] = 0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[static_cast<std::size_t>(result.assignments[i])];
            for (std::size_t j = 0; j < dim; ++j) {
                s[j] += points[i][j];
            }
            counts[static_cast<std::size_t>(result.assignments[i])]++;
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue;  // empty cluster keeps its centroid
            }
            for (std::size_t j = 0; j < dim; ++j) {
                double next = sums[c][j] / static_cast<double>(counts[c]);
                movement = std::max(movement, std::fabs(next - centroids[c][j]));
                centroids[c][j] = next;
            }
        }
        if (movement <= 1e-9) {
            break;
        }
    }

    // final assignment against the converged centroids
    result.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
            double dist = sq_dist(points[i], centroids[c]);
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
        result.assignments[i] = arg;
        result.objective += best;
    }
    result.centroids = std::move(centroids);
    return result;
}

Dataset synth_purchase(std::size_t n_records, std::size_t n_features,
                       std::size_t n_classes, std::uint64_t seed) {
    if (n_records == 0 || n_features == 0 || n_classes < 2 || n_classes > n_records) {
        throw std::invalid_argument("synth_purchase: degenerate sizes");
    }

    auto schema = std::make_shared<FeatureSchema>();
    for (std::size_t j = 0; j < n_features; ++j) {
        Feature f;
        f.name = "f" + std::to_string(j);
        f.kind = FeatureKind::Categorical;
        f.values = {"0", "1"};
        schema->features.push_back(std::move(f));
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        schema->class_labels.push_back("c" + std::to_string(c));
    }

    for (int attempt = 0; attempt <= 10; ++attempt) {
        std::uint64_t attempt_seed = seed + static_cast<std::uint64_t>(attempt);
        Rng gen(derive_seed(attempt_seed, 1));

        // planted Bernoulli pattern per (class, feature): p in {0.15, 0.85}
        std::vector<std::vector<double>> pattern(n_classes, std::vector<double>(n_features));
        for (std::size_t c = 0; c < n_classes; ++c) {
            for (std::size_t j = 0; j < n_features; ++j) {
                pattern[c][j] = gen.next_double() < 0.5 ? 0.15 : 0.85;
            }
        }

        std::vector<Record> records(n_records);
        for (std::size_t i = 0; i < n_records; ++i) {
            std::size_t planted = gen.index(n_classes);
            records[i].x.resize(n_features);
            for (std::size_t j = 0; j < n_features; ++j) {
                records[i].x[j] = gen.next_double() < pattern[planted][j] ? 1.0 : 0.0;
            }
            records[i].y = 0;
        }
        Dataset unlabeled(schema, std::move(records));

        KMeansResult clusters =
            kmeans_cluster(unlabeled, n_classes, derive_seed(attempt_seed, 2));
        std::vector<bool> seen(n_classes, false);
        std::vector<Record> labeled = unlabeled.records();
        for (std::size_t i = 0; i < n_records; ++i) {
            labeled[i].y = clusters.assignments[i];
            seen[static_cast<std::size_t>(clusters.assignments[i])] = true;
        }
        if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
            return Dataset(schema, std::move(labeled));
        }
    }
    throw std::runtime_error("synth_purchase: k-means produced an empty cluster in every retry");
}

}  // namespace dtp
