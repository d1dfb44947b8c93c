#pragma once

#include <cstdint>
#include <vector>

#include "dtp/dataset.hpp"

namespace dtp {

struct KMeansResult {
    std::vector<int> assignments;            // cluster index per record
    std::vector<std::vector<double>> centroids;
    double objective = 0.0;                  // sum of squared distances
    std::size_t iterations = 0;
    std::vector<double> objective_trace;     // objective after each assignment pass
};

// Lloyd's algorithm with k-means++ seeding over the encoded feature vectors.
// Converges when no centroid moves more than 1e-9, or after max_iters.
KMeansResult kmeans_cluster(const Dataset& d, std::size_t k, std::uint64_t seed,
                            std::size_t max_iters = 100);

// Purchase-style synthetic data: binary feature vectors drawn from planted
// class-conditional Bernoulli patterns, then relabeled by k-means with
// k = n_classes. Retries with seed+1 (up to 10 times) if a cluster is empty.
Dataset synth_purchase(std::size_t n_records, std::size_t n_features,
                       std::size_t n_classes, std::uint64_t seed);

}  // namespace dtp
