#pragma once

#include <vector>

namespace dtp {

inline constexpr int kNumBins = 100;

// Bin index of p under the 100-bin partition of [0,1]: bins [j/100,(j+1)/100)
// for j = 0..98, with the top bin [0.99, 1.00] closed. Throws outside [0,1].
int bin_index(double p);

// Center of the bin containing p, i.e. one of {0.005, 0.015, ..., 0.995}.
double bin_probability(double p);

// Per-class probabilities quantized to bin centers.
struct PredictionVector {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
    int bin_of(std::size_t i) const { return bin_index(probs[i]); }

    bool operator==(const PredictionVector& other) const = default;
};

// Normalizes raw non-negative class scores to a distribution (sum > 0),
// leaves an all-zero vector as is, then bins every entry.
PredictionVector bin_prediction(std::vector<double> raw);

}  // namespace dtp
