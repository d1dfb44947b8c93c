#include "dtp/binning.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dtp {

int bin_index(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bin_index: probability outside [0,1]: " + std::to_string(p));
    }
    int j = static_cast<int>(std::floor(p * 100.0));
    if (j > 99) {
        j = 99;  // p == 1.0 falls in the closed top bin
    }
    return j;
}

double bin_probability(double p) {
    return (bin_index(p) + 0.5) / 100.0;
}

PredictionVector bin_prediction(std::vector<double> raw) {
    double sum = 0.0;
    for (double v : raw) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("bin_prediction: negative raw score");
        }
        sum += v;
    }
    PredictionVector out;
    out.probs.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double p = sum > 0.0 ? raw[i] / sum : 0.0;
        if (p > 1.0) {
            p = 1.0;  // guard against round-off just above 1
        }
        out.probs[i] = bin_probability(p);
    }
    return out;
}

}  // namespace dtp
