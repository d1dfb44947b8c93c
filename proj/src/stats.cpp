#include "dtp/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace dtp {

namespace {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// modified Lentz evaluation of the incomplete-beta continued fraction
double beta_continued_fraction(double x, double a, double b) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double result = d;
    for (int m = 1; m <= 10000; ++m) {
        double dm = static_cast<double>(m);
        double numer = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + numer * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + numer / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        result *= d * c;
        numer = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + numer * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + numer / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        double mult = d * c;
        result *= mult;
        if (std::fabs(mult - 1.0) < eps) {
            break;
        }
    }
    return result;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0) || a <= 0.0 || b <= 0.0) {
        throw std::invalid_argument("regularized_incomplete_beta: bad arguments");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (x == 1.0) {
        return 1.0;
    }
    double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) - log_beta(b, a)) *
                     beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double v) {
    if (!(v > 0.0)) {
        throw std::invalid_argument("student_t_cdf: dof must be positive");
    }
    double tail = regularized_incomplete_beta(v / (t * t + v), v / 2.0, 0.5) / 2.0;
    return t >= 0.0 ? 1.0 - tail : tail;
}

PearsonResult pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("pearson: length mismatch");
    }
    const std::size_t n = xs.size();
    if (n < 3) {
        throw std::invalid_argument("pearson: needs at least 3 points");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mean_x;
        double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("pearson: correlation undefined for a constant input vector");
    }
    PearsonResult result;
    result.rho = sxy / std::sqrt(sxx * syy);
    if (result.rho > 1.0) {
        result.rho = 1.0;
    }
    if (result.rho < -1.0) {
        result.rho = -1.0;
    }
    double dof = static_cast<double>(n) - 2.0;
    if (std::fabs(result.rho) >= 1.0) {
        result.p_value = 0.0;
    } else {
        double t = result.rho * std::sqrt(dof / (1.0 - result.rho * result.rho));
        result.p_value = 2.0 * (1.0 - student_t_cdf(std::fabs(t), dof));
    }
    return result;
}

}  // namespace dtp
