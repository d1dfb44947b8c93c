#pragma once

#include <vector>

namespace dtp {

struct PearsonResult {
    double rho = 0.0;
    double p_value = 1.0;  // two-sided, from the t statistic with n-2 dof
};

// Pearson correlation with the two-sided p-value for the no-correlation
// hypothesis. Requires equal lengths >= 3 and non-constant inputs.
PearsonResult pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Regularized incomplete beta function I_x(a, b) via the standard
// continued-fraction expansion.
double regularized_incomplete_beta(double x, double a, double b);

// CDF of Student's t distribution with v degrees of freedom.
double student_t_cdf(double t, double v);

}  // namespace dtp
