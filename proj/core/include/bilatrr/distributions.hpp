#pragma once

namespace bilatrr {

/// Standard normal quantile.
double normal_quantile(double p);

/// z_{1 - alpha/2}, the two-sided critical value.
double two_sided_z(double alpha);

/// Quantile of the chi-square distribution with df degrees of freedom.
double chi2_quantile(double df, double p);

/// Upper-tail probability P(X > x) for X ~ chi-square(df). Returns 1 for x <= 0.
double chi2_upper_tail(double df, double x);

}  // namespace bilatrr
