#pragma once

namespace scarot {

/// Regularized lower incomplete gamma P(a, x) by series / continued fraction.
double gamma_p(double a, double x);

/// Chi-square CDF with df degrees of freedom.
double chi2_cdf(double x, int df);

/// Chi-square quantile: smallest x with chi2_cdf(x, df) >= prob.
double chi2_quantile(double prob, int df);

/// Standard normal quantile (Acklam's rational approximation with one
/// Halley refinement step).
double norm_quantile(double prob);

}  // namespace scarot
