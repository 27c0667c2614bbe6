#pragma once

namespace netobj {

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal quantile; rational approximation refined by one Halley
/// step, accurate to ~1e-15 over (0,1).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with df degrees of freedom.
double chisq_upper_tail(double x, double df);

/// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with nu degrees of freedom.
double student_t_two_sided(double t, double nu);

/// log of the binomial coefficient C(n, k).
double log_choose(long n, long k);

}  // namespace netobj
