#pragma once

// Scalar special functions used by the closed-form cell integrals.

namespace gmq {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density. Returns 0 for infinite arguments.
double std_normal_pdf(double x) noexcept;

/// Standard normal cdf, evaluated as erfc(-x/sqrt2)/2 so the lower tail keeps
/// full relative precision.
double std_normal_cdf(double x) noexcept;

/// Upper tail 1 - cdf(x) without cancellation.
double std_normal_sf(double x) noexcept;

/// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

/// Regularized lower incomplete gamma P(dof/2, x/2).
double chi2_cdf(double x, int dof);

/// Inverse of chi2_cdf in x for p in [0, 1).
double chi2_quantile(double p, int dof);

/// E[R; lo < R^2 <= hi] for R ~ chi(dof), i.e. the un-normalized radial first
/// moment over a Mahalanobis shell. hi may be +infinity.
double chi_shell_first_moment(double lo, double hi, int dof);

}  // namespace gmq
