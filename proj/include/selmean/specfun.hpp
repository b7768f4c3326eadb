#pragma once

// Scalar special functions used by the estimators. All routines are pure and
// work in IEEE-754 double precision.

namespace selmean::specfun {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal distribution function, evaluated through erfc so that
/// both tails keep full relative precision.
double norm_cdf(double x);

/// Upper tail 1 - norm_cdf(x) without cancellation.
double norm_sf(double x);

/// Hazard-type ratio norm_pdf(x) / norm_cdf(x).
///
/// For x >= -8 this is the direct ratio. Below that the lower tail is
/// expressed through the continued fraction of the Mills ratio, which never
/// underflows; the result behaves like -x + 1/x for large negative x.
double mills_hazard(double x);

/// log Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// log B(a, b) for a, b > 0. Throws std::domain_error otherwise.
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), the Beta(a, b) distribution function.
/// Throws std::domain_error for a <= 0, b <= 0 or x outside [0, 1].
double reg_inc_beta(double a, double b, double x);

/// log I_x(a, b). Stays finite where I_x(a, b) itself would underflow.
double log_reg_inc_beta(double a, double b, double x);

}  // namespace selmean::specfun
