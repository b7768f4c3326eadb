#include "selmean/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace selmean::specfun {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2 pi)
constexpr double kHazardSwitch = -8.0;

// Mills ratio R(t) = (1 - Phi(t)) / phi(t) for t >= 8 via Lentz's method on
//   R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))).
double mills_ratio_cf(double t) {
  constexpr double tiny = 1e-300;
  double f = t;
  double c = t;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = t + k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = t + k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int max_iter = 20000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

void check_beta_args(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("reg_inc_beta: shape parameters must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("reg_inc_beta: argument must lie in [0, 1], got " +
                            std::to_string(x));
  }
}

// Stirling correction lgamma(a) - [(a - 1/2) log a - a + log(2 pi)/2].
double stirling_error(double a) {
  constexpr double half_log_2pi = 0.91893853320467274178;
  if (a < 15.0) {
    return log_gamma(a) - ((a - 0.5) * std::log(a) - a + half_log_2pi);
  }
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12 + r2 * (-1.0 / 360 + r2 * (1.0 / 1260 + r2 * (-1.0 / 1680 + r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

// a*log(x/x0) with x0 the mean of the Beta law on the relevant side.
double scaled_log_ratio(double a, double x, double x0) {
  const double rel = (x - x0) / x0;
  if (std::abs(rel) < 0.5) return a * std::log1p(rel);
  return a * (std::log(x) - std::log(x0));
}

// log of x^a (1-x)^b / B(a,b). The lgamma terms are expanded around
// x0 = a/(a+b) so that large shapes do not cancel digits.
double log_front(double a, double b, double x) {
  constexpr double half_log_2pi = 0.91893853320467274178;
  const double ab = a + b;
  const double x0 = a / ab;
  const double y0 = b / ab;
  return scaled_log_ratio(a, x, x0) + scaled_log_ratio(b, 1.0 - x, y0) +
         0.5 * std::log(a * y0) - half_log_2pi +
         (stirling_error(ab) - stirling_error(a) - stirling_error(b));
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double mills_hazard(double x) {
  if (x >= kHazardSwitch) return norm_pdf(x) / norm_cdf(x);
  return 1.0 / mills_ratio_cf(-x);
}

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive");
  }
  // lgamma_r avoids the global signgam write of lgamma.
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("log_beta: arguments must be positive");
  }
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double reg_inc_beta(double a, double b, double x) {
  check_beta_args(a, b, x);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front(a, b, x)) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front(a, b, x)) * beta_cf(b, a, 1.0 - x) / b;
}

double log_reg_inc_beta(double a, double b, double x) {
  check_beta_args(a, b, x);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x == 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_front(a, b, x) + std::log(beta_cf(a, b, x)) - std::log(a);
  }
  return std::log1p(-std::exp(log_front(a, b, x)) * beta_cf(b, a, 1.0 - x) / b);
}

}  // namespace selmean::specfun
