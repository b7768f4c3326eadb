#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "selmean/estimators.hpp"
#include "selmean/model.hpp"

namespace selmean::oracle {

struct QuadratureSpec {
  double rel_tol = 1e-12;
  std::uint64_t max_panels = std::uint64_t{1} << 20;
};

class ToleranceNotMet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre16 {
  std::array<double, 16> nodes;
  std::array<double, 16> weights;
};
const GaussLegendre16& gauss_legendre16();

/// Composite 16-point Gauss-Legendre on `panels` equal panels of [a, b].
double composite_gl16(const std::function<double(double)>& f, double a, double b,
                      std::uint64_t panels);

/// E[U | sufficient statistic] as the ratio
///   int_{-1}^{v*} u (1-u^2)^{c-1} du / int_{-1}^{v*} (1-u^2)^{c-1} du,
/// both integrals taken over theta after u = sin(theta) with panel doubling.
/// The numerator is integrated over [-pi/2, -|asin v*|] only, using the odd
/// symmetry of its integrand. Converges when each integral changes by at most
/// rel_tol relative to itself. Throws ToleranceNotMet past max_panels.
double conditional_mean_u_quadrature(double v_star, double c, const QuadratureSpec& spec = {});

/// The closed-form correction used inside the UMVCUE.
double closed_form_correction(double v_star, double c);

/// v* in {-0.99, -0.9, -0.8, ..., 0.9, 0.99, 1}.
std::vector<double> validation_v_grid();
/// c in {0.5, 1, 1.5, 2.5, 8.5, 48.5}.
std::vector<double> validation_c_grid();

struct CorrectionCheck {
  double v_star;
  double c;
  double closed_form;
  double quadrature;
  double abs_err;
  double rel_err;
  bool pass;
};

/// Closed form against quadrature at every (v*, c) grid point. A point passes
/// when the difference is within rel_tol relative or abs_floor absolute.
std::vector<CorrectionCheck> correction_grid_check(double rel_tol = 1e-8,
                                                   double abs_floor = 1e-12,
                                                   const QuadratureSpec& spec = {});

class InsufficientConditionalSample : public std::runtime_error {
 public:
  InsufficientConditionalSample(Arm arm, std::uint64_t count);
  Arm arm() const noexcept { return arm_; }
  std::uint64_t count() const noexcept { return count_; }

 private:
  Arm arm_;
  std::uint64_t count_;
};

struct ArmBias {
  Arm arm;
  std::uint64_t count;
  double bias;  // conditional mean of d - mu_q, original units
  double se;
  bool within(double n_se) const { return std::abs(bias) <= n_se * se; }
};

struct ConditionalBiasReport {
  EstimatorId estimator;
  std::array<ArmBias, 2> arms;
  double n_se = 4.0;

  /// Both conditional biases within n_se standard errors of zero.
  bool unbiased() const { return arms[0].within(n_se) && arms[1].within(n_se); }
};

/// Simulates reps trials, partitions by the realized selection and reports
/// the conditional mean of (estimate - mu_q) per arm. reps must be >= 10^4;
/// throws InsufficientConditionalSample if either arm is selected fewer than
/// 100 times.
ConditionalBiasReport conditional_unbiasedness_check(
    const ParameterPoint& params, const DesignConfig& cfg, std::uint64_t reps,
    std::uint64_t seed, EstimatorId estimator = EstimatorId::umvcue(), int workers = 0);

}  // namespace selmean::oracle
