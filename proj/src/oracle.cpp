#include "selmean/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "selmean/simulate.hpp"

namespace selmean::oracle {

namespace {

GaussLegendre16 build_gl16() {
  constexpr int n = 16;
  GaussLegendre16 rule{};
  for (int i = 0; i < n / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-17) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussLegendre16& gauss_legendre16() {
  static const GaussLegendre16 rule = build_gl16();
  return rule;
}

double composite_gl16(const std::function<double(double)>& f, double a, double b,
                      std::uint64_t panels) {
  const auto& rule = gauss_legendre16();
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::uint64_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    double panel = 0.0;
    for (int i = 0; i < 16; ++i) panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * panel;
  }
  return total;
}

double conditional_mean_u_quadrature(double v_star, double c, const QuadratureSpec& spec) {
  if (!(c > 0.0)) throw std::domain_error("quadrature: c must be positive");
  if (!(v_star > -1.0 && v_star <= 1.0)) {
    throw std::domain_error("quadrature: v* must lie in (-1, 1]");
  }
  if (!(spec.rel_tol > 0.0)) throw std::invalid_argument("quadrature: rel_tol must be positive");

  const double lo = -0.5 * std::numbers::pi;
  const double hi = std::asin(v_star);
  // sin(theta) cos(theta)^{2c-1} is odd, so its integral over [-|hi|, |hi|]
  // vanishes and the numerator only needs [lo, -|hi|]. This avoids cancelling
  // positive and negative mass when v* > 0.
  const double num_hi = -std::abs(hi);
  const double power = 2.0 * c - 1.0;
  // (1-u^2)^{c-1} du = cos(theta)^{2c-1} d(theta). Each integrand is divided
  // by its largest value on the interval so tiny integrals do not underflow.
  auto log_peak = [&](double right) {
    return (power > 0.0 && right < 0.0) ? power * std::log(std::cos(right)) : 0.0;
  };
  const double den_scale = log_peak(hi);
  const double num_scale = log_peak(num_hi);
  auto den_f = [&](double theta) {
    return std::exp(power * std::log(std::cos(theta)) - den_scale);
  };
  auto num_f = [&](double theta) {
    return std::sin(theta) * std::exp(power * std::log(std::cos(theta)) - num_scale);
  };
  auto ratio = [&](double num, double den) {
    return num / den * std::exp(num_scale - den_scale);
  };
  if (num_hi <= lo) return 0.0;

  std::uint64_t panels = 2;
  double num = composite_gl16(num_f, lo, num_hi, panels);
  double den = composite_gl16(den_f, lo, hi, panels);
  while (panels < spec.max_panels) {
    panels *= 2;
    const double num2 = composite_gl16(num_f, lo, num_hi, panels);
    const double den2 = composite_gl16(den_f, lo, hi, panels);
    const bool done = std::abs(num2 - num) <= spec.rel_tol * std::abs(num2) &&
                      std::abs(den2 - den) <= spec.rel_tol * std::abs(den2);
    num = num2;
    den = den2;
    if (done) return ratio(num, den);
  }
  throw ToleranceNotMet("quadrature: tolerance " + std::to_string(spec.rel_tol) +
                        " not reached within " + std::to_string(spec.max_panels) + " panels");
}

double closed_form_correction(double v_star, double c) { return umvcue_correction(v_star, c); }

std::vector<double> validation_v_grid() {
  std::vector<double> grid{-0.99};
  for (int k = -9; k <= 9; ++k) grid.push_back(k / 10.0);
  grid.push_back(0.99);
  grid.push_back(1.0);
  return grid;
}

std::vector<double> validation_c_grid() { return {0.5, 1.0, 1.5, 2.5, 8.5, 48.5}; }

std::vector<CorrectionCheck> correction_grid_check(double rel_tol, double abs_floor,
                                                   const QuadratureSpec& spec) {
  std::vector<CorrectionCheck> out;
  for (double c : validation_c_grid()) {
    for (double v : validation_v_grid()) {
      const double closed = closed_form_correction(v, c);
      const double quad = conditional_mean_u_quadrature(v, c, spec);
      const double abs_err = std::abs(closed - quad);
      const double rel_err = quad != 0.0 ? abs_err / std::abs(quad) : abs_err;
      const bool pass = abs_err <= rel_tol * std::abs(quad) || abs_err <= abs_floor;
      out.push_back({v, c, closed, quad, abs_err, rel_err, pass});
    }
  }
  return out;
}

InsufficientConditionalSample::InsufficientConditionalSample(Arm arm, std::uint64_t count)
    : std::runtime_error("arm " + std::to_string(arm_number(arm)) + " selected in only " +
                         std::to_string(count) + " replications (need >= 100)"),
      arm_(arm),
      count_(count) {}

ConditionalBiasReport conditional_unbiasedness_check(const ParameterPoint& params,
                                                     const DesignConfig& cfg,
                                                     std::uint64_t reps, std::uint64_t seed,
                                                     EstimatorId estimator, int workers) {
  if (reps < 10000) {
    throw std::invalid_argument("conditional unbiasedness check needs reps >= 10000");
  }
  const SimulationJob job{cfg, params, reps, seed, {estimator}};
  const RiskReport report = estimate_risk(job, workers);
  const EstimatorRisk& risk = report.at(estimator);

  ConditionalBiasReport out{estimator, {}};
  for (Arm arm : {Arm::One, Arm::Two}) {
    const ConditionalBias& cb = risk.given(arm);
    if (cb.count < 100) throw InsufficientConditionalSample(arm, cb.count);
    out.arms[arm_number(arm) - 1] = {arm, cb.count, cb.scaled_bias * params.sigma(),
                                     cb.scaled_bias_se * params.sigma()};
  }
  return out;
}

}  // namespace selmean::oracle
