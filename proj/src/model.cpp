#include "selmean/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace selmean {

namespace {

double sum_sq_dev(std::span<const double> xs, double mean) {
  double acc = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    acc += d * d;
  }
  return acc;
}

double sum_sq(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x * x;
  return acc;
}

void check_length(const std::vector<double>& xs, int expected, const char* name) {
  if (static_cast<long>(xs.size()) != expected) {
    throw InvalidDataset(InvalidDataset::Reason::LengthMismatch,
                         std::string(name) + " has " + std::to_string(xs.size()) +
                             " observations, design expects " + std::to_string(expected));
  }
}

void check_finite(const std::vector<double>& xs, const char* name) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw InvalidDataset(InvalidDataset::Reason::NonFiniteValue,
                           std::string(name) + "[" + std::to_string(i) + "] is not finite");
    }
  }
}

}  // namespace

DesignConfig::DesignConfig(int n1, int n2) : n1_(n1), n2_(n2) {
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("design: n1 and n2 must be at least 1");
  }
  if (2 * n1 + n2 < 4) {
    throw std::invalid_argument("design: 2*n1 + n2 must be at least 4 (got n1=" +
                                std::to_string(n1) + ", n2=" + std::to_string(n2) + ")");
  }
}

ParameterPoint::ParameterPoint(double mu1, double mu2, double sigma)
    : mu1_(mu1), mu2_(mu2), sigma_(sigma) {
  if (!std::isfinite(mu1) || !std::isfinite(mu2) || !std::isfinite(sigma)) {
    throw std::invalid_argument("parameters must be finite");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
}

double ParameterPoint::mu_norm() const noexcept {
  return (std::max(mu1_, mu2_) - std::min(mu1_, mu2_)) / sigma_;
}

Arm select_arm(double xbar1, double xbar2) {
  return xbar1 > xbar2 ? Arm::One : Arm::Two;
}

double sample_mean(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double selected_mean(const ParameterPoint& params, Arm q) { return params.mean(q); }

void validate_dataset(const TwoStageDataset& data, const DesignConfig& cfg) {
  check_length(data.arm1, cfg.n1(), "arm1");
  check_length(data.arm2, cfg.n1(), "arm2");
  check_length(data.stage2, cfg.n2(), "stage2");
  check_finite(data.arm1, "arm1");
  check_finite(data.arm2, "arm2");
  check_finite(data.stage2, "stage2");
  const Arm expected = select_arm(sample_mean(data.arm1), sample_mean(data.arm2));
  if (data.q != expected) {
    throw InvalidDataset(InvalidDataset::Reason::SelectionMismatch,
                         "stage-2 data is attached to arm " + std::to_string(arm_number(data.q)) +
                             " but the selection rule picks arm " +
                             std::to_string(arm_number(expected)));
  }
}

RBSummary summarize(const TwoStageDataset& data, const DesignConfig& cfg) {
  validate_dataset(data, cfg);

  const double n1 = cfg.n1();
  const double n2 = cfg.n2();
  const double n12 = n1 + n2;

  const bool first = data.q == Arm::One;
  const auto& sel = first ? data.arm1 : data.arm2;
  const auto& oth = first ? data.arm2 : data.arm1;

  RBSummary s;
  s.q = data.q;
  s.xbar_q = sample_mean(sel);
  s.xbar_other = sample_mean(oth);
  s.ybar = sample_mean(data.stage2);
  s.z = n1 * s.xbar_q + n2 * s.ybar;
  s.c = cfg.shape_c();

  // Order-independent across the two stage-1 arms so relabelling is exact.
  const double within = (sum_sq_dev(sel, s.xbar_q) + sum_sq_dev(oth, s.xbar_other)) +
                        sum_sq_dev(data.stage2, s.ybar);
  s.s_raw_sq = (sum_sq(sel) + sum_sq(oth)) + sum_sq(data.stage2);

  // ybar - z/(n1+n2) and z/(n1+n2) - xbar_other written without subtracting
  // large nearby quantities.
  const double stage_gap = n1 * (s.ybar - s.xbar_q) / n12;
  s.d = (s.xbar_q - s.xbar_other) + n2 * (s.ybar - s.xbar_q) / n12;

  s.s_tilde_sq = within + (n2 * n12 / n1) * stage_gap * stage_gap;
  s.s_pooled_sq = within / cfg.pooled_df();

  const double s_tilde = std::sqrt(s.s_tilde_sq);
  if (!(s_tilde > 1e-12 * std::sqrt(s.s_raw_sq))) {
    throw DegenerateData("degenerate data: combined residual sum of squares is zero");
  }
  s.v = std::sqrt(n1 * n12 / n2) * s.d / s_tilde;
  if (s.v <= -1.0 + 1e-12) {
    throw DegenerateData("degenerate data: V is not above -1");
  }
  s.v_star = std::min(s.v, 1.0);
  return s;
}

}  // namespace selmean
