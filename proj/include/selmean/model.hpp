#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace selmean {

/// Index of a treatment arm; only 1 and 2 are meaningful.
enum class Arm : std::uint8_t { One = 1, Two = 2 };

inline int arm_number(Arm a) { return static_cast<int>(a); }
inline Arm other_arm(Arm a) { return a == Arm::One ? Arm::Two : Arm::One; }

/// Data inconsistent with a continuous model, e.g. every observation equal.
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dataset that does not fit its design or violates the selection rule.
class InvalidDataset : public std::invalid_argument {
 public:
  enum class Reason { LengthMismatch, NonFiniteValue, SelectionMismatch };

  InvalidDataset(Reason reason, const std::string& what)
      : std::invalid_argument(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// Per-arm stage-1 size and stage-2 size of the selected arm.
class DesignConfig {
 public:
  /// Throws std::invalid_argument unless n1 >= 1, n2 >= 1 and 2*n1 + n2 >= 4.
  DesignConfig(int n1, int n2);

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  int total_selected() const noexcept { return n1_ + n2_; }
  /// Degrees of freedom of the pooled variance, 2*n1 + n2 - 3.
  int pooled_df() const noexcept { return 2 * n1_ + n2_ - 3; }
  /// Shape of the Beta(c, c) law in the conditional density, c = df / 2.
  double shape_c() const noexcept { return 0.5 * pooled_df(); }
  double information_fraction() const noexcept {
    return static_cast<double>(n1_) / total_selected();
  }

  friend bool operator==(const DesignConfig&, const DesignConfig&) = default;

 private:
  int n1_;
  int n2_;
};

/// Raw observations of one completed two-stage trial.
struct TwoStageDataset {
  std::vector<double> arm1;
  std::vector<double> arm2;
  std::vector<double> stage2;
  Arm q = Arm::Two;
};

/// Complete-sufficient reduction consumed by every estimator.
struct RBSummary {
  Arm q = Arm::Two;
  double xbar_q = 0.0;      // larger stage-1 mean
  double xbar_other = 0.0;  // smaller stage-1 mean
  double ybar = 0.0;        // stage-2 mean
  double z = 0.0;           // n1 * xbar_q + n2 * ybar
  double s_raw_sq = 0.0;    // sum of squares of all raw observations
  double s_tilde_sq = 0.0;
  double c = 0.0;
  double v = 0.0;
  double v_star = 0.0;       // min(v, 1)
  double s_pooled_sq = 0.0;  // within-sample SS / (2 n1 + n2 - 3)
  double d = 0.0;            // z / (n1 + n2) - xbar_other

  double combined_mean(const DesignConfig& cfg) const {
    return z / cfg.total_selected();
  }

  friend bool operator==(const RBSummary&, const RBSummary&) = default;
};

/// True parameters (mu1, mu2, sigma).
class ParameterPoint {
 public:
  /// Throws std::invalid_argument unless sigma > 0 and all values finite.
  ParameterPoint(double mu1, double mu2, double sigma);

  double mu1() const noexcept { return mu1_; }
  double mu2() const noexcept { return mu2_; }
  double sigma() const noexcept { return sigma_; }
  double mean(Arm a) const noexcept { return a == Arm::One ? mu1_ : mu2_; }
  /// (max(mu1, mu2) - min(mu1, mu2)) / sigma
  double mu_norm() const noexcept;

 private:
  double mu1_;
  double mu2_;
  double sigma_;
};

/// Arm 1 iff xbar1 > xbar2; ties go to arm 2.
Arm select_arm(double xbar1, double xbar2);

double sample_mean(std::span<const double> xs);

/// Throws InvalidDataset on length mismatch, non-finite values, or stage-2
/// data attached to an arm the selection rule would not pick.
void validate_dataset(const TwoStageDataset& data, const DesignConfig& cfg);

/// Validates, then reduces the data to its sufficient summary.
/// Throws DegenerateData when s_tilde is negligible against the raw scale or
/// v <= -1 + 1e-12.
RBSummary summarize(const TwoStageDataset& data, const DesignConfig& cfg);

/// Selected-arm mean mu_Q under the implemented tie rule.
double selected_mean(const ParameterPoint& params, Arm q);

}  // namespace selmean
