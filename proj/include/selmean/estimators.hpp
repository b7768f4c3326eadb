#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selmean/model.hpp"

namespace selmean {

/// Which estimator of the selected mean. Bayes shrinkage carries its m.
class EstimatorId {
 public:
  enum class Kind { Mle, Umvcue, PluginU1, PluginU2, BayesM };

  static EstimatorId mle() { return EstimatorId(Kind::Mle, 0); }
  static EstimatorId umvcue() { return EstimatorId(Kind::Umvcue, 0); }
  static EstimatorId plugin_u1() { return EstimatorId(Kind::PluginU1, 0); }
  static EstimatorId plugin_u2() { return EstimatorId(Kind::PluginU2, 0); }
  /// Throws std::invalid_argument for m < 1.
  static EstimatorId bayes(long m);

  Kind kind() const noexcept { return kind_; }
  long m() const noexcept { return m_; }

  /// "MLE", "UMVCUE", "PLUGIN_U1", "PLUGIN_U2" or "BAYES_M(<m>)".
  std::string name() const;
  /// Inverse of name(); "BAYES_M" alone means m = 1. Case-insensitive.
  static std::optional<EstimatorId> parse(std::string_view text);

  friend auto operator<=>(const EstimatorId&, const EstimatorId&) = default;

 private:
  EstimatorId(Kind k, long m) : kind_(k), m_(m) {}
  Kind kind_;
  long m_;
};

/// MLE, UMVCUE, PLUGIN_U1, PLUGIN_U2.
std::vector<EstimatorId> standard_estimators();

double mle(const RBSummary& s, const DesignConfig& cfg);

/// Conditional mean of U given the sufficient statistic:
///   -(1 - v*^2)^c / (2^{2c} c B(c,c) I_{c,c}((v*+1)/2)),
/// evaluated in log space. Zero at v* = 1, never positive.
/// Throws DegenerateData if v* is within 1e-10 of -1.
double umvcue_correction(double v_star, double c);

/// Rao-Blackwellized stage-2 mean; never above mle().
double umvcue(const RBSummary& s, const DesignConfig& cfg);

/// Plug-in truncation-corrected estimator using the pooled variance.
double plugin_u1(const RBSummary& s, const DesignConfig& cfg);

/// Plug-in shrinkage-type estimator using the pooled variance.
double plugin_u2(const RBSummary& s, const DesignConfig& cfg);

/// Bayes rule z / (n1 + n2 + 1/m) of the normal-inverse-gamma prior family.
double bayes_shrinkage(const RBSummary& s, const DesignConfig& cfg, long m);

double evaluate(EstimatorId id, const RBSummary& s, const DesignConfig& cfg);

}  // namespace selmean
