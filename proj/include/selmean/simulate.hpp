#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "selmean/estimators.hpp"
#include "selmean/model.hpp"
#include "selmean/random.hpp"

namespace selmean {

/// Environment variable holding the default number of simulation workers.
inline constexpr const char* kWorkersEnv = "SELMEAN_WORKERS";

/// SELMEAN_WORKERS if set to a positive integer, else the hardware
/// concurrency (at least 1).
int default_workers();

struct Replication {
  RBSummary summary;
  double mu_q;
};

/// Draws n1 observations per arm, applies the selection rule, then draws n2
/// stage-2 observations from the selected arm. Draw order: arm 1, arm 2,
/// stage 2, each as mean + sigma * N(0, 1).
Replication run_replication(const ParameterPoint& params, const DesignConfig& cfg,
                            RandomStream& stream);

/// Streaming mean / second central moment with an order-fixed merge.
class RunningMoments {
 public:
  void push(double x) noexcept;
  void merge(const RunningMoments& other) noexcept;

  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Sample variance (n - 1 divisor); 0 when fewer than two values.
  double variance() const noexcept;
  /// Standard error of the mean; 0 when fewer than two values.
  double standard_error() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SimulationJob {
  DesignConfig cfg;
  ParameterPoint params;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 0;
  std::vector<EstimatorId> estimators;
  /// Second key of the replication streams; sweeps use the grid index.
  std::uint64_t stream_key = 0;

  /// Throws std::invalid_argument for reps == 0 or an empty / duplicated
  /// estimator list.
  void validate() const;
};

/// Scaled bias of an estimator restricted to replications that selected one arm.
struct ConditionalBias {
  std::uint64_t count = 0;
  double scaled_bias = 0.0;
  double scaled_bias_se = 0.0;
};

struct EstimatorRisk {
  EstimatorId id;
  double scaled_mse = 0.0;
  double scaled_mse_se = 0.0;
  double scaled_bias = 0.0;
  double scaled_bias_se = 0.0;
  std::array<ConditionalBias, 2> by_arm{};

  const ConditionalBias& given(Arm q) const { return by_arm[arm_number(q) - 1]; }
};

struct RiskReport {
  DesignConfig cfg;
  ParameterPoint params;
  std::uint64_t seed = 0;
  std::uint64_t reps_used = 0;
  double mu_norm = 0.0;
  std::array<std::uint64_t, 2> selections{};
  std::vector<EstimatorRisk> estimators;

  /// Throws std::out_of_range if the estimator was not simulated.
  const EstimatorRisk& at(EstimatorId id) const;
};

/// A replication failed; carries its index within the job.
class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(std::uint64_t index, const std::string& what)
      : std::runtime_error("replication " + std::to_string(index) + ": " + what),
        index_(index) {}
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t index_;
};

/// Monte-Carlo scaled MSE and scaled bias for every estimator in the job,
/// all evaluated on the same replications. Replication r draws from the
/// stream derive_seed(seed, stream_key, r); results are bit-identical for
/// any worker count. workers <= 0 selects default_workers().
RiskReport estimate_risk(const SimulationJob& job, int workers = 0);

class EmptyGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SweepAxis { MuNorm, InformationFraction };

std::string axis_label(SweepAxis axis);

struct SweepPoint {
  double axis_value;
  RiskReport report;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;
};

/// One risk estimate per normalized gap in the grid, at (0, mu, 1). The grid
/// must be non-empty, finite, non-negative and strictly increasing.
SweepResult sweep_mu(const DesignConfig& cfg, std::span<const double> mu_grid,
                     std::uint64_t reps, std::uint64_t seed,
                     const std::vector<EstimatorId>& estimators, int workers = 0);

/// Splits n_total into (n1, n_total - n1) for n1 = 1 .. n_total - 1, keeping
/// the admissible designs; axis value n1 / n_total. Throws EmptyGrid when no
/// split is admissible.
SweepResult sweep_information_fraction(int n_total, double mu_norm, std::uint64_t reps,
                                       std::uint64_t seed,
                                       const std::vector<EstimatorId>& estimators,
                                       int workers = 0);

}  // namespace selmean
