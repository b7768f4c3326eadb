#include "selmean/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <thread>

namespace selmean {

namespace {

// Fixed chunking keeps the reduction tree independent of the worker count.
constexpr std::uint64_t kChunk = 1024;

struct EstimatorAccum {
  RunningMoments sq;
  RunningMoments err;
  std::array<RunningMoments, 2> err_by_arm;
};

struct ChunkResult {
  std::vector<EstimatorAccum> accum;
  std::array<std::uint64_t, 2> selections{};
  std::optional<std::uint64_t> failed_index;
  std::string failure;
};

ChunkResult run_chunk(const SimulationJob& job, std::uint64_t begin, std::uint64_t end) {
  ChunkResult out;
  out.accum.resize(job.estimators.size());
  const double sigma = job.params.sigma();
  for (std::uint64_t r = begin; r < end; ++r) {
    try {
      RandomStream stream(derive_seed(job.seed, job.stream_key, r));
      const Replication rep = run_replication(job.params, job.cfg, stream);
      const int arm = arm_number(rep.summary.q) - 1;
      ++out.selections[arm];
      for (std::size_t k = 0; k < job.estimators.size(); ++k) {
        const double e = (evaluate(job.estimators[k], rep.summary, job.cfg) - rep.mu_q) / sigma;
        out.accum[k].sq.push(e * e);
        out.accum[k].err.push(e);
        out.accum[k].err_by_arm[arm].push(e);
      }
    } catch (const std::exception& ex) {
      out.failed_index = r;
      out.failure = ex.what();
      return out;
    }
  }
  return out;
}

std::uint64_t grid_seed_key(std::size_t g) { return static_cast<std::uint64_t>(g); }

}  // namespace

int default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Replication run_replication(const ParameterPoint& params, const DesignConfig& cfg,
                            RandomStream& stream) {
  TwoStageDataset data;
  data.arm1.resize(cfg.n1());
  data.arm2.resize(cfg.n1());
  data.stage2.resize(cfg.n2());
  for (double& x : data.arm1) x = stream.normal(params.mu1(), params.sigma());
  for (double& x : data.arm2) x = stream.normal(params.mu2(), params.sigma());
  data.q = select_arm(sample_mean(data.arm1), sample_mean(data.arm2));
  const double mu_q = selected_mean(params, data.q);
  for (double& y : data.stage2) y = stream.normal(mu_q, params.sigma());
  return {summarize(data, cfg), mu_q};
}

void RunningMoments::push(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double RunningMoments::variance() const noexcept {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningMoments::standard_error() const noexcept {
  return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

void SimulationJob::validate() const {
  if (reps == 0) throw std::invalid_argument("reps must be at least 1");
  if (estimators.empty()) throw std::invalid_argument("estimator list is empty");
  std::set<EstimatorId> seen(estimators.begin(), estimators.end());
  if (seen.size() != estimators.size()) {
    throw std::invalid_argument("estimator list contains duplicates");
  }
}

const EstimatorRisk& RiskReport::at(EstimatorId id) const {
  for (const auto& e : estimators) {
    if (e.id == id) return e;
  }
  throw std::out_of_range("estimator " + id.name() + " not in report");
}

RiskReport estimate_risk(const SimulationJob& job, int workers) {
  job.validate();
  if (workers <= 0) workers = default_workers();

  const std::uint64_t n_chunks = (job.reps + kChunk - 1) / kChunk;
  std::vector<ChunkResult> chunks(n_chunks);
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    for (std::uint64_t k = next.fetch_add(1); k < n_chunks; k = next.fetch_add(1)) {
      const std::uint64_t begin = k * kChunk;
      chunks[k] = run_chunk(job, begin, std::min(job.reps, begin + kChunk));
    }
  };

  const auto n_threads = static_cast<std::uint64_t>(workers) < n_chunks
                             ? static_cast<std::uint64_t>(workers)
                             : n_chunks;
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::uint64_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<EstimatorAccum> total(job.estimators.size());
  RiskReport report{job.cfg, job.params, job.seed, 0, job.params.mu_norm(), {}, {}};
  for (const auto& chunk : chunks) {
    if (chunk.failed_index) throw ReplicationError(*chunk.failed_index, chunk.failure);
    for (std::size_t k = 0; k < total.size(); ++k) {
      total[k].sq.merge(chunk.accum[k].sq);
      total[k].err.merge(chunk.accum[k].err);
      for (int a = 0; a < 2; ++a) total[k].err_by_arm[a].merge(chunk.accum[k].err_by_arm[a]);
    }
    report.selections[0] += chunk.selections[0];
    report.selections[1] += chunk.selections[1];
  }

  report.reps_used = job.reps;
  report.estimators.reserve(total.size());
  for (std::size_t k = 0; k < total.size(); ++k) {
    EstimatorRisk risk{job.estimators[k]};
    risk.scaled_mse = total[k].sq.mean();
    risk.scaled_mse_se = total[k].sq.standard_error();
    risk.scaled_bias = total[k].err.mean();
    risk.scaled_bias_se = total[k].err.standard_error();
    for (int a = 0; a < 2; ++a) {
      const auto& m = total[k].err_by_arm[a];
      risk.by_arm[a] = {m.count(), m.mean(), m.standard_error()};
    }
    report.estimators.push_back(risk);
  }
  return report;
}

std::string axis_label(SweepAxis axis) {
  return axis == SweepAxis::MuNorm ? "mu_norm" : "information_fraction";
}

SweepResult sweep_mu(const DesignConfig& cfg, std::span<const double> mu_grid,
                     std::uint64_t reps, std::uint64_t seed,
                     const std::vector<EstimatorId>& estimators, int workers) {
  if (mu_grid.empty()) throw EmptyGrid("mu grid is empty");
  for (std::size_t g = 0; g < mu_grid.size(); ++g) {
    const double mu = mu_grid[g];
    if (!std::isfinite(mu) || mu < 0.0) {
      throw std::invalid_argument("mu grid values must be finite and >= 0");
    }
    if (g > 0 && !(mu > mu_grid[g - 1])) {
      throw std::invalid_argument("mu grid must be strictly increasing");
    }
  }
  SweepResult out{SweepAxis::MuNorm, {}};
  for (std::size_t g = 0; g < mu_grid.size(); ++g) {
    SimulationJob job{cfg, ParameterPoint(0.0, mu_grid[g], 1.0), reps, seed, estimators,
                      grid_seed_key(g)};
    out.points.push_back({mu_grid[g], estimate_risk(job, workers)});
  }
  return out;
}

SweepResult sweep_information_fraction(int n_total, double mu_norm, std::uint64_t reps,
                                       std::uint64_t seed,
                                       const std::vector<EstimatorId>& estimators,
                                       int workers) {
  if (!std::isfinite(mu_norm) || mu_norm < 0.0) {
    throw std::invalid_argument("mu must be finite and >= 0");
  }
  SweepResult out{SweepAxis::InformationFraction, {}};
  for (int n1 = 1; n1 < n_total; ++n1) {
    const int n2 = n_total - n1;
    if (2 * n1 + n2 < 4) continue;
    SimulationJob job{DesignConfig(n1, n2), ParameterPoint(0.0, mu_norm, 1.0), reps, seed,
                      estimators, grid_seed_key(static_cast<std::size_t>(n1))};
    out.points.push_back({static_cast<double>(n1) / n_total, estimate_risk(job, workers)});
  }
  if (out.points.empty()) {
    throw EmptyGrid("no admissible (n1, n2) split of n = " + std::to_string(n_total));
  }
  return out;
}

}  // namespace selmean
