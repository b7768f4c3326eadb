#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "selmean/estimators.hpp"
#include "selmean/model.hpp"
#include "selmean/simulate.hpp"

namespace selmean::io {

/// Malformed input file. line() is 1-based, 0 when the problem is not tied
/// to a single row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message);
  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Stage-1 observations: CSV with header `arm,value`, arm in {1, 2}, equal
/// row counts per arm. LF or CRLF line endings.
struct StageOneData {
  std::vector<double> arm1;
  std::vector<double> arm2;
};

StageOneData parse_stage_one(std::istream& in, const std::string& source);
/// Stage-2 observations: CSV with header `value`, at least one row.
std::vector<double> parse_stage_two(std::istream& in, const std::string& source);

StageOneData read_stage_one(const std::filesystem::path& path);
std::vector<double> read_stage_two(const std::filesystem::path& path);

/// Builds the dataset with q chosen by the selection rule. When
/// stage2_arm is given and disagrees with the rule, validation fails with
/// SelectionMismatch.
std::pair<TwoStageDataset, DesignConfig> assemble(StageOneData stage1,
                                                  std::vector<double> stage2,
                                                  std::optional<Arm> stage2_arm = {});

struct Provenance {
  std::uint64_t seed;
  std::uint64_t reps;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Everything `estimate` prints.
struct EstimateReport {
  DesignConfig cfg;
  double xbar1 = 0.0;
  double xbar2 = 0.0;
  RBSummary summary;
  std::vector<std::pair<EstimatorId, double>> estimates;
  std::optional<Provenance> provenance;

  friend bool operator==(const EstimateReport&, const EstimateReport&) = default;
};

EstimateReport build_estimate_report(const TwoStageDataset& data, const DesignConfig& cfg,
                                     const std::vector<EstimatorId>& estimators);

/// Recomputes every estimate from the stored summary.
EstimateReport reestimate(const EstimateReport& report);

/// Shortest representation that parses back to the same double; at most
/// 17 significant digits.
std::string format_double(double x);

nlohmann::json to_json(const EstimateReport& report);
/// Throws std::invalid_argument on a missing or malformed field.
EstimateReport estimate_report_from_json(const nlohmann::json& j);
/// Rows `section,key,value`.
std::string to_csv(const EstimateReport& report);

nlohmann::json to_json(const RiskReport& report);
/// Header `axis,estimator,scaled_mse,mse_se,scaled_bias,bias_se`, one row per
/// estimator, axis value mu_norm.
std::string risk_csv(const RiskReport& report);

/// Header `axis,estimator,scaled_mse,mse_se,scaled_bias,bias_se`; rows sorted
/// by (axis value, estimator).
std::string sweep_csv(const SweepResult& sweep);

}  // namespace selmean::io
