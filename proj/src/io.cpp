#include "selmean/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <tuple>

namespace selmean::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

// Iterates the non-blank lines of a CSV stream, tracking 1-based numbers.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (number_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) return true;
    }
    return false;
  }

  std::size_t number() const noexcept { return number_; }
  const std::string& source() const noexcept { return source_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, number_, message);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t number_ = 0;
};

double parse_value(std::string_view field, const LineReader& reader) {
  const std::string_view t = trim(field);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    reader.fail("'" + std::string(t) + "' is not a decimal number");
  }
  if (!std::isfinite(value)) reader.fail("value must be finite");
  return value;
}

void expect_header(LineReader& reader, const std::string& expected) {
  std::string line;
  if (!reader.next(line)) reader.fail("file is empty (expected header '" + expected + "')");
  if (trim(line) != expected) {
    reader.fail("expected header '" + expected + "', found '" + std::string(trim(line)) + "'");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

json summary_json(const RBSummary& s) {
  return json{{"q", arm_number(s.q)},
              {"xbar_q", s.xbar_q},
              {"xbar_other", s.xbar_other},
              {"ybar", s.ybar},
              {"z", s.z},
              {"s_raw_sq", s.s_raw_sq},
              {"s_tilde_sq", s.s_tilde_sq},
              {"c", s.c},
              {"v", s.v},
              {"v_star", s.v_star},
              {"s_pooled_sq", s.s_pooled_sq},
              {"d", s.d}};
}

Arm arm_from_json(const json& j) {
  const int q = j.get<int>();
  if (q != 1 && q != 2) throw std::invalid_argument("q must be 1 or 2");
  return q == 1 ? Arm::One : Arm::Two;
}

RBSummary summary_from_json(const json& j) {
  RBSummary s;
  s.q = arm_from_json(j.at("q"));
  s.xbar_q = j.at("xbar_q").get<double>();
  s.xbar_other = j.at("xbar_other").get<double>();
  s.ybar = j.at("ybar").get<double>();
  s.z = j.at("z").get<double>();
  s.s_raw_sq = j.at("s_raw_sq").get<double>();
  s.s_tilde_sq = j.at("s_tilde_sq").get<double>();
  s.c = j.at("c").get<double>();
  s.v = j.at("v").get<double>();
  s.v_star = j.at("v_star").get<double>();
  s.s_pooled_sq = j.at("s_pooled_sq").get<double>();
  s.d = j.at("d").get<double>();
  return s;
}

void sort_estimates(std::vector<std::pair<EstimatorId, double>>& estimates) {
  std::sort(estimates.begin(), estimates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

const char* kRiskHeader = "axis,estimator,scaled_mse,mse_se,scaled_bias,bias_se\n";

void append_risk_rows(std::string& out, double axis, const RiskReport& report) {
  std::vector<const EstimatorRisk*> rows;
  for (const auto& e : report.estimators) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(),
            [](const EstimatorRisk* a, const EstimatorRisk* b) { return a->id < b->id; });
  for (const EstimatorRisk* e : rows) {
    out += format_double(axis) + ',' + e->id.name() + ',' + format_double(e->scaled_mse) + ',' +
           format_double(e->scaled_mse_se) + ',' + format_double(e->scaled_bias) + ',' +
           format_double(e->scaled_bias_se) + '\n';
  }
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         ": " + message),
      source_(std::move(source)),
      line_(line) {}

StageOneData parse_stage_one(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  expect_header(reader, "arm,value");
  StageOneData out;
  std::string line;
  while (reader.next(line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      reader.fail("expected 2 fields 'arm,value', found '" + line + "'");
    }
    const std::string_view arm = trim(std::string_view(line).substr(0, comma));
    const double value = parse_value(std::string_view(line).substr(comma + 1), reader);
    if (arm == "1") {
      out.arm1.push_back(value);
    } else if (arm == "2") {
      out.arm2.push_back(value);
    } else {
      reader.fail("arm must be 1 or 2, found '" + std::string(arm) + "' in row '" + line + "'");
    }
  }
  if (out.arm1.empty() || out.arm2.empty()) {
    throw ParseError(source, 0, "both arms need stage-1 observations");
  }
  if (out.arm1.size() != out.arm2.size()) {
    throw ParseError(source, 0,
                     "arms have different sizes (arm 1: " + std::to_string(out.arm1.size()) +
                         ", arm 2: " + std::to_string(out.arm2.size()) + ")");
  }
  return out;
}

std::vector<double> parse_stage_two(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  expect_header(reader, "value");
  std::vector<double> out;
  std::string line;
  while (reader.next(line)) {
    if (line.find(',') != std::string::npos) reader.fail("expected a single value per row");
    out.push_back(parse_value(line, reader));
  }
  if (out.empty()) throw ParseError(source, 0, "no stage-2 observations");
  return out;
}

StageOneData read_stage_one(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_stage_one(in, path.string());
}

std::vector<double> read_stage_two(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_stage_two(in, path.string());
}

std::pair<TwoStageDataset, DesignConfig> assemble(StageOneData stage1,
                                                  std::vector<double> stage2,
                                                  std::optional<Arm> stage2_arm) {
  DesignConfig cfg(static_cast<int>(stage1.arm1.size()), static_cast<int>(stage2.size()));
  TwoStageDataset data{std::move(stage1.arm1), std::move(stage1.arm2), std::move(stage2)};
  data.q = stage2_arm.value_or(select_arm(sample_mean(data.arm1), sample_mean(data.arm2)));
  validate_dataset(data, cfg);
  return {std::move(data), cfg};
}

EstimateReport build_estimate_report(const TwoStageDataset& data, const DesignConfig& cfg,
                                     const std::vector<EstimatorId>& estimators) {
  EstimateReport report{cfg, sample_mean(data.arm1), sample_mean(data.arm2),
                        summarize(data, cfg), {}, std::nullopt};
  for (EstimatorId id : estimators) {
    report.estimates.emplace_back(id, evaluate(id, report.summary, cfg));
  }
  sort_estimates(report.estimates);
  return report;
}

EstimateReport reestimate(const EstimateReport& report) {
  EstimateReport out = report;
  for (auto& [id, value] : out.estimates) value = evaluate(id, out.summary, out.cfg);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

nlohmann::json to_json(const EstimateReport& report) {
  json estimates = json::object();
  for (const auto& [id, value] : report.estimates) estimates[id.name()] = value;
  json j{{"design", {{"n1", report.cfg.n1()}, {"n2", report.cfg.n2()}}},
         {"selection",
          {{"q", arm_number(report.summary.q)}, {"xbar1", report.xbar1}, {"xbar2", report.xbar2}}},
         {"summaries", summary_json(report.summary)},
         {"estimates", estimates}};
  if (report.provenance) {
    j["provenance"] = {{"seed", report.provenance->seed}, {"reps", report.provenance->reps}};
  }
  return j;
}

EstimateReport estimate_report_from_json(const nlohmann::json& j) {
  try {
    const json& design = j.at("design");
    EstimateReport report{DesignConfig(design.at("n1").get<int>(), design.at("n2").get<int>()),
                          j.at("selection").at("xbar1").get<double>(),
                          j.at("selection").at("xbar2").get<double>(),
                          summary_from_json(j.at("summaries")),
                          {},
                          std::nullopt};
    if (arm_from_json(j.at("selection").at("q")) != report.summary.q) {
      throw std::invalid_argument("selection.q disagrees with summaries.q");
    }
    for (const auto& [key, value] : j.at("estimates").items()) {
      const auto id = EstimatorId::parse(key);
      if (!id) throw std::invalid_argument("unknown estimator '" + key + "'");
      report.estimates.emplace_back(*id, value.get<double>());
    }
    sort_estimates(report.estimates);
    if (j.contains("provenance")) {
      const json& p = j.at("provenance");
      report.provenance = Provenance{p.at("seed").get<std::uint64_t>(),
                                     p.at("reps").get<std::uint64_t>()};
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

std::string to_csv(const EstimateReport& report) {
  std::string out = "section,key,value\n";
  auto row = [&out](const char* section, const std::string& key, const std::string& value) {
    out += std::string(section) + ',' + key + ',' + value + '\n';
  };
  row("design", "n1", std::to_string(report.cfg.n1()));
  row("design", "n2", std::to_string(report.cfg.n2()));
  row("selection", "q", std::to_string(arm_number(report.summary.q)));
  row("selection", "xbar1", format_double(report.xbar1));
  row("selection", "xbar2", format_double(report.xbar2));
  const json summaries = summary_json(report.summary);
  for (const auto& [key, value] : summaries.items()) {
    row("summaries", key,
        value.is_number_integer() ? std::to_string(value.get<int>())
                                  : format_double(value.get<double>()));
  }
  for (const auto& [id, value] : report.estimates) row("estimates", id.name(), format_double(value));
  if (report.provenance) {
    row("provenance", "seed", std::to_string(report.provenance->seed));
    row("provenance", "reps", std::to_string(report.provenance->reps));
  }
  return out;
}

nlohmann::json to_json(const RiskReport& report) {
  json estimators = json::object();
  for (const auto& e : report.estimators) {
    json by_arm = json::array();
    for (Arm arm : {Arm::One, Arm::Two}) {
      const auto& cb = e.given(arm);
      by_arm.push_back({{"arm", arm_number(arm)},
                        {"count", cb.count},
                        {"scaled_bias", cb.scaled_bias},
                        {"scaled_bias_se", cb.scaled_bias_se}});
    }
    estimators[e.id.name()] = {{"scaled_mse", e.scaled_mse},
                               {"scaled_mse_se", e.scaled_mse_se},
                               {"scaled_bias", e.scaled_bias},
                               {"scaled_bias_se", e.scaled_bias_se},
                               {"conditional", by_arm}};
  }
  return json{{"design", {{"n1", report.cfg.n1()}, {"n2", report.cfg.n2()}}},
              {"parameters",
               {{"mu1", report.params.mu1()},
                {"mu2", report.params.mu2()},
                {"sigma", report.params.sigma()},
                {"mu_norm", report.mu_norm}}},
              {"selections", {{"arm1", report.selections[0]}, {"arm2", report.selections[1]}}},
              {"reps_used", report.reps_used},
              {"estimators", estimators},
              {"provenance", {{"seed", report.seed}, {"reps", report.reps_used}}}};
}

std::string risk_csv(const RiskReport& report) {
  std::string out = kRiskHeader;
  append_risk_rows(out, report.mu_norm, report);
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::vector<const SweepPoint*> points;
  for (const auto& p : sweep.points) points.push_back(&p);
  std::stable_sort(points.begin(), points.end(), [](const SweepPoint* a, const SweepPoint* b) {
    return a->axis_value < b->axis_value;
  });
  std::string out = kRiskHeader;
  for (const SweepPoint* p : points) append_risk_rows(out, p->axis_value, p->report);
  return out;
}

}  // namespace selmean::io
