#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "selmean/io.hpp"

using namespace selmean;
using namespace selmean::io;

namespace {

const std::filesystem::path kData = SELMEAN_DATA_DIR;

StageOneData stage_one(const std::string& text) {
  std::istringstream in(text);
  return parse_stage_one(in, "s1.csv");
}

std::vector<double> stage_two(const std::string& text) {
  std::istringstream in(text);
  return parse_stage_two(in, "s2.csv");
}

std::string parse_error(const std::string& text, bool first = true) {
  try {
    if (first) {
      stage_one(text);
    } else {
      stage_two(text);
    }
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

EstimateReport rats_report() {
  auto [data, cfg] = assemble(read_stage_one(kData / "rats_stage1.csv"),
                              read_stage_two(kData / "rats_stage2.csv"));
  auto ids = standard_estimators();
  ids.push_back(EstimatorId::bayes(3));
  return build_estimate_report(data, cfg, ids);
}

}  // namespace

TEST_CASE("stage-one parsing") {
  const auto s = stage_one("arm,value\n1,1.5\n2,-2\n\n1, 3e0 \n2,+4\n");
  CHECK(s.arm1 == std::vector<double>{1.5, 3.0});
  CHECK(s.arm2 == std::vector<double>{-2.0, 4.0});
  const auto crlf = stage_one("\xEF\xBB\xBF" "arm,value\r\n1,1\r\n2,2\r\n");
  CHECK(crlf.arm1 == std::vector<double>{1.0});
  CHECK(crlf.arm2 == std::vector<double>{2.0});
}

TEST_CASE("stage-one errors cite file and line") {
  CHECK(parse_error("") == "s1.csv: file is empty (expected header 'arm,value')");
  CHECK(parse_error("arm,val\n").find("s1.csv:1:") == 0);
  const std::string bad_arm = parse_error("arm,value\n1,1\n2,2\n3,4.5\n");
  CHECK(bad_arm.find("s1.csv:4:") == 0);
  CHECK(bad_arm.find("3,4.5") != std::string::npos);
  CHECK(parse_error("arm,value\r\n1,1\r\n2,abc\r\n").find("s1.csv:3:") == 0);
  CHECK(parse_error("arm,value\n1,nan\n").find("s1.csv:2:") == 0);
  CHECK(parse_error("arm,value\n1,inf\n").find("s1.csv:2:") == 0);
  CHECK(parse_error("arm,value\n1,1e999\n").find("s1.csv:2:") == 0);
  CHECK(parse_error("arm,value\n1,1,2\n").find("s1.csv:2:") == 0);
  CHECK(parse_error("arm,value\n1,1\n").find("both arms") != std::string::npos);
  CHECK(parse_error("arm,value\n1,1\n1,2\n2,3\n").find("different sizes") != std::string::npos);
}

TEST_CASE("stage-two parsing and errors") {
  CHECK(stage_two("value\n1\n2.5\n") == std::vector<double>{1.0, 2.5});
  CHECK(parse_error("value\n", false).find("no stage-2") != std::string::npos);
  CHECK(parse_error("value\n1,2\n", false).find("s2.csv:2:") == 0);
  CHECK(parse_error("values\n1\n", false).find("s2.csv:1:") == 0);
  CHECK_THROWS_AS(read_stage_two(kData / "does_not_exist.csv"), ParseError);
}

TEST_CASE("assemble applies the selection rule") {
  StageOneData s{{1.0, 3.0}, {0.0, 2.0}};
  auto [data, cfg] = assemble(s, {2.0, 4.0});
  CHECK(data.q == Arm::One);
  CHECK(cfg == DesignConfig(2, 2));
  CHECK_THROWS_AS(assemble(s, {2.0, 4.0}, Arm::Two), InvalidDataset);
  CHECK_NOTHROW(assemble(s, {2.0, 4.0}, Arm::One));
}

TEST_CASE("rat data fixture") {
  const auto r = rats_report();
  CHECK(r.cfg == DesignConfig(20, 10));
  CHECK(r.summary.q == Arm::One);
  CHECK(r.xbar1 == doctest::Approx(92.95).epsilon(1e-14));
  CHECK(r.xbar2 == doctest::Approx(82.15).epsilon(1e-14));
  CHECK(r.summary.ybar == doctest::Approx(99.5).epsilon(1e-14));
  CHECK(r.summary.c == 23.5);
  const auto mle_it = std::find_if(r.estimates.begin(), r.estimates.end(),
                                   [](const auto& e) { return e.first == EstimatorId::mle(); });
  REQUIRE(mle_it != r.estimates.end());
  CHECK(mle_it->second == doctest::Approx(2854.0 / 30.0).epsilon(1e-14));
}

TEST_CASE("json round trip and re-estimation") {
  auto r = rats_report();
  const std::string text = to_json(r).dump(2);
  const auto back = estimate_report_from_json(nlohmann::json::parse(text));
  CHECK(back == r);
  CHECK(reestimate(back) == r);
  CHECK(to_json(back).dump(2) == text);

  r.provenance = Provenance{42, 1000};
  const auto with_prov = estimate_report_from_json(to_json(r));
  CHECK(with_prov.provenance == r.provenance);

  auto j = to_json(r);
  j["selection"]["q"] = 2;
  CHECK_THROWS_AS(estimate_report_from_json(j), std::invalid_argument);
  j = to_json(r);
  j["estimates"]["WHAT"] = 1.0;
  CHECK_THROWS_AS(estimate_report_from_json(j), std::invalid_argument);
  j = to_json(r);
  j.erase("summaries");
  CHECK_THROWS_AS(estimate_report_from_json(j), std::invalid_argument);
}

TEST_CASE("estimate csv") {
  const std::string csv = to_csv(rats_report());
  CHECK(csv.starts_with("section,key,value\ndesign,n1,20\ndesign,n2,10\nselection,q,1\n"));
  CHECK(csv.find("summaries,c,23.5\n") != std::string::npos);
  // Estimates appear in a fixed order.
  const auto mle = csv.find("estimates,MLE,");
  const auto umv = csv.find("estimates,UMVCUE,");
  const auto u1 = csv.find("estimates,PLUGIN_U1,");
  const auto u2 = csv.find("estimates,PLUGIN_U2,");
  const auto bayes = csv.find("estimates,BAYES_M(3),");
  CHECK(mle < umv);
  CHECK(umv < u1);
  CHECK(u1 < u2);
  CHECK(u2 < bayes);
  CHECK(bayes != std::string::npos);
}

TEST_CASE("format_double is lossless and short") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
  for (double x : {0.1, 1.0 / 3.0, 95.13333333333334, 1e-300, -7.25e17}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("sweep csv sorts by axis then estimator") {
  const DesignConfig cfg(5, 5);
  const std::vector<double> grid{0.0, 1.0};
  std::vector<EstimatorId> ids{EstimatorId::plugin_u2(), EstimatorId::mle()};
  auto sweep = sweep_mu(cfg, grid, 50, 1, ids, 1);
  std::swap(sweep.points[0], sweep.points[1]);
  const std::string csv = sweep_csv(sweep);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "axis,estimator,scaled_mse,mse_se,scaled_bias,bias_se");
  CHECK(lines[1].starts_with("0,MLE,"));
  CHECK(lines[2].starts_with("0,PLUGIN_U2,"));
  CHECK(lines[3].starts_with("1,MLE,"));
  CHECK(lines[4].starts_with("1,PLUGIN_U2,"));

  const auto risk = risk_csv(sweep.points[1].report);
  CHECK(risk.starts_with("axis,estimator"));
  const auto j = to_json(sweep.points[0].report);
  CHECK(j.at("reps_used") == 50);
  CHECK(j.at("estimators").contains("PLUGIN_U2"));
}
