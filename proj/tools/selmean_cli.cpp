// selmean: estimate the selected treatment mean of a two-stage design, and
// study the estimators by simulation.
//
// Exit codes: 0 ok, 1 validation check failed, 2 input error, 3 data
// inconsistent with the model.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selmean/estimators.hpp"
#include "selmean/io.hpp"
#include "selmean/model.hpp"
#include "selmean/oracle.hpp"
#include "selmean/simulate.hpp"

namespace {

using namespace selmean;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;
constexpr int kModelError = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<EstimatorId> parse_estimators(const std::string& text) {
  std::vector<EstimatorId> out;
  for (const auto& name : split(text, ',')) {
    const auto id = EstimatorId::parse(name);
    if (!id) throw UsageError("unknown estimator '" + name + "'");
    out.push_back(*id);
  }
  if (out.empty()) throw UsageError("no estimators given");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError("bad grid value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

// Accepts "100000" and "1e5".
std::uint64_t parse_count(double value, const char* what) {
  if (!std::isfinite(value) || value < 1.0 || value != std::floor(value) || value > 1e15) {
    throw UsageError(std::string(what) + " must be a positive integer");
  }
  return static_cast<std::uint64_t>(value);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + out_path + "'");
  out << text;
}

struct EstimateArgs {
  std::string stage1;
  std::string stage2;
  std::string format = "json";
  std::optional<long> bayes_m;
  std::optional<int> stage2_arm;
};

int run_estimate(const EstimateArgs& a) {
  auto stage1 = io::read_stage_one(a.stage1);
  auto stage2 = io::read_stage_two(a.stage2);
  std::optional<Arm> arm;
  if (a.stage2_arm) arm = *a.stage2_arm == 1 ? Arm::One : Arm::Two;
  auto [data, cfg] = io::assemble(std::move(stage1), std::move(stage2), arm);
  auto estimators = standard_estimators();
  if (a.bayes_m) estimators.push_back(EstimatorId::bayes(*a.bayes_m));
  const auto report = io::build_estimate_report(data, cfg, estimators);
  if (a.format == "csv") {
    std::cout << io::to_csv(report);
  } else {
    std::cout << io::to_json(report).dump(2) << '\n';
  }
  return kOk;
}

struct SimulateArgs {
  int n1 = 0;
  int n2 = 0;
  double mu = 0.0;
  double reps = 100000;
  std::uint64_t seed = 1;
  std::string estimators = "MLE,UMVCUE,PLUGIN_U1,PLUGIN_U2";
  std::string format = "json";
  int workers = 0;
};

int run_simulate(const SimulateArgs& a) {
  if (!std::isfinite(a.mu) || a.mu < 0.0) throw UsageError("--mu must be >= 0");
  const SimulationJob job{DesignConfig(a.n1, a.n2), ParameterPoint(0.0, a.mu, 1.0),
                          parse_count(a.reps, "--reps"), a.seed,
                          parse_estimators(a.estimators)};
  job.validate();
  const RiskReport report = estimate_risk(job, a.workers);
  if (a.format == "csv") {
    std::cout << io::risk_csv(report);
  } else {
    std::cout << io::to_json(report).dump(2) << '\n';
  }
  return kOk;
}

struct SweepArgs {
  std::string mode = "mu";
  int n1 = 5;
  int n2 = 5;
  std::string grid = "0,0.2,0.4,0.6,0.8,1,1.2,1.4,1.6,1.8,2,2.2,2.4,2.6,2.8,3";
  int n_total = 20;
  double mu = 0.1;
  double reps = 100000;
  std::uint64_t seed = 1;
  std::string estimators = "MLE,UMVCUE,PLUGIN_U1,PLUGIN_U2";
  std::string out = "-";
  int workers = 0;
};

int run_sweep(const SweepArgs& a) {
  const auto estimators = parse_estimators(a.estimators);
  const std::uint64_t reps = parse_count(a.reps, "--reps");
  SweepResult result;
  if (a.mode == "mu") {
    const auto grid = parse_grid(a.grid);
    result = sweep_mu(DesignConfig(a.n1, a.n2), grid, reps, a.seed, estimators, a.workers);
  } else {
    result = sweep_information_fraction(a.n_total, a.mu, reps, a.seed, estimators, a.workers);
  }
  emit(io::sweep_csv(result), a.out);
  return kOk;
}

struct ValidateArgs {
  std::string level = "quick";
  double tolerance = 1e-8;
  double reps = 100000;
  std::uint64_t seed = 20240601;
  int workers = 0;
};

void print_check(bool pass, const std::string& text) {
  std::cout << (pass ? "PASS " : "FAIL ") << text << '\n';
}

int run_validate(const ValidateArgs& a) {
  bool all = true;

  const auto grid = oracle::correction_grid_check(a.tolerance, std::min(1e-12, a.tolerance));
  double worst_rel = 0.0;
  std::size_t failed = 0;
  for (const auto& g : grid) {
    if (!g.pass) {
      ++failed;
      std::cerr << "  correction mismatch at v*=" << g.v_star << " c=" << g.c
                << ": closed=" << io::format_double(g.closed_form)
                << " quadrature=" << io::format_double(g.quadrature) << '\n';
    }
    if (g.quadrature != 0.0) worst_rel = std::max(worst_rel, g.rel_err);
  }
  print_check(failed == 0, "correction closed form vs quadrature: " +
                               std::to_string(grid.size() - failed) + "/" +
                               std::to_string(grid.size()) + " grid points, worst rel err " +
                               io::format_double(worst_rel));
  all = all && failed == 0;

  if (a.level == "full") {
    const std::uint64_t reps = parse_count(a.reps, "--reps");
    const DesignConfig cfg(5, 5);
    auto describe = [](const oracle::ConditionalBiasReport& r) {
      std::string s;
      for (const auto& arm : r.arms) {
        s += " arm" + std::to_string(arm_number(arm.arm)) + ": bias " +
             io::format_double(arm.bias) + " (" + io::format_double(arm.bias / arm.se) +
             " SE, n=" + std::to_string(arm.count) + ")";
      }
      return s;
    };
    for (double mu : {0.0, 1.0}) {
      const auto r = oracle::conditional_unbiasedness_check(ParameterPoint(0.0, mu, 1.0), cfg,
                                                            reps, a.seed, EstimatorId::umvcue(),
                                                            a.workers);
      const bool pass = r.unbiased();
      print_check(pass, "UMVCUE conditionally unbiased at mu=" + io::format_double(mu) +
                            describe(r));
      all = all && pass;
    }
    const auto r = oracle::conditional_unbiasedness_check(ParameterPoint(0.0, 0.0, 1.0), cfg,
                                                          reps, a.seed, EstimatorId::mle(),
                                                          a.workers);
    const bool biased = r.arms[0].bias > r.n_se * r.arms[0].se &&
                        r.arms[1].bias > r.n_se * r.arms[1].se;
    print_check(biased, "MLE shows positive selection bias at mu=0" + describe(r));
    all = all && biased;
  }
  return all ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimation of the selected treatment mean in two-stage adaptive designs"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate mu_Q from stage-1/stage-2 CSV files");
  estimate->add_option("--stage1", est.stage1, "CSV with header 'arm,value'")->required();
  estimate->add_option("--stage2", est.stage2, "CSV with header 'value'")->required();
  estimate->add_option("--format", est.format)->check(CLI::IsMember({"json", "csv"}));
  estimate->add_option("--bayes-m", est.bayes_m, "Also report the Bayes rule with this m")
      ->check(CLI::PositiveNumber);
  estimate->add_option("--stage2-arm", est.stage2_arm,
                       "Arm the stage-2 data came from (checked against the selection rule)")
      ->check(CLI::IsMember({1, 2}));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo scaled MSE and bias at one point");
  simulate->add_option("--n1", sim.n1)->required();
  simulate->add_option("--n2", sim.n2)->required();
  simulate->add_option("--mu", sim.mu, "Normalized gap (mu2 - mu1) / sigma")->required();
  simulate->add_option("--reps", sim.reps);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--estimators", sim.estimators);
  simulate->add_option("--format", sim.format)->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--workers", sim.workers, "Default from SELMEAN_WORKERS");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Risk curves over mu or the information fraction");
  sweep->add_option("--mode", sw.mode)->check(CLI::IsMember({"mu", "fraction"}));
  sweep->add_option("--n1", sw.n1);
  sweep->add_option("--n2", sw.n2);
  sweep->add_option("--grid", sw.grid, "Comma-separated mu values (mode=mu)");
  sweep->add_option("--n-total", sw.n_total, "n1 + n2 (mode=fraction)");
  sweep->add_option("--mu", sw.mu, "Normalized gap (mode=fraction)");
  sweep->add_option("--reps", sw.reps);
  sweep->add_option("--seed", sw.seed);
  sweep->add_option("--estimators", sw.estimators);
  sweep->add_option("--out", sw.out, "Output CSV path, '-' for stdout");
  sweep->add_option("--workers", sw.workers);

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Run the oracle checks");
  validate->add_option("--level", val.level)->check(CLI::IsMember({"quick", "full"}));
  validate->add_option("--tolerance", val.tolerance,
                       "Relative tolerance of the correction grid check");
  validate->add_option("--reps", val.reps);
  validate->add_option("--seed", val.seed);
  validate->add_option("--workers", val.workers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*estimate) return run_estimate(est);
    if (*simulate) return run_simulate(sim);
    if (*sweep) return run_sweep(sw);
    if (*validate) return run_validate(val);
  } catch (const InvalidDataset& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.reason() == InvalidDataset::Reason::SelectionMismatch ? kModelError : kInputError;
  } catch (const DegenerateData& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kModelError;
  } catch (const ReplicationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kModelError;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kInputError;
}
