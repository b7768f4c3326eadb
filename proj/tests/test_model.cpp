#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "selmean/model.hpp"

using namespace selmean;

namespace {

TwoStageDataset hand_fixture() {
  TwoStageDataset d;
  d.arm1 = {1.0, 3.0};
  d.arm2 = {0.0, 2.0};
  d.stage2 = {2.0, 4.0};
  d.q = Arm::One;
  return d;
}

TwoStageDataset random_dataset(std::mt19937_64& rng, const DesignConfig& cfg, double mu1,
                               double mu2, double sigma) {
  std::normal_distribution<double> z;
  TwoStageDataset d;
  for (int i = 0; i < cfg.n1(); ++i) d.arm1.push_back(mu1 + sigma * z(rng));
  for (int i = 0; i < cfg.n1(); ++i) d.arm2.push_back(mu2 + sigma * z(rng));
  d.q = select_arm(sample_mean(d.arm1), sample_mean(d.arm2));
  const double mu = d.q == Arm::One ? mu1 : mu2;
  for (int i = 0; i < cfg.n2(); ++i) d.stage2.push_back(mu + sigma * z(rng));
  return d;
}

double u_statistic(const RBSummary& s, const DesignConfig& cfg) {
  const double n1 = cfg.n1();
  const double n2 = cfg.n2();
  const double n12 = n1 + n2;
  return std::sqrt(n2 * n12 / n1) * (s.ybar - s.z / n12) / std::sqrt(s.s_tilde_sq);
}

}  // namespace

TEST_CASE("design config admissibility") {
  CHECK_NOTHROW(DesignConfig(1, 2));
  CHECK_NOTHROW(DesignConfig(2, 1));
  CHECK_THROWS_AS(DesignConfig(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(DesignConfig(0, 5), std::invalid_argument);
  CHECK_THROWS_AS(DesignConfig(5, 0), std::invalid_argument);
  const DesignConfig cfg(5, 7);
  CHECK(cfg.pooled_df() == 14);
  CHECK(cfg.shape_c() == 7.0);
  CHECK(cfg.total_selected() == 12);
  CHECK(cfg.information_fraction() == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("parameter point") {
  const ParameterPoint p(3.0, 1.0, 2.0);
  CHECK(p.mu_norm() == 1.0);
  CHECK(p.mean(Arm::One) == 3.0);
  CHECK(selected_mean(p, Arm::Two) == 1.0);
  CHECK_THROWS_AS(ParameterPoint(0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ParameterPoint(std::nan(""), 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("selection rule sends ties to arm 2") {
  CHECK(select_arm(1.0, 0.5) == Arm::One);
  CHECK(select_arm(0.5, 1.0) == Arm::Two);
  CHECK(select_arm(0.7, 0.7) == Arm::Two);
}

TEST_CASE("hand-computed summary") {
  const DesignConfig cfg(2, 2);
  const RBSummary s = summarize(hand_fixture(), cfg);
  CHECK(s.q == Arm::One);
  CHECK(s.xbar_q == 2.0);
  CHECK(s.xbar_other == 1.0);
  CHECK(s.ybar == 3.0);
  CHECK(s.z == 10.0);
  CHECK(s.s_raw_sq == 34.0);
  CHECK(s.s_tilde_sq == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(s.c == 1.5);
  CHECK(s.d == 1.5);
  CHECK(s.v == doctest::Approx(3.0 / std::sqrt(7.0)).epsilon(1e-15));
  CHECK(s.v_star == 1.0);
  CHECK(s.s_pooled_sq == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.combined_mean(cfg) == 2.5);
}

TEST_CASE("dataset validation") {
  const DesignConfig cfg(2, 2);
  auto expect_reason = [&](const TwoStageDataset& d, InvalidDataset::Reason r) {
    try {
      validate_dataset(d, cfg);
      FAIL("expected InvalidDataset");
    } catch (const InvalidDataset& e) {
      CHECK(e.reason() == r);
    }
  };
  auto d = hand_fixture();
  d.arm2.push_back(1.0);
  expect_reason(d, InvalidDataset::Reason::LengthMismatch);
  d = hand_fixture();
  d.stage2.pop_back();
  expect_reason(d, InvalidDataset::Reason::LengthMismatch);
  d = hand_fixture();
  d.stage2[1] = std::numeric_limits<double>::infinity();
  expect_reason(d, InvalidDataset::Reason::NonFiniteValue);
  d = hand_fixture();
  d.arm1[0] = std::nan("");
  expect_reason(d, InvalidDataset::Reason::NonFiniteValue);
  d = hand_fixture();
  d.q = Arm::Two;
  expect_reason(d, InvalidDataset::Reason::SelectionMismatch);
  CHECK_THROWS_AS(summarize(d, cfg), InvalidDataset);

  // A tie must be labelled arm 2.
  TwoStageDataset tie{{1.0, 2.0}, {2.0, 1.0}, {0.0, 5.0}, Arm::One};
  expect_reason(tie, InvalidDataset::Reason::SelectionMismatch);
  tie.q = Arm::Two;
  CHECK_NOTHROW(summarize(tie, cfg));
}

TEST_CASE("degenerate data") {
  const DesignConfig cfg(3, 2);
  TwoStageDataset flat{{4.0, 4.0, 4.0}, {4.0, 4.0, 4.0}, {4.0, 4.0}, Arm::Two};
  CHECK_THROWS_AS(summarize(flat, cfg), DegenerateData);
  TwoStageDataset big{{1e8, 1e8, 1e8}, {1e8, 1e8, 1e8}, {1e8, 1e8}, Arm::Two};
  CHECK_THROWS_AS(summarize(big, cfg), DegenerateData);
  // Large location with genuine spread is fine.
  TwoStageDataset shifted{{1e8 + 1, 1e8 + 2, 1e8 + 3}, {1e8, 1e8 - 1, 1e8 + 1}, {1e8 + 2, 1e8},
                          Arm::One};
  CHECK_NOTHROW(summarize(shifted, cfg));
}

TEST_CASE("sum of squares decomposition and U < V on simulated data") {
  std::mt19937_64 rng(2024);
  const DesignConfig configs[] = {DesignConfig(1, 2), DesignConfig(2, 1), DesignConfig(5, 5),
                                  DesignConfig(15, 5), DesignConfig(3, 40)};
  int checked = 0;
  for (const auto& cfg : configs) {
    for (int t = 0; t < 20000; ++t) {
      const double mu2 = 0.5 * (t % 7);
      const auto d = random_dataset(rng, cfg, 0.0, mu2, 1.0 + (t % 3));
      const RBSummary s = summarize(d, cfg);
      const double n12 = cfg.total_selected();
      const double rhs = s.s_raw_sq - s.z * s.z / n12 - cfg.n1() * s.xbar_other * s.xbar_other;
      CHECK(std::abs(s.s_tilde_sq - rhs) <= 1e-9 * s.s_raw_sq);
      const double u = u_statistic(s, cfg);
      CHECK(u > -1.0);
      CHECK(u < 1.0);
      CHECK(u < s.v);
      CHECK(s.v > -1.0);
      CHECK(s.v_star <= 1.0);
      ++checked;
    }
  }
  CHECK(checked == 100000);
}

TEST_CASE("relabelling arms leaves the summary unchanged") {
  std::mt19937_64 rng(7);
  const DesignConfig cfg(4, 3);
  for (int t = 0; t < 1000; ++t) {
    auto d = random_dataset(rng, cfg, 0.3, 0.0, 1.0);
    const RBSummary s = summarize(d, cfg);
    TwoStageDataset swapped{d.arm2, d.arm1, d.stage2, other_arm(d.q)};
    if (sample_mean(d.arm1) == sample_mean(d.arm2)) continue;
    RBSummary t2 = summarize(swapped, cfg);
    CHECK(t2.q == other_arm(s.q));
    t2.q = s.q;
    CHECK(t2 == s);
  }
}

TEST_CASE("affine equivariance of the summary") {
  std::mt19937_64 rng(99);
  const DesignConfig cfg(6, 4);
  const double a = 3.5;
  const double b = -12.0;
  for (int t = 0; t < 1000; ++t) {
    const auto d = random_dataset(rng, cfg, 0.0, 0.2, 1.0);
    TwoStageDataset e = d;
    for (auto* xs : {&e.arm1, &e.arm2, &e.stage2}) {
      for (double& x : *xs) x = a * x + b;
    }
    const RBSummary s = summarize(d, cfg);
    const RBSummary r = summarize(e, cfg);
    CHECK(r.q == s.q);
    CHECK(r.z == doctest::Approx(a * s.z + b * cfg.total_selected()).epsilon(1e-12));
    CHECK(r.d == doctest::Approx(a * s.d).epsilon(1e-9));
    CHECK(r.s_tilde_sq == doctest::Approx(a * a * s.s_tilde_sq).epsilon(1e-10));
    CHECK(r.s_pooled_sq == doctest::Approx(a * a * s.s_pooled_sq).epsilon(1e-10));
    CHECK(std::abs(r.v - s.v) <= 1e-10);
  }
}
