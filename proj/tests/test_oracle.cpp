#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "selmean/estimators.hpp"
#include "selmean/oracle.hpp"

using namespace selmean;
using namespace selmean::oracle;

TEST_CASE("Gauss-Legendre rule") {
  const auto& gl = gauss_legendre16();
  double wsum = 0.0;
  for (int i = 0; i < 16; ++i) {
    wsum += gl.weights[i];
    CHECK(gl.nodes[i] > -1.0);
    CHECK(gl.nodes[i] < 1.0);
    CHECK(gl.weights[i] > 0.0);
  }
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-15));
  // Exact for polynomials up to degree 31.
  for (int k = 0; k <= 31; ++k) {
    const double got = composite_gl16([k](double x) { return std::pow(x, k); }, -1.0, 1.0, 1);
    const double want = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
    CHECK(std::abs(got - want) <= 1e-14);
  }
  CHECK(composite_gl16([](double x) { return std::exp(x); }, 0.0, 1.0, 4) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
}

TEST_CASE("quadrature matches high-precision references") {
  // 40-digit references of the ratio of integrals.
  CHECK(conditional_mean_u_quadrature(0.5, 1.5) ==
        doctest::Approx(-0.17132680415009121146).epsilon(1e-12));
  CHECK(conditional_mean_u_quadrature(-0.9, 2.5) ==
        doctest::Approx(-0.9289248538063169784).epsilon(1e-12));
  CHECK(conditional_mean_u_quadrature(0.3, 8.5) ==
        doctest::Approx(-0.047844823937543665679).epsilon(1e-11));
  CHECK(conditional_mean_u_quadrature(0.9, 0.5) ==
        doctest::Approx(-0.16200677477697524544).epsilon(1e-12));
  CHECK(conditional_mean_u_quadrature(1.0, 4.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("closed form matches the same references") {
  CHECK(closed_form_correction(0.5, 1.5) ==
        doctest::Approx(-0.17132680415009121146).epsilon(1e-13));
  CHECK(closed_form_correction(-0.9, 2.5) ==
        doctest::Approx(-0.9289248538063169784).epsilon(1e-13));
  CHECK(closed_form_correction(0.3, 8.5) ==
        doctest::Approx(-0.047844823937543665679).epsilon(1e-13));
  CHECK(closed_form_correction(0.9, 0.5) ==
        doctest::Approx(-0.16200677477697524544).epsilon(1e-13));
  CHECK(closed_form_correction(-0.99, 48.5) ==
        doctest::Approx(-0.99020295977500664543).epsilon(1e-12));
  CHECK(closed_form_correction(0.2, 3.0) == umvcue_correction(0.2, 3.0));
}

TEST_CASE("validation grid") {
  const auto vs = validation_v_grid();
  REQUIRE(vs.size() == 22);
  CHECK(vs.front() == -0.99);
  CHECK(vs.back() == 1.0);
  CHECK(validation_c_grid().size() == 6);

  const auto checks = correction_grid_check();
  CHECK(checks.size() == vs.size() * validation_c_grid().size());
  double worst = 0.0;
  for (const auto& c : checks) {
    CHECK_MESSAGE(c.pass, "v*=", c.v_star, " c=", c.c, " closed=", c.closed_form,
                  " quad=", c.quadrature);
    if (c.v_star < 1.0) worst = std::max(worst, c.rel_err);
  }
  MESSAGE("worst relative error ", worst);

  // An impossible tolerance must be reported, not hidden.
  bool any_fail = false;
  for (const auto& c : correction_grid_check(-1.0, -1.0)) any_fail = any_fail || !c.pass;
  CHECK(any_fail);
}

TEST_CASE("quadrature budget exhaustion throws") {
  QuadratureSpec spec;
  spec.rel_tol = 1e-15;
  spec.max_panels = 2;
  CHECK_THROWS_AS(conditional_mean_u_quadrature(0.3, 48.5, spec), ToleranceNotMet);
}

TEST_CASE("conditional unbiasedness of the UMVCUE") {
  const DesignConfig cfg(5, 5);
  for (double mu : {0.0, 0.5}) {
    const ParameterPoint p(0.0, mu, 1.0);
    const auto rep = conditional_unbiasedness_check(p, cfg, 40000, 77, EstimatorId::umvcue(), 1);
    CHECK(rep.arms[0].count + rep.arms[1].count == 40000);
    CHECK(rep.arms[0].arm == Arm::One);
    CHECK(rep.arms[1].arm == Arm::Two);
    CHECK_MESSAGE(rep.unbiased(), "bias1=", rep.arms[0].bias, " se1=", rep.arms[0].se,
                  " bias2=", rep.arms[1].bias, " se2=", rep.arms[1].se);
  }
}

TEST_CASE("conditional bias of the MLE is detected") {
  const DesignConfig cfg(5, 5);
  const ParameterPoint p(0.0, 0.0, 1.0);
  const auto rep = conditional_unbiasedness_check(p, cfg, 40000, 78, EstimatorId::mle(), 1);
  CHECK_FALSE(rep.unbiased());
  CHECK(rep.arms[0].bias > 4.0 * rep.arms[0].se);
  CHECK(rep.arms[1].bias > 4.0 * rep.arms[1].se);
}

TEST_CASE("conditional check preconditions") {
  const DesignConfig cfg(5, 5);
  CHECK_THROWS_AS(conditional_unbiasedness_check(ParameterPoint(0, 0, 1), cfg, 9999, 1),
                  std::invalid_argument);
  // Arm 1 is essentially never selected here.
  try {
    conditional_unbiasedness_check(ParameterPoint(0.0, 20.0, 1.0), cfg, 10000, 1);
    FAIL("expected InsufficientConditionalSample");
  } catch (const InsufficientConditionalSample& e) {
    CHECK(e.arm() == Arm::One);
    CHECK(e.count() < 100);
  }
}
