#include "doctest.h"
#include "support.hpp"

#include "roughflow/gallery.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/rough.hpp"
#include "roughflow/solvers.hpp"

#include <cmath>
#include <string>

using namespace roughflow;
using rft::vec;

TEST_CASE("every gallery entry has exact derivatives") {
  for (const auto& id : registry_ids()) {
    CAPTURE(id);
    const auto e = registry(id);
    CHECK(e.id == id);
    CHECK(e.x0.size() == e.system.d);
    CHECK(e.driver_spec.dim == e.system.m);
    const auto chk = validate_derivatives(e.system, 100, 2.0, 7, 1e-5);
    CAPTURE(chk.worst);
    CHECK(chk.pass);
    CHECK(chk.max_rel_error <= 1e-5);
  }
}

TEST_CASE("unknown ids list the registry") {
  try {
    registry("no-such-system");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const auto& id : registry_ids()) CHECK(msg.find(id) != std::string::npos);
  }
}

TEST_CASE("complex-square explodes at 1/z0") {
  const auto e = registry("complex-square");
  std::vector<double> radii;
  for (int k = 1; k <= 40; ++k) radii.push_back(std::ldexp(1.0, k));
  const auto g = uniform_grid(4.0, 1.0 / 1024);
  const SampledPath zero(g, Mat::Zero(2, static_cast<Eigen::Index>(g.size())));
  const auto tr = localize_solve(e.system, zero, vec({0.5, 0}), radii, 4.0);
  REQUIRE(tr.blowup_time);
  CHECK(*tr.blowup_time == doctest::Approx(2.0).epsilon(0.02));
  CHECK(*e.blowup_oracle(vec({0.5, 0})) == doctest::Approx(2.0));
  CHECK_FALSE(e.blowup_oracle(vec({-1, 0})).has_value());
}

TEST_CASE("gl09 oracle and simulation agree") {
  const auto e = registry("gl09");
  CHECK(*e.blowup_oracle(vec({1, 0})) == doctest::Approx(1.0));
  const auto tr = rde_solve(e.system, pure_quadratic_lift(2.0, e.driver_spec.mesh, 1), vec({1, 0}), 2.0);
  REQUIRE(tr.blowup_time);
  CHECK(*tr.blowup_time == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("elworthy stays finite over ten seeds") {
  const auto e = registry("elworthy");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DriverSpec s = e.driver_spec;
    s.seed = seed;
    const auto tr = rde_solve(e.system, ito_lift(s, 8), e.x0, 1.0);
    CHECK(tr.status == TrajectoryStatus::completed);
  }
}

TEST_CASE("comparison blow-up bound") {
  CHECK(comparison_blowup_bound(0.2, 0.15, 1.0) == doctest::Approx(20.0));
  double prev = 1e300;
  for (double n = 0.5; n < 10; n += 0.5) {
    const double t = comparison_blowup_bound(0.2, 0.15, n);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(comparison_blowup_bound(0.2, 0.2 - 1e-6, 1.0) > 1e5);
  CHECK_THROWS(comparison_blowup_bound(0.2, 0.2, 1.0));
}

TEST_CASE("sharp counterexample") {
  const double alpha = 0.2, mu = 0.15;
  const auto sc = sharp_counterexample(alpha, mu, vec({2, 0}));
  REQUIRE(sc.x.status == TrajectoryStatus::blown_up);
  CHECK(*sc.x.blowup_time <= sc.oracle_bound);
  CHECK(sc.xi_quadrature <= sc.oracle_bound);
  CHECK(sc.min_growth_ratio >= 1.0 - 1e-6);
  for (std::size_t i = 0; i < sc.z.size(); ++i)
    CHECK(sc.gamma.value(i).norm() == doctest::Approx(std::pow(sc.z.value(i).norm(), -mu)).epsilon(1e-14));
  CHECK(sc.gamma.values().rightCols<1>().norm() < 0.2);

  CHECK_THROWS(sharp_counterexample(alpha, mu, vec({0, 0})));
  CHECK_THROWS(sharp_counterexample(alpha, 0.05, vec({2, 0})));

  const double r1 = sharp_assembly_residual(alpha, mu, vec({2, 0}), 1.0 / 64, 1.0);
  const double r2 = sharp_assembly_residual(alpha, mu, vec({2, 0}), 1.0 / 256, 1.0);
  const double r3 = sharp_assembly_residual(alpha, mu, vec({2, 0}), 1.0 / 1024, 1.0);
  CHECK(r2 < r1);
  CHECK(r3 < r2);
}

TEST_CASE("sharp blow-up quadrature is below the comparison bound") {
  for (double n : {1.0, 2.0, 5.0}) CHECK(sharp_blowup_time(0.2, 0.15, n) <= comparison_blowup_bound(0.2, 0.15, n));
}

TEST_CASE("parameters override defaults") {
  const auto a = registry("free", {{"d", 3}});
  CHECK(a.system.d == 3);
  const auto r = registry("radial-rotation", {{"alpha", 0.5}});
  const Vec x = vec({2, 0});
  // b(x) = |x|^{1.5} J x
  CHECK(r.system.b(0, x).norm() == doctest::Approx(std::pow(2.0, 2.5)));
}
