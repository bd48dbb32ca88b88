#include "doctest.h"
#include "support.hpp"

#include "roughflow/gallery.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/rough.hpp"
#include "roughflow/solvers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace roughflow;
using rft::mono;
using rft::vec;

namespace {

SampledPath bm(int dim, std::uint64_t seed, double mesh = 1.0 / 1024, double T = 1.0) {
  DriverSpec s;
  s.dim = dim;
  s.seed = seed;
  s.mesh = mesh;
  s.horizon = T;
  return brownian(s);
}

SampledPath zero_driver(int dim, double T, double mesh) {
  const auto g = uniform_grid(T, mesh);
  return SampledPath(g, Mat::Zero(dim, static_cast<Eigen::Index>(g.size())));
}

VectorFieldSystem linear_ou(int d) {
  return additive_system("ou", d, [](double, const Vec& x) { return Vec(-x); },
                         [d](double, const Vec&) { return Mat(-Mat::Identity(d, d)); });
}

}  // namespace

TEST_CASE("ode_solve with zero drift reproduces the driver") {
  const auto g = bm(2, 1);
  const auto free = additive_system("free", 2, [](double, const Vec& x) { return Vec(Vec::Zero(x.size())); });
  const Vec x0 = vec({0.5, -1.0});
  const auto tr = ode_solve(free, g, x0, 1.0);
  REQUIRE(tr.status == TrajectoryStatus::completed);
  // x_{i+1} = x_i + Δγ_i is accumulated in floating point, so agreement is to rounding
  for (std::size_t i = 0; i < g.size(); ++i) CHECK((tr.path.value(i) - (x0 + g.increment(0, i))).norm() <= 1e-13);
}

TEST_CASE("ode_solve linear decay") {
  const auto tr = ode_solve(linear_ou(1), zero_driver(1, 1.0, std::ldexp(1.0, -10)), vec({1.0}), 1.0);
  CHECK(tr.path.values()(0, Eigen::last) == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("young_solve") {
  const auto g = bm(2, 2);
  const auto ou = linear_ou(2);
  const auto a = ode_solve(ou, g, vec({1, 1}), 1.0), b = young_solve(ou, g, vec({1, 1}), 1.0);
  CHECK((a.path.values().array() == b.path.values().array()).all());

  const auto t = rft::grid(1.0, 4096);
  const auto lin = rft::scalar_poly({}, {mono(1.0, {1})});
  const auto e = young_solve(lin, rft::scalar_path(t, [](double s) { return s; }), vec({1.0}), 1.0);
  CHECK(e.path.values()(0, Eigen::last) == doctest::Approx(std::exp(1.0)).epsilon(0.01));
}

TEST_CASE("young_solve fbm refinement diagnostic") {
  DriverSpec s;
  s.kind = DriverKind::fbm;
  s.hurst = {0.75};
  s.seed = 6;
  const auto lin = rft::scalar_poly({}, {mono(1.0, {1})});
  s.mesh = std::ldexp(1.0, -12);
  const auto fine = fbm(s);
  // coarse path: the fine one restricted to every fourth point, so both see the same realisation
  std::vector<double> ct;
  std::vector<Vec> cv;
  for (std::size_t i = 0; i < fine.size(); i += 4) {
    ct.push_back(fine.time(i));
    cv.push_back(fine.value(i));
  }
  const double xf = young_solve(lin, fine, vec({1.0}), 1.0).path.values()(0, Eigen::last);
  const double xc = young_solve(lin, SampledPath(ct, cv), vec({1.0}), 1.0).path.values()(0, Eigen::last);
  MESSAGE("fbm H=0.75 young endpoints: mesh 2^-10 ", xc, ", mesh 2^-12 ", xf);
  CHECK(std::abs(xf - xc) <= 5 * std::pow(2.0, -10 * (2 * 0.7 - 1)) * std::max(1.0, std::abs(xf)));
}

TEST_CASE("rde_solve with constant sigma is exact") {
  DriverSpec s;
  s.dim = 2;
  s.seed = 3;
  s.mesh = 1.0 / 256;
  const auto rp = ito_lift(s, 4);
  PolynomialSystemSpec ps;
  ps.d = 2;
  ps.m = 2;
  ps.drift = {{}, {}};
  ps.sigma = {{mono(1.0, {0, 0})}, {mono(2.0, {0, 0})}, {mono(-1.0, {0, 0})}, {mono(0.5, {0, 0})}};
  const auto sys = polynomial_system(ps);
  const Vec x0 = vec({1, 2});
  const auto tr = rde_solve(sys, rp, x0, 1.0);
  Mat C(2, 2);
  C << 1, 2, -1, 0.5;
  const Vec expect = x0 + C * rp.level1().increment(0, rp.size() - 1);
  CHECK((tr.path.values().rightCols<1>() - expect).norm() <= 1e-12);
}

TEST_CASE("rde_solve with zero level 2 equals young_solve") {
  DriverSpec s;
  s.seed = 5;
  s.mesh = 1.0 / 512;
  auto rp = ito_lift(s, 8);
  for (auto& m : rp.level2_mut()) m.setZero();
  const auto sys = rft::scalar_poly({mono(-0.5, {1})}, {mono(1.0, {1}), mono(0.2, {0})});
  const auto a = rde_solve(sys, rp, vec({1.0}), 1.0), b = young_solve(sys, rp.level1(), vec({1.0}), 1.0);
  CHECK((a.path.values() - b.path.values()).norm() <= 1e-14);
}

TEST_CASE("rde_solve on the pure quadratic driver reduces to x1' = x1^2") {
  const auto e = registry("gl09");
  const auto tr = rde_solve(e.system, pure_quadratic_lift(2.0, std::ldexp(1.0, -12), 1), vec({1, 0}), 2.0);
  REQUIRE(tr.status == TrajectoryStatus::blown_up);
  CHECK(*tr.blowup_time == doctest::Approx(1.0).epsilon(0.02));
  CHECK(tr.path.values().rightCols<1>().norm() >= tr.control.blowup_threshold);
}

TEST_CASE("raising the blow-up threshold never moves the blow-up earlier") {
  const auto e = registry("complex-square");
  const auto drv = zero_driver(2, 4.0, 1.0 / 1024);
  double prev = 0.0;
  for (double thr : {1e3, 1e4, 1e5, 1e6, 1e7, 1e8}) {
    StepControl c;
    c.blowup_threshold = thr;
    const auto tr = ode_solve(e.system, drv, vec({1, 0}), 4.0, c);
    REQUIRE(tr.blowup_time);
    CHECK(*tr.blowup_time >= prev);
    prev = *tr.blowup_time;
  }
}

TEST_CASE("level crossings are monotone and land beyond their radius") {
  const auto e = registry("linear-growth");
  StepControl c;
  c.radii = StepControl::ladder(1.5, 20);
  const auto tr = ode_solve(e.system, bm(2, 4, 1.0 / 1024, 5.0), vec({1, 0}), 5.0, c);
  REQUIRE(!tr.level_crossings.empty());
  for (std::size_t k = 1; k < tr.level_crossings.size(); ++k) {
    CHECK(tr.level_crossings[k].radius > tr.level_crossings[k - 1].radius);
    CHECK(tr.level_crossings[k].time >= tr.level_crossings[k - 1].time);
  }
  for (const auto& lc : tr.level_crossings) CHECK(tr.path.value(lc.index).norm() >= lc.radius);
}

TEST_CASE("derivative flow") {
  Mat A(2, 2);
  A << -1, 2, -0.5, 0.3;
  PolynomialSystemSpec ps;
  ps.d = 2;
  ps.m = 1;
  ps.drift = {{mono(A(0, 0), {1, 0}), mono(A(0, 1), {0, 1})}, {mono(A(1, 0), {1, 0}), mono(A(1, 1), {0, 1})}};
  ps.sigma = {{}, {}};
  const auto sys = polynomial_system(ps);
  const Vec v0 = vec({1, -1});
  const auto df = derivative_flow(sys, zero_driver(1, 1.0, std::ldexp(1.0, -10)), vec({0.2, 0.1}), v0, 1.0);
  // exp(A) by eigendecomposition
  Eigen::EigenSolver<Mat> es(A);
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd D = es.eigenvalues().array().exp().matrix().asDiagonal();
  const Mat expA = (V * D * V.inverse()).real();
  CHECK((df.v.values().rightCols<1>() - expA * v0).norm() <= 1e-3 * (expA * v0).norm());

  const auto free = additive_system("free", 2, [](double, const Vec& x) { return Vec(Vec::Zero(x.size())); },
                                    [](double, const Vec&) { return Mat(Mat::Zero(2, 2)); });
  const auto df2 = derivative_flow(free, bm(2, 8), vec({0, 0}), v0, 1.0);
  for (std::size_t i = 0; i < df2.v.size(); ++i) CHECK(df2.v.value(i) == v0);

  auto nodb = free;
  nodb.Db = nullptr;
  CHECK_THROWS_WITH(derivative_flow(nodb, bm(2, 8), vec({0, 0}), v0, 1.0), "derivative data unavailable");
}

TEST_CASE("derivative flow along the Elworthy system") {
  const auto e = registry("elworthy");
  DriverSpec s = e.driver_spec;
  s.mesh = 1.0 / 1024;
  const auto df = derivative_flow(e.system, brownian(s), e.x0, vec({1, 0}), 1.0);
  CHECK(df.trajectory.status == TrajectoryStatus::completed);
  CHECK(std::isfinite(df.v.values().norm()));
}

TEST_CASE("localize_solve") {
  // the last radius sits below the blow-up threshold, so blow-up comes from leaving every shell
  std::vector<double> radii;
  for (int k = 1; k <= 20; ++k) radii.push_back(std::ldexp(1.0, k));
  const auto cs = registry("complex-square");
  const auto drv = zero_driver(2, 10.0, 1.0 / 1024);
  const auto up = localize_solve(cs.system, drv, vec({1, 0}), radii, 10.0);
  REQUIRE(up.status == TrajectoryStatus::blown_up);
  CHECK(*up.blowup_time == doctest::Approx(1.0).epsilon(0.02));
  CHECK(up.exit_times.size() == radii.size());
  for (std::size_t k = 1; k < up.exit_times.size(); ++k) CHECK(up.exit_times[k] >= up.exit_times[k - 1]);

  const auto down = localize_solve(cs.system, drv, vec({-1, 0}), radii, 10.0);
  CHECK(down.status == TrajectoryStatus::completed);

  // clamps that never bind leave the solution unchanged
  const auto ou = linear_ou(2);
  const auto g = bm(2, 17);
  const auto direct = ode_solve(ou, g, vec({1, 0}), 1.0);
  const auto local = localize_solve(ou, g, vec({1, 0}), {1e3, 1e4}, 1.0);
  CHECK((direct.path.values() - local.path.values()).cwiseAbs().maxCoeff() <= 1e-8);

  CHECK_THROWS(localize_solve(ou, g, vec({1, 0}), {4, 2}, 1.0));
}

TEST_CASE("flow_grid contraction and discontinuous explosion time") {
  const auto ou = linear_ou(1);
  std::vector<Vec> starts;
  for (int i = 0; i <= 8; ++i) starts.push_back(vec({-2.0 + 0.5 * i}));
  const auto fg = flow_grid(ou, bm(1, 3), starts, 1.0, {}, 2);
  REQUIRE(!fg.neighbors.empty());
  for (const auto& nb : fg.neighbors) CHECK(nb.endpoint_distance <= nb.initial_distance);

  const auto cs = registry("complex-square");
  std::vector<Vec> plane;
  for (double x : {0.5, 1.0})
    for (double y : {-0.25, 0.0, 0.25}) plane.push_back(vec({x, y}));
  const auto g2 = flow_grid(cs.system, zero_driver(2, 3.0, 1.0 / 1024), plane, 3.0);
  for (const auto& s : g2.summaries) CHECK((s.status != TrajectoryStatus::completed) == (s.x0(1) == 0.0));
}

TEST_CASE("flow_grid on the Elworthy system stays finite") {
  const auto e = registry("elworthy");
  std::vector<Vec> starts;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) starts.push_back(vec({-0.35 + 0.0875 * i, -0.35 + 0.0875 * j}));
  DriverSpec s = e.driver_spec;
  s.seed = 0;
  const auto rp = ito_lift(s, 8);
  const auto fg = flow_grid(e.system, rp, starts, 1.0);
  for (const auto& f : fg.summaries) CHECK(f.status == TrajectoryStatus::completed);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}
