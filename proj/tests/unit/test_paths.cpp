#include "doctest.h"
#include "support.hpp"

#include "roughflow/noise.hpp"
#include "roughflow/paths.hpp"

#include <cmath>
#include <random>

using namespace roughflow;
using rft::grid;
using rft::scalar_path;

TEST_CASE("sampled path validates its grid") {
  CHECK_THROWS(SampledPath({0.0}, Mat::Zero(1, 1)));
  CHECK_THROWS(SampledPath({0.0, 1.0, 1.0}, Mat::Zero(1, 3)));
  CHECK_THROWS(SampledPath({0.0, 1.0}, Mat::Zero(1, 3)));
  const auto p = scalar_path(grid(1.0, 8), [](double t) { return t; });
  CHECK(p.index_of(0.5) == 4);
  CHECK(p.index_at_or_before(0.3) == 2);
  CHECK_FALSE(p.find_index(0.3).has_value());
  CHECK(p.is_uniform());
}

TEST_CASE("holder_norm examples") {
  const auto t = grid(1.0, 256);
  CHECK(holder_norm(scalar_path(t, [](double) { return 4.0; }), 0.3) == 0.0);
  CHECK(holder_norm(scalar_path(t, [](double s) { return 3.0 * s; }), 0.5) == doctest::Approx(3.0).epsilon(1e-12));

  const auto k = scalar_path(grid(2.0, 512), rft::kink);
  CHECK(holder_norm(k, 0.5, {0.0, 0.25}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_WITH(holder_norm(k, 0.5, {0.1, 0.1}), "degenerate interval");
}

TEST_CASE("holder_norm properties on random paths") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = rft::random_scalar_path(rng, 40);
    const double inner = holder_norm(p, 0.5, {10, 20});
    const double outer = holder_norm(p, 0.5, {5, 30});
    CHECK(inner <= outer);
    // N_{α'} ≤ N_α |I|^{α-α'} for α' < α on the same interval
    const double len = 25.0;
    CHECK(holder_norm(p, 0.3, {5, 30}) <= holder_norm(p, 0.7, {5, 30}) * std::pow(len, 0.4) * (1 + 1e-12));
  }
}

TEST_CASE("two_param_holder_norm examples") {
  const auto g = grid(1.0, 64);
  const TwoParamProcess zero(g, 1, [](std::size_t, std::size_t) { return Vec::Zero(1); });
  CHECK(two_param_holder_norm(zero, 0.5, {0, 1}) == 0.0);
  const TwoParamProcess lin(g, 1, [&](std::size_t i, std::size_t j) { return Vec::Constant(1, g[j] - g[i]); });
  CHECK(two_param_holder_norm(lin, 1.0, {0, 1}) == doctest::Approx(1.0).epsilon(1e-12));

  const auto inc = TwoParamProcess::increments(scalar_path(grid(2.0, 512), rft::kink));
  CHECK(two_param_holder_norm(inc, 0.5, {0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inc.at(7, 7).norm() == 0.0);
}

TEST_CASE("holder_profile matches the closed form and is non-decreasing") {
  const auto inc = TwoParamProcess::increments(scalar_path(grid(2.0, 256), rft::kink));
  const auto prof = holder_profile(inc, 0.5, 0.0);
  double prev = 0.0;
  for (const auto& [eps, n] : prof) {
    if (eps <= 1.0) CHECK(n == doctest::Approx(std::sqrt(eps)).epsilon(1e-9));
    CHECK(n >= prev);
    prev = n;
  }
  const TwoParamProcess zero(grid(1.0, 16), 1, [](std::size_t, std::size_t) { return Vec::Zero(1); });
  for (const auto& [eps, n] : holder_profile(zero, 0.5, 0.0)) CHECK(n == 0.0);
  CHECK_THROWS(holder_profile(zero, 0.5, 0.3));
}

TEST_CASE("p_variation examples") {
  const auto t = grid(1.0, 32);
  CHECK(p_variation(scalar_path(t, [](double) { return 0.0; }), 2.0) == 0.0);
  const auto mono = scalar_path(t, [](double s) { return s * s + s; });
  CHECK(p_variation(mono, 2.0) == doctest::Approx(2.0).epsilon(1e-12));

  const SampledPath up_down({0, 1, 2}, Mat{{0.0, 1.0, 0.0}});
  CHECK(p_variation_bruteforce(up_down, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const SampledPath up({0, 1, 2}, Mat{{0.0, 1.0, 2.0}});
  CHECK(p_variation_bruteforce(up, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_WITH(p_variation_bruteforce(scalar_path(grid(1.0, 20), [](double s) { return s; }), 2.0),
                    "oracle limit exceeded");
  CHECK_THROWS(p_variation(mono, 0.5));
}

TEST_CASE("p_variation equals brute force on small random paths") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 60; ++rep) {
    const auto p = rft::random_scalar_path(rng, 2 + static_cast<std::size_t>(rep % 9));
    for (double q : {1.0, 1.5, 2.0, 3.0}) CHECK(p_variation(p, q) == p_variation_bruteforce(p, q));
  }
}

TEST_CASE("p_variation is non-increasing in p on small paths") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto p = rft::random_scalar_path(rng, 12);
    // scale so every increment is below 1
    const Mat v = p.values() / (4.0 * (p.values().maxCoeff() - p.values().minCoeff()));
    const SampledPath s(p.times(), v);
    double prev = p_variation(s, 1.0);
    for (double q : {1.5, 2.0, 3.0, 4.0}) {
      const double cur = p_variation(s, q);
      CHECK(cur <= prev * (1 + 1e-12));
      prev = cur;
    }
  }
}

TEST_CASE("holder_exponent_estimate examples") {
  CHECK(holder_exponent_estimate(scalar_path(grid(1.0, 4096), [](double s) { return 2 * s; })) ==
        doctest::Approx(1.0).epsilon(0.05));

  DriverSpec bm;
  bm.mesh = std::ldexp(1.0, -14);
  bm.seed = 3;
  const double hb = holder_exponent_estimate(brownian(bm));
  CHECK(hb >= 0.40);
  CHECK(hb <= 0.55);

  DriverSpec fs;
  fs.kind = DriverKind::fbm;
  fs.mesh = std::ldexp(1.0, -12);
  fs.hurst = {0.8};
  fs.seed = 3;
  const double hf = holder_exponent_estimate(fbm(fs));
  CHECK(hf >= 0.70);
  CHECK(hf <= 0.88);

  CHECK_THROWS(holder_exponent_estimate(scalar_path(grid(1.0, 32), [](double s) { return s; })));
}
