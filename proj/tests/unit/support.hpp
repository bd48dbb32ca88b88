#pragma once

#include "roughflow/paths.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace rft {

using roughflow::Mat;
using roughflow::SampledPath;
using roughflow::Vec;

inline std::vector<double> grid(double T, std::size_t n) {
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = T * static_cast<double>(i) / static_cast<double>(n);
  return g;
}

inline SampledPath scalar_path(const std::vector<double>& t, const std::function<double(double)>& f) {
  Mat v(1, static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) v(0, static_cast<Eigen::Index>(i)) = f(t[i]);
  return SampledPath(t, v);
}

inline SampledPath random_scalar_path(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z;
  std::vector<double> t(n);
  Mat v(1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i);
    v(0, static_cast<Eigen::Index>(i)) = z(rng);
  }
  return SampledPath(t, v);
}

// t on [0,1], 2t - 1 afterwards: its increments have α'-norm ε^{1-α'} on [0, ε], ε ≤ 1.
inline double kink(double t) { return t <= 1.0 ? t : 2.0 * t - 1.0; }

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace rft

#include "roughflow/system.hpp"

namespace rft {

inline roughflow::Monomial mono(double c, std::vector<int> p) { return {c, std::move(p)}; }

// dx = b dt + σ dX on R^1 with polynomial coefficients.
inline roughflow::VectorFieldSystem scalar_poly(roughflow::Polynomial b, roughflow::Polynomial s) {
  roughflow::PolynomialSystemSpec spec;
  spec.drift = {std::move(b)};
  spec.sigma = {std::move(s)};
  return roughflow::polynomial_system(spec, "scalar");
}

}  // namespace rft
