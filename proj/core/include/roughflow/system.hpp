#pragma once

#include "roughflow/linalg.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace roughflow {

/// Drift b(t, x) and diffusion σ(x) : R^d -> L(R^m, R^d) with exact
/// derivatives. Tensor layouts: Dsigma(x) has shape (d, m, d) with entry
/// (a, b, k) = ∂_k σ_{ab}; D2sigma(x) has shape (d, m, d, d) with entry
/// (a, b, k, l) = ∂_k ∂_l σ_{ab}.
struct VectorFieldSystem {
  std::string name;
  int d = 1;
  int m = 1;
  std::function<Vec(double, const Vec&)> b;
  std::function<Mat(const Vec&)> sigma;
  std::function<Tensor(const Vec&)> Dsigma;
  std::function<Tensor(const Vec&)> D2sigma;
  std::function<Mat(double, const Vec&)> Db;  // optional Jacobian of b
  bool additive_identity = false;             // σ ≡ Id (requires m = d)
  std::string representation = "named-gallery";
};

/// Gubinelli derivative of σ(x) along the solution: a d × (m·m) matrix whose
/// column b·m + c is Σ_k ∂_k σ_{·b}(x) σ_{kc}(x).
Mat gubinelli(const VectorFieldSystem& sys, const Vec& x);

/// dx = b(t, x) dt + dγ, i.e. σ ≡ Id on R^d.
VectorFieldSystem additive_system(std::string name, int d, std::function<Vec(double, const Vec&)> b,
                                  std::function<Mat(double, const Vec&)> Db = {});

struct DerivativeCheck {
  double max_rel_error = 0.0;  // worst over points and derivatives
  std::string worst;           // which derivative attained it
  bool pass = true;
};

/// Compares Dσ, D²σ and Db (when present) with central finite differences at
/// `points` pseudo-random states in the ball of the given radius.
/// Relative error is ||FD - exact|| / max(1, ||exact||) in Frobenius norm.
DerivativeCheck validate_derivatives(const VectorFieldSystem& sys, int points = 100, double radius = 2.0,
                                     std::uint64_t seed = 7, double tol = 1e-5);

struct Monomial {
  double coef = 0.0;
  std::vector<int> powers;  // one exponent per state coordinate
};
using Polynomial = std::vector<Monomial>;

/// Polynomial coefficients: drift[a] is b_a(x); sigma[a * m + b] is σ_{ab}(x).
struct PolynomialSystemSpec {
  int d = 1;
  int m = 1;
  std::vector<Polynomial> drift;
  std::vector<Polynomial> sigma;
};

double eval_polynomial(const Polynomial& p, const Vec& x);
Polynomial differentiate(const Polynomial& p, int k);

/// Builds a system whose derivatives are exact symbolic derivatives of the
/// polynomial coefficients, then validates them by finite differences.
VectorFieldSystem polynomial_system(const PolynomialSystemSpec& spec, const std::string& name = "polynomial");

}  // namespace roughflow
