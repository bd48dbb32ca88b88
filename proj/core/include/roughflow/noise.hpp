#pragma once

#include "roughflow/linalg.hpp"
#include "roughflow/paths.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace roughflow {

enum class DriverKind { brownian, fbm, levy, deterministic_file };

/// Jump-size law for the compound-Poisson part of a Lévy driver. All
/// samplers are symmetric, so truncating small jumps needs no compensator.
struct JumpSampler {
  enum class Kind { uniform_ball, truncated_gaussian, fixed };
  Kind kind = Kind::uniform_ball;
  double radius = 1.0;  // ball radius, or the cap for truncated_gaussian
  double scale = 1.0;   // per-coordinate std of truncated_gaussian
  double floor = 0.0;   // jumps with norm below this are dropped
  // kind == fixed: explicit jump times and sizes (intensity is ignored)
  std::vector<double> times;
  std::vector<Vec> sizes;
};

struct LevyParams {
  Vec drift;        // a
  Mat covariance;   // Σ
  double intensity = 0.0;
  JumpSampler jumps;
};

struct DriverSpec {
  DriverKind kind = DriverKind::brownian;
  int dim = 1;
  double horizon = 1.0;
  double mesh = 1.0 / 1024;
  std::uint64_t seed = 0;
  std::vector<double> hurst{0.5};  // fbm: one index per independent summand
  double jitter = 0.0;             // fbm: added to the increment variance
  LevyParams levy;
  std::string file;                // deterministic-file: CSV path

  /// Mesh 2^-level on the horizon's unit.
  static double dyadic_mesh(int level) { return std::ldexp(1.0, -level); }
};

/// Grid 0, h, 2h, ..., T (the last cell is shortened when T/h is not integral).
std::vector<double> uniform_grid(double horizon, double mesh);

/// Standard Brownian motion in R^dim. When T/mesh = N0 * 2^L (N0 odd) the
/// values on the N0-point skeleton are drawn first and refined by midpoint
/// Brownian bridges keyed on (seed, coordinate, level, index), so halving the
/// mesh leaves every existing value unchanged.
SampledPath brownian(const DriverSpec& spec);

/// Fractional Brownian motion (sum of independent fBMs if several Hurst
/// indices are given) by exact Cholesky factorisation of the increment
/// covariance. Uniform grids use the Durbin-Levinson recursion, which is the
/// Cholesky factor of the Toeplitz increment covariance; other grids use a
/// dense factorisation.
SampledPath fbm(const DriverSpec& spec);

/// Drift + Σ^{1/2} W + compound-Poisson jumps. Jump times are inserted as
/// grid points carrying the post-jump value.
SampledPath levy(const DriverSpec& spec);

/// Dispatch on spec.kind.
SampledPath generate(const DriverSpec& spec);

}  // namespace roughflow
