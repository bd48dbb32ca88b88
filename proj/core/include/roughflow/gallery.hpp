#pragma once

#include "roughflow/noise.hpp"
#include "roughflow/paths.hpp"
#include "roughflow/solvers.hpp"
#include "roughflow/system.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace roughflow {

/// How an entry is driven and integrated by default.
///   driver: "brownian", "fbm", "pure-quadratic" (X = 0, 𝕏_{s,t} = t - s) or "none" (γ ≡ 0)
///   solver: "ode", "young", "rde" (Itô lift of the Brownian driver) or "localize"
struct GalleryEntry {
  std::string id;
  VectorFieldSystem system;
  std::string driver = "brownian";
  DriverSpec driver_spec;
  std::string solver = "ode";
  Vec x0;
  /// Closed-form blow-up time from x0; nullopt when the entry is expected to
  /// stay finite. Empty function when there is no oracle.
  std::function<std::optional<double>(const Vec&)> blowup_oracle;
  std::string oracle_note;
  std::string notes;
};

using GalleryParams = std::map<std::string, double>;

/// Entries: elworthy, sheared-ou, gl09, complex-square, radial-rotation,
/// linear-ou, double-well, linear-growth, free, geometric-brownian.
/// Numeric parameters (e.g. "alpha", "C", "epsilon", "d") override defaults;
/// unknown ids throw with the list of known ids.
GalleryEntry registry(const std::string& id, const GalleryParams& params = {});
std::vector<std::string> registry_ids();

/// Upper bound on the blow-up time of u' = 2 u^{1+(α-μ)/2}, u_0 = ||z_0||²:
/// T* = u_0^{-(α-μ)/2} / (α - μ).
double comparison_blowup_bound(double alpha, double mu, double norm_z0);

/// Blow-up time of the z-equation by quadrature of dr / (r^{1+α-μ} q(r)^{1+α}),
/// q(r) = sqrt(1 + r^{-2(1+μ)}), from r = ||z_0|| to infinity.
double sharp_blowup_time(double alpha, double mu, double norm_z0);

/// z' = ||w||^{1+α} J w with w = z - ||z||^{-(1+μ)} J z, and the driver
/// γ_t = -||z_t||^{-(1+μ)} J z_t, so that x = z + γ solves
/// x' = ||x||^{1+α} J x + γ'.
struct SharpCounterexample {
  double alpha = 0.0;
  double mu = 0.0;
  SampledPath z;
  SampledPath gamma;
  Trajectory x;             // assembled z + γ; blown-up once ||z|| reaches z_cap
  VectorFieldSystem system; // radial-rotation with the same α
  double oracle_bound = 0.0;   // comparison_blowup_bound
  double xi_quadrature = 0.0;  // sharp_blowup_time
  double min_growth_ratio = 0.0;  // min over steps of ∂_t||z||² / (2 ||z||^{2+α-μ})
  std::size_t steps = 0;
};

/// Integrates the z-equation with RK4 (relative step cap on ||z||, landing on
/// every grid time k·mesh) until ||z|| ≥ z_cap. The radius ladder, if given,
/// is used for the assembled trajectory's level crossings.
SharpCounterexample sharp_counterexample(double alpha, double mu, const Vec& z0, double mesh = 1.0 / 512,
                                         double z_cap = 1e6, const std::vector<double>& radii = {});

/// max_i ||x_{i+1} - x_i - b(x_i) Δt - Δγ_i|| / Δt of the assembled solution on
/// [0, window], with the z-equation resolved on the given mesh.
double sharp_assembly_residual(double alpha, double mu, const Vec& z0, double mesh, double window);

}  // namespace roughflow
