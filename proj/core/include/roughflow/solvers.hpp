#pragma once

#include "roughflow/linalg.hpp"
#include "roughflow/paths.hpp"
#include "roughflow/rough.hpp"
#include "roughflow/system.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace roughflow {

/// Drift substepping and blow-up detection. Within a driver cell the drift
/// is integrated by Euler substeps h with ||b|| h <= displacement_cap *
/// max(1, ||x||); driver increments are never split.
struct StepControl {
  double displacement_cap = 1e-3;
  double step_floor = 1e-12;
  double blowup_threshold = 1e8;
  std::vector<double> radii;  // level-crossing ladder, increasing
  std::size_t max_substeps = 50'000'000;

  /// R (k+1) for k = 0 .. count-1.
  static std::vector<double> ladder(double R, int count);
};

enum class TrajectoryStatus { completed, blown_up, step_floor_reached };
const char* to_string(TrajectoryStatus s);

struct LevelCrossing {
  double radius;
  double time;
  std::size_t index;  // sample index in Trajectory::path at or after the crossing
};

struct Trajectory {
  SampledPath path;
  SampledPath eta;  // effective driver ∫σ(x)dX on the same grid (γ - γ_0 for additive noise)
  TrajectoryStatus status = TrajectoryStatus::completed;
  std::optional<double> blowup_time;  // last sample time before the threshold was crossed
  std::vector<LevelCrossing> level_crossings;
  std::vector<double> exit_times;     // localize_solve: t_k for each radius left
  StepControl control;
  std::string scheme;
  std::size_t substeps = 0;

  double max_norm() const;
};

/// dx = b(t, x) dt + dγ with explicit Euler on the driver grid.
Trajectory ode_solve(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x0, double T,
                     const StepControl& ctrl = {});

/// x_{i+1} = x_i + b Δt + σ(x_i) Δγ_i (first-order Young scheme).
Trajectory young_solve(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x0, double T,
                       const StepControl& ctrl = {});

/// Davie step x_{i+1} = x_i + b Δt + σ(x_i) X_{i,i+1} + (Dσ σ)(x_i) 𝕏_{i,i+1}.
Trajectory rde_solve(const VectorFieldSystem& sys, const RoughPath& rp, const Vec& x0, double T,
                     const StepControl& ctrl = {});

struct DerivativeFlow {
  Trajectory trajectory;
  SampledPath v;
};

using Driver = std::variant<SampledPath, RoughPath>;

/// Jointly steps x and the linearised flow v_{i+1} = v_i + Db(x_i) v_i Δt + Σ_k Dσ_k(x_i) v_i ΔX^k.
DerivativeFlow derivative_flow(const VectorFieldSystem& sys, const Driver& driver, const Vec& x0, const Vec& v0,
                               double T, const StepControl& ctrl = {});

/// Solves with the radially clamped drift b^k(t, x) = b(t, R_k x/||x||) for
/// ||x|| > R_k, moving to the next radius at each exit time
/// t_k = inf{t : ||x_t|| > R_k}. Blow-up is declared when the last radius is
/// left before T.
Trajectory localize_solve(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x0,
                          const std::vector<double>& radii, double T, const StepControl& ctrl = {});

struct FlowSummary {
  Vec x0;
  TrajectoryStatus status;
  std::optional<double> blowup_time;
  Vec endpoint;
  double end_time;
  double max_norm;
};

struct NeighborGap {
  std::size_t i, j;
  double initial_distance;
  double endpoint_distance;  // NaN when either trajectory blew up
};

struct FlowGrid {
  std::vector<FlowSummary> summaries;
  std::vector<NeighborGap> neighbors;
};

/// One trajectory per start under a shared driver realisation. Neighbours are
/// pairs of starts at minimal mutual distance. Runs on a bounded thread pool.
FlowGrid flow_grid(const VectorFieldSystem& sys, const Driver& driver, const std::vector<Vec>& starts, double T,
                   const StepControl& ctrl = {}, unsigned threads = 0);

/// Bounded worker pool: calls fn(i) for i in [0, n).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace roughflow
