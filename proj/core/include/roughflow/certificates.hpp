#pragma once

#include "roughflow/linalg.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/paths.hpp"
#include "roughflow/solvers.hpp"
#include "roughflow/system.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace roughflow {

/// Non-decreasing control function with a serialisable description.
/// Kinds: "affine" c0 + c1 s (default 1 + s), "log-affine" (1 + s) log(e + s),
/// "identity" s, "constant" c0, "power" c1 s^q.
struct Control {
  std::string kind = "affine";
  double c0 = 1.0;
  double c1 = 1.0;
  double q = 1.0;

  double operator()(double s) const;
  std::string describe() const;

  static Control one_plus_s() { return {}; }
  static Control log_affine() { return {"log-affine", 1, 1, 1}; }
  static Control identity() { return {"identity", 0, 1, 1}; }
  static Control constant(double c) { return {"constant", c, 0, 1}; }
  static Control power(double c, double q) { return {"power", 0, c, q}; }
};

struct GrowthSpec {
  Control f;
  double beta = 1.4;
  double kappa = 0.0;
  double theta = 0.0;
  double alpha = 0.5;
  double a = 1.0;
  double b_a_T = 0.0;

  /// Checks β ∈ (1,2), θ ∈ [0,1), α ∈ (0,1], a > 0 and f non-decreasing on a ladder.
  void validate() const;
};

struct StateSample {
  double t = 0.0;
  Vec x;
};

/// Samples on spheres of the given radii along ± coordinate axes and
/// deterministic pseudo-random directions.
std::vector<StateSample> sphere_samples(int d, const std::vector<double>& radii, int directions = 16,
                                        std::uint64_t seed = 3);

struct ViolationRecord {
  double worst_margin = -std::numeric_limits<double>::infinity();  // max of lhs - rhs
  Vec worst_x;
  double worst_t = 0.0;
  bool pass = true;
  std::size_t samples = 0;
};

/// max ⟨x/||x||, b(t,x)⟩ - f(||x||).
ViolationRecord check_radial_growth(const VectorFieldSystem& sys, const Control& f, const std::vector<StateSample>& samples);
/// max ||b - ⟨x/||x||, b⟩ x/||x|| || - (1 + ||x||) f(||x||)^β.
ViolationRecord check_orthogonal_growth(const VectorFieldSystem& sys, const Control& f, double beta,
                                        const std::vector<StateSample>& samples);

struct NamedViolation {
  std::string condition;
  ViolationRecord record;
};

/// ||b|| ≤ f^{1+κα} and ||D^n σ|| ≤ f^{(θ-nκ)α} for n = 0, 1, 2 (Young
/// conditions are the n ≤ 1 cases with the same bounds).
std::vector<NamedViolation> check_rde_growth(const VectorFieldSystem& sys, const GrowthSpec& spec,
                                             const std::vector<StateSample>& samples);

/// R₀ = (2K+1) + sqrt((2K+1)² + 2K(2 + b_a^T)).
double compute_R0(double K, double b_a_T);
/// Quadratic form equivalent to the level-crossing inequality; ≥ 0 is required.
double crossing_quadratic(double R, double K, double b_a_T, int k);
/// δ_k = min{1, 1/f(R(k+1)), (a/K)^{1/(β-1)}}.
double compute_delta(const GrowthSpec& spec, double R, double K, int k);

/// sup ||b(t,x)|| over the ball of radius a (sampled on spheres of radius a·j/4).
double estimate_b_a_T(const VectorFieldSystem& sys, double a, double T);

/// ψ(N) = Σ_{k ≤ N+1} δ_k tabulated at N = -2, -1, 0, ... (ψ(-2) = 0) with
/// linear interpolation. ψ⁻¹ inverts it; beyond the table it continues with
/// the last increment, which under-estimates the true inverse.
struct PsiEnvelope {
  std::vector<double> deltas;  // δ_0, δ_1, ...
  std::vector<double> psi;     // psi[j] = ψ(j - 2)
  bool exhausted = false;      // Σδ_k appears to converge below the horizon
  double horizon = 0.0;

  double operator()(double N) const;
  double inverse(double t) const;
  /// Level-count envelope ψ⁻¹(t) + 3 ≥ 1, used as the growth bound shape.
  double level_bound(double t) const { return inverse(t) + 3.0; }
};

/// Tabulates at least k_max levels and keeps extending (up to max_levels)
/// until ψ reaches the horizon.
PsiEnvelope psi_envelope(const GrowthSpec& spec, double R, double K, int k_max, double horizon = 0.0,
                         std::size_t max_levels = std::size_t{1} << 22);

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

struct LevelRecord {
  int k = 0;
  double radius_from = 0.0;  // R k
  double radius_to = 0.0;    // R (k+1)
  double delta = 0.0;
  double tau_from = 0.0;
  double tau_to = 0.0;
  double gap = 0.0;
  double oscillation = 0.0;  // sup_{t ≤ σ^k ∧ δ_k} ||η_{τ+t} - η_τ|| (left limit at τ)
  double bound = 0.0;        // K δ_k^{β-1}
  double window_sup_norm = 0.0;  // sup ||x|| over the audited window
  bool gap_ok = false;
  bool interactive_ok = false;
  Verdict verdict = Verdict::inconclusive;
};

struct CertificateReport {
  double R = 0.0;
  double K = 0.0;
  double R0 = 0.0;
  double b_a_T = 0.0;
  std::string K_method;
  std::vector<LevelRecord> levels;
  PsiEnvelope envelope;
  Verdict overall = Verdict::inconclusive;
  std::string reason;
  std::string trajectory_status;

  /// Levels whose interactive relation held but whose gap did not exceed δ_k.
  std::size_t lemma_violations() const;
};

/// Discrete (β-1)-Hölder seminorm of η on [0, T].
double estimate_K(const SampledPath& eta, double beta);

/// Audits every observed level k (those with ||x_0|| ≤ R k and τ^{R(k+1)} observed).
CertificateReport crossing_audit(const Trajectory& traj, const SampledPath& eta, const GrowthSpec& spec, double R,
                                 double K);

struct Lemma33Result {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs
  bool assumption_violation = false;
  std::string detail;
};

/// ||x_T - γ_T||² against ||x_0||² + 2∫ f(||x||)(||x|| + ||γ||) + 2∫ ||γ|| (sup_{||y||≤||γ||} ||b|| + (1+||x||) f^β)
/// with γ shifted so that γ_0 = 0; trapezoidal quadrature on the trajectory grid.
Lemma33Result lemma33_bound_check(const Trajectory& traj, const SampledPath& gamma, const VectorFieldSystem& sys,
                                  const GrowthSpec& spec);

struct PvarLevel {
  int k;
  double delta;
  double oscillation;
  double gap;
  bool bad;
  bool gap_ok;
};

struct PvarReport {
  double R = 0.0;
  double p = 0.0;
  std::vector<PvarLevel> levels;
  double bad_sum = 0.0;    // Σ δ_{k_n} over bad levels
  double pvar_bound = 0.0; // 1 + ||γ||_{1/(β-1)-var}^{1/(β-1)}
  bool bound_ok = true;
  bool good_levels_ok = true;
  Verdict overall = Verdict::inconclusive;
};

/// Bad levels are those with oscillation ≥ δ_k^{β-1} (K = 1).
PvarReport pvar_audit(const Trajectory& traj, const SampledPath& gamma, const GrowthSpec& spec, double p,
                      std::optional<double> R = std::nullopt);

struct PropagationStart {
  Vec x0;
  std::vector<PvarLevel> levels;  // oscillation unused; delta = 1/f(R(k+1))
};

struct PropagationReport {
  double R = 0.0;
  bool assumption_ok = true;
  double worst_pair_margin = 0.0;
  std::size_t crossings = 0;
  std::size_t violations = 0;
  std::vector<PropagationStart> starts;
  Verdict overall = Verdict::inconclusive;
  std::string reason;
};

/// Checks ⟨b(x) - b(y), x - y⟩ ≤ f(||x-y||)||x-y|| on sampled pairs, then
/// audits the difference-norm ladder of x^{x} - x^{x_ref} with R > 2 + √3.
PropagationReport one_point_propagation_audit(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x_ref,
                                              const std::vector<Vec>& starts, double T, const Control& f,
                                              double R = 4.0, const StepControl& ctrl = {});

struct FlyingFish {
  double x_star;
  double epsilon_star;
};

/// x* = largest root of a on a sign-change scan refined by bisection;
/// ε* = largest ε on the grid {h, 2h, ..., 1} with a(x) - c(ε) b(x) > 0 for all
/// grid x in [x* + r, X_max].
FlyingFish flying_fish_epsilon(const std::function<double(double)>& a, const std::function<double(double)>& b,
                               const std::function<double(double)>& c, double r, double x_max,
                               std::size_t x_points = 200001, double eps_step = 1e-7);

struct Li94Report {
  int which = 0;
  double worst_sigma_margin = 0.0;   // ||∇σ_k||² - rhs
  double worst_drift_margin = 0.0;   // ⟨∇b v, v⟩ - rhs
  double worst_energy_margin = 0.0;  // energy inequality lhs - rhs (cases 1, 3, 4, 5)
  double min_hq = 0.0;
  double max_hq = 0.0;
  bool pass = true;
};

struct Li94Params {
  double C = 1.0;        // constant in the "≲" bounds
  double epsilon = 0.5;  // case 4 exponent
  double q = 2.0;        // exponent in H_q
};

/// Pointwise conditions of the five strong-completeness criteria and
/// H_q(x, v) = 2⟨∇b v, v⟩ + Σ_k ||∇σ_k v||² + (q-2) Σ_k ⟨∇σ_k v, v⟩² for unit v.
Li94Report li94_pointwise_check(const VectorFieldSystem& sys, int which, const std::vector<StateSample>& samples,
                                const Li94Params& params = {});

}  // namespace roughflow
