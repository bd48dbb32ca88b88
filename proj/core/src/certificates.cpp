#include "roughflow/certificates.hpp"

#include "counter_rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace roughflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double Control::operator()(double s) const {
  if (kind == "affine") return c0 + c1 * s;
  if (kind == "log-affine") return c1 * (1.0 + s) * std::log(std::numbers::e + s);
  if (kind == "identity") return c1 * s;
  if (kind == "constant") return c0;
  if (kind == "power") return c1 * std::pow(s, q);
  throw std::invalid_argument("unknown control kind '" + kind + "'");
}

std::string Control::describe() const {
  if (kind == "affine") return std::to_string(c0) + " + " + std::to_string(c1) + " s";
  if (kind == "log-affine") return std::to_string(c1) + " (1+s) log(e+s)";
  if (kind == "identity") return std::to_string(c1) + " s";
  if (kind == "constant") return std::to_string(c0);
  if (kind == "power") return std::to_string(c1) + " s^" + std::to_string(q);
  return kind;
}

void GrowthSpec::validate() const {
  if (!(beta > 1.0 && beta < 2.0)) throw std::invalid_argument("beta must lie in (1,2)");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in [0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (!(a > 0.0)) throw std::invalid_argument("small-ball radius a must be positive");
  if (!(b_a_T >= 0.0)) throw std::invalid_argument("b_a_T must be non-negative");
  double prev = f(0.0);
  if (!(prev >= 0.0)) throw std::invalid_argument("control f must be non-negative");
  for (int j = -4; j <= 24; ++j) {
    const double v = f(std::ldexp(1.0, j));
    if (!(v >= prev - 1e-12 * std::abs(prev))) throw std::invalid_argument("control f must be non-decreasing");
    prev = v;
  }
}

std::vector<StateSample> sphere_samples(int d, const std::vector<double>& radii, int directions, std::uint64_t seed) {
  std::vector<Vec> dirs;
  for (int k = 0; k < d; ++k) {
    Vec e = Vec::Zero(d);
    e(k) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (int j = 0; j < directions; ++j) {
    Vec g(d);
    for (int k = 0; k < d; ++k) g(k) = detail::normal(seed, 77, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j));
    if (g.norm() > 0) dirs.push_back(g.normalized());
  }
  std::vector<StateSample> out;
  for (double r : radii)
    for (const auto& u : dirs) out.push_back({0.0, r * u});
  return out;
}

namespace {

void update(ViolationRecord& rec, double margin, const StateSample& s) {
  ++rec.samples;
  if (margin > rec.worst_margin) {
    rec.worst_margin = margin;
    rec.worst_x = s.x;
    rec.worst_t = s.t;
  }
}

void finish(ViolationRecord& rec) { rec.pass = rec.samples == 0 || rec.worst_margin <= 0.0; }

}  // namespace

ViolationRecord check_radial_growth(const VectorFieldSystem& sys, const Control& f, const std::vector<StateSample>& samples) {
  ViolationRecord rec;
  for (const auto& s : samples) {
    const double n = s.x.norm();
    if (n == 0.0) continue;
    const double radial = s.x.dot(sys.b(s.t, s.x)) / n;
    update(rec, radial - f(n), s);
  }
  finish(rec);
  return rec;
}

ViolationRecord check_orthogonal_growth(const VectorFieldSystem& sys, const Control& f, double beta,
                                        const std::vector<StateSample>& samples) {
  ViolationRecord rec;
  for (const auto& s : samples) {
    const double n = s.x.norm();
    if (n == 0.0) continue;
    const Vec u = s.x / n;
    const Vec b = sys.b(s.t, s.x);
    const Vec perp = b - u.dot(b) * u;
    update(rec, perp.norm() - (1.0 + n) * std::pow(f(n), beta), s);
  }
  finish(rec);
  return rec;
}

std::vector<NamedViolation> check_rde_growth(const VectorFieldSystem& sys, const GrowthSpec& spec,
                                             const std::vector<StateSample>& samples) {
  ViolationRecord r1, r20, r21, r22;
  const double ka = spec.kappa * spec.alpha;
  for (const auto& s : samples) {
    const double fx = spec.f(s.x.norm());
    update(r1, sys.b(s.t, s.x).norm() - std::pow(fx, 1.0 + ka), s);
    update(r20, spectral_norm(sys.sigma(s.x)) - std::pow(fx, spec.theta * spec.alpha), s);
    update(r21, operator_norm(sys.Dsigma(s.x)) - std::pow(fx, (spec.theta - spec.kappa) * spec.alpha), s);
    update(r22, operator_norm(sys.D2sigma(s.x)) - std::pow(fx, (spec.theta - 2 * spec.kappa) * spec.alpha), s);
  }
  for (auto* r : {&r1, &r20, &r21, &r22}) finish(*r);
  return {{"R.1/Y.1 |b| <= f^(1+kappa alpha)", r1},
          {"R.2/Y.2 n=0 |sigma| <= f^(theta alpha)", r20},
          {"R.2/Y.2 n=1 |Dsigma| <= f^((theta-kappa) alpha)", r21},
          {"R.2 n=2 |D2sigma| <= f^((theta-2 kappa) alpha)", r22}};
}

double compute_R0(double K, double b_a_T) {
  if (!(K >= 0.0) || !(b_a_T >= 0.0)) throw std::invalid_argument("K and b_a_T must be non-negative");
  const double c = 2.0 * K + 1.0;
  return c + std::sqrt(c * c + 2.0 * K * (2.0 + b_a_T));
}

double crossing_quadratic(double R, double K, double b_a_T, int k) {
  const double kk = static_cast<double>(k);
  return R * R - 2.0 * (2.0 * K + 1.0) * ((kk + 1.0) / (2.0 * kk + 1.0)) * R +
         (K * K - 2.0 * K * (2.0 + b_a_T)) / (2.0 * kk + 1.0);
}

double compute_delta(const GrowthSpec& spec, double R, double K, int k) {
  if (!(R > 0.0) || !(K >= 0.0)) throw std::invalid_argument("compute_delta needs R > 0 and K >= 0");
  const double fr = spec.f(R * (k + 1));
  if (!(fr > 0.0)) throw std::invalid_argument("control must be positive on the radius ladder");
  return std::min({1.0, 1.0 / fr, std::pow(spec.a / K, 1.0 / (spec.beta - 1.0))});
}

double estimate_b_a_T(const VectorFieldSystem& sys, double a, double T) {
  std::vector<double> radii;
  for (int j = 1; j <= 4; ++j) radii.push_back(a * j / 4.0);
  auto samples = sphere_samples(sys.d, radii, 16, 5);
  samples.push_back({0.0, Vec::Zero(sys.d)});
  double best = 0.0;
  for (int q = 0; q <= 4; ++q) {
    const double t = T * q / 4.0;
    for (const auto& s : samples) best = std::max(best, sys.b(t, s.x).norm());
  }
  return best;
}

double PsiEnvelope::operator()(double N) const {
  const double j = N + 2.0;
  if (j <= 0.0) return 0.0;
  const double last = static_cast<double>(psi.size() - 1);
  if (j >= last) return psi.back() + (j - last) * deltas.back();
  const auto lo = static_cast<std::size_t>(std::floor(j));
  const double w = j - static_cast<double>(lo);
  return w == 0.0 ? psi[lo] : psi[lo] + w * (psi[lo + 1] - psi[lo]);
}

double PsiEnvelope::inverse(double t) const {
  if (t <= 0.0) return -2.0;
  if (t >= psi.back()) return static_cast<double>(psi.size() - 1) - 2.0 + (t - psi.back()) / deltas.back();
  auto it = std::lower_bound(psi.begin(), psi.end(), t);
  const auto hi = static_cast<std::size_t>(it - psi.begin());
  if (psi[hi] == t) return static_cast<double>(hi) - 2.0;
  const std::size_t lo = hi - 1;
  return static_cast<double>(lo) - 2.0 + (t - psi[lo]) / (psi[hi] - psi[lo]);
}

PsiEnvelope psi_envelope(const GrowthSpec& spec, double R, double K, int k_max, double horizon, std::size_t max_levels) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  PsiEnvelope env;
  env.horizon = horizon;
  env.psi.push_back(0.0);
  std::size_t k = 0;
  while (k < static_cast<std::size_t>(k_max) || (env.psi.back() < horizon && k < max_levels)) {
    const double d = compute_delta(spec, R, K, static_cast<int>(std::min<std::size_t>(k, INT32_MAX)));
    env.deltas.push_back(d);
    env.psi.push_back(env.psi.back() + d);
    ++k;
  }
  if (env.psi.back() < horizon) {
    // Cauchy condensation on the last two complete dyadic blocks: a ratio
    // well below one means Σδ_k converges, so the horizon is out of reach.
    std::size_t top = 1;
    while (2 * top <= env.deltas.size()) top *= 2;
    if (top >= 4) {
      auto block = [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += env.deltas[i];
        return s;
      };
      const double b1 = block(top / 4, top / 2), b2 = block(top / 2, top);
      env.exhausted = b2 < 0.9 * b1;
    }
  }
  return env;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::size_t CertificateReport::lemma_violations() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += (l.interactive_ok && !l.gap_ok) ? 1 : 0;
  return n;
}

double estimate_K(const SampledPath& eta, double beta) { return holder_norm(eta, beta - 1.0); }

namespace {

std::optional<double> crossing_time(const Trajectory& traj, double r) {
  for (const auto& c : traj.level_crossings)
    if (std::abs(c.radius - r) <= 1e-9 * std::max(1.0, r)) return c.time;
  return std::nullopt;
}

bool ladder_contains(const Trajectory& traj, double r) {
  for (double x : traj.control.radii)
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, r)) return true;
  return false;
}

// sup ||η_t - η_base|| over samples base ≤ i with t_i ≤ t_end.
double oscillation(const SampledPath& eta, std::size_t base, double t_end) {
  double s = 0.0;
  for (std::size_t i = base; i < eta.size() && eta.time(i) <= t_end + 1e-12 * std::max(1.0, std::abs(t_end)); ++i)
    s = std::max(s, eta.increment(base, i).norm());
  return s;
}

std::size_t strictly_before(const SampledPath& p, double t) {
  auto it = std::lower_bound(p.times().begin(), p.times().end(), t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it == p.times().begin()) return 0;
  return static_cast<std::size_t>(it - p.times().begin()) - 1;
}

}  // namespace

CertificateReport crossing_audit(const Trajectory& traj, const SampledPath& eta, const GrowthSpec& spec, double R,
                                 double K) {
  if (!(R > 0.0) || !(K >= 0.0)) throw std::invalid_argument("crossing_audit needs R > 0 and K >= 0");
  CertificateReport rep;
  rep.R = R;
  rep.K = K;
  rep.b_a_T = spec.b_a_T;
  rep.R0 = compute_R0(K, spec.b_a_T);
  rep.trajectory_status = to_string(traj.status);
  const double x0n = traj.path.value(0).norm();
  const double t_start = traj.path.start();

  for (int k = 0;; ++k) {
    const double r_from = R * k, r_to = R * (k + 1);
    if (!ladder_contains(traj, r_to)) break;
    if (x0n > r_from) continue;  // level starts inside the initial ball: not covered by the lemma
    std::optional<double> tf = k == 0 ? std::optional<double>(t_start) : crossing_time(traj, r_from);
    if (!tf) break;
    auto tt = crossing_time(traj, r_to);
    if (!tt) break;
    LevelRecord L;
    L.k = k;
    L.radius_from = r_from;
    L.radius_to = r_to;
    L.delta = compute_delta(spec, R, K, k);
    L.tau_from = *tf;
    L.tau_to = *tt;
    L.gap = *tt - *tf;
    const std::size_t base = eta.index_at_or_before(*tf);
    const double window = std::min(L.delta, L.gap);
    L.oscillation = oscillation(eta, base, eta.time(base) + window);
    L.bound = K * std::pow(L.delta, spec.beta - 1.0);
    L.gap_ok = L.gap > L.delta;
    L.interactive_ok = L.oscillation <= L.bound * (1.0 + 1e-12);
    for (std::size_t i = 0; i < traj.path.size(); ++i) {
      const double t = traj.path.time(i);
      if (t >= *tf && t <= *tf + window && t < *tt) L.window_sup_norm = std::max(L.window_sup_norm, traj.path.value(i).norm());
    }
    L.verdict = (L.gap_ok && L.interactive_ok) ? Verdict::pass : Verdict::fail;
    rep.levels.push_back(L);
  }

  rep.envelope = psi_envelope(spec, R, K, std::max<int>(2, static_cast<int>(rep.levels.size()) + 2),
                              traj.path.end() - t_start, std::size_t{1} << 20);

  const bool any_fail = std::any_of(rep.levels.begin(), rep.levels.end(),
                                    [](const LevelRecord& l) { return l.verdict == Verdict::fail; });
  if (traj.status == TrajectoryStatus::blown_up) {
    rep.overall = Verdict::fail;
    rep.reason = "trajectory exploded before the horizon";
  } else if (traj.status == TrajectoryStatus::step_floor_reached) {
    rep.overall = Verdict::inconclusive;
    rep.reason = "drift substep floor reached; the run is unresolved";
  } else if (any_fail) {
    rep.overall = Verdict::fail;
    rep.reason = "a level failed the gap or interactive bound";
  } else if (rep.levels.empty()) {
    rep.overall = Verdict::inconclusive;
    rep.reason = "no level crossings observed";
  } else if (!(R > std::max(rep.R0, x0n))) {
    rep.overall = Verdict::inconclusive;
    rep.reason = "R does not exceed max(R0, |x0|)";
  } else {
    rep.overall = Verdict::pass;
    rep.reason = "all observed levels passed";
  }
  return rep;
}

Lemma33Result lemma33_bound_check(const Trajectory& traj, const SampledPath& gamma, const VectorFieldSystem& sys,
                                  const GrowthSpec& spec) {
  Lemma33Result res;
  const auto& x = traj.path;
  const std::size_t n = x.size();
  const Vec g0 = gamma.value(0);
  auto gam = [&](std::size_t i) -> Vec {
    auto j = gamma.find_index(x.time(i));
    return gamma.value(j ? *j : gamma.index_at_or_before(x.time(i))) - g0;
  };

  // Assumption check on the visited states.
  std::vector<StateSample> visited;
  for (std::size_t i = 0; i < n; ++i)
    if (x.value(i).norm() > 0) visited.push_back({x.time(i), x.value(i)});
  auto rad = check_radial_growth(sys, spec.f, visited);
  auto orth = check_orthogonal_growth(sys, spec.f, spec.beta, visited);
  if (!rad.pass || !orth.pass) {
    res.assumption_violation = true;
    res.detail = !rad.pass ? "radial growth bound violated on visited states (margin " + std::to_string(rad.worst_margin) + ")"
                           : "orthogonal growth bound violated on visited states (margin " + std::to_string(orth.worst_margin) + ")";
  }

  const auto dirs = sphere_samples(sys.d, {1.0}, 8, 9);
  auto ball_sup = [&](double t, double rho) {
    double best = sys.b(t, Vec::Zero(sys.d)).norm();
    for (int j = 1; j <= 4; ++j)
      for (const auto& s : dirs) best = std::max(best, sys.b(t, (rho * j / 4.0) * s.x).norm());
    return best;
  };
  std::vector<double> i1(n), i2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x.time(i);
    const double nx = x.value(i).norm();
    const double ng = gam(i).norm();
    const double fx = spec.f(nx);
    i1[i] = fx * (nx + ng);
    i2[i] = ng * (ball_sup(t, ng) + (1.0 + nx) * std::pow(fx, spec.beta));
  }
  double q1 = 0.0, q2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x.time(i + 1) - x.time(i);
    q1 += 0.5 * h * (i1[i] + i1[i + 1]);
    q2 += 0.5 * h * (i2[i] + i2[i + 1]);
  }
  res.lhs = (x.value(n - 1) - gam(n - 1)).squaredNorm();
  res.rhs = x.value(0).squaredNorm() + 2.0 * q1 + 2.0 * q2;
  res.residual = res.lhs - res.rhs;
  if (res.detail.empty()) res.detail = "assumptions hold on visited states";
  return res;
}

PvarReport pvar_audit(const Trajectory& traj, const SampledPath& gamma, const GrowthSpec& spec, double p,
                      std::optional<double> R) {
  if (!(p > 1.0)) throw std::invalid_argument("pvar_audit needs p > 1");
  if (spec.beta > 1.0 + 1.0 / p + 1e-12) throw std::invalid_argument("pvar_audit needs beta <= 1 + 1/p");
  PvarReport rep;
  rep.p = p;
  rep.R = R ? *R : 1.01 * compute_R0(1.0, spec.b_a_T);
  const double x0n = traj.path.value(0).norm();
  const double t_start = traj.path.start();
  for (int k = 0;; ++k) {
    const double r_from = rep.R * k, r_to = rep.R * (k + 1);
    if (!ladder_contains(traj, r_to)) break;
    if (x0n > r_from) continue;
    std::optional<double> tf = k == 0 ? std::optional<double>(t_start) : crossing_time(traj, r_from);
    if (!tf) break;
    auto tt = crossing_time(traj, r_to);
    if (!tt) break;
    PvarLevel L;
    L.k = k;
    L.delta = compute_delta(spec, rep.R, 1.0, k);
    L.gap = *tt - *tf;
    // left limit at τ so that a jump at the crossing time is counted
    const std::size_t base = k == 0 ? 0 : strictly_before(gamma, *tf);
    L.oscillation = oscillation(gamma, base, *tf + std::min(L.delta, L.gap));
    L.bad = L.oscillation >= std::pow(L.delta, spec.beta - 1.0);
    L.gap_ok = L.gap > L.delta;
    rep.levels.push_back(L);
  }
  const double q = 1.0 / (spec.beta - 1.0);
  rep.pvar_bound = 1.0 + std::pow(p_variation(gamma, q), q);
  for (const auto& L : rep.levels) {
    if (L.bad) rep.bad_sum += L.delta;
    else if (!L.gap_ok) rep.good_levels_ok = false;
  }
  rep.bound_ok = rep.bad_sum <= rep.pvar_bound;
  if (rep.levels.empty()) rep.overall = Verdict::inconclusive;
  else rep.overall = (rep.bound_ok && rep.good_levels_ok) ? Verdict::pass : Verdict::fail;
  return rep;
}

PropagationReport one_point_propagation_audit(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x_ref,
                                              const std::vector<Vec>& starts, double T, const Control& f, double R,
                                              const StepControl& ctrl) {
  PropagationReport rep;
  rep.R = R;
  if (!(R > 2.0 + std::sqrt(3.0))) throw std::invalid_argument("propagation audit needs R > 2 + sqrt(3)");

  std::vector<Vec> pts = starts;
  pts.push_back(x_ref);
  for (const auto& s : sphere_samples(sys.d, {0.5, 1.0, 2.0, 4.0, 8.0}, 4, 21)) pts.push_back(s.x);
  rep.worst_pair_margin = -kInf;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Vec dx = pts[i] - pts[j];
      const double nd = dx.norm();
      if (nd == 0.0) continue;
      const double lhs = (sys.b(0.0, pts[i]) - sys.b(0.0, pts[j])).dot(dx);
      rep.worst_pair_margin = std::max(rep.worst_pair_margin, lhs - f(nd) * nd);
    }
  if (rep.worst_pair_margin > 0.0) {
    rep.assumption_ok = false;
    rep.overall = Verdict::inconclusive;
    rep.reason = "one-sided pairwise condition violated; audit skipped";
    return rep;
  }

  auto solve = [&](const Vec& x0) {
    return sys.additive_identity ? ode_solve(sys, driver, x0, T, ctrl) : young_solve(sys, driver, x0, T, ctrl);
  };
  const Trajectory ref = solve(x_ref);
  if (ref.status != TrajectoryStatus::completed) throw std::runtime_error("reference not global");

  for (const auto& x0 : starts) {
    PropagationStart ps;
    ps.x0 = x0;
    const Trajectory tr = solve(x0);
    const std::size_t n = std::min(tr.path.size(), ref.path.size());
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = (tr.path.value(i) - ref.path.value(i)).norm();
    auto first_at = [&](double r) -> std::optional<double> {
      for (std::size_t i = 0; i < n; ++i)
        if (norms[i] >= r) return tr.path.time(i);
      return std::nullopt;
    };
    for (int k = 0;; ++k) {
      if (norms[0] > R * k) continue;
      if (k == 0 && norms[0] > 0.0) continue;
      auto tf = k == 0 ? std::optional<double>(tr.path.start()) : first_at(R * k);
      if (!tf) break;
      auto tt = first_at(R * (k + 1));
      if (!tt) break;
      PvarLevel L{};
      L.k = k;
      L.delta = 1.0 / f(R * (k + 1));
      L.gap = *tt - *tf;
      L.gap_ok = L.gap >= L.delta;
      L.bad = false;
      ps.levels.push_back(L);
      ++rep.crossings;
      if (!L.gap_ok) ++rep.violations;
      if (k > 10000) break;
    }
    rep.starts.push_back(std::move(ps));
  }
  if (rep.violations > 0) {
    rep.overall = Verdict::fail;
    rep.reason = "a difference-norm level was crossed faster than 1/f(R(k+1))";
  } else if (rep.crossings == 0) {
    rep.overall = Verdict::inconclusive;
    rep.reason = "no difference-norm levels crossed";
  } else {
    rep.overall = Verdict::pass;
    rep.reason = "all crossed levels respected the gap bound";
  }
  return rep;
}

FlyingFish flying_fish_epsilon(const std::function<double(double)>& a, const std::function<double(double)>& b,
                               const std::function<double(double)>& c, double r, double x_max, std::size_t x_points,
                               double eps_step) {
  if (!(x_max > 0.0) || x_points < 3) throw std::invalid_argument("flying fish needs a non-trivial domain");
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  if (!(eps_step > 0.0 && eps_step < 1.0)) throw std::invalid_argument("epsilon step must lie in (0,1)");
  std::vector<double> xs(x_points), as(x_points);
  for (std::size_t i = 0; i < x_points; ++i) {
    xs[i] = x_max * static_cast<double>(i) / static_cast<double>(x_points - 1);
    as[i] = a(xs[i]);
  }
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i + 1 < x_points; ++i)
    if ((as[i] < 0.0) != (as[i + 1] < 0.0) || as[i] == 0.0) last = i;
  if (!last) throw std::invalid_argument("x* undefined on domain");
  double lo = xs[*last], hi = xs[*last + 1];
  if (as[*last] == 0.0) hi = lo;
  const bool neg_lo = a(lo) < 0.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((a(mid) < 0.0) == neg_lo) lo = mid;
    else hi = mid;
  }
  FlyingFish out;
  out.x_star = as[*last] == 0.0 ? xs[*last] : 0.5 * (lo + hi);

  const double from = out.x_star + r - 1e-9 * std::max(1.0, x_max);
  std::vector<double> av, bv;
  for (std::size_t i = 0; i < x_points; ++i)
    if (xs[i] >= from) {
      av.push_back(as[i]);
      bv.push_back(b(xs[i]));
    }
  auto holds = [&](double eps) {
    const double ce = c(eps);
    for (std::size_t i = 0; i < av.size(); ++i)
      if (!(av[i] - ce * bv[i] > 0.0)) return false;
    return true;
  };
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / eps_step));
  if (holds(1.0)) {
    out.epsilon_star = 1.0;
    return out;
  }
  if (!holds(eps_step)) {
    out.epsilon_star = 0.0;
    return out;
  }
  std::size_t good = 1, bad = steps;  // holds(good*h) true, holds(bad*h) false
  while (bad - good > 1) {
    const std::size_t mid = good + (bad - good) / 2;
    if (holds(static_cast<double>(mid) * eps_step)) good = mid;
    else bad = mid;
  }
  out.epsilon_star = static_cast<double>(good) * eps_step;
  return out;
}

Li94Report li94_pointwise_check(const VectorFieldSystem& sys, int which, const std::vector<StateSample>& samples,
                                const Li94Params& params) {
  if (which < 1 || which > 5) throw std::invalid_argument("case must be 1..5");
  if (!sys.Db || !sys.Dsigma) throw std::invalid_argument("derivative data unavailable");
  Li94Report rep;
  rep.which = which;
  rep.worst_sigma_margin = -kInf;
  rep.worst_drift_margin = -kInf;
  rep.worst_energy_margin = -kInf;
  rep.min_hq = kInf;
  rep.max_hq = -kInf;
  const int d = sys.d, m = sys.m;
  const double C = params.C, eps = params.epsilon;
  std::vector<Vec> dirs;
  for (const auto& s : sphere_samples(d, {1.0}, 8, 13)) dirs.push_back(s.x);

  for (const auto& s : samples) {
    const Vec& x = s.x;
    const double r2 = x.squaredNorm();
    double growth = 0.0, energy_rhs = 0.0;
    switch (which) {
      case 1: growth = C * (1 + r2); energy_rhs = C; break;
      case 2: growth = C; break;
      case 3: growth = C * (1 + std::log1p(r2)); energy_rhs = C * (1 + r2); break;
      case 4: growth = C * std::pow(1 + r2, eps); energy_rhs = C * std::pow(1 + r2, 1 - eps); break;
      case 5: growth = C * std::exp(1 + r2); energy_rhs = C * std::exp(-r2); break;
    }
    const Mat db = sys.Db(s.t, x);
    const Mat sym = 0.5 * (db + db.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    rep.worst_drift_margin = std::max(rep.worst_drift_margin, es.eigenvalues().maxCoeff() - growth);

    const Tensor ds = sys.Dsigma(x);
    const Mat sig = sys.sigma(x);
    std::vector<Mat> grads(m, Mat(d, d));
    for (int k = 0; k < m; ++k) {
      for (int a = 0; a < d; ++a)
        for (int l = 0; l < d; ++l) grads[k](a, l) = ds.at(a, k, l);
      const double g = spectral_norm(grads[k]);
      rep.worst_sigma_margin = std::max(rep.worst_sigma_margin, g * g - growth);
    }
    if (which != 2) {
      const double xb = x.dot(sys.b(s.t, x));
      double s2 = 0.0, xs2 = 0.0;
      for (int k = 0; k < m; ++k) {
        s2 += sig.col(k).squaredNorm();
        const double ip = x.dot(sig.col(k));
        xs2 += ip * ip;
      }
      double lhs = 0.0;
      switch (which) {
        case 1:
        case 3: lhs = xb + s2 + xs2; break;
        case 4: lhs = xb + s2 + 2 * (eps - 1) * xs2 / (1 + r2); break;
        case 5: lhs = xb + 2 * s2 + 2 * xs2 / (1 + r2); break;
      }
      rep.worst_energy_margin = std::max(rep.worst_energy_margin, lhs - energy_rhs);
    }
    for (const auto& v : dirs) {
      double hq = 2.0 * v.dot(db * v);
      for (int k = 0; k < m; ++k) {
        const Vec gv = grads[k] * v;
        const double ip = gv.dot(v);
        hq += (params.q - 2.0) * ip * ip + gv.squaredNorm();
      }
      rep.min_hq = std::min(rep.min_hq, hq);
      rep.max_hq = std::max(rep.max_hq, hq);
    }
  }
  rep.pass = rep.worst_sigma_margin <= 0.0 && rep.worst_drift_margin <= 0.0 &&
             (which == 2 || rep.worst_energy_margin <= 0.0);
  return rep;
}

}  // namespace roughflow
