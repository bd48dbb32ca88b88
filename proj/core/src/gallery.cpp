#include "roughflow/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roughflow {

namespace {

double param(const GalleryParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

Mat rotation_J() {
  Mat j(2, 2);
  j << 0, -1, 1, 0;
  return j;
}

Monomial mono(double c, std::vector<int> powers) { return {c, std::move(powers)}; }

// Additive polynomial system dx = P(x) dt + dW.
VectorFieldSystem additive_polynomial(const std::string& name, int d, std::vector<Polynomial> drift) {
  PolynomialSystemSpec s;
  s.d = d;
  s.m = d;
  s.drift = std::move(drift);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Polynomial p;
      if (a == b) p.push_back(mono(1.0, std::vector<int>(d, 0)));
      s.sigma.push_back(p);
    }
  auto sys = polynomial_system(s, name);
  sys.representation = "named-gallery";
  return sys;
}

std::vector<int> unit_power(int d, int k, int e = 1) {
  std::vector<int> p(d, 0);
  p[k] = e;
  return p;
}

// b(x) = c ||x||^{1+a} J x and its Jacobian.
Vec rotation_field(const Vec& x, double a, double c) {
  return c * std::pow(x.norm(), 1.0 + a) * (rotation_J() * x);
}

Mat rotation_jacobian(const Vec& x, double a, double c) {
  const double r = x.norm();
  if (r == 0.0) return Mat::Zero(2, 2);
  const Mat J = rotation_J();
  return c * (std::pow(r, 1.0 + a) * J + (1.0 + a) * std::pow(r, a - 1.0) * (J * x) * x.transpose());
}

GalleryEntry make_elworthy() {
  GalleryEntry e;
  PolynomialSystemSpec s;
  s.d = 2;
  s.m = 2;
  s.drift = {{}, {}};
  // σ = [[y² - x², 2xy], [-2xy, x² - y²]]
  s.sigma = {{mono(1, {0, 2}), mono(-1, {2, 0})},
             {mono(2, {1, 1})},
             {mono(-2, {1, 1})},
             {mono(1, {2, 0}), mono(-1, {0, 2})}};
  e.system = polynomial_system(s, "elworthy");
  e.system.representation = "named-gallery";
  e.driver_spec.dim = 2;
  e.driver_spec.mesh = std::ldexp(1.0, -12);
  e.solver = "rde";
  // Far from 1: near-hits of the singular point drive the explicit scheme unstable
  // long before the true solution is large.
  e.x0 = Vec(2);
  e.x0 << 0.5, 0.0;
  e.blowup_oracle = [](const Vec&) { return std::optional<double>{}; };
  e.oracle_note = "explosion only if the planar Brownian path hits a point, which it almost surely never does";
  e.notes = "Itô SDE dx = (y²-x²)dW¹ + 2xy dW², dy = -2xy dW¹ + (x²-y²)dW²; complete but not strongly complete";
  return e;
}

GalleryEntry make_sheared_ou(const GalleryParams& p) {
  const double a = param(p, "alpha", 1.0), C = param(p, "C", 1.0), eps = param(p, "epsilon", 0.5);
  GalleryEntry e;
  const Mat J = rotation_J();
  e.system = additive_system(
      "sheared-ou", 2,
      [a, C, eps, J](double, const Vec& x) -> Vec { return -0.5 * a * x + C * std::pow(x.norm(), 3.0 + eps) * (J * x); },
      [a, C, eps, J](double, const Vec& x) -> Mat {
        const double r = x.norm();
        Mat out = -0.5 * a * Mat::Identity(2, 2) + C * std::pow(r, 3.0 + eps) * J;
        if (r > 0.0) out += C * (3.0 + eps) * std::pow(r, 1.0 + eps) * (J * x) * x.transpose();
        return out;
      });
  e.driver_spec.dim = 2;
  e.x0 = Vec::Ones(2);
  e.notes = "dx = (-(α/2)x + C||x||^{3+ε} J x)dt + dW; ⟨x, b⟩ ≤ 0 yet the SDE is reported not strongly complete. Exploration only.";
  return e;
}

GalleryEntry make_gl09() {
  GalleryEntry e;
  VectorFieldSystem s;
  s.name = "gl09";
  s.d = 2;
  s.m = 1;
  s.b = [](double, const Vec&) -> Vec { return Vec::Zero(2); };
  s.Db = [](double, const Vec&) -> Mat { return Mat::Zero(2, 2); };
  s.sigma = [](const Vec& x) -> Mat {
    Mat out(2, 1);
    out << x(0) * std::sin(x(1)), x(0);
    return out;
  };
  s.Dsigma = [](const Vec& x) {
    Tensor t({2, 1, 2});
    t.at(0, 0, 0) = std::sin(x(1));
    t.at(0, 0, 1) = x(0) * std::cos(x(1));
    t.at(1, 0, 0) = 1.0;
    return t;
  };
  s.D2sigma = [](const Vec& x) {
    Tensor t({2, 1, 2, 2});
    t.at(0, 0, 0, 1) = std::cos(x(1));
    t.at(0, 0, 1, 0) = std::cos(x(1));
    t.at(0, 0, 1, 1) = -x(0) * std::sin(x(1));
    return t;
  };
  e.system = s;
  e.driver = "pure-quadratic";
  e.driver_spec.dim = 1;
  e.driver_spec.horizon = 2.0;
  e.driver_spec.mesh = std::ldexp(1.0, -12);
  e.solver = "rde";
  e.x0 = Vec(2);
  e.x0 << 1.0, 0.0;
  e.blowup_oracle = [](const Vec& x0) -> std::optional<double> {
    if (x0(1) != 0.0) throw std::invalid_argument("gl09 oracle needs x0 = (x1, 0)");
    if (x0(0) > 0.0) return 1.0 / x0(0);
    return std::nullopt;
  };
  e.oracle_note = "x2 stays 0 and x1' = x1², so blow-up at 1/x1(0)";
  e.notes = "σ(x1, x2) = (x1 sin x2, x1) driven by the rough path (0, t - s): every solution explodes";
  return e;
}

GalleryEntry make_complex_square() {
  GalleryEntry e;
  // z' = z² as (x² - y², 2xy)
  e.system = additive_polynomial("complex-square", 2,
                                 {{mono(1, {2, 0}), mono(-1, {0, 2})}, {mono(2, {1, 1})}});
  e.driver = "none";
  e.driver_spec.dim = 2;
  e.driver_spec.horizon = 4.0;
  e.solver = "localize";
  e.x0 = Vec(2);
  e.x0 << 0.5, 0.0;
  e.blowup_oracle = [](const Vec& z0) -> std::optional<double> {
    if (z0(1) == 0.0 && z0(0) > 0.0) return 1.0 / z0(0);
    return std::nullopt;
  };
  e.oracle_note = "z_t = z0/(1 - z0 t); blow-up at 1/z0 for real positive z0 and never otherwise";
  e.notes = "complex ODE z' = z² viewed on R²";
  return e;
}

GalleryEntry make_radial_rotation(const GalleryParams& p) {
  const double a = param(p, "alpha", 0.2), c = param(p, "C", 1.0);
  GalleryEntry e;
  e.system = additive_system(
      "radial-rotation", 2, [a, c](double, const Vec& x) -> Vec { return rotation_field(x, a, c); },
      [a, c](double, const Vec& x) -> Mat { return rotation_jacobian(x, a, c); });
  e.driver_spec.dim = 2;
  e.x0 = Vec(2);
  e.x0 << 2.0, 0.0;
  e.notes = "dx = ||x||^{1+α} J x dt + dγ; the drift is orthogonal to x, so the radial growth bound holds with f = 0";
  return e;
}

GalleryEntry make_linear(const std::string& id, double sign, int d) {
  GalleryEntry e;
  std::vector<Polynomial> drift;
  for (int k = 0; k < d; ++k) {
    Polynomial q;
    if (sign != 0.0) q.push_back(mono(sign, unit_power(d, k)));
    drift.push_back(q);
  }
  e.system = additive_polynomial(id, d, drift);
  e.driver_spec.dim = d;
  e.x0 = Vec::Zero(d);
  if (sign != 0.0) e.x0(0) = 1.0;
  return e;
}

GalleryEntry make_double_well() {
  GalleryEntry e;
  e.system = additive_polynomial("double-well", 1, {{mono(1, {1}), mono(-1, {3})}});
  e.driver_spec.dim = 1;
  e.x0 = Vec::Zero(1);
  e.notes = "dx = (x - x³)dt + dW, a well-behaved baseline";
  return e;
}

GalleryEntry make_geometric_brownian() {
  GalleryEntry e;
  PolynomialSystemSpec s;
  s.d = 1;
  s.m = 1;
  s.drift = {{}};
  s.sigma = {{mono(1, {1})}};
  e.system = polynomial_system(s, "geometric-brownian");
  e.system.representation = "named-gallery";
  e.driver_spec.mesh = std::ldexp(1.0, -12);
  e.solver = "rde";
  e.x0 = Vec::Ones(1);
  e.blowup_oracle = [](const Vec&) { return std::optional<double>{}; };
  e.oracle_note = "Itô solution x0 exp(W_t - t/2)";
  e.notes = "dx = x dW in the Itô sense";
  return e;
}

const std::vector<std::string> kIds = {"elworthy",   "sheared-ou",    "gl09",          "complex-square",
                                       "radial-rotation", "linear-ou", "double-well", "linear-growth",
                                       "free",       "geometric-brownian"};

}  // namespace

std::vector<std::string> registry_ids() { return kIds; }

GalleryEntry registry(const std::string& id, const GalleryParams& params) {
  GalleryEntry e;
  const int d = static_cast<int>(param(params, "d", 2));
  if (id == "elworthy") e = make_elworthy();
  else if (id == "sheared-ou") e = make_sheared_ou(params);
  else if (id == "gl09") e = make_gl09();
  else if (id == "complex-square") e = make_complex_square();
  else if (id == "radial-rotation") e = make_radial_rotation(params);
  else if (id == "linear-ou") {
    e = make_linear(id, -1.0, d);
    e.notes = "dx = -x dt + dW, a well-behaved baseline";
  } else if (id == "linear-growth") {
    e = make_linear(id, 1.0, d);
    e.notes = "dx = x dt + dW; radial growth f(s) = s, non-explosive";
  } else if (id == "free") {
    e = make_linear(id, 0.0, d);
    e.driver = "none";
    e.notes = "dx = dγ with zero drift";
  } else if (id == "double-well") e = make_double_well();
  else if (id == "geometric-brownian") e = make_geometric_brownian();
  else {
    std::string known;
    for (const auto& k : kIds) known += (known.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown gallery id '" + id + "'; available: " + known);
  }
  e.id = id;
  e.system.name = id;
  if (e.x0.size() == 0) e.x0 = Vec::Zero(e.system.d);
  e.driver_spec.dim = e.system.m;
  return e;
}

double comparison_blowup_bound(double alpha, double mu, double norm_z0) {
  if (!(alpha > mu)) throw std::invalid_argument("comparison bound needs alpha > mu");
  if (!(norm_z0 > 0.0)) throw std::invalid_argument("comparison bound needs a nonzero start");
  const double u0 = norm_z0 * norm_z0;
  return std::pow(u0, -(alpha - mu) / 2.0) / (alpha - mu);
}

double sharp_blowup_time(double alpha, double mu, double norm_z0) {
  if (!(alpha > mu)) throw std::invalid_argument("blow-up quadrature needs alpha > mu");
  if (!(norm_z0 > 0.0)) throw std::invalid_argument("blow-up quadrature needs a nonzero start");
  // r = r0 e^s: dt = r^{-(α-μ)} q^{-(1+α)} ds; beyond r = 1e12, q = 1 to double precision.
  const double big = std::max(1e12, 10.0 * norm_z0);
  const double S = std::log(big / norm_z0);
  const std::size_t n = 200000;
  auto g = [&](double s) {
    const double r = norm_z0 * std::exp(s);
    const double q = std::sqrt(1.0 + std::pow(r, -2.0 * (1.0 + mu)));
    return std::pow(r, -(alpha - mu)) * std::pow(q, -(1.0 + alpha));
  };
  const double h = S / static_cast<double>(n);
  double acc = g(0.0) + g(S);
  for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(h * static_cast<double>(i));
  return acc * h / 3.0 + std::pow(big, -(alpha - mu)) / (alpha - mu);
}

namespace {

struct PolarState {
  double r;
  double phi;
};

// Radial speed r' = r^{1+α-μ} q^{1+α} and angular speed φ' = (r q)^{1+α}.
PolarState polar_rhs(double r, double alpha, double mu) {
  const double q = std::sqrt(1.0 + std::pow(r, -2.0 * (1.0 + mu)));
  return {std::pow(r, 1.0 + alpha - mu) * std::pow(q, 1.0 + alpha), std::pow(r * q, 1.0 + alpha)};
}

PolarState rk4(const PolarState& s, double h, double alpha, double mu) {
  const auto k1 = polar_rhs(s.r, alpha, mu);
  const auto k2 = polar_rhs(s.r + 0.5 * h * k1.r, alpha, mu);
  const auto k3 = polar_rhs(s.r + 0.5 * h * k2.r, alpha, mu);
  const auto k4 = polar_rhs(s.r + h * k3.r, alpha, mu);
  return {s.r + h / 6.0 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r),
          s.phi + h / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi)};
}

Vec z_of(const PolarState& s) {
  Vec z(2);
  z << s.r * std::cos(s.phi), s.r * std::sin(s.phi);
  return z;
}

Vec gamma_of(const Vec& z, double mu) { return -std::pow(z.norm(), -(1.0 + mu)) * (rotation_J() * z); }

// Cartesian z-field ||w||^{1+α} J w with w = z + γ(z).
Vec z_field(const Vec& z, double alpha, double mu) { return rotation_field(z + gamma_of(z, mu), alpha, 1.0); }

struct ZRun {
  std::vector<double> t;
  std::vector<Vec> z;
  bool capped = false;
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
};

// The polar form decouples: r solves a scalar ODE and φ is a quadrature of a
// function of r, so RK4 only has to resolve the radial scale even when the
// rotation is very fast.
ZRun integrate_z(double alpha, double mu, const Vec& z0, double mesh, double t_end, double z_cap) {
  ZRun run;
  PolarState s{z0.norm(), std::atan2(z0(1), z0(0))};
  double t = 0.0;
  run.t.push_back(0.0);
  run.z.push_back(z0);
  const double rel = 1e-3;
  auto check = [&](const PolarState& st) {
    const Vec z = z_of(st);
    const double ratio = z.dot(z_field(z, alpha, mu)) / std::pow(st.r, 2.0 + alpha - mu);
    run.min_ratio = std::min(run.min_ratio, ratio);
  };
  check(s);
  for (std::size_t k = 1;; ++k) {
    const double tg = static_cast<double>(k) * mesh;
    if (tg > t_end + 1e-12) break;
    while (t < tg) {
      const auto rate = polar_rhs(s.r, alpha, mu);
      double h = std::min(tg - t, rel * s.r / rate.r);
      if (tg - t - h < 1e-14 * std::max(1.0, tg)) h = tg - t;
      const PolarState next = rk4(s, h, alpha, mu);
      ++run.steps;
      if (next.r >= z_cap) {
        // shrink onto the cap so the last sample sits at ||z|| ≈ z_cap
        double lo = 0.0, hi = h;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (rk4(s, mid, alpha, mu).r >= z_cap) hi = mid;
          else lo = mid;
        }
        s = rk4(s, hi, alpha, mu);
        t += hi;
        check(s);
        run.t.push_back(t);
        run.z.push_back(z_of(s));
        run.capped = true;
        return run;
      }
      s = next;
      t = (h == tg - t) ? tg : t + h;
      check(s);
    }
    run.t.push_back(tg);
    run.z.push_back(z_of(s));
  }
  return run;
}

}  // namespace

SharpCounterexample sharp_counterexample(double alpha, double mu, const Vec& z0, double mesh, double z_cap,
                                         const std::vector<double>& radii) {
  if (z0.size() != 2) throw std::invalid_argument("z0 must lie in R^2");
  if (z0.norm() == 0.0) throw std::invalid_argument("z0 must be nonzero");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (!(mu > alpha / 2.0 && mu < alpha)) throw std::invalid_argument("mu must lie in (alpha/2, alpha)");
  if (!(mesh > 0.0)) throw std::invalid_argument("mesh must be positive");

  SharpCounterexample out;
  out.alpha = alpha;
  out.mu = mu;
  out.oracle_bound = comparison_blowup_bound(alpha, mu, z0.norm());
  out.xi_quadrature = sharp_blowup_time(alpha, mu, z0.norm());
  out.system = registry("radial-rotation", {{"alpha", alpha}}).system;

  const ZRun run = integrate_z(alpha, mu, z0, mesh, 2.0 * out.oracle_bound, z_cap);
  out.min_growth_ratio = run.min_ratio;
  out.steps = run.steps;
  std::vector<Vec> g, x;
  for (const auto& z : run.z) {
    g.push_back(gamma_of(z, mu));
    x.push_back(z + g.back());
  }
  out.z = SampledPath(run.t, run.z);
  out.gamma = SampledPath(run.t, g);

  Trajectory& tr = out.x;
  tr.path = SampledPath(run.t, x);
  const Vec g0 = g.front();
  std::vector<Vec> eta;
  for (const auto& v : g) eta.push_back(v - g0);
  tr.eta = SampledPath(run.t, eta);
  tr.scheme = "sharp-assembly";
  tr.control.radii = radii;
  tr.control.blowup_threshold = z_cap;
  tr.substeps = run.steps;
  if (run.capped) {
    tr.status = TrajectoryStatus::blown_up;
    tr.blowup_time = run.t[run.t.size() - 2];
  }
  for (double r : radii)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].norm() >= r) {
        tr.level_crossings.push_back({r, run.t[i], i});
        break;
      }
  return out;
}

double sharp_assembly_residual(double alpha, double mu, const Vec& z0, double mesh, double window) {
  if (z0.size() != 2 || z0.norm() == 0.0) throw std::invalid_argument("z0 must be a nonzero point of R^2");
  const ZRun run = integrate_z(alpha, mu, z0, mesh, window, std::numeric_limits<double>::infinity());
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < run.z.size(); ++i) {
    const double dt = run.t[i + 1] - run.t[i];
    const Vec gi = gamma_of(run.z[i], mu), gj = gamma_of(run.z[i + 1], mu);
    const Vec xi = run.z[i] + gi, xj = run.z[i + 1] + gj;
    const Vec res = xj - xi - rotation_field(xi, alpha, 1.0) * dt - (gj - gi);
    worst = std::max(worst, res.norm() / dt);
  }
  return worst;
}

}  // namespace roughflow
