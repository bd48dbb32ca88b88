#include "roughflow/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace roughflow {

std::vector<double> StepControl::ladder(double R, int count) {
  std::vector<double> r;
  for (int k = 0; k < count; ++k) r.push_back(R * (k + 1));
  return r;
}

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::blown_up: return "blown-up";
    case TrajectoryStatus::step_floor_reached: return "step-floor-reached";
  }
  return "unknown";
}

double Trajectory::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) m = std::max(m, path.value(i).norm());
  return m;
}

namespace {

enum class NoiseMode { additive, young, rough };

struct EngineInput {
  const VectorFieldSystem* sys = nullptr;
  const SampledPath* X = nullptr;
  const std::vector<Mat>* level2 = nullptr;
  NoiseMode mode = NoiseMode::additive;
  Vec x0;
  double T = 0;
  StepControl ctrl;
  const std::vector<double>* clamp_radii = nullptr;
  const Vec* v0 = nullptr;
  std::string scheme;
};

struct EngineOutput {
  Trajectory traj;
  std::vector<Vec> v;
};

double norm_or_inf(const Vec& x) {
  const double n = x.norm();
  return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

EngineOutput run_engine(const EngineInput& in) {
  const auto& sys = *in.sys;
  const auto& X = *in.X;
  const auto& ctrl = in.ctrl;
  const int d = sys.d;
  if (in.x0.size() != d) throw std::invalid_argument("x0 has the wrong dimension");
  if (X.dim() != sys.m) throw std::invalid_argument("driver dimension does not match the system's noise dimension");
  if (in.mode == NoiseMode::additive && !sys.additive_identity)
    throw std::invalid_argument("ode_solve needs an additive (sigma = identity) system");
  if (!(in.T > X.start())) throw std::invalid_argument("horizon must exceed the driver start time");
  if (in.T > X.end() + 1e-10 * std::max(1.0, std::abs(in.T))) throw std::invalid_argument("driver does not cover [0, T]");
  for (std::size_t k = 1; k < ctrl.radii.size(); ++k)
    if (!(ctrl.radii[k] > ctrl.radii[k - 1])) throw std::invalid_argument("radius ladder must be strictly increasing");
  if (in.v0 && !sys.Db) throw std::invalid_argument("derivative data unavailable");

  const std::size_t J = X.index_at_or_before(in.T);
  if (J == 0) throw std::invalid_argument("horizon shorter than the first driver cell");
  const bool additive_eta = sys.additive_identity;

  EngineOutput out;
  Trajectory& tr = out.traj;
  tr.control = ctrl;
  tr.scheme = in.scheme;

  std::vector<double> times{X.time(0)};
  std::vector<Vec> xs{in.x0};
  std::vector<Vec> etas{Vec::Zero(d)};
  Vec v;
  if (in.v0) {
    if (in.v0->size() != d) throw std::invalid_argument("v0 has the wrong dimension");
    v = *in.v0;
    out.v.push_back(v);
  }

  std::size_t next_r = 0;
  std::size_t active = 0;  // localisation radius index
  auto observe = [&](double t, const Vec& y, std::size_t sample_index) -> bool {
    const double ny = norm_or_inf(y);
    while (next_r < ctrl.radii.size() && ny >= ctrl.radii[next_r]) {
      tr.level_crossings.push_back({ctrl.radii[next_r], t, sample_index});
      ++next_r;
    }
    if (in.clamp_radii) {
      while (active < in.clamp_radii->size() && ny > (*in.clamp_radii)[active]) {
        tr.exit_times.push_back(t);
        ++active;
      }
      if (active == in.clamp_radii->size()) return true;
    }
    return ny >= ctrl.blowup_threshold;
  };

  auto drift = [&](double t, const Vec& y) -> Vec {
    if (in.clamp_radii && active < in.clamp_radii->size()) {
      const double R = (*in.clamp_radii)[active];
      const double ny = y.norm();
      if (ny > R) return sys.b(t, (R / ny) * y);
    }
    return sys.b(t, y);
  };
  auto drift_jac = [&](double t, const Vec& y) -> Mat {
    if (in.clamp_radii && active < in.clamp_radii->size()) {
      const double R = (*in.clamp_radii)[active];
      const double ny = y.norm();
      if (ny > R) {
        // chain rule through y -> R y/||y||
        Vec u = y / ny;
        Mat P = (R / ny) * (Mat::Identity(d, d) - u * u.transpose());
        return sys.Db(t, R * u) * P;
      }
    }
    return sys.Db(t, y);
  };

  observe(X.time(0), in.x0, 0);
  bool stopped = false;
  Vec D = Vec::Zero(d);
  Vec eta = Vec::Zero(d);
  double last_safe_time = X.time(0);

  for (std::size_t i = 0; i < J && !stopped; ++i) {
    const double t0 = X.time(i), t1 = X.time(i + 1);
    const Vec xi = xs.back();
    // drift substeps
    Vec dcell = Vec::Zero(d);
    Vec y = xi;
    double t = t0;
    double remaining = t1 - t0;
    while (remaining > 0.0) {
      Vec bv = drift(t, y);
      const double nb = norm_or_inf(bv);
      double h = remaining;
      const double cap = ctrl.displacement_cap * std::max(1.0, y.norm());
      if (nb * h > cap) h = cap / nb;
      if (!(h > 0.0) || (h < ctrl.step_floor && h < remaining)) {
        tr.status = TrajectoryStatus::step_floor_reached;
        stopped = true;
        break;
      }
      if (++tr.substeps > ctrl.max_substeps) {
        tr.status = TrajectoryStatus::step_floor_reached;
        stopped = true;
        break;
      }
      if (in.v0) v += drift_jac(t, y) * v * h;
      dcell += bv * h;
      y = (xi + dcell).eval();
      if (h >= remaining) {
        t = t1;
        remaining = 0.0;
      } else {
        t += h;
        remaining -= h;
      }
      if (remaining > 0.0) {
        if (observe(t, y, xs.size())) {
          times.push_back(t);
          xs.push_back(y);
          etas.push_back(eta);
          if (in.v0) out.v.push_back(v);
          tr.status = TrajectoryStatus::blown_up;
          tr.blowup_time = in.clamp_radii && !tr.exit_times.empty() && active == in.clamp_radii->size()
                               ? tr.exit_times.back()
                               : last_safe_time;
          stopped = true;
          break;
        }
        last_safe_time = t;
      }
    }
    if (stopped) break;

    // noise increment over the whole cell
    const Vec dX = X.increment(i, i + 1);
    if (additive_eta) {
      eta = X.increment(0, i + 1);
    } else {
      const Mat s = sys.sigma(xi);
      Vec incr = s * dX;
      if (in.mode == NoiseMode::rough && in.level2) incr += compensated_term(Mat::Zero(d, sys.m), gubinelli(sys, xi), dX, (*in.level2)[i]);
      eta += incr;
    }
    if (in.v0) {
      Tensor ds = sys.Dsigma(xi);
      Vec dv = Vec::Zero(d);
      for (int k = 0; k < sys.m; ++k)
        for (int a = 0; a < d; ++a) {
          double acc = 0.0;
          for (int l = 0; l < d; ++l) acc += ds.at(a, k, l) * v(l);
          dv(a) += acc * dX(k);
        }
      v += dv;
    }
    D += dcell;
    Vec xn = in.x0 + D + eta;
    times.push_back(t1);
    xs.push_back(xn);
    etas.push_back(eta);
    if (in.v0) out.v.push_back(v);
    if (observe(t1, xn, xs.size() - 1)) {
      tr.status = TrajectoryStatus::blown_up;
      tr.blowup_time = in.clamp_radii && !tr.exit_times.empty() && active == in.clamp_radii->size() ? tr.exit_times.back()
                                                                                                 : last_safe_time;
      stopped = true;
      break;
    }
    last_safe_time = t1;
  }

  tr.path = SampledPath(times, xs);
  tr.eta = SampledPath(times, etas);
  return out;
}

}  // namespace

Trajectory ode_solve(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x0, double T,
                     const StepControl& ctrl) {
  EngineInput in;
  in.sys = &sys;
  in.X = &driver;
  in.mode = NoiseMode::additive;
  in.x0 = x0;
  in.T = T;
  in.ctrl = ctrl;
  in.scheme = "euler";
  return run_engine(in).traj;
}

Trajectory young_solve(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x0, double T,
                       const StepControl& ctrl) {
  EngineInput in;
  in.sys = &sys;
  in.X = &driver;
  in.mode = NoiseMode::young;
  in.x0 = x0;
  in.T = T;
  in.ctrl = ctrl;
  in.scheme = "young-euler";
  return run_engine(in).traj;
}

Trajectory rde_solve(const VectorFieldSystem& sys, const RoughPath& rp, const Vec& x0, double T,
                     const StepControl& ctrl) {
  EngineInput in;
  in.sys = &sys;
  in.X = &rp.level1();
  in.level2 = &rp.level2();
  in.mode = NoiseMode::rough;
  in.x0 = x0;
  in.T = T;
  in.ctrl = ctrl;
  in.scheme = "davie";
  return run_engine(in).traj;
}

DerivativeFlow derivative_flow(const VectorFieldSystem& sys, const Driver& driver, const Vec& x0, const Vec& v0,
                               double T, const StepControl& ctrl) {
  if (!sys.Db || !sys.Dsigma) throw std::invalid_argument("derivative data unavailable");
  EngineInput in;
  in.sys = &sys;
  if (const auto* p = std::get_if<SampledPath>(&driver)) {
    in.X = p;
    in.mode = sys.additive_identity ? NoiseMode::additive : NoiseMode::young;
    in.scheme = "euler";
  } else {
    const auto& rp = std::get<RoughPath>(driver);
    in.X = &rp.level1();
    in.level2 = &rp.level2();
    in.mode = NoiseMode::rough;
    in.scheme = "davie";
  }
  in.x0 = x0;
  in.T = T;
  in.ctrl = ctrl;
  in.v0 = &v0;
  auto out = run_engine(in);
  SampledPath vpath(out.traj.path.times(), out.v);
  return {std::move(out.traj), std::move(vpath)};
}

Trajectory localize_solve(const VectorFieldSystem& sys, const SampledPath& driver, const Vec& x0,
                          const std::vector<double>& radii, double T, const StepControl& ctrl) {
  if (radii.empty()) throw std::invalid_argument("radius ladder must not be empty");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw std::invalid_argument("radii must be strictly increasing");
  if (!(radii.front() > 0.0)) throw std::invalid_argument("radii must be positive");
  EngineInput in;
  in.sys = &sys;
  in.X = &driver;
  in.mode = sys.additive_identity ? NoiseMode::additive : NoiseMode::young;
  in.x0 = x0;
  in.T = T;
  in.ctrl = ctrl;
  in.clamp_radii = &radii;
  in.scheme = "euler-localized";
  return run_engine(in).traj;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

FlowGrid flow_grid(const VectorFieldSystem& sys, const Driver& driver, const std::vector<Vec>& starts, double T,
                   const StepControl& ctrl, unsigned threads) {
  FlowGrid g;
  g.summaries.resize(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t i) {
    Trajectory tr;
    if (const auto* p = std::get_if<SampledPath>(&driver))
      tr = sys.additive_identity ? ode_solve(sys, *p, starts[i], T, ctrl) : young_solve(sys, *p, starts[i], T, ctrl);
    else
      tr = rde_solve(sys, std::get<RoughPath>(driver), starts[i], T, ctrl);
    const std::size_t last = tr.path.size() - 1;
    g.summaries[i] = {starts[i], tr.status, tr.blowup_time, tr.path.value(last), tr.path.end(), tr.max_norm()};
  });
  const std::size_t n = starts.size();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) nearest[i] = std::min(nearest[i], (starts[i] - starts[j]).norm());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = (starts[i] - starts[j]).norm();
      if (dist <= nearest[i] * (1 + 1e-9) || dist <= nearest[j] * (1 + 1e-9)) {
        const bool ok = g.summaries[i].status == TrajectoryStatus::completed &&
                        g.summaries[j].status == TrajectoryStatus::completed;
        g.neighbors.push_back({i, j, dist,
                               ok ? (g.summaries[i].endpoint - g.summaries[j].endpoint).norm()
                                  : std::numeric_limits<double>::quiet_NaN()});
      }
    }
  return g;
}

}  // namespace roughflow
