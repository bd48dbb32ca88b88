#include "roughflow/noise.hpp"

#include "counter_rng.hpp"
#include "roughflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace roughflow {

using detail::normal;
using detail::stream_id;
using detail::uniform;

namespace {

// Number of cells when T/mesh is an integer (within rounding), else 0.
std::size_t integral_cells(double horizon, double mesh) {
  const double n = horizon / mesh;
  const double r = std::round(n);
  if (r >= 1.0 && std::abs(n - r) <= 1e-9 * r) return static_cast<std::size_t>(r);
  return 0;
}

void check_common(const DriverSpec& spec) {
  if (!(spec.mesh > 0.0) || !std::isfinite(spec.mesh)) throw std::invalid_argument("mesh must be positive");
  if (!(spec.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (spec.dim < 1) throw std::invalid_argument("driver dimension must be positive");
  if (spec.horizon / spec.mesh > 1e8) throw std::invalid_argument("grid too large (more than 1e8 cells)");
}

// One Brownian coordinate on the grid returned by uniform_grid.
std::vector<double> brownian_coordinate(const DriverSpec& spec, const std::vector<double>& grid, std::uint64_t coord) {
  const std::size_t cells = integral_cells(spec.horizon, spec.mesh);
  std::vector<double> w(grid.size(), 0.0);
  if (cells == 0) {
    const auto s = stream_id(detail::kBrownianStep, coord);
    for (std::size_t i = 1; i < grid.size(); ++i)
      w[i] = w[i - 1] + std::sqrt(grid[i] - grid[i - 1]) * normal(spec.seed, s, 0, i);
    return w;
  }
  std::size_t n0 = cells;
  int levels = 0;
  while (n0 % 2 == 0) {
    n0 /= 2;
    ++levels;
  }
  const std::size_t stride0 = std::size_t{1} << levels;
  const double coarse = spec.horizon / static_cast<double>(n0);
  const auto sk = stream_id(detail::kBrownianSkeleton, coord);
  for (std::size_t k = 1; k <= n0; ++k)
    w[k * stride0] = w[(k - 1) * stride0] + std::sqrt(coarse) * normal(spec.seed, sk, 0, k);
  const auto br = stream_id(detail::kBrownianBridge, coord);
  for (int l = 1; l <= levels; ++l) {
    const std::size_t half = std::size_t{1} << (levels - l);
    const std::size_t parent_cells = n0 << (l - 1);
    const double parent_len = coarse / static_cast<double>(std::size_t{1} << (l - 1));
    const double sd = std::sqrt(parent_len / 4.0);
    for (std::size_t c = 0; c < parent_cells; ++c) {
      const std::size_t left = c * 2 * half;
      const std::size_t right = left + 2 * half;
      w[left + half] = 0.5 * (w[left] + w[right]) + sd * normal(spec.seed, br, static_cast<std::uint64_t>(l), c);
    }
  }
  return w;
}

std::string jitter_hint(double variance) {
  std::ostringstream os;
  os << "fbm covariance factorisation failed (matrix not numerically positive definite); "
     << "retry with jitter >= " << std::max(1e-14, 1e-10 * variance);
  return os.str();
}

// Durbin-Levinson: increments X_k = Σ φ_{k,j} X_{k-j} + sqrt(v_k) Z_k.
std::vector<double> fgn_uniform(double h, double hurst, double jitter, std::size_t n, std::uint64_t seed,
                                std::uint64_t stream) {
  const double h2 = 2.0 * hurst;
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    g[k] = 0.5 * std::pow(h, h2) *
           (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(std::abs(kk - 1.0), h2));
  }
  g[0] += jitter;
  std::vector<double> x(n), phi, prev;
  phi.reserve(n);
  prev.reserve(n);
  double v = g[0];
  if (!(v > 0.0)) throw std::runtime_error(jitter_hint(g[0]));
  x[0] = std::sqrt(v) * normal(seed, stream, 0, 0);
  for (std::size_t k = 1; k < n; ++k) {
    double acc = g[k];
    for (std::size_t j = 1; j < k; ++j) acc -= prev[j - 1] * g[k - j];
    const double pkk = acc / v;
    phi.assign(k, 0.0);
    for (std::size_t j = 1; j < k; ++j) phi[j - 1] = prev[j - 1] - pkk * prev[k - j - 1];
    phi[k - 1] = pkk;
    v *= (1.0 - pkk * pkk);
    if (!(v > 0.0) || !std::isfinite(v)) throw std::runtime_error(jitter_hint(g[0]));
    double mean = 0.0;
    for (std::size_t j = 1; j <= k; ++j) mean += phi[j - 1] * x[k - j];
    x[k] = mean + std::sqrt(v) * normal(seed, stream, 0, k);
    prev.swap(phi);
  }
  return x;
}

std::vector<double> fbm_dense(const std::vector<double>& grid, double hurst, double jitter, std::uint64_t seed,
                              std::uint64_t stream) {
  const std::size_t n = grid.size() - 1;
  if (n > 4096) throw std::invalid_argument("fbm on a non-uniform grid is limited to 4096 cells");
  const double h2 = 2.0 * hurst;
  Mat c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double s = grid[i + 1] - grid[0], t = grid[j + 1] - grid[0];
      c(i, j) = 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
    }
  c.diagonal().array() += jitter;
  Eigen::LLT<Mat> llt(c);
  if (llt.info() != Eigen::Success) throw std::runtime_error(jitter_hint(c.diagonal().maxCoeff()));
  Vec z(n);
  for (std::size_t k = 0; k < n; ++k) z(k) = normal(seed, stream, 0, k);
  Vec b = llt.matrixL() * z;
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) out[k + 1] = b(k);
  return out;
}

Mat symmetric_sqrt(const Mat& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sigma + sigma.transpose()));
  Vec ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-12 * scale) throw std::invalid_argument("levy covariance must be positive semidefinite");
    ev(i) = std::sqrt(std::max(0.0, ev(i)));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Vec sample_jump(const DriverSpec& spec, std::uint64_t k) {
  const auto& js = spec.levy.jumps;
  const int d = spec.dim;
  const auto stream = stream_id(detail::kLevySize, 0);
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Vec g(d);
    for (int c = 0; c < d; ++c) g(c) = normal(spec.seed, stream, attempt * 64 + static_cast<std::uint64_t>(c), k);
    Vec z;
    if (js.kind == JumpSampler::Kind::uniform_ball) {
      const double u = uniform(spec.seed, stream, attempt * 64 + 63, k);
      z = g.normalized() * js.radius * std::pow(u, 1.0 / d);
    } else {
      z = js.scale * g;
      if (z.norm() > js.radius) continue;
    }
    if (z.norm() >= js.floor) return z;
  }
  throw std::runtime_error("jump sampler rejected 1000 consecutive draws; check floor/radius");
}

}  // namespace

std::vector<double> uniform_grid(double horizon, double mesh) {
  if (!(mesh > 0.0)) throw std::invalid_argument("mesh must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  std::size_t cells = integral_cells(horizon, mesh);
  std::vector<double> g;
  if (cells > 0) {
    g.resize(cells + 1);
    for (std::size_t i = 0; i < cells; ++i) g[i] = static_cast<double>(i) * mesh;
    g[cells] = horizon;
  } else {
    cells = static_cast<std::size_t>(std::ceil(horizon / mesh));
    for (std::size_t i = 0; i < cells; ++i) g.push_back(static_cast<double>(i) * mesh);
    if (horizon - g.back() < 1e-9 * mesh) g.back() = horizon;
    else g.push_back(horizon);
  }
  return g;
}

SampledPath brownian(const DriverSpec& spec) {
  check_common(spec);
  auto grid = uniform_grid(spec.horizon, spec.mesh);
  Mat v(spec.dim, static_cast<Eigen::Index>(grid.size()));
  for (int c = 0; c < spec.dim; ++c) {
    auto w = brownian_coordinate(spec, grid, static_cast<std::uint64_t>(c));
    v.row(c) = Eigen::Map<const Eigen::RowVectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  }
  return SampledPath(std::move(grid), std::move(v));
}

SampledPath fbm(const DriverSpec& spec) {
  check_common(spec);
  if (spec.hurst.empty()) throw std::invalid_argument("fbm needs at least one Hurst index");
  for (double h : spec.hurst)
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("Hurst index must lie in (0,1)");
  if (spec.jitter < 0.0) throw std::invalid_argument("jitter must be non-negative");
  auto grid = uniform_grid(spec.horizon, spec.mesh);
  const std::size_t n = grid.size() - 1;
  if (n > (std::size_t{1} << 14)) throw std::invalid_argument("fbm grid limited to 2^14 cells");
  const bool uniform_cells = integral_cells(spec.horizon, spec.mesh) > 0;
  Mat v = Mat::Zero(spec.dim, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t s = 0; s < spec.hurst.size(); ++s) {
    for (int c = 0; c < spec.dim; ++c) {
      const auto stream = stream_id(detail::kFbm, static_cast<std::uint64_t>(c) + 4096 * s);
      if (uniform_cells) {
        auto x = fgn_uniform(spec.mesh, spec.hurst[s], spec.jitter, n, spec.seed, stream);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          acc += x[k];
          v(c, static_cast<Eigen::Index>(k + 1)) += acc;
        }
      } else {
        auto x = fbm_dense(grid, spec.hurst[s], spec.jitter, spec.seed, stream);
        for (std::size_t k = 0; k <= n; ++k) v(c, static_cast<Eigen::Index>(k)) += x[k];
      }
    }
  }
  return SampledPath(std::move(grid), std::move(v));
}

SampledPath levy(const DriverSpec& spec) {
  check_common(spec);
  const auto& lp = spec.levy;
  if (lp.intensity < 0.0) throw std::invalid_argument("jump intensity must be non-negative");
  const int d = spec.dim;
  Vec drift = lp.drift.size() == 0 ? Vec::Zero(d) : lp.drift;
  if (drift.size() != d) throw std::invalid_argument("levy drift must have the driver dimension");
  Mat root = Mat::Zero(d, d);
  if (lp.covariance.size() != 0) {
    if (lp.covariance.rows() != d || lp.covariance.cols() != d)
      throw std::invalid_argument("levy covariance must be dim x dim");
    root = symmetric_sqrt(lp.covariance);
  }

  // Jump times and sizes.
  std::vector<std::pair<double, Vec>> jumps;
  if (lp.jumps.kind == JumpSampler::Kind::fixed) {
    if (lp.jumps.times.size() != lp.jumps.sizes.size())
      throw std::invalid_argument("fixed jumps need one size per time");
    for (std::size_t k = 0; k < lp.jumps.times.size(); ++k) {
      const double t = lp.jumps.times[k];
      if (!(t > 0.0 && t <= spec.horizon)) throw std::invalid_argument("fixed jump times must lie in (0, T]");
      if (lp.jumps.sizes[k].size() != d) throw std::invalid_argument("jump size has wrong dimension");
      jumps.emplace_back(t, lp.jumps.sizes[k]);
    }
    std::sort(jumps.begin(), jumps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  } else if (lp.intensity > 0.0) {
    const auto arrivals = stream_id(detail::kLevyArrival, 0);
    double t = 0.0;
    for (std::uint64_t k = 0;; ++k) {
      t += -std::log(uniform(spec.seed, arrivals, 0, k)) / lp.intensity;
      if (t > spec.horizon) break;
      if (k > 10'000'000) throw std::runtime_error("too many jumps; lower the intensity");
      jumps.emplace_back(t, sample_jump(spec, k));
    }
  }

  const SampledPath w = brownian(spec);
  const auto& grid = w.times();

  // Merge jump times into the grid, bridging W at inserted points.
  std::vector<double> times;
  std::vector<Vec> cont;
  std::vector<int> jump_at;  // index into jumps, or -1
  const auto bridge_stream = stream_id(detail::kLevyBridge, 0);
  std::size_t next_jump = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) {
      double ta = times.back();
      Vec wa = cont.back();
      const double tb = grid[i];
      const Vec wb = w.value(i);
      while (next_jump < jumps.size() && jumps[next_jump].first < tb - 1e-12 * std::max(1.0, tb)) {
        const double tau = jumps[next_jump].first;
        if (tau - ta <= 1e-12 * std::max(1.0, tau)) {
          // coincides with the previous point: the jump lands there
          if (jump_at.back() < 0) jump_at.back() = static_cast<int>(next_jump);
          else {
            times.push_back(std::nextafter(ta, tb));
            cont.push_back(wa);
            jump_at.push_back(static_cast<int>(next_jump));
            ta = times.back();
          }
          ++next_jump;
          continue;
        }
        const double lam = (tau - ta) / (tb - ta);
        const double sd = std::sqrt((tau - ta) * (tb - tau) / (tb - ta));
        Vec wt = wa + lam * (wb - wa);
        for (int c = 0; c < d; ++c) wt(c) += sd * normal(spec.seed, bridge_stream, static_cast<std::uint64_t>(c), next_jump);
        times.push_back(tau);
        cont.push_back(wt);
        jump_at.push_back(static_cast<int>(next_jump));
        ta = tau;
        wa = wt;
        ++next_jump;
      }
    }
    times.push_back(grid[i]);
    cont.push_back(w.value(i));
    jump_at.push_back(-1);
    while (next_jump < jumps.size() && std::abs(jumps[next_jump].first - grid[i]) <= 1e-12 * std::max(1.0, grid[i])) {
      if (jump_at.back() < 0) jump_at.back() = static_cast<int>(next_jump);
      else {
        // several jumps on one grid time: accumulate into the same point
        jumps[static_cast<std::size_t>(jump_at.back())].second += jumps[next_jump].second;
      }
      ++next_jump;
    }
  }

  Mat v(d, static_cast<Eigen::Index>(times.size()));
  Vec jsum = Vec::Zero(d);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (jump_at[i] >= 0) jsum += jumps[static_cast<std::size_t>(jump_at[i])].second;
    v.col(static_cast<Eigen::Index>(i)) = drift * times[i] + root * cont[i] + jsum;
  }
  return SampledPath(std::move(times), std::move(v));
}

SampledPath generate(const DriverSpec& spec) {
  switch (spec.kind) {
    case DriverKind::brownian: return brownian(spec);
    case DriverKind::fbm: return fbm(spec);
    case DriverKind::levy: return levy(spec);
    case DriverKind::deterministic_file: return read_path_csv(spec.file);
  }
  throw std::invalid_argument("unknown driver kind");
}

}  // namespace roughflow
