#include "roughflow/paths.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace roughflow {

namespace {

double time_tol(double t) { return 1e-10 * std::max(1.0, std::abs(t)); }

std::pair<std::size_t, std::size_t> grid_range(const std::vector<double>& g, Interval iv) {
  if (g.empty()) throw std::invalid_argument("degenerate interval");
  if (iv.t < iv.s) throw std::invalid_argument("degenerate interval");
  if (iv.s < g.front() - time_tol(g.front()) || iv.t > g.back() + time_tol(g.back()))
    throw std::out_of_range("interval outside the time range of the path");
  auto lo = std::lower_bound(g.begin(), g.end(), iv.s - time_tol(iv.s));
  auto hi = std::upper_bound(g.begin(), g.end(), iv.t + time_tol(iv.t));
  if (lo == g.end() || hi == g.begin()) throw std::invalid_argument("degenerate interval");
  std::size_t a = static_cast<std::size_t>(lo - g.begin());
  std::size_t b = static_cast<std::size_t>(hi - g.begin()) - 1;
  if (b <= a) throw std::invalid_argument("degenerate interval");
  return {a, b};
}

void check_times(const std::vector<double>& times) {
  if (times.size() < 2) throw std::invalid_argument("a sampled path needs at least 2 grid points");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw std::invalid_argument("non-finite grid time");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("grid times must be strictly increasing (index " + std::to_string(i) + ")");
  }
}

// Shared by the DP and the brute force so both see bit-identical terms.
inline double pvar_term(const Mat& v, std::size_t i, std::size_t j, double p) {
  double n = (v.col(static_cast<Eigen::Index>(j)) - v.col(static_cast<Eigen::Index>(i))).norm();
  return p == 1.0 ? n : std::pow(n, p);
}

}  // namespace

SampledPath::SampledPath(std::vector<double> times, Mat values) : times_(std::move(times)), values_(std::move(values)) {
  check_times(times_);
  if (static_cast<std::size_t>(values_.cols()) != times_.size())
    throw std::invalid_argument("times and values must have the same length");
  if (values_.rows() < 1) throw std::invalid_argument("path dimension must be positive");
}

SampledPath::SampledPath(std::vector<double> times, const std::vector<Vec>& values) : times_(std::move(times)) {
  check_times(times_);
  if (values.size() != times_.size()) throw std::invalid_argument("times and values must have the same length");
  const auto d = values.front().size();
  if (d < 1) throw std::invalid_argument("path dimension must be positive");
  values_.resize(d, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != d) throw std::invalid_argument("all values must share the path dimension");
    values_.col(static_cast<Eigen::Index>(i)) = values[i];
  }
}

std::optional<std::size_t> SampledPath::find_index(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t - time_tol(t));
  if (it == times_.end() || std::abs(*it - t) > time_tol(t)) return std::nullopt;
  return static_cast<std::size_t>(it - times_.begin());
}

std::size_t SampledPath::index_of(double t) const {
  auto i = find_index(t);
  if (!i) throw std::invalid_argument("time " + std::to_string(t) + " is not a grid time");
  return *i;
}

std::size_t SampledPath::index_at_or_before(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t + time_tol(t));
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::pair<std::size_t, std::size_t> SampledPath::index_range(Interval iv) const { return grid_range(times_, iv); }

SampledPath SampledPath::slice(std::size_t first, std::size_t last) const {
  if (last <= first || last >= times_.size()) throw std::invalid_argument("degenerate interval");
  std::vector<double> t(times_.begin() + static_cast<std::ptrdiff_t>(first),
                        times_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  return SampledPath(std::move(t), Mat(values_.middleCols(static_cast<Eigen::Index>(first),
                                                          static_cast<Eigen::Index>(last - first + 1))));
}

bool SampledPath::is_uniform(double rel_tol) const {
  const double h = (end() - start()) / static_cast<double>(size() - 1);
  for (std::size_t i = 1; i < size(); ++i)
    if (std::abs((times_[i] - times_[i - 1]) - h) > rel_tol * h * 1e3) return false;
  return true;
}

TwoParamProcess::TwoParamProcess(std::vector<double> grid, int codim, Generator gen)
    : grid_(std::move(grid)), codim_(codim), gen_(std::move(gen)) {
  check_times(grid_);
  if (codim_ < 1) throw std::invalid_argument("codim must be positive");
}

TwoParamProcess TwoParamProcess::from_table(std::vector<double> grid, int codim, std::vector<std::vector<Vec>> table) {
  if (table.size() != grid.size()) throw std::invalid_argument("table must have one row per grid time");
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (table[j].size() != j + 1) throw std::invalid_argument("table row j must hold j+1 entries");
    if (table[j][j].norm() != 0.0) throw std::invalid_argument("A_{t,t} must vanish on the diagonal");
  }
  auto shared = std::make_shared<std::vector<std::vector<Vec>>>(std::move(table));
  return TwoParamProcess(std::move(grid), codim, [shared](std::size_t i, std::size_t j) { return (*shared)[j][i]; });
}

TwoParamProcess TwoParamProcess::increments(const SampledPath& path) {
  auto shared = std::make_shared<SampledPath>(path);
  return TwoParamProcess(path.times(), path.dim(),
                         [shared](std::size_t i, std::size_t j) { return shared->increment(i, j); });
}

Vec TwoParamProcess::at(std::size_t i, std::size_t j) const {
  if (i > j || j >= grid_.size()) throw std::out_of_range("two-parameter index must satisfy i <= j < n");
  if (i == j) return Vec::Zero(codim_);
  return gen_(i, j);
}

double holder_norm(const SampledPath& path, double alpha, Interval iv) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  auto [a, b] = path.index_range(iv);
  const auto& t = path.times();
  const Mat& v = path.values();
  double best = 0.0;
  for (std::size_t u = a; u < b; ++u) {
    for (std::size_t w = u + 1; w <= b; ++w) {
      double n = (v.col(static_cast<Eigen::Index>(w)) - v.col(static_cast<Eigen::Index>(u))).norm();
      if (n == 0.0) continue;
      double r = n / std::pow(t[w] - t[u], alpha);
      if (r > best) best = r;
    }
  }
  return best;
}

double holder_norm(const SampledPath& path, double alpha) { return holder_norm(path, alpha, {path.start(), path.end()}); }

double two_param_holder_norm(const TwoParamProcess& a, double alpha, Interval iv) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  auto [lo, hi] = grid_range(a.grid(), iv);
  const auto& g = a.grid();
  double best = 0.0;
  for (std::size_t u = lo; u < hi; ++u)
    for (std::size_t w = u + 1; w <= hi; ++w) {
      double n = a.at(u, w).norm();
      if (n == 0.0) continue;
      best = std::max(best, n / std::pow(g[w] - g[u], alpha));
    }
  return best;
}

std::vector<std::pair<double, double>> holder_profile(const TwoParamProcess& a, double alpha_prime, double t0,
                                                      std::optional<std::vector<double>> eps_grid) {
  if (!(alpha_prime > 0.0)) throw std::invalid_argument("alpha' must be positive");
  const auto& g = a.grid();
  auto it = std::lower_bound(g.begin(), g.end(), t0 - time_tol(t0));
  if (it == g.end() || std::abs(*it - t0) > time_tol(t0)) throw std::out_of_range("t0 is not a grid time");
  const std::size_t i0 = static_cast<std::size_t>(it - g.begin());

  std::vector<double> eps;
  if (eps_grid) {
    eps = *eps_grid;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      if (eps[k] < 0.0) throw std::invalid_argument("epsilon grid must be non-negative");
      if (k > 0 && eps[k] < eps[k - 1]) throw std::invalid_argument("epsilon grid must be sorted");
    }
  } else {
    for (std::size_t j = i0 + 1; j < g.size(); ++j) eps.push_back(g[j] - t0);
  }

  std::vector<std::pair<double, double>> out;
  out.reserve(eps.size());
  std::size_t reached = i0;
  double n_eps = 0.0;
  for (double e : eps) {
    const double target = t0 + e;
    while (reached + 1 < g.size() && g[reached + 1] <= target + time_tol(target)) {
      ++reached;
      for (std::size_t u = i0; u < reached; ++u) {
        double n = a.at(u, reached).norm();
        if (n == 0.0) continue;
        n_eps = std::max(n_eps, n / std::pow(g[reached] - g[u], alpha_prime));
      }
    }
    out.emplace_back(e, n_eps);
  }
  return out;
}

double p_variation(const SampledPath& path, double p, Interval iv) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  auto [a, b] = path.index_range(iv);
  const Mat& v = path.values();
  std::vector<double> best(b - a + 1, 0.0);
  for (std::size_t j = a + 1; j <= b; ++j) {
    double m = -1.0;
    for (std::size_t i = a; i < j; ++i) {
      double s = best[i - a] + pvar_term(v, i, j, p);
      if (s > m) m = s;
    }
    best[j - a] = m;
  }
  return p == 1.0 ? best.back() : std::pow(best.back(), 1.0 / p);
}

double p_variation(const SampledPath& path, double p) { return p_variation(path, p, {path.start(), path.end()}); }

double p_variation_bruteforce(const SampledPath& path, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const std::size_t n = path.size();
  if (n > 14) throw std::invalid_argument("oracle limit exceeded");
  const Mat& v = path.values();
  const std::size_t interior = n - 2;
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << interior); ++mask) {
    double sum = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (k == n - 1 || (mask >> (k - 1)) & 1u) {
        sum += pvar_term(v, prev, k, p);
        prev = k;
      }
    }
    if (sum > best) best = sum;
  }
  return p == 1.0 ? best : std::pow(best, 1.0 / p);
}

double holder_exponent_estimate(const SampledPath& path) {
  const std::size_t n = path.size();
  if (n < 64) throw std::invalid_argument("holder_exponent_estimate needs at least 64 grid points");
  constexpr std::size_t kBlock = 8;
  constexpr std::size_t kMinBlocks = 4;
  const double span = path.end() - path.start();
  const double mesh = span / static_cast<double>(n - 1);
  const bool uniform = path.is_uniform();

  std::vector<double> xs, ys, ws;
  for (int j = 0;; ++j) {
    const std::size_t stride = std::size_t{1} << j;
    const double h = mesh * static_cast<double>(stride);
    std::vector<std::size_t> idx;
    if (uniform) {
      for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
    } else {
      const auto steps = static_cast<std::size_t>(std::floor(span / h + 1e-9));
      for (std::size_t k = 0; k <= steps; ++k) idx.push_back(path.index_at_or_before(path.start() + k * h));
    }
    const std::size_t incs = idx.size() - 1;
    const std::size_t blocks = incs / kBlock;
    if (blocks < 1 || (blocks < kMinBlocks && xs.size() >= 2)) break;
    double mean_log = 0.0;
    for (std::size_t bk = 0; bk < blocks; ++bk) {
      double m = 0.0;
      for (std::size_t q = 0; q < kBlock; ++q) {
        const std::size_t k = bk * kBlock + q;
        m = std::max(m, path.increment(idx[k], idx[k + 1]).norm());
      }
      mean_log += std::log(std::max(m, std::numeric_limits<double>::min()));
    }
    xs.push_back(std::log(h));
    ys.push_back(mean_log / static_cast<double>(blocks));
    ws.push_back(static_cast<double>(blocks));
  }
  if (xs.size() < 2) throw std::invalid_argument("holder_exponent_estimate needs at least two scales");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sw += ws[k];
    sx += ws[k] * xs[k];
    sy += ws[k] * ys[k];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += ws[k] * (xs[k] - mx) * (ys[k] - my);
    sxx += ws[k] * (xs[k] - mx) * (xs[k] - mx);
  }
  return sxy / sxx;
}

}  // namespace roughflow
