#include "roughflow/rough.hpp"

#include "counter_rng.hpp"
#include "roughflow/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace roughflow {

RoughPath::RoughPath(SampledPath level1, std::vector<Mat> level2, double alpha)
    : level1_(std::move(level1)), level2_(std::move(level2)), alpha_(alpha) {
  if (level2_.size() + 1 != level1_.size()) throw std::invalid_argument("level2 needs one matrix per grid cell");
  const int m = level1_.dim();
  for (const auto& c : level2_)
    if (c.rows() != m || c.cols() != m) throw std::invalid_argument("level2 cells must be m x m");
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw std::invalid_argument("rough path alpha must lie in (0,1]");
}

RoughPath ito_lift(const SampledPath& fine, int refine, double alpha) {
  if (refine < 1) throw std::invalid_argument("refine must be >= 1");
  const std::size_t cells_fine = fine.size() - 1;
  if (cells_fine % static_cast<std::size_t>(refine) != 0)
    throw std::invalid_argument("fine grid cell count must be a multiple of refine");
  const std::size_t cells = cells_fine / static_cast<std::size_t>(refine);
  const int m = fine.dim();
  const Mat& v = fine.values();
  std::vector<double> times(cells + 1);
  Mat coarse(m, static_cast<Eigen::Index>(cells + 1));
  std::vector<Mat> l2(cells, Mat::Zero(m, m));
  for (std::size_t c = 0; c <= cells; ++c) {
    const std::size_t i = c * static_cast<std::size_t>(refine);
    times[c] = fine.time(i);
    coarse.col(static_cast<Eigen::Index>(c)) = v.col(static_cast<Eigen::Index>(i));
  }
  Vec from(m), inc(m);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto i0 = static_cast<Eigen::Index>(c * static_cast<std::size_t>(refine));
    Mat& cell = l2[c];
    for (Eigen::Index j = i0; j < i0 + refine; ++j) {
      from = v.col(j) - v.col(i0);
      inc = v.col(j + 1) - v.col(j);
      cell.noalias() += from * inc.transpose();
    }
  }
  return RoughPath(SampledPath(std::move(times), std::move(coarse)), std::move(l2), alpha);
}

RoughPath ito_lift(const DriverSpec& spec, int refine, double alpha) {
  if (spec.kind != DriverKind::brownian) throw std::invalid_argument("ito_lift needs a brownian driver spec");
  if (refine < 1) throw std::invalid_argument("refine must be >= 1");
  const double fine_mesh = spec.mesh / refine;
  if (!(fine_mesh > 64 * std::numeric_limits<double>::epsilon() * spec.horizon))
    throw std::invalid_argument("refine pushes the fine mesh below floating-point resolution");
  DriverSpec fine = spec;
  fine.mesh = fine_mesh;
  return ito_lift(brownian(fine), refine, alpha);
}

RoughPath canonical_lift(const SampledPath& path, double alpha) {
  std::vector<Mat> l2;
  l2.reserve(path.size() - 1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    Vec dx = path.increment(i, i + 1);
    l2.push_back(0.5 * dx * dx.transpose());
  }
  return RoughPath(path, std::move(l2), alpha);
}

RoughPath pure_quadratic_lift(double horizon, double mesh, int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  auto grid = uniform_grid(horizon, mesh);
  std::vector<Mat> l2;
  l2.reserve(grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) l2.push_back((grid[i + 1] - grid[i]) * Mat::Identity(m, m));
  Mat zero = Mat::Zero(m, static_cast<Eigen::Index>(grid.size()));
  return RoughPath(SampledPath(std::move(grid), std::move(zero)), std::move(l2), 0.5);
}

Mat level2_reconstruct(const RoughPath& rp, std::size_t i, std::size_t j) {
  if (i > j || j >= rp.size()) throw std::out_of_range("level2_reconstruct needs grid indices i <= j");
  const int m = rp.dim();
  Mat out = Mat::Zero(m, m);
  const Mat& v = rp.level1().values();
  const auto& l2 = rp.level2();
  Vec acc = Vec::Zero(m), inc(m);
  for (std::size_t k = i; k < j; ++k) {
    inc = v.col(static_cast<Eigen::Index>(k + 1)) - v.col(static_cast<Eigen::Index>(k));
    out += l2[k];
    out.noalias() += acc * inc.transpose();
    acc += inc;
  }
  return out;
}

Mat level2_reconstruct(const RoughPath& rp, double s, double t) {
  auto i = rp.level1().find_index(s);
  auto j = rp.level1().find_index(t);
  if (!i || !j) throw std::invalid_argument("level2 is only defined between grid times (no interpolation)");
  return level2_reconstruct(rp, *i, *j);
}

namespace {

double triple_defect(const RoughPath& rp, std::size_t s, std::size_t u, std::size_t t) {
  Mat d = level2_reconstruct(rp, s, t) - level2_reconstruct(rp, s, u) - level2_reconstruct(rp, u, t);
  Vec xsu = rp.level1().increment(s, u), xut = rp.level1().increment(u, t);
  d.noalias() -= xsu * xut.transpose();
  return d.norm();
}

}  // namespace

double chen_defect(const RoughPath& rp, std::size_t full_limit) {
  const std::size_t n = rp.size();
  double worst = 0.0;
  if (n < 3) return 0.0;
  if (n <= full_limit) {
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t u = s + 1; u < n; ++u)
        for (std::size_t t = u + 1; t < n; ++t) worst = std::max(worst, triple_defect(rp, s, u, t));
    return worst;
  }
  constexpr std::size_t kStride = 16;
  std::vector<std::size_t> sub;
  for (std::size_t k = 0; k < kStride; ++k) sub.push_back(k * (n - 1) / (kStride - 1));
  for (std::size_t a = 0; a < sub.size(); ++a)
    for (std::size_t b = a + 1; b < sub.size(); ++b)
      for (std::size_t c = b + 1; c < sub.size(); ++c) worst = std::max(worst, triple_defect(rp, sub[a], sub[b], sub[c]));
  for (std::uint64_t k = 0; k < 300; ++k) {
    std::size_t p[3];
    for (int q = 0; q < 3; ++q) p[q] = detail::hash_key(0xC4E5, 1, static_cast<std::uint64_t>(q), k) % n;
    std::sort(p, p + 3);
    if (p[0] == p[1] || p[1] == p[2]) continue;
    worst = std::max(worst, triple_defect(rp, p[0], p[1], p[2]));
  }
  return worst;
}

Level2Table::Level2Table(std::size_t n, int m) : n_(n), data_(n * n, Mat::Zero(m, m)) {}

Level2Table Level2Table::from_rough_path(const RoughPath& rp) {
  const std::size_t n = rp.size();
  Level2Table t(n, rp.dim());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) t.at(i, j) = level2_reconstruct(rp, i, j);
  return t;
}

Mat& Level2Table::at(std::size_t i, std::size_t j) {
  if (i > j || j >= n_) throw std::out_of_range("Level2Table index must satisfy i <= j < n");
  return data_[i * n_ + j];
}

const Mat& Level2Table::at(std::size_t i, std::size_t j) const {
  if (i > j || j >= n_) throw std::out_of_range("Level2Table index must satisfy i <= j < n");
  return data_[i * n_ + j];
}

double chen_defect(const SampledPath& level1, const Level2Table& table) {
  if (table.size() != level1.size()) throw std::invalid_argument("table and path sizes differ");
  const std::size_t n = level1.size();
  double worst = 0.0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t u = s + 1; u < n; ++u)
      for (std::size_t t = u + 1; t < n; ++t) {
        Mat d = table.at(s, t) - table.at(s, u) - table.at(u, t);
        d.noalias() -= level1.increment(s, u) * level1.increment(u, t).transpose();
        worst = std::max(worst, d.norm());
      }
  return worst;
}

Vec compensated_term(const Mat& y, const Mat& yprime, const Vec& dx, const Mat& xx) {
  const Eigen::Index m = dx.size();
  Vec out = y * dx;
  for (Eigen::Index b = 0; b < m; ++b)
    for (Eigen::Index c = 0; c < m; ++c) {
      const double w = xx(c, b);
      if (w != 0.0) out += w * yprime.col(b * m + c);
    }
  return out;
}

namespace {

void check_same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("grid mismatch between controlled path and rough path");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i])))
      throw std::invalid_argument("grid mismatch between controlled path and rough path");
}

}  // namespace

RoughIntegral rough_integral(const ControlledPath& cp, const RoughPath& rp, Interval iv) {
  check_same_grid(cp.times, rp.level1().times());
  if (cp.Y.size() != cp.times.size() || cp.Yprime.size() != cp.times.size())
    throw std::invalid_argument("controlled path needs Y and Y' at every grid time");
  auto [a, b] = rp.level1().index_range(iv);
  const auto& x = rp.level1();
  std::vector<Vec> terms;
  terms.reserve(b - a);
  for (std::size_t k = a; k < b; ++k)
    terms.push_back(compensated_term(cp.Y[k], cp.Yprime[k], x.increment(k, k + 1), rp.level2()[k]));
  RoughIntegral res;
  res.value = Vec::Zero(cp.Y[a].rows());
  for (const auto& t : terms) res.value += t;

  const std::size_t span = b - a;
  for (std::size_t parts = 1; parts <= span; parts *= 2) {
    for (std::size_t q = 0; q < parts; ++q) {
      const std::size_t u = a + q * span / parts;
      const std::size_t v = a + (q + 1) * span / parts;
      if (v <= u) continue;
      Vec sum = Vec::Zero(res.value.size());
      for (std::size_t k = u; k < v; ++k) sum += terms[k - a];
      Vec rem = sum - compensated_term(cp.Y[u], cp.Yprime[u], x.increment(u, v), level2_reconstruct(rp, u, v));
      res.remainders.push_back({x.time(u), x.time(v), rem.norm()});
    }
  }
  return res;
}

RemainderNorms remainder_norms(const SampledPath& x, const VectorFieldSystem& sys, const RoughPath& rp, Interval iv) {
  if (x.size() > rp.size()) throw std::invalid_argument("solution extends beyond the rough path grid");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x.time(i) - rp.level1().time(i)) > 1e-12 * std::max(1.0, std::abs(x.time(i))))
      throw std::invalid_argument("solution and rough path grids differ");
  if (iv.s < x.start() - 1e-12 || iv.t > x.end() + 1e-12) throw std::out_of_range("interval outside solution range");
  auto [a, b] = x.index_range(iv);
  const std::size_t n = b - a + 1;
  const auto& X = rp.level1();

  RemainderNorms out;
  std::vector<Mat> sig(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec xk = x.value(a + k);
    sig[k] = sys.sigma(xk);
    out.a0 = std::max(out.a0, spectral_norm(sig[k]));
    out.a1 = std::max(out.a1, operator_norm(sys.Dsigma(xk)));
    out.a2 = std::max(out.a2, operator_norm(sys.D2sigma(xk)));
  }
  {
    std::vector<std::size_t> sub;
    const std::size_t cap = 32;
    if (n <= cap) {
      for (std::size_t k = 0; k < n; ++k) sub.push_back(a + k);
    } else {
      for (std::size_t k = 0; k < cap; ++k) sub.push_back(a + k * (n - 1) / (cap - 1));
    }
    for (std::size_t p = 0; p < sub.size(); ++p)
      for (std::size_t q = p + 1; q < sub.size(); ++q)
        for (int l = 0; l <= 8; ++l) {
          const double lam = l / 8.0;
          Vec z = (1.0 - lam) * x.value(sub[p]) + lam * x.value(sub[q]);
          out.a2prime = std::max(out.a2prime, operator_norm(sys.D2sigma(z)));
        }
  }

  // η: running rough integral of σ(x) with Gubinelli derivative Dσ(x)σ(x).
  std::vector<Vec> eta(n, Vec::Zero(sys.d));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec xk = x.value(a + k);
    eta[k + 1] = eta[k] + compensated_term(sig[k], gubinelli(sys, xk), X.increment(a + k, a + k + 1), rp.level2()[a + k]);
  }
  std::vector<double> grid(x.times().begin() + static_cast<std::ptrdiff_t>(a),
                           x.times().begin() + static_cast<std::ptrdiff_t>(b) + 1);
  auto r_eta = [&](std::size_t u, std::size_t v) -> Vec {
    return eta[v] - eta[u] - sig[u] * X.increment(a + u, a + v);
  };
  auto r_x = [&](std::size_t u, std::size_t v) -> Vec {
    return x.increment(a + u, a + v) - sig[u] * X.increment(a + u, a + v);
  };
  const double two_alpha = 2.0 * rp.alpha();
  out.R_eta_2alpha = two_param_holder_norm(TwoParamProcess(grid, sys.d, r_eta), two_alpha, {grid.front(), grid.back()});
  out.R_x_2alpha = two_param_holder_norm(TwoParamProcess(grid, sys.d, r_x), two_alpha, {grid.front(), grid.back()});

  const std::size_t span = n - 1;
  for (std::size_t parts = 1; parts <= span; parts *= 2)
    for (std::size_t q = 0; q < parts; ++q) {
      const std::size_t u = q * span / parts, v = (q + 1) * span / parts;
      if (v > u) out.eta_remainders.push_back({grid[u], grid[v], r_eta(u, v).norm()});
    }
  return out;
}

}  // namespace roughflow
