#pragma once

#include "roughflow/linalg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace roughflow {

struct Interval {
  double s;
  double t;
};

/// A path sampled on a strictly increasing time grid. Values are stored
/// column-wise: values().col(i) is the state at times()[i].
class SampledPath {
 public:
  SampledPath() = default;
  SampledPath(std::vector<double> times, Mat values);
  SampledPath(std::vector<double> times, const std::vector<Vec>& values);

  std::size_t size() const { return times_.size(); }
  int dim() const { return static_cast<int>(values_.rows()); }
  double time(std::size_t i) const { return times_[i]; }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }
  auto value(std::size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }
  Vec increment(std::size_t i, std::size_t j) const { return values_.col(j) - values_.col(i); }
  const std::vector<double>& times() const { return times_; }
  const Mat& values() const { return values_; }

  /// Index of the grid point equal to t (relative tolerance 1e-9 of the mesh
  /// scale); nullopt when t is not a grid time.
  std::optional<std::size_t> find_index(double t) const;
  /// Index of the grid time equal to t; throws when off-grid.
  std::size_t index_of(double t) const;
  /// Last index with time <= t (clamped to 0).
  std::size_t index_at_or_before(double t) const;
  /// Grid index range [first, last] covering the closed interval.
  std::pair<std::size_t, std::size_t> index_range(Interval iv) const;

  SampledPath slice(std::size_t first, std::size_t last) const;
  bool is_uniform(double rel_tol = 1e-9) const;

 private:
  std::vector<double> times_;
  Mat values_;
};

/// A two-parameter process A_{s,t} on grid pairs s <= t, either a dense
/// table or a generator evaluated on demand. A_{t,t} = 0 by construction.
class TwoParamProcess {
 public:
  using Generator = std::function<Vec(std::size_t, std::size_t)>;

  TwoParamProcess(std::vector<double> grid, int codim, Generator gen);

  /// Dense table: table[j][i] holds A_{t_i,t_j} for i <= j (row j has j+1 entries).
  static TwoParamProcess from_table(std::vector<double> grid, int codim, std::vector<std::vector<Vec>> table);
  /// A_{s,t} = x_t - x_s.
  static TwoParamProcess increments(const SampledPath& path);

  Vec at(std::size_t i, std::size_t j) const;
  const std::vector<double>& grid() const { return grid_; }
  int codim() const { return codim_; }

 private:
  std::vector<double> grid_;
  int codim_;
  Generator gen_;
};

/// Discrete α-Hölder seminorm: max ||f(v) - f(u)|| / |v - u|^α over grid pairs
/// in the interval. This is a lower bound for the continuum seminorm.
double holder_norm(const SampledPath& path, double alpha, Interval iv);
double holder_norm(const SampledPath& path, double alpha);

/// Discrete sup of ||A_{u,v}|| / |v - u|^α over grid pairs in the interval.
double two_param_holder_norm(const TwoParamProcess& a, double alpha, Interval iv);

/// N(ε) = ||A||_{α';[t0, t0+ε]} on an ε grid (defaults to the grid offsets
/// t_j - t0). Non-decreasing in ε by construction.
std::vector<std::pair<double, double>> holder_profile(const TwoParamProcess& a, double alpha_prime, double t0,
                                                      std::optional<std::vector<double>> eps_grid = std::nullopt);

/// Exact discrete p-variation over grid partitions of the interval, by an
/// O(n^2) dynamic programme over grid indices.
double p_variation(const SampledPath& path, double p, Interval iv);
double p_variation(const SampledPath& path, double p);

/// Exhaustive enumeration over all partitions; grid size <= 14.
double p_variation_bruteforce(const SampledPath& path, double p);

/// Empirical Hölder exponent from the scaling of block maxima of dyadic
/// increments. At scale h = mesh * 2^j the increments over consecutive
/// h-steps are grouped in blocks of 8; the log of each block's largest
/// increment is averaged and regressed on log h, weighting each scale by its
/// number of blocks. Requires >= 64 grid points.
double holder_exponent_estimate(const SampledPath& path);

}  // namespace roughflow
