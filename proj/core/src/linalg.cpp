#include "roughflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace roughflow {

Tensor::Tensor(std::vector<int> shape) : dims(std::move(shape)) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  data.assign(n, 0.0);
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

namespace {

// Contract every mode except `skip` against the given vectors; mode 0 is the
// output mode. Returns the vector living in mode `skip`.
Vec contract_except(const Tensor& t, const std::vector<Vec>& v, int skip) {
  const int r = t.rank();
  Vec out = Vec::Zero(t.dims[skip]);
  std::vector<int> idx(r, 0);
  for (std::size_t flat = 0; flat < t.data.size(); ++flat) {
    std::size_t rem = flat;
    for (int m = r - 1; m >= 0; --m) {
      idx[m] = static_cast<int>(rem % t.dims[m]);
      rem /= t.dims[m];
    }
    double w = t.data[flat];
    if (w == 0.0) continue;
    for (int m = 0; m < r; ++m)
      if (m != skip) w *= v[m](idx[m]);
    out(idx[skip]) += w;
  }
  return out;
}

double hopm(const Tensor& t, std::vector<Vec> v) {
  const int r = t.rank();
  double value = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    double prev = value;
    for (int m = 0; m < r; ++m) {
      Vec g = contract_except(t, v, m);
      double n = g.norm();
      if (n == 0.0) return value;
      v[m] = g / n;
      value = n;
    }
    if (std::abs(value - prev) <= 1e-13 * std::max(1.0, value)) break;
  }
  return value;
}

}  // namespace

double operator_norm(const Tensor& t) {
  const int r = t.rank();
  if (r == 0 || t.data.empty()) return 0.0;
  if (r == 1) return Eigen::Map<const Vec>(t.data.data(), t.dims[0]).norm();
  if (r == 2) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        t.data.data(), t.dims[0], t.dims[1]);
    return spectral_norm(m);
  }
  if (t.max_abs() == 0.0) return 0.0;
  bool all_one = true;
  for (int d : t.dims) all_one = all_one && d == 1;
  if (all_one) return std::abs(t.data[0]);

  // Starts: the flat all-ones direction plus the slice of largest entry.
  double best = 0.0;
  std::vector<std::vector<Vec>> starts;
  {
    std::vector<Vec> s;
    for (int d : t.dims) s.push_back(Vec::Ones(d) / std::sqrt(static_cast<double>(d)));
    starts.push_back(s);
  }
  {
    auto it = std::max_element(t.data.begin(), t.data.end(),
                               [](double a, double b) { return std::abs(a) < std::abs(b); });
    std::size_t rem = static_cast<std::size_t>(it - t.data.begin());
    std::vector<Vec> s(r);
    for (int m = r - 1; m >= 0; --m) {
      s[m] = Vec::Zero(t.dims[m]);
      s[m](static_cast<int>(rem % t.dims[m])) = 1.0;
      rem /= t.dims[m];
    }
    starts.push_back(s);
  }
  {
    std::vector<Vec> s;
    for (int d : t.dims) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v(i) = std::cos(1.0 + 0.7 * i);
      s.push_back(v.normalized());
    }
    starts.push_back(s);
  }
  for (auto& s : starts) best = std::max(best, hopm(t, s));
  return best;
}

}  // namespace roughflow
