#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace roughflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense row-major tensor with arbitrary rank. Index (i0, i1, ..., ik) maps to
/// ((i0 * n1 + i1) * n2 + ...) so the last index varies fastest.
struct Tensor {
  std::vector<int> dims;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(dims.size()); }

  double& at(int i, int j, int k) { return data[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k]; }
  double at(int i, int j, int k) const { return data[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k]; }
  double& at(int i, int j, int k, int l) {
    return data[((static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k) * dims[3] + l];
  }
  double at(int i, int j, int k, int l) const {
    return data[((static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k) * dims[3] + l];
  }

  double max_abs() const;
};

/// Spectral norm (largest singular value).
double spectral_norm(const Mat& a);

/// Operator norm of a multilinear map T : R^{n1} x ... x R^{nk} -> R^{n0},
/// i.e. sup ||T(v1, ..., vk)|| over unit vectors. Estimated by higher-order
/// power iteration from several deterministic starts; exact for rank <= 2.
double operator_norm(const Tensor& t);

/// a ⊗ b as the matrix a b^T.
inline Mat outer(const Vec& a, const Vec& b) { return a * b.transpose(); }

}  // namespace roughflow
