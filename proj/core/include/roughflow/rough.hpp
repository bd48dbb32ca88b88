#pragma once

#include "roughflow/linalg.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/paths.hpp"

#include <memory>
#include <vector>

namespace roughflow {

struct VectorFieldSystem;

/// Level-1 path plus level-2 increments over consecutive grid cells. The
/// second level between arbitrary grid times is rebuilt on demand through
/// Chen's relation, so it is consistent by construction.
class RoughPath {
 public:
  RoughPath(SampledPath level1, std::vector<Mat> level2, double alpha);

  const SampledPath& level1() const { return level1_; }
  const std::vector<Mat>& level2() const { return level2_; }
  std::vector<Mat>& level2_mut() { return level2_; }
  double alpha() const { return alpha_; }
  int dim() const { return level1_.dim(); }
  std::size_t size() const { return level1_.size(); }

 private:
  SampledPath level1_;
  std::vector<Mat> level2_;
  double alpha_;
};

/// Left-point Itô lift of a finely sampled path: every `refine` fine cells
/// form one output cell whose level 2 is Σ_j W_{t_i,s_j} ⊗ W_{s_j,s_{j+1}}.
RoughPath ito_lift(const SampledPath& fine, int refine, double alpha = 0.45);
/// Generates Brownian motion at mesh spec.mesh / refine and lifts it onto the
/// spec.mesh grid.
RoughPath ito_lift(const DriverSpec& spec, int refine = 16, double alpha = 0.45);

/// Piecewise-linear (canonical) lift: 𝕏 per cell = ½ ΔX ⊗ ΔX.
RoughPath canonical_lift(const SampledPath& path, double alpha = 0.5);

/// Level 1 ≡ 0 and level 2 per cell = Δt · Id (m × m).
RoughPath pure_quadratic_lift(double horizon, double mesh, int m = 1);

/// 𝕏_{t_i,t_j} = Σ_k 𝕏_{t_k,t_{k+1}} + Σ_k X_{t_i,t_k} ⊗ X_{t_k,t_{k+1}}.
Mat level2_reconstruct(const RoughPath& rp, std::size_t i, std::size_t j);
Mat level2_reconstruct(const RoughPath& rp, double s, double t);

/// Max over sampled triples s < u < t of ||𝕏_{s,t} - 𝕏_{s,u} - 𝕏_{u,t} - X_{s,u} ⊗ X_{u,t}||
/// (Frobenius). All triples when the grid has at most `full_limit` points,
/// otherwise a strided sub-grid plus deterministic random triples.
double chen_defect(const RoughPath& rp, std::size_t full_limit = 40);

/// Dense table of second-level values for every grid pair, for diagnostics
/// that bypass the Chen reconstruction.
class Level2Table {
 public:
  Level2Table(std::size_t n, int m);
  static Level2Table from_rough_path(const RoughPath& rp);
  Mat& at(std::size_t i, std::size_t j);
  const Mat& at(std::size_t i, std::size_t j) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<Mat> data_;
};

/// Chen defect read directly from a dense table over all triples.
double chen_defect(const SampledPath& level1, const Level2Table& table);

/// Y controlled by a rough path: Y_i is d × m; Yprime_i is d × (m·m) where
/// column b·m + c is the derivative of column b of Y in direction c, so that
/// Y_{s,t} ≈ Y'_s X_{s,t} and ∫ Y dX ≈ Y_s X_{s,t} + Σ_{b,c} Y'^{(b,c)}_s 𝕏^{cb}_{s,t}.
struct ControlledPath {
  std::vector<double> times;
  std::vector<Mat> Y;
  std::vector<Mat> Yprime;
};

struct RemainderSample {
  double u;
  double v;
  double norm;
};

struct RoughIntegral {
  Vec value;
  std::vector<RemainderSample> remainders;
};

/// Y_s X_{s,t} + Y'_s 𝕏_{s,t} for one cell (or any pair, with reconstructed 𝕏).
Vec compensated_term(const Mat& y, const Mat& yprime, const Vec& dx, const Mat& xx);

/// Compensated Riemann sum over the grid cells of the interval. Remainders
/// ||∫_u^v - Y_u X_{u,v} - Y'_u 𝕏_{u,v}|| are recorded on the dyadic family of
/// sub-windows obtained by halving the interval's index range.
RoughIntegral rough_integral(const ControlledPath& cp, const RoughPath& rp, Interval iv);

struct RemainderNorms {
  double a0 = 0, a1 = 0, a2 = 0, a2prime = 0;
  double R_eta_2alpha = 0;
  double R_x_2alpha = 0;
  std::vector<RemainderSample> eta_remainders;  // ||R^η_{u,v}|| on consecutive-window pairs
};

/// Coefficient bounds and discrete 2α-Hölder norms of the remainders
/// R^η_{u,v} = η_{u,v} - σ(x_u) X_{u,v} and R^x_{u,v} = x_{u,v} - σ(x_u) X_{u,v},
/// η being the running rough integral of σ(x).
RemainderNorms remainder_norms(const SampledPath& x, const VectorFieldSystem& sys, const RoughPath& rp, Interval iv);

}  // namespace roughflow
