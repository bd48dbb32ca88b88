#include "roughflow/system.hpp"

#include "counter_rng.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace roughflow {

Mat gubinelli(const VectorFieldSystem& sys, const Vec& x) {
  const int d = sys.d, m = sys.m;
  Mat out = Mat::Zero(d, m * m);
  if (sys.additive_identity) return out;
  const Mat s = sys.sigma(x);
  const Tensor ds = sys.Dsigma(x);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += ds.at(a, b, k) * s(k, c);
        out(a, b * m + c) = acc;
      }
  return out;
}

VectorFieldSystem additive_system(std::string name, int d, std::function<Vec(double, const Vec&)> b,
                                  std::function<Mat(double, const Vec&)> Db) {
  VectorFieldSystem sys;
  sys.name = std::move(name);
  sys.d = d;
  sys.m = d;
  sys.b = std::move(b);
  sys.Db = std::move(Db);
  sys.sigma = [d](const Vec&) { return Mat(Mat::Identity(d, d)); };
  sys.Dsigma = [d](const Vec&) { return Tensor({d, d, d}); };
  sys.D2sigma = [d](const Vec&) { return Tensor({d, d, d, d}); };
  sys.additive_identity = true;
  return sys;
}

namespace {

double frob(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void record(DerivativeCheck& r, double err, const char* what) {
  if (err > r.max_rel_error) {
    r.max_rel_error = err;
    r.worst = what;
  }
}

}  // namespace

DerivativeCheck validate_derivatives(const VectorFieldSystem& sys, int points, double radius, std::uint64_t seed,
                                     double tol) {
  DerivativeCheck rep;
  const int d = sys.d, m = sys.m;
  for (int p = 0; p < points; ++p) {
    Vec x(d);
    for (int k = 0; k < d; ++k)
      x(k) = radius * (2.0 * detail::uniform(seed, 99, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(p)) - 1.0);
    const double h = 1e-5 * std::max(1.0, x.norm());
    if (sys.Dsigma) {
      Tensor ds = sys.Dsigma(x);
      std::vector<double> diff(ds.data.size());
      for (int k = 0; k < d; ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        Mat fd = (sys.sigma(xp) - sys.sigma(xm)) / (2 * h);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < m; ++b) diff[(static_cast<std::size_t>(a) * m + b) * d + k] = fd(a, b) - ds.at(a, b, k);
      }
      record(rep, frob(diff) / std::max(1.0, frob(ds.data)), "Dsigma");
    }
    if (sys.D2sigma && sys.Dsigma) {
      Tensor dds = sys.D2sigma(x);
      std::vector<double> diff(dds.data.size());
      for (int l = 0; l < d; ++l) {
        Vec xp = x, xm = x;
        xp(l) += h;
        xm(l) -= h;
        Tensor up = sys.Dsigma(xp), dn = sys.Dsigma(xm);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < m; ++b)
            for (int k = 0; k < d; ++k)
              diff[((static_cast<std::size_t>(a) * m + b) * d + k) * d + l] =
                  (up.at(a, b, k) - dn.at(a, b, k)) / (2 * h) - dds.at(a, b, k, l);
      }
      record(rep, frob(diff) / std::max(1.0, frob(dds.data)), "D2sigma");
    }
    if (sys.Db) {
      Mat db = sys.Db(0.0, x);
      Mat fd(d, d);
      for (int k = 0; k < d; ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        fd.col(k) = (sys.b(0.0, xp) - sys.b(0.0, xm)) / (2 * h);
      }
      record(rep, (fd - db).norm() / std::max(1.0, db.norm()), "Db");
    }
  }
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

double eval_polynomial(const Polynomial& p, const Vec& x) {
  double s = 0.0;
  for (const auto& mono : p) {
    double t = mono.coef;
    for (std::size_t k = 0; k < mono.powers.size(); ++k)
      for (int e = 0; e < mono.powers[k]; ++e) t *= x(static_cast<Eigen::Index>(k));
    s += t;
  }
  return s;
}

Polynomial differentiate(const Polynomial& p, int k) {
  Polynomial out;
  for (const auto& mono : p) {
    const int e = mono.powers[static_cast<std::size_t>(k)];
    if (e == 0 || mono.coef == 0.0) continue;
    Monomial d = mono;
    d.coef *= e;
    d.powers[static_cast<std::size_t>(k)] = e - 1;
    out.push_back(std::move(d));
  }
  return out;
}

VectorFieldSystem polynomial_system(const PolynomialSystemSpec& spec, const std::string& name) {
  const int d = spec.d, m = spec.m;
  if (d < 1 || m < 1) throw std::invalid_argument("polynomial system dimensions must be positive");
  if (static_cast<int>(spec.drift.size()) != d) throw std::invalid_argument("drift needs one polynomial per state coordinate");
  if (static_cast<int>(spec.sigma.size()) != d * m) throw std::invalid_argument("sigma needs d*m polynomials (row-major)");
  auto check = [d](const Polynomial& p, const char* where) {
    for (const auto& mono : p) {
      if (static_cast<int>(mono.powers.size()) != d)
        throw std::invalid_argument(std::string(where) + ": every monomial needs one exponent per state coordinate");
      for (int e : mono.powers)
        if (e < 0) throw std::invalid_argument(std::string(where) + ": exponents must be non-negative");
    }
  };
  for (const auto& p : spec.drift) check(p, "drift");
  for (const auto& p : spec.sigma) check(p, "sigma");

  struct Coeffs {
    std::vector<Polynomial> b;
    std::vector<std::vector<Polynomial>> db;   // [a][k]
    std::vector<Polynomial> s;
    std::vector<std::vector<Polynomial>> ds;   // [ab][k]
    std::vector<std::vector<std::vector<Polynomial>>> dds;  // [ab][k][l]
  };
  auto c = std::make_shared<Coeffs>();
  c->b = spec.drift;
  c->s = spec.sigma;
  for (const auto& p : spec.drift) {
    std::vector<Polynomial> row;
    for (int k = 0; k < d; ++k) row.push_back(differentiate(p, k));
    c->db.push_back(std::move(row));
  }
  for (const auto& p : spec.sigma) {
    std::vector<Polynomial> row;
    std::vector<std::vector<Polynomial>> row2;
    for (int k = 0; k < d; ++k) {
      row.push_back(differentiate(p, k));
      std::vector<Polynomial> r2;
      for (int l = 0; l < d; ++l) r2.push_back(differentiate(row.back(), l));
      row2.push_back(std::move(r2));
    }
    c->ds.push_back(std::move(row));
    c->dds.push_back(std::move(row2));
  }

  VectorFieldSystem sys;
  sys.name = name;
  sys.d = d;
  sys.m = m;
  sys.representation = "polynomial-coefficients";
  sys.b = [c, d](double, const Vec& x) {
    Vec out(d);
    for (int a = 0; a < d; ++a) out(a) = eval_polynomial(c->b[a], x);
    return out;
  };
  sys.Db = [c, d](double, const Vec& x) {
    Mat out(d, d);
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) out(a, k) = eval_polynomial(c->db[a][k], x);
    return out;
  };
  sys.sigma = [c, d, m](const Vec& x) {
    Mat out(d, m);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < m; ++b) out(a, b) = eval_polynomial(c->s[a * m + b], x);
    return out;
  };
  sys.Dsigma = [c, d, m](const Vec& x) {
    Tensor t({d, m, d});
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < d; ++k) t.at(a, b, k) = eval_polynomial(c->ds[a * m + b][k], x);
    return t;
  };
  sys.D2sigma = [c, d, m](const Vec& x) {
    Tensor t({d, m, d, d});
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) t.at(a, b, k, l) = eval_polynomial(c->dds[a * m + b][k][l], x);
    return t;
  };
  // σ ≡ Id is detected so additive solvers take the exact-increment path.
  bool identity = d == m;
  for (int a = 0; a < d && identity; ++a)
    for (int b = 0; b < m && identity; ++b) {
      const auto& p = spec.sigma[a * m + b];
      double constant = 0.0;
      for (const auto& mono : p) {
        bool is_const = true;
        for (int e : mono.powers) is_const = is_const && e == 0;
        if (!is_const && mono.coef != 0.0) identity = false;
        if (is_const) constant += mono.coef;
      }
      if (constant != (a == b ? 1.0 : 0.0)) identity = false;
    }
  sys.additive_identity = identity;

  auto rep = validate_derivatives(sys, 20, 2.0, 11, 1e-5);
  if (!rep.pass)
    throw std::runtime_error("polynomial derivatives failed the finite-difference check (" + rep.worst +
                             ", rel error " + std::to_string(rep.max_rel_error) + ")");
  return sys;
}

}  // namespace roughflow
