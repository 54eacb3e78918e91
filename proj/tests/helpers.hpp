#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fourier_ed/basis.hpp"
#include "fourier_ed/rng.hpp"

namespace fe_test {

using fourier_ed::Index;
using fourier_ed::Matrix;
using fourier_ed::Vector;

inline std::span<const double> sp(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<const double> sp(const std::vector<double>& v) { return {v.data(), v.size()}; }

inline Vector uniform_vector(int n, fourier_ed::Rng& rng, double lo = -M_PI, double hi = M_PI) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline std::vector<double> uniform_point(int n, fourier_ed::Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(-M_PI, M_PI);
  return v;
}

/// Central differences of a scalar function.
inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& at,
                                 double h = 1e-5) {
  Vector g(at.size());
  for (Index j = 0; j < at.size(); ++j) {
    Vector p = at, m = at;
    p[j] += h;
    m[j] -= h;
    g[j] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

inline double max_rel_error(const Vector& a, const Vector& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1e-300, b.norm());
  return (a - b).norm() / scale;
}

inline fourier_ed::BasisSpec make_spec(int n, int m, std::vector<int> in, std::vector<int> par,
                                       bool in_const = true, bool par_const = true) {
  fourier_ed::BasisSpec s;
  s.n_features = n;
  s.n_params = m;
  s.input_freqs = std::move(in);
  s.param_freqs = std::move(par);
  s.input_constant = in_const;
  s.param_constant = par_const;
  return s;
}

/// Direct sum f = Σ_{μν} Γ_{μν} e_μ(x) ι_ν(θ), one product basis element at a time.
inline double brute_force_model(const Matrix& gamma, const fourier_ed::BasisSpec& spec,
                                std::span<const double> x, std::span<const double> theta) {
  const Vector e = fourier_ed::eval_product_basis(spec, x, fourier_ed::Side::inputs);
  const Vector i = fourier_ed::eval_product_basis(spec, theta, fourier_ed::Side::params);
  double f = 0.0;
  for (Index mu = 0; mu < gamma.rows(); ++mu)
    for (Index nu = 0; nu < gamma.cols(); ++nu) f += gamma(mu, nu) * e[mu] * i[nu];
  return f;
}

}  // namespace fe_test
