#include "fourier_ed/fim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fourier_ed/linalg.hpp"

namespace fourier_ed {

double ed_constant(std::int64_t n) {
  if (n < 2) throw std::invalid_argument("dataset size n must be >= 2");
  const double nn = static_cast<double>(n);
  return nn / (2.0 * std::numbers::pi * std::log(nn));
}

int fim_quadrature_nodes(const BasisSpec& spec) { return 2 * spec.max_input_freq() + 1; }

namespace {

FimEstimate gradient_average(const Regressor& model, std::span<const double> theta,
                             const std::vector<std::vector<double>>& xs, const char* label) {
  const Matrix j = model.param_jacobian(theta, nullptr);
  const Index m = j.cols();
  Matrix acc = Matrix::Zero(m, m);
  for (const auto& x : xs) {
    const Vector g = j.transpose() * model.input_features(x);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  acc = acc.selfadjointView<Eigen::Lower>();
  acc /= static_cast<double>(xs.size());
  return {acc, Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size())),
          static_cast<std::int64_t>(xs.size()), label};
}

}  // namespace

FimEstimate fim_quadrature(const Regressor& model, std::span<const double> theta,
                           int nodes_per_dim) {
  const BasisSpec& spec = model.spec();
  const int need = fim_quadrature_nodes(spec);
  if (nodes_per_dim == 0) nodes_per_dim = need;
  if (nodes_per_dim < need) {
    std::ostringstream os;
    os << "fim_quadrature: grid too coarse, " << nodes_per_dim
       << " nodes per dimension given, at least " << need << " required";
    throw std::invalid_argument(os.str());
  }
  const std::int64_t total = checked_pow(nodes_per_dim, spec.n_features);
  if (total > 50'000'000) throw SizeGuardError("fim_quadrature: grid too large, use Monte Carlo");
  const std::vector<double> nodes = trapezoid_nodes(nodes_per_dim);
  std::vector<std::vector<double>> xs;
  xs.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(static_cast<std::size_t>(spec.n_features), 0);
  for (std::int64_t c = 0; c < total; ++c) {
    std::vector<double> x(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) x[i] = nodes[static_cast<std::size_t>(idx[i])];
    xs.push_back(std::move(x));
    for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < nodes_per_dim) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  return gradient_average(model, theta, xs, "quadrature");
}

FimEstimate fim_monte_carlo(const Regressor& model, std::span<const double> theta,
                            std::int64_t n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("fim_monte_carlo: need n_samples >= 1");
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(n_samples));
  for (auto& x : xs) {
    x.resize(static_cast<std::size_t>(model.spec().n_features));
    for (double& v : x) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
  }
  return gradient_average(model, theta, xs, "monte-carlo");
}

FimEstimate fim_analytic(const Regressor& model, std::span<const double> theta) {
  return {model.fisher(theta),
          Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size())), 0,
          "analytic"};
}

FimEstimate fim_analytic(const SvdFactors& f, const BasisSpec& spec,
                         std::span<const double> theta) {
  const Matrix j = dense_param_jacobian(f.v, spec, theta, nullptr);
  const Matrix sj = f.s.asDiagonal() * j;
  return {sj.transpose() * sj,
          Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size())), 0,
          "analytic"};
}

std::vector<FimEstimate> normalized_fim_batch(std::vector<FimEstimate> batch) {
  if (batch.empty()) throw std::invalid_argument("normalized_fim_batch: empty batch");
  const double m = static_cast<double>(batch.front().f.rows());
  double mean_trace = 0.0;
  for (const auto& e : batch) mean_trace += e.f.trace();
  mean_trace /= static_cast<double>(batch.size());
  if (!(mean_trace > 0.0))
    throw std::invalid_argument("normalized_fim_batch: all traces are zero (degenerate model)");
  for (auto& e : batch) e.f *= m / mean_trace;
  return batch;
}

std::vector<FimEstimate> normalized_fim_batch(const Regressor& model,
                                              const std::vector<Vector>& thetas) {
  std::vector<FimEstimate> batch;
  batch.reserve(thetas.size());
  for (const Vector& t : thetas)
    batch.push_back(fim_analytic(model, std::span<const double>(t.data(), t.size())));
  return normalized_fim_batch(std::move(batch));
}

double logdet_identity_plus(const Matrix& f, double c) {
  const Vector ev = symmetric_eigenvalues(0.5 * (f + f.transpose()));
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) s += std::log1p(c * std::max(ev[i], 0.0));
  return s;
}

EdEstimate effective_dimension_with_constant(std::span<const FimEstimate> normalized, double c) {
  if (normalized.empty()) throw std::invalid_argument("effective_dimension: empty sample list");
  if (!(c > 1.0)) {
    std::ostringstream os;
    os << "effective_dimension: need c_n > 1 so that log c_n > 0, got " << c;
    throw std::invalid_argument(os.str());
  }
  const double m = static_cast<double>(normalized.front().f.rows());
  std::vector<double> h(normalized.size());
  double hmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    h[i] = 0.5 * logdet_identity_plus(normalized[i].f, c);
    if (!std::isfinite(h[i])) {
      std::ostringstream os;
      os << "effective_dimension: non-finite logdet at sample " << i;
      throw std::runtime_error(os.str());
    }
    hmax = std::max(hmax, h[i]);
  }
  double acc = 0.0;
  for (double v : h) acc += std::exp(v - hmax);
  const double log_mean = hmax + std::log(acc / static_cast<double>(h.size()));
  return {2.0 * log_mean / (m * std::log(c)), static_cast<std::int64_t>(normalized.size()), 0, c};
}

EdEstimate effective_dimension(std::span<const FimEstimate> normalized, std::int64_t n) {
  const double c = ed_constant(n);
  if (!(c > 1.0)) {
    std::ostringstream os;
    os << "effective_dimension: dataset size n=" << n
       << " gives c_n <= 1; n must be at least 19";
    throw std::invalid_argument(os.str());
  }
  EdEstimate e = effective_dimension_with_constant(normalized, c);
  e.dataset_size = n;
  return e;
}

std::vector<Vector> sample_parameters(int n_params, int count, Rng& rng) {
  std::vector<Vector> out(static_cast<std::size_t>(count));
  for (auto& t : out) {
    t.resize(n_params);
    for (Index i = 0; i < n_params; ++i) t[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
  }
  return out;
}

EdEstimate model_effective_dimension(const Regressor& model, const std::vector<Vector>& thetas,
                                     std::int64_t n) {
  const auto batch = normalized_fim_batch(model, thetas);
  return effective_dimension(batch, n);
}

EdEstimate model_effective_dimension(const Regressor& model, int n_param_samples,
                                     std::int64_t n, Rng& rng) {
  return model_effective_dimension(
      model, sample_parameters(model.spec().n_params, n_param_samples, rng), n);
}

int numerical_rank(const Matrix& f, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw std::invalid_argument("numerical_rank: rel_tol must lie in (0, 1)");
  if (f.size() == 0) return 0;
  const Vector ev = symmetric_eigenvalues(0.5 * (f + f.transpose()));
  const double lmax = ev.cwiseAbs().maxCoeff();
  if (lmax == 0.0) return 0;
  int r = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] > rel_tol * lmax) ++r;
  return r;
}

int numerical_rank(const FimEstimate& f, double rel_tol) { return numerical_rank(f.f, rel_tol); }

RmtStatistics rmt_statistics(const Vector& s, const BasisSpec& spec,
                             std::span<const double> theta, int n_v_samples, Rng& rng) {
  if (n_v_samples < 100) throw std::invalid_argument("rmt_statistics: need n_v_samples >= 100");
  require_dense_feasible(spec);
  const Index k = spec.param_dim();
  const Index cols = s.size();
  if (cols > k) {
    std::ostringstream os;
    os << "rmt_statistics: K=" << k << " too small for " << cols << " columns";
    throw std::invalid_argument(os.str());
  }
  const Index m = spec.n_params;
  Matrix sum = Matrix::Zero(m, m), sum2 = Matrix::Zero(m, m);
  for (int i = 0; i < n_v_samples; ++i) {
    const Matrix v = random_orthonormal_columns(k, cols, rng);
    const Matrix j = dense_param_jacobian(v, spec, theta, nullptr);
    const Matrix sj = s.asDiagonal() * j;
    const Matrix f = sj.transpose() * sj;
    sum += f;
    sum2 += f.cwiseProduct(f);
  }
  RmtStatistics r;
  r.n_v_samples = n_v_samples;
  const double n = n_v_samples;
  r.mean = sum / n;
  r.variance = (sum2 / n - r.mean.cwiseProduct(r.mean)) * (n / (n - 1.0));

  // ιᵀ B_jᵀ B_k ι factorizes over slots.
  const ParamLocals loc = param_locals(spec, theta);
  Matrix g(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      double prod = 1.0;
      for (Index q = 0; q < m; ++q) {
        const auto& l = loc.iota[static_cast<std::size_t>(q)];
        const auto& dl = loc.diota[static_cast<std::size_t>(q)];
        if (q == a && q == b) prod *= dl.squaredNorm();
        else if (q == a || q == b) prod *= dl.dot(l);
        else prod *= l.squaredNorm();
      }
      g(a, b) = prod;
    }
  }
  const double t2 = s.squaredNorm(), t4 = s.array().pow(4).sum();
  const double kk = static_cast<double>(k);
  r.predicted_mean = g * (t2 / kk);
  r.predicted_variance.resize(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      r.predicted_variance(a, b) = t4 / (kk * kk) * (g(a, b) * g(a, b) + g(a, a) * g(b, b));

  double d = 0.0, od = 0.0;
  for (Index a = 0; a < m; ++a) {
    d += r.mean(a, a);
    for (Index b = 0; b < m; ++b)
      if (a != b) od += std::abs(r.mean(a, b));
  }
  r.mean_diag = d / static_cast<double>(m);
  r.mean_offdiag = m > 1 ? od / static_cast<double>(m * (m - 1)) : 0.0;
  r.mean_variance = r.variance.mean();
  return r;
}

}  // namespace fourier_ed
