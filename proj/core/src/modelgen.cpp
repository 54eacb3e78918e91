#include "fourier_ed/modelgen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fourier_ed/linalg.hpp"

namespace fourier_ed {

DataGenerator make_data_generator(const BasisSpec& spec, int rank, Rng& rng) {
  spec.validate();
  require_dense_feasible(spec);
  const Index d = spec.input_dim(), k = spec.param_dim();
  if (rank < 1 || rank >= d) {
    std::ostringstream os;
    os << "make_data_generator: rank R must satisfy 1 <= R < D=" << d << ", got " << rank;
    throw std::invalid_argument(os.str());
  }
  if (k <= d) {
    std::ostringstream os;
    os << "make_data_generator: need K > D, got D=" << d << ", K=" << k;
    throw std::invalid_argument(os.str());
  }
  DataGenerator gen;
  gen.spec = spec;
  gen.rank = rank;
  gen.theta_star.resize(spec.n_params);
  for (Index i = 0; i < spec.n_params; ++i)
    gen.theta_star[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const Vector iota = eval_product_basis(
      spec, std::span<const double>(gen.theta_star.data(), gen.theta_star.size()), Side::params);

  gen.factors.u = random_orthogonal(d, rng);
  gen.factors.s = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));

  const Matrix vt = random_orthonormal_columns(k, rank, rng);
  Matrix against(k, rank + 1);
  against.leftCols(rank) = vt;
  against.col(rank) = iota;
  // ι is not orthogonal to Ṽ, so orthonormalize the constraint set first.
  if (!gram_schmidt(against)) {
    // ι(θ*) lies in span(Ṽ): vanishingly unlikely; keep Ṽ alone.
    against = vt;
  }
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxRedraws)
      throw std::runtime_error("make_data_generator: Gram-Schmidt breakdown after 20 redraws");
    Matrix w = gaussian_matrix(k, d - rank, rng);
    if (!gram_schmidt(w, against)) continue;
    gen.factors.v.resize(k, d);
    gen.factors.v.leftCols(rank) = vt;
    gen.factors.v.rightCols(d - rank) = w;
    break;
  }
  return gen;
}

Vector generator_weights(const DataGenerator& gen) {
  const Vector c = dense_param_features(
      gen.factors.v, gen.spec,
      std::span<const double>(gen.theta_star.data(), gen.theta_star.size()));
  Vector w = Vector::Zero(c.size());
  for (Index r = 0; r < gen.rank; ++r) w[r] = gen.factors.s[r] * c[r];
  return w;
}

double eval_data_generator(const DataGenerator& gen, std::span<const double> x) {
  const Vector e = eval_product_basis(gen.spec, x, Side::inputs);
  return (gen.factors.u.transpose() * e).dot(generator_weights(gen));
}

SvdFactors full_biased_model(const DataGenerator& gen) { return gen.factors; }

SvdFactors cutoff_biased_model(const DataGenerator& gen, double xi) {
  return apply_spectrum_decay(gen.factors, gen.rank, xi);
}

SvdFactors unbiased_model(const BasisSpec& spec, const Vector& s, Rng& rng) {
  spec.validate();
  require_dense_feasible(spec);
  const Index d = spec.input_dim(), k = spec.param_dim();
  require_length("unbiased_model spectrum", static_cast<std::size_t>(d),
                 static_cast<std::size_t>(s.size()));
  SvdFactors f;
  f.u = random_orthogonal(d, rng);
  f.s = s;
  f.v = random_orthonormal_columns(k, d, rng);
  return f;
}

DataGenerator perturb_generator(const DataGenerator& gen, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("perturb_generator: epsilon must be >= 0");
  DataGenerator out = gen;
  out.epsilon = epsilon;
  if (epsilon == 0.0) {
    if (!gram_schmidt(out.factors.v))
      throw std::runtime_error("perturb_generator: generator V is rank deficient");
    return out;
  }
  const Matrix& v = gen.factors.v;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Matrix ve = v + epsilon * gaussian_matrix(v.rows(), v.cols(), rng);
    if (gram_schmidt(ve)) {
      out.factors.v = std::move(ve);
      return out;
    }
  }
  throw std::runtime_error("perturb_generator: Gram-Schmidt breakdown after 20 redraws");
}

double bias_deviation(const DataGenerator& gen, const DataGenerator& gen_eps) {
  if (!(gen.spec == gen_eps.spec)) throw std::invalid_argument("bias_deviation: spec mismatch");
  if (gen.theta_star.size() != gen_eps.theta_star.size() ||
      (gen.theta_star - gen_eps.theta_star).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("bias_deviation: generators have different θ*");
  const Vector iota = eval_product_basis(
      gen.spec, std::span<const double>(gen.theta_star.data(), gen.theta_star.size()),
      Side::params);
  const Vector diff = (gen.factors.v - gen_eps.factors.v).transpose() * iota;
  return gen.factors.s.cwiseProduct(diff).lpNorm<1>();
}

double annihilation_residual(const DataGenerator& gen) {
  const Vector c = dense_param_features(
      gen.factors.v, gen.spec,
      std::span<const double>(gen.theta_star.data(), gen.theta_star.size()));
  double r = 0.0;
  for (Index i = gen.rank; i < c.size(); ++i) r = std::max(r, std::abs(c[i]));
  return r;
}

}  // namespace fourier_ed
