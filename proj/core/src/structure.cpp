#include "fourier_ed/structure.hpp"

#include <cmath>
#include <sstream>

namespace fourier_ed {

bool dense_feasible(const BasisSpec& spec) {
  if (spec.log10_input_dim() + spec.log10_param_dim() > 18.0) return false;
  return spec.input_dim() * spec.param_dim() <= kDenseEntryLimit;
}

void require_dense_feasible(const BasisSpec& spec) {
  if (!dense_feasible(spec)) {
    std::ostringstream os;
    os << "dense structure constants need D*K = 10^"
       << spec.log10_input_dim() + spec.log10_param_dim() << " entries (limit "
       << kDenseEntryLimit << "); use a tensorized model";
    throw SizeGuardError(os.str());
  }
}

StructureConstants random_structure_constants(const BasisSpec& spec, Rng& rng) {
  spec.validate();
  require_dense_feasible(spec);
  const Index d = spec.input_dim(), k = spec.param_dim();
  Matrix g(d, k);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < k; ++j) g(i, j) = rng.uniform(-1.0, 1.0);
  return {spec, std::move(g)};
}

SvdFactors svd_decompose(const StructureConstants& gamma) {
  const Index d = gamma.gamma.rows(), k = gamma.gamma.cols();
  if (k < d) {
    std::ostringstream os;
    os << "svd_decompose: need K >= D, got D=" << d << ", K=" << k;
    throw std::invalid_argument(os.str());
  }
  Eigen::BDCSVD<Matrix> svd(gamma.gamma, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Index j = 0; j < f.u.cols(); ++j) {
    Index imax = 0;
    f.u.col(j).cwiseAbs().maxCoeff(&imax);
    if (f.u(imax, j) < 0) {
      f.u.col(j) = -f.u.col(j);
      f.v.col(j) = -f.v.col(j);
    }
  }
  return f;
}

double purity(const Vector& s) {
  const double t2 = s.squaredNorm();
  if (!(t2 > 0.0)) throw std::invalid_argument("purity: spectrum is all zero");
  const double t4 = s.array().pow(4).sum();
  return t4 / (t2 * t2);
}

namespace {

void check_factors(const SvdFactors& f, const BasisSpec& spec, std::size_t nx, std::size_t nt) {
  require_length("x", static_cast<std::size_t>(spec.n_features), nx);
  require_length("theta", static_cast<std::size_t>(spec.n_params), nt);
  require_length("U rows", static_cast<std::size_t>(spec.input_dim()),
                 static_cast<std::size_t>(f.u.rows()));
  require_length("V rows", static_cast<std::size_t>(spec.param_dim()),
                 static_cast<std::size_t>(f.v.rows()));
  require_length("spectrum", static_cast<std::size_t>(f.u.cols()),
                 static_cast<std::size_t>(f.s.size()));
}

// Contracts the slowest mode of v (length n*rest) with w (length n).
void contract_slowest(const double* v, Index rest, const Vector& w, double* out) {
  for (Index r = 0; r < rest; ++r) out[r] = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    const double wi = w[i];
    const double* vi = v + i * rest;
    for (Index r = 0; r < rest; ++r) out[r] += wi * vi[r];
  }
}

}  // namespace

ParamLocals param_locals(const BasisSpec& spec, std::span<const double> theta) {
  require_length("theta", static_cast<std::size_t>(spec.n_params), theta.size());
  const Matrix beta = derivative_tensor(spec);
  ParamLocals p;
  p.iota.reserve(theta.size());
  p.diota.reserve(theta.size());
  for (double t : theta) {
    p.iota.push_back(eval_local_param_basis(spec, t));
    p.diota.push_back(beta * p.iota.back());
  }
  return p;
}

double contract_all_slots(const double* t, const ParamLocals& locals, double* grad) {
  const std::size_t m = locals.iota.size();
  Index size = 1;
  for (const Vector& v : locals.iota) size *= v.size();
  // prefix holds t contracted over slots < j with ι; shape (rest).
  std::vector<double> prefix(t, t + size), buf(static_cast<std::size_t>(size)),
      tmp(static_cast<std::size_t>(size));
  for (std::size_t j = 0; j < m; ++j) {
    const Index dj = locals.iota[j].size();
    const Index rest = size / dj;
    if (grad != nullptr) {
      contract_slowest(prefix.data(), rest, locals.diota[j], tmp.data());
      Index cur = rest;
      for (std::size_t k = j + 1; k < m; ++k) {
        const Index dk = locals.iota[k].size();
        contract_slowest(tmp.data(), cur / dk, locals.iota[k], buf.data());
        cur /= dk;
        std::copy(buf.begin(), buf.begin() + cur, tmp.begin());
      }
      grad[j] = tmp[0];
    }
    contract_slowest(prefix.data(), rest, locals.iota[j], buf.data());
    std::copy(buf.begin(), buf.begin() + rest, prefix.begin());
    size = rest;
  }
  return prefix[0];
}

Vector dense_param_features(const Matrix& v, const BasisSpec& spec,
                            std::span<const double> theta) {
  const Vector iota = eval_product_basis(spec, theta, Side::params);
  require_length("V rows", static_cast<std::size_t>(iota.size()),
                 static_cast<std::size_t>(v.rows()));
  return v.transpose() * iota;
}

Matrix dense_param_jacobian(const Matrix& v, const BasisSpec& spec, std::span<const double> theta,
                            Vector* features) {
  const ParamLocals locals = param_locals(spec, theta);
  require_length("V rows", static_cast<std::size_t>(spec.param_dim()),
                 static_cast<std::size_t>(v.rows()));
  const Index cols = v.cols();
  Matrix j(cols, spec.n_params);
  if (features != nullptr) features->resize(cols);
  Vector g(spec.n_params);
  for (Index c = 0; c < cols; ++c) {
    const double val = contract_all_slots(v.col(c).data(), locals, g.data());
    j.row(c) = g.transpose();
    if (features != nullptr) (*features)[c] = val;
  }
  return j;
}

double evaluate_model(const SvdFactors& f, const BasisSpec& spec, std::span<const double> x,
                      std::span<const double> theta) {
  check_factors(f, spec, x.size(), theta.size());
  const Vector e = eval_product_basis(spec, x, Side::inputs);
  const Vector iota = eval_product_basis(spec, theta, Side::params);
  const Vector a = f.s.cwiseProduct(f.u.transpose() * e);
  return a.dot(f.v.transpose() * iota);
}

Vector gradient(const SvdFactors& f, const BasisSpec& spec, std::span<const double> x,
                std::span<const double> theta) {
  check_factors(f, spec, x.size(), theta.size());
  const Vector e = eval_product_basis(spec, x, Side::inputs);
  const Vector a = f.s.cwiseProduct(f.u.transpose() * e);
  // ∂f/∂θ_j = (V a)ᵀ B_j ι(θ)
  const Vector t = f.v * a;
  Vector g(spec.n_params);
  contract_all_slots(t.data(), param_locals(spec, theta), g.data());
  return g;
}

Vector decay_spectrum(const Vector& s, int rank, double xi) {
  if (rank < 1 || rank >= s.size()) {
    std::ostringstream os;
    os << "spectrum decay: rank R must satisfy 1 <= R < " << s.size() << ", got " << rank;
    throw std::invalid_argument(os.str());
  }
  if (!(xi > 0.0)) throw std::invalid_argument("spectrum decay: xi must be positive");
  Vector out = s;
  for (Index r = rank; r < s.size(); ++r) out[r] *= std::exp(-static_cast<double>(r + 1 - rank) / xi);
  return out;
}

SvdFactors apply_spectrum_decay(const SvdFactors& f, int rank, double xi) {
  SvdFactors out = f;
  out.s = decay_spectrum(f.s, rank, xi);
  return out;
}

}  // namespace fourier_ed
