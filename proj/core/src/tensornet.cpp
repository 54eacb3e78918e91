#include "fourier_ed/tensornet.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fourier_ed/linalg.hpp"
#include "fourier_ed/modelgen.hpp"

namespace fourier_ed {

namespace {

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// min(cap, base^exp) without overflow.
int capped_pow(int base, int exp, int cap) {
  std::int64_t r = 1;
  for (int i = 0; i < exp && r < cap; ++i) r *= base;
  return static_cast<int>(std::min<std::int64_t>(r, cap));
}

// out[l, o, r] = Σ_i g(i, o) v[l, i, r]
Vector apply_middle(const Vector& v, Index left, Index right, const Matrix& g) {
  const Index in = g.rows(), out = g.cols();
  Vector res(left * out * right);
  for (Index l = 0; l < left; ++l) {
    Eigen::Map<const Matrix> x(v.data() + l * in * right, right, in);
    Eigen::Map<Matrix> y(res.data() + l * out * right, right, out);
    y.noalias() = x * g;
  }
  return res;
}

// Site tensor (bl, p, br), index (a·p + i)·br + b.
struct MpsSite {
  Index bl = 1, p = 1, br = 1;
  Vector data;
};

// θ[a, i1, i2, c] of two neighbouring sites, as (bl) × (p1·p2) × (br) flat vector.
Vector merge_sites(const MpsSite& a, const MpsSite& b) {
  // A as (bl·p1) × bond, B as bond × (p2·br), both row-major.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
      a.data.data(), a.bl * a.p, a.br);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mb(
      b.data.data(), b.bl, b.p * b.br);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> prod = ma * mb;
  return Eigen::Map<const Vector>(prod.data(), prod.size());
}

// Applies gᵀ to the pair (sites n, n+1) and splits back with an exact SVD.
void apply_two_site_transpose(std::vector<MpsSite>& mps, std::size_t n, const Matrix& g, Index d) {
  const Index bl = mps[n].bl, br = mps[n + 1].br;
  const Vector theta = merge_sites(mps[n], mps[n + 1]);
  const Vector out = apply_middle(theta, bl, br, g);  // [a, (o1 o2), c]
  // Reshape to (a o1) × (o2 c), row-major.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      out.data(), bl * d, d * br);
  Eigen::BDCSVD<Matrix> svd(Matrix(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Index r = 0;
  const double tol = sv.size() > 0 ? 1e-14 * sv[0] : 0.0;
  while (r < sv.size() && sv[r] > tol) ++r;
  r = std::max<Index>(r, 1);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> left =
      svd.matrixU().leftCols(r);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> right =
      sv.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  mps[n].br = r;
  mps[n].data = Eigen::Map<const Vector>(left.data(), left.size());
  mps[n + 1].bl = r;
  mps[n + 1].data = Eigen::Map<const Vector>(right.data(), right.size());
}

}  // namespace

// ---------------------------------------------------------------- TensorTrain

int TensorTrain::max_bond() const {
  int m = 0;
  for (std::size_t i = 1; i + 1 < bonds.size(); ++i) m = std::max(m, bonds[i]);
  return m;
}

Matrix TensorTrain::slice(int m, int nu) const {
  const int right = bonds[static_cast<std::size_t>(m + 1)];
  return cores[static_cast<std::size_t>(m)].middleCols(static_cast<Index>(nu) * right, right);
}

double TensorTrain::normalization_error() const {
  double e = 0.0;
  for (const Matrix& c : cores) e = std::max(e, orthonormality_error(c.transpose()));
  return e;
}

std::vector<int> tt_bonds(int n_sites, int phys, int n_cols, int chi) {
  if (n_sites < 1) throw std::invalid_argument("tensor train needs at least one site");
  if (n_cols < 1) throw std::invalid_argument("tensor train needs at least one column");
  if (chi < 1) throw std::invalid_argument("bond dimension chi must be >= 1");
  std::vector<int> b(static_cast<std::size_t>(n_sites + 1));
  b[0] = n_cols;
  for (int m = 1; m < n_sites; ++m) b[static_cast<std::size_t>(m)] = capped_pow(phys, n_sites - m, chi);
  b[static_cast<std::size_t>(n_sites)] = 1;
  if (static_cast<std::int64_t>(n_cols) > static_cast<std::int64_t>(phys) * b[1]) {
    std::ostringstream os;
    os << "tensor train: " << n_cols << " orthonormal columns need d̃·χ₁ >= n_cols, but d̃·χ₁ = "
       << phys * b[1] << " (raise chi)";
    throw std::invalid_argument(os.str());
  }
  return b;
}

TensorTrain random_right_normalized_tt(const BasisSpec& spec, int n_cols, int chi, Rng& rng) {
  spec.validate();
  TensorTrain tt;
  tt.phys = spec.local_param_dim();
  tt.bonds = tt_bonds(spec.n_params, tt.phys, n_cols, chi);
  for (int m = 0; m < spec.n_params; ++m) {
    const Index left = tt.bonds[static_cast<std::size_t>(m)];
    const Index right = tt.bonds[static_cast<std::size_t>(m + 1)];
    tt.cores.push_back(random_orthonormal_columns(tt.phys * right, left, rng).transpose());
  }
  return tt;
}

Matrix densify(const TensorTrain& tt) {
  const int m_sites = tt.n_sites();
  Matrix w = tt.cores.back();  // χ_{M−1} × d̃
  for (int m = m_sites - 2; m >= 0; --m) {
    const Index rest = w.cols();
    Matrix next(tt.bonds[static_cast<std::size_t>(m)], tt.phys * rest);
    for (int nu = 0; nu < tt.phys; ++nu) next.middleCols(nu * rest, rest) = tt.slice(m, nu) * w;
    w.swap(next);
  }
  return w.transpose();
}

namespace {

std::vector<Matrix> site_matrices(const TensorTrain& tt, const std::vector<Vector>& locals) {
  std::vector<Matrix> q;
  q.reserve(locals.size());
  for (int m = 0; m < tt.n_sites(); ++m) {
    const Vector& l = locals[static_cast<std::size_t>(m)];
    Matrix acc = l[0] * tt.slice(m, 0);
    for (int nu = 1; nu < tt.phys; ++nu) acc += l[nu] * tt.slice(m, nu);
    q.push_back(std::move(acc));
  }
  return q;
}

void check_tt(const TensorTrain& tt, const BasisSpec& spec, std::size_t n_theta) {
  require_length("theta", static_cast<std::size_t>(spec.n_params), n_theta);
  require_length("tensor train sites", static_cast<std::size_t>(spec.n_params),
                 static_cast<std::size_t>(tt.n_sites()));
  require_length("tensor train physical dimension",
                 static_cast<std::size_t>(spec.local_param_dim()),
                 static_cast<std::size_t>(tt.phys));
}

}  // namespace

Vector tt_param_features(const TensorTrain& tt, const BasisSpec& spec,
                         std::span<const double> theta) {
  check_tt(tt, spec, theta.size());
  const ParamLocals loc = param_locals(spec, theta);
  const std::vector<Matrix> q = site_matrices(tt, loc.iota);
  Vector r = Vector::Ones(1);
  for (int m = tt.n_sites() - 1; m >= 0; --m) r = q[static_cast<std::size_t>(m)] * r;
  return r;
}

Matrix tt_param_jacobian(const TensorTrain& tt, const BasisSpec& spec,
                         std::span<const double> theta, Vector* features) {
  check_tt(tt, spec, theta.size());
  const ParamLocals loc = param_locals(spec, theta);
  const std::vector<Matrix> q = site_matrices(tt, loc.iota);
  const std::vector<Matrix> p = site_matrices(tt, loc.diota);
  const int m_sites = tt.n_sites();
  std::vector<Vector> right(static_cast<std::size_t>(m_sites + 1));
  right[static_cast<std::size_t>(m_sites)] = Vector::Ones(1);
  for (int m = m_sites - 1; m >= 0; --m)
    right[static_cast<std::size_t>(m)] =
        q[static_cast<std::size_t>(m)] * right[static_cast<std::size_t>(m + 1)];
  if (features != nullptr) *features = right[0];
  Matrix jac(tt.n_cols(), m_sites);
  Matrix left = Matrix::Identity(tt.n_cols(), tt.n_cols());
  for (int j = 0; j < m_sites; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    jac.col(j) = left * (p[ju] * right[ju + 1]);
    if (j + 1 < m_sites) left = left * q[ju];
  }
  return jac;
}

// ------------------------------------------------------------------ Staircase

Tensor4::Tensor4(int a, int b, int c, int d)
    : dims{a, b, c, d}, data(static_cast<std::size_t>(a) * b * c * d, 0.0) {}

double StaircaseMpo::block_error() const {
  double e = 0.0;
  for (const Matrix& b : blocks) e = std::max(e, orthonormality_error(b));
  return e;
}

StaircaseMpo mpo_from_blocks(int n_sites, int phys, std::vector<Matrix> blocks) {
  if (n_sites < 1) throw std::invalid_argument("staircase MPO needs at least one site");
  require_length("staircase MPO blocks", static_cast<std::size_t>(n_sites - 1), blocks.size());
  const int d = phys, d2 = phys * phys;
  StaircaseMpo mpo;
  mpo.n_sites = n_sites;
  mpo.phys = phys;
  mpo.blocks = std::move(blocks);
  if (n_sites == 1) return mpo;

  // Split each block G[(i1 i2), (o1 o2)] = Σ_k L[(i1 o1), k] R[k, (i2 o2)].
  std::vector<Matrix> lp, rp;
  for (const Matrix& g : mpo.blocks) {
    if (g.rows() != d2 || g.cols() != d2)
      throw std::invalid_argument("staircase MPO block must be d^2 x d^2");
    Matrix re(d2, d2);
    for (int i1 = 0; i1 < d; ++i1)
      for (int i2 = 0; i2 < d; ++i2)
        for (int o1 = 0; o1 < d; ++o1)
          for (int o2 = 0; o2 < d; ++o2) re(i1 * d + o1, i2 * d + o2) = g(i1 * d + i2, o1 * d + o2);
    Eigen::BDCSVD<Matrix> svd(re, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector root = svd.singularValues().cwiseSqrt();
    lp.push_back(svd.matrixU() * root.asDiagonal());
    rp.push_back(root.asDiagonal() * svd.matrixV().transpose());
  }
  for (int n = 0; n < n_sites; ++n) {
    const int kl = n == 0 ? 1 : d2;
    const int kr = n == n_sites - 1 ? 1 : d2;
    Tensor4 core(kl, d, d, kr);
    for (int a = 0; a < kl; ++a)
      for (int i = 0; i < d; ++i)
        for (int o = 0; o < d; ++o)
          for (int b = 0; b < kr; ++b) {
            double v = 0.0;
            if (n == 0) {
              v = lp[0](i * d + o, b);
            } else if (n == n_sites - 1) {
              v = rp[static_cast<std::size_t>(n - 1)](a, i * d + o);
            } else {
              for (int mid = 0; mid < d; ++mid)
                v += rp[static_cast<std::size_t>(n - 1)](a, i * d + mid) *
                     lp[static_cast<std::size_t>(n)](mid * d + o, b);
            }
            core(a, i, o, b) = v;
          }
    mpo.cores.push_back(std::move(core));
  }
  return mpo;
}

StaircaseMpo random_staircase_mpo(const BasisSpec& spec, Rng& rng) {
  spec.validate();
  const int d = spec.local_input_dim();
  std::vector<Matrix> blocks;
  for (int n = 0; n + 1 < spec.n_features; ++n) blocks.push_back(random_orthogonal(d * d, rng));
  return mpo_from_blocks(spec.n_features, d, std::move(blocks));
}

Vector apply_mpo_transpose(const StaircaseMpo& mpo, const Vector& e) {
  const Index d = mpo.phys;
  Vector v = e;
  Index left = 1, right = e.size() / (d * d);
  for (const Matrix& g : mpo.blocks) {
    v = apply_middle(v, left, right, g);
    left *= d;
    right /= d;
  }
  return v;
}

Vector apply_mpo(const StaircaseMpo& mpo, const Vector& e) {
  const Index d = mpo.phys;
  Vector v = e;
  const int nb = static_cast<int>(mpo.blocks.size());
  Index left = 1;
  for (int n = 0; n < nb - 1; ++n) left *= d;
  Index right = 1;
  for (int n = nb - 1; n >= 0; --n) {
    v = apply_middle(v, left, right, mpo.blocks[static_cast<std::size_t>(n)].transpose());
    left /= d;
    right *= d;
  }
  return v;
}

Matrix densify(const StaircaseMpo& mpo) {
  const Index dim = checked_pow(mpo.phys, mpo.n_sites);
  Matrix u(dim, dim);
  // Column j of U is U e_j.
  for (Index j = 0; j < dim; ++j) u.col(j) = apply_mpo(mpo, Vector::Unit(dim, j));
  return u;
}

Matrix densify_from_cores(const StaircaseMpo& mpo) {
  const int d = mpo.phys;
  const Index dim = checked_pow(d, mpo.n_sites);
  if (mpo.n_sites == 1) return Matrix::Identity(d, d);
  // x[(I, O, k)] accumulated site by site.
  Index din = 1, dout = 1, kdim = 1;
  std::vector<double> x{1.0};
  for (const Tensor4& c : mpo.cores) {
    const int kr = c.dims[3];
    std::vector<double> y(static_cast<std::size_t>(din * d * dout * d * kr), 0.0);
    for (Index ii = 0; ii < din; ++ii)
      for (Index oo = 0; oo < dout; ++oo)
        for (Index k = 0; k < kdim; ++k) {
          const double xv = x[static_cast<std::size_t>((ii * dout + oo) * kdim + k)];
          if (xv == 0.0) continue;
          for (int i = 0; i < d; ++i)
            for (int o = 0; o < d; ++o)
              for (int b = 0; b < kr; ++b)
                y[static_cast<std::size_t>(((ii * d + i) * (dout * d) + (oo * d + o)) * kr + b)] +=
                    xv * c(static_cast<int>(k), i, o, b);
        }
    x.swap(y);
    din *= d;
    dout *= d;
    kdim = kr;
  }
  Matrix u(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index o = 0; o < dim; ++o) u(i, o) = x[static_cast<std::size_t>(i * dim + o)];
  return u;
}

// ----------------------------------------------------------------------- Tree

double TreeIsometry::isometry_error() const {
  double e = 0.0;
  for (const auto& level : levels)
    for (const Matrix& n : level) e = std::max(e, orthonormality_error(n));
  return e;
}

TreeIsometry random_tree_isometry(int n_leaves, int leaf_dim, int chi, Rng& rng) {
  if (n_leaves < 2 || !is_power_of_two(n_leaves)) {
    std::ostringstream os;
    os << "tree isometry: leaf count must be a power of two >= 2, got " << n_leaves;
    throw std::invalid_argument(os.str());
  }
  if (leaf_dim < 1 || chi < 1) throw std::invalid_argument("tree isometry: dimensions must be >= 1");
  TreeIsometry t;
  t.n_leaves = n_leaves;
  t.leaf_dim = leaf_dim;
  t.chi = chi;
  int c = leaf_dim;
  for (int count = n_leaves / 2; count >= 1; count /= 2) {
    const int in = c * c;
    const int out = count == 1 ? chi : std::min(chi, in);
    if (out > in) {
      std::ostringstream os;
      os << "tree isometry: output dimension " << chi << " exceeds the root input dimension " << in;
      throw std::invalid_argument(os.str());
    }
    std::vector<Matrix> level;
    for (int tau = 0; tau < count; ++tau) level.push_back(random_orthonormal_columns(in, out, rng));
    t.levels.push_back(std::move(level));
    c = out;
  }
  return t;
}

Vector apply_tree_transpose(const TreeIsometry& tree, const Vector& e) {
  Vector v = e;
  Index c = tree.leaf_dim;
  for (const auto& level : tree.levels) {
    const Index count = static_cast<Index>(level.size());
    const Index out = level.front().cols();
    Index left = 1;
    Index right = 1;
    for (Index k = 0; k < 2 * (count - 1); ++k) right *= c;
    for (Index tau = 0; tau < count; ++tau) {
      v = apply_middle(v, left, right, level[static_cast<std::size_t>(tau)]);
      left *= out;
      if (tau + 1 < count) right /= c * c;
    }
    c = out;
  }
  return v;
}

Matrix densify(const TreeIsometry& tree) {
  const Index dim = checked_pow(tree.leaf_dim, tree.n_leaves);
  Matrix t(dim, tree.chi);
  for (Index i = 0; i < dim; ++i) t.row(i) = apply_tree_transpose(tree, Vector::Unit(dim, i)).transpose();
  return t;
}

// ------------------------------------------------------------- Tensorized model

void TensorizedModel::validate() const {
  spec.validate();
  require_length("tensor train sites", static_cast<std::size_t>(spec.n_params),
                 static_cast<std::size_t>(v.n_sites()));
  require_length("tensor train physical dimension",
                 static_cast<std::size_t>(spec.local_param_dim()),
                 static_cast<std::size_t>(v.phys));
  require_length("spectrum length vs tensor-train columns", static_cast<std::size_t>(v.n_cols()),
                 static_cast<std::size_t>(s.size()));
  if (u) {
    require_length("MPO sites", static_cast<std::size_t>(spec.n_features),
                   static_cast<std::size_t>(u->n_sites));
    require_length("MPO physical dimension", static_cast<std::size_t>(spec.local_input_dim()),
                   static_cast<std::size_t>(u->phys));
  }
  if (t) {
    require_length("tree leaves", static_cast<std::size_t>(spec.n_features),
                   static_cast<std::size_t>(t->n_leaves));
    require_length("tree leaf dimension", static_cast<std::size_t>(spec.local_input_dim()),
                   static_cast<std::size_t>(t->leaf_dim));
    require_length("spectrum length vs tree output", static_cast<std::size_t>(t->chi),
                   static_cast<std::size_t>(s.size()));
  } else {
    if (spec.log10_input_dim() > 7.0 || spec.input_dim() != s.size()) {
      std::ostringstream os;
      os << "tensorized model without a tree needs a spectrum of length D, got " << s.size();
      throw std::invalid_argument(os.str());
    }
  }
}

SvdFactors densify(const TensorizedModel& model) {
  const Index dim = model.spec.input_dim();
  Matrix ut = model.u ? densify(*model.u) : Matrix::Identity(dim, dim);
  if (model.t) ut = ut * densify(*model.t);
  return {ut, model.s, densify(model.v)};
}

Vector tensorized_input_features(const TensorizedModel& model, std::span<const double> x,
                                 bool force_stream) {
  const BasisSpec& spec = model.spec;
  require_length("x", static_cast<std::size_t>(spec.n_features), x.size());
  const bool small = spec.log10_input_dim() < 7.0 && spec.input_dim() <= kDensifyLimit;
  if (small && !force_stream) {
    Vector e = eval_product_basis(spec, x, Side::inputs);
    if (model.u) e = apply_mpo_transpose(*model.u, e);
    if (model.t) e = apply_tree_transpose(*model.t, e);
    return e;
  }
  if (!model.t && !small)
    throw SizeGuardError("tensorized input features of length D > 1e6 need a tree isometry");
  const Index d = spec.local_input_dim();
  std::vector<MpsSite> mps;
  for (double xi : x) mps.push_back({1, d, 1, eval_local_input_basis(spec, xi)});
  if (model.u)
    for (std::size_t n = 0; n < model.u->blocks.size(); ++n)
      apply_two_site_transpose(mps, n, model.u->blocks[n], d);
  if (model.t) {
    for (const auto& level : model.t->levels) {
      std::vector<MpsSite> next;
      for (std::size_t tau = 0; tau < level.size(); ++tau) {
        const MpsSite& a = mps[2 * tau];
        const MpsSite& b = mps[2 * tau + 1];
        const Vector theta = merge_sites(a, b);
        next.push_back({a.bl, level[tau].cols(), b.br, apply_middle(theta, a.bl, b.br, level[tau])});
      }
      mps.swap(next);
    }
  }
  // Contract the remaining chain into a dense vector.
  Vector acc = mps[0].data;  // (1 · p) × br, row-major
  Index rows = mps[0].p, bond = mps[0].br;
  for (std::size_t n = 1; n < mps.size(); ++n) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ma(
        acc.data(), rows, bond);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mb(
        mps[n].data.data(), mps[n].bl, mps[n].p * mps[n].br);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> prod = ma * mb;
    rows *= mps[n].p;
    bond = mps[n].br;
    acc = Eigen::Map<const Vector>(prod.data(), prod.size());
  }
  return acc;
}

double tensorized_eval(const TensorizedModel& model, std::span<const double> x,
                       std::span<const double> theta) {
  const Vector a = model.s.cwiseProduct(tensorized_input_features(model, x));
  return a.dot(tt_param_features(model.v, model.spec, theta));
}

Vector tensorized_gradient(const TensorizedModel& model, std::span<const double> x,
                           std::span<const double> theta) {
  const Vector a = model.s.cwiseProduct(tensorized_input_features(model, x));
  return tt_param_jacobian(model.v, model.spec, theta, nullptr).transpose() * a;
}

Matrix tensorized_fim(const TensorizedModel& model, std::span<const double> theta) {
  const Matrix sj = model.s.asDiagonal() * tt_param_jacobian(model.v, model.spec, theta, nullptr);
  return sj.transpose() * sj;
}

TensorizedRegressor::TensorizedRegressor(TensorizedModel model) : model_(std::move(model)) {
  model_.validate();
}

Vector TensorizedRegressor::input_features(std::span<const double> x) const {
  return model_.s.cwiseProduct(tensorized_input_features(model_, x));
}

Vector TensorizedRegressor::param_features(std::span<const double> theta) const {
  return tt_param_features(model_.v, model_.spec, theta);
}

Matrix TensorizedRegressor::param_jacobian(std::span<const double> theta, Vector* features) const {
  return tt_param_jacobian(model_.v, model_.spec, theta, features);
}

// ------------------------------------------------------------------ Generators

namespace {

bool tree_applies(const BasisSpec& spec, const TensorizedOptions& opt) {
  return opt.use_tree && spec.n_features >= 2 && is_power_of_two(spec.n_features);
}

struct InputSide {
  std::optional<StaircaseMpo> u;
  std::optional<TreeIsometry> t;
};

InputSide draw_input_side(const BasisSpec& spec, const TensorizedOptions& opt, int n_cols,
                          Rng& rng) {
  InputSide s;
  if (opt.use_mpo && spec.n_features >= 2) s.u = random_staircase_mpo(spec, rng);
  if (tree_applies(spec, opt))
    s.t = random_tree_isometry(spec.n_features, spec.local_input_dim(), n_cols, rng);
  return s;
}

}  // namespace

int tensorized_spectrum_length(const BasisSpec& spec, const TensorizedOptions& opt) {
  if (tree_applies(spec, opt)) return opt.n_cols > 0 ? opt.n_cols : opt.chi;
  if (spec.log10_input_dim() > 7.0)
    throw SizeGuardError("input dimension too large without a tree isometry");
  const int dim = static_cast<int>(spec.input_dim());
  if (opt.n_cols > 0 && opt.n_cols != dim) {
    std::ostringstream os;
    os << "without a tree isometry the spectrum length must equal D=" << dim << ", got "
       << opt.n_cols;
    throw std::invalid_argument(os.str());
  }
  return dim;
}

TensorizedModel random_tensorized_model(const BasisSpec& spec, const TensorizedOptions& opt,
                                        Rng& rng) {
  const int n = tensorized_spectrum_length(spec, opt);
  return unbiased_tensorized_model(spec, opt, Vector::Constant(n, 1.0 / std::sqrt(double(n))),
                                   rng);
}

TensorizedModel unbiased_tensorized_model(const BasisSpec& spec, const TensorizedOptions& opt,
                                          const Vector& s, Rng& rng) {
  spec.validate();
  const int n = tensorized_spectrum_length(spec, opt);
  require_length("unbiased tensorized spectrum", static_cast<std::size_t>(n),
                 static_cast<std::size_t>(s.size()));
  InputSide side = draw_input_side(spec, opt, n, rng);
  TensorizedModel m{spec, std::move(side.u), std::move(side.t), s,
                    random_right_normalized_tt(spec, n, opt.chi, rng)};
  m.validate();
  return m;
}

TensorizedGenerator biased_tensorized_generator(const BasisSpec& spec, int rank,
                                                const TensorizedOptions& opt,
                                                const Vector& theta_star, Rng& rng) {
  spec.validate();
  require_length("theta_star", static_cast<std::size_t>(spec.n_params),
                 static_cast<std::size_t>(theta_star.size()));
  const int n = tensorized_spectrum_length(spec, opt);
  if (rank < 1 || rank >= n) {
    std::ostringstream os;
    os << "biased tensorized generator: rank R must satisfy 1 <= R < " << n << ", got " << rank;
    throw std::invalid_argument(os.str());
  }
  const int dt = spec.local_param_dim();
  const std::vector<int> bonds = tt_bonds(spec.n_params, dt, n, opt.chi);
  const Index width = static_cast<Index>(dt) * bonds[1];
  if (n - rank + 1 > width) {
    std::ostringstream os;
    os << "biased tensorized generator: first core has " << width
       << " columns, too few for " << n - rank << " rows orthogonal to v(θ*) (raise chi)";
    throw std::invalid_argument(os.str());
  }
  InputSide side = draw_input_side(spec, opt, n, rng);
  const std::span<const double> ts(theta_star.data(), theta_star.size());
  const ParamLocals loc = param_locals(spec, ts);

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    TensorTrain tt;
    tt.phys = dt;
    tt.bonds = bonds;
    tt.cores.emplace_back();  // first core filled below
    for (int m = 1; m < spec.n_params; ++m) {
      const Index left = bonds[static_cast<std::size_t>(m)];
      const Index right = bonds[static_cast<std::size_t>(m + 1)];
      tt.cores.push_back(random_orthonormal_columns(dt * right, left, rng).transpose());
    }
    // q = Q_2 ⋯ Q_M applied to the right boundary.
    Vector q = Vector::Ones(1);
    for (int m = spec.n_params - 1; m >= 1; --m) {
      Matrix qm = Matrix::Zero(bonds[static_cast<std::size_t>(m)], bonds[static_cast<std::size_t>(m + 1)]);
      for (int nu = 0; nu < dt; ++nu) qm += loc.iota[static_cast<std::size_t>(m)][nu] * tt.slice(m, nu);
      q = qm * q;
    }
    Vector vstar(width);
    for (int nu = 0; nu < dt; ++nu) vstar.segment(nu * q.size(), q.size()) = loc.iota[0][nu] * q;
    const double vn = vstar.norm();
    if (!(vn > kBreakdownTol)) continue;
    const Matrix vhat = vstar / vn;

    Matrix tail = gaussian_matrix(width, n - rank, rng);
    if (!gram_schmidt(tail, vhat)) continue;
    Matrix head = gaussian_matrix(width, rank, rng);
    if (!gram_schmidt(head, tail)) continue;
    Matrix first(n, width);
    first.topRows(rank) = head.transpose();
    first.bottomRows(n - rank) = tail.transpose();
    tt.cores[0] = std::move(first);

    TensorizedGenerator gen;
    gen.model = TensorizedModel{spec, std::move(side.u), std::move(side.t),
                                Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))),
                                std::move(tt)};
    gen.model.validate();
    gen.theta_star = theta_star;
    gen.rank = rank;
    return gen;
  }
  throw std::runtime_error("biased tensorized generator: Gram-Schmidt breakdown after 20 redraws");
}

TensorizedGenerator biased_tensorized_generator(const BasisSpec& spec, int rank,
                                                const TensorizedOptions& opt, Rng& rng) {
  Vector theta_star(spec.n_params);
  for (Index i = 0; i < theta_star.size(); ++i)
    theta_star[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return biased_tensorized_generator(spec, rank, opt, theta_star, rng);
}

Vector generator_weights(const TensorizedGenerator& gen) {
  const Vector c = tt_param_features(
      gen.model.v, gen.model.spec,
      std::span<const double>(gen.theta_star.data(), gen.theta_star.size()));
  Vector w = Vector::Zero(c.size());
  for (Index r = 0; r < gen.rank; ++r) w[r] = gen.model.s[r] * c[r];
  return w;
}

double eval_data_generator(const TensorizedGenerator& gen, std::span<const double> x) {
  return tensorized_input_features(gen.model, x).dot(generator_weights(gen));
}

TensorizedModel full_biased_model(const TensorizedGenerator& gen) { return gen.model; }

TensorizedModel cutoff_biased_model(const TensorizedGenerator& gen, double xi) {
  TensorizedModel m = gen.model;
  m.s = decay_spectrum(m.s, gen.rank, xi);
  return m;
}

TensorizedGenerator perturb_generator(const TensorizedGenerator& gen, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("perturb_generator: epsilon must be >= 0");
  TensorizedGenerator out = gen;
  out.epsilon = epsilon;
  for (Matrix& core : out.model.v.cores) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxRedraws && !ok; ++attempt) {
      Matrix w = core.transpose();
      if (epsilon > 0.0) w += epsilon * gaussian_matrix(w.rows(), w.cols(), rng);
      if (gram_schmidt(w)) {
        core = w.transpose();
        ok = true;
      }
    }
    if (!ok) throw std::runtime_error("perturb_generator: Gram-Schmidt breakdown after 20 redraws");
  }
  return out;
}

double bias_deviation(const TensorizedGenerator& gen, const TensorizedGenerator& gen_eps) {
  if (!(gen.model.spec == gen_eps.model.spec))
    throw std::invalid_argument("bias_deviation: spec mismatch");
  if (gen.theta_star.size() != gen_eps.theta_star.size() ||
      (gen.theta_star - gen_eps.theta_star).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("bias_deviation: generators have different θ*");
  const std::span<const double> ts(gen.theta_star.data(), gen.theta_star.size());
  const Vector diff = tt_param_features(gen.model.v, gen.model.spec, ts) -
                      tt_param_features(gen_eps.model.v, gen.model.spec, ts);
  return gen.model.s.cwiseProduct(diff).lpNorm<1>();
}

double annihilation_residual(const TensorizedGenerator& gen) {
  const Vector c = tt_param_features(
      gen.model.v, gen.model.spec,
      std::span<const double>(gen.theta_star.data(), gen.theta_star.size()));
  double r = 0.0;
  for (Index i = gen.rank; i < c.size(); ++i) r = std::max(r, std::abs(c[i]));
  return r;
}

}  // namespace fourier_ed
