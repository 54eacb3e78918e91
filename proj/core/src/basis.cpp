#include "fourier_ed/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fourier_ed {

namespace {

void check_freqs(const char* field, const std::vector<int>& freqs) {
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (freqs[i] <= 0) {
      std::ostringstream os;
      os << field << ": frequencies must be positive, got " << freqs[i];
      throw std::invalid_argument(os.str());
    }
    if (i > 0 && freqs[i] <= freqs[i - 1]) {
      std::ostringstream os;
      os << field << ": frequencies must be strictly increasing (" << freqs[i - 1]
         << " then " << freqs[i] << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

std::string BasisTag::str() const {
  switch (kind) {
    case Kind::constant:
      return "1";
    case Kind::cosine:
      return "cos(" + std::to_string(frequency) + ")";
    case Kind::sine:
      return "sin(" + std::to_string(frequency) + ")";
  }
  return "?";
}

LocalBasisOrdering::LocalBasisOrdering(const std::vector<int>& freqs, bool include_constant)
    : freqs_(freqs), constant_(include_constant) {
  check_freqs("frequencies", freqs);
  if (include_constant) tags_.push_back({BasisTag::Kind::constant, 0});
  for (int w : freqs) tags_.push_back({BasisTag::Kind::cosine, w});
  for (int w : freqs) tags_.push_back({BasisTag::Kind::sine, w});
}

int LocalBasisOrdering::index_of(const BasisTag& tag) const {
  const int offset = constant_ ? 1 : 0;
  const int nf = static_cast<int>(freqs_.size());
  if (tag.kind == BasisTag::Kind::constant) return constant_ ? 0 : -1;
  auto it = std::lower_bound(freqs_.begin(), freqs_.end(), tag.frequency);
  if (it == freqs_.end() || *it != tag.frequency) return -1;
  const int k = static_cast<int>(it - freqs_.begin());
  return tag.kind == BasisTag::Kind::cosine ? offset + k : offset + nf + k;
}

void BasisSpec::validate() const {
  if (n_features < 1) throw std::invalid_argument("n_features must be >= 1");
  if (n_params < 1) throw std::invalid_argument("n_params must be >= 1");
  check_freqs("input_freqs", input_freqs);
  check_freqs("param_freqs", param_freqs);
  if (local_input_dim() < 1) throw std::invalid_argument("input basis is empty");
  if (local_param_dim() < 1) throw std::invalid_argument("parameter basis is empty");
}

int BasisSpec::local_input_dim() const {
  return 2 * static_cast<int>(input_freqs.size()) + (input_constant ? 1 : 0);
}

int BasisSpec::local_param_dim() const {
  return 2 * static_cast<int>(param_freqs.size()) + (param_constant ? 1 : 0);
}

std::int64_t checked_pow(std::int64_t base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("checked_pow: negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && r > std::numeric_limits<std::int64_t>::max() / base) {
      std::ostringstream os;
      os << base << "^" << exponent << " overflows 64-bit indexing";
      throw std::overflow_error(os.str());
    }
    r *= base;
  }
  return r;
}

std::int64_t BasisSpec::input_dim() const { return checked_pow(local_input_dim(), n_features); }
std::int64_t BasisSpec::param_dim() const { return checked_pow(local_param_dim(), n_params); }

double BasisSpec::log10_input_dim() const {
  return n_features * std::log10(static_cast<double>(local_input_dim()));
}
double BasisSpec::log10_param_dim() const {
  return n_params * std::log10(static_cast<double>(local_param_dim()));
}

int BasisSpec::max_input_freq() const { return input_freqs.empty() ? 0 : input_freqs.back(); }
int BasisSpec::max_param_freq() const { return param_freqs.empty() ? 0 : param_freqs.back(); }

void eval_local_basis(const std::vector<int>& freqs, bool include_constant, double t,
                      double* out) {
  const double r2 = std::numbers::sqrt2;
  const std::size_t nf = freqs.size();
  std::size_t off = 0;
  if (include_constant) out[off++] = 1.0;
  for (std::size_t k = 0; k < nf; ++k) {
    const double a = freqs[k] * t;
    out[off + k] = r2 * std::cos(a);
    out[off + nf + k] = r2 * std::sin(a);
  }
}

Vector eval_local_basis(const std::vector<int>& freqs, bool include_constant, double t) {
  Vector v(2 * static_cast<Index>(freqs.size()) + (include_constant ? 1 : 0));
  eval_local_basis(freqs, include_constant, t, v.data());
  return v;
}

Vector eval_local_input_basis(const BasisSpec& spec, double x) {
  return eval_local_basis(spec.input_freqs, spec.input_constant, x);
}

Vector eval_local_param_basis(const BasisSpec& spec, double theta) {
  return eval_local_basis(spec.param_freqs, spec.param_constant, theta);
}

void require_length(const char* what, std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    std::ostringstream os;
    os << what << ": dimension mismatch, expected length " << expected << ", got " << actual;
    throw std::invalid_argument(os.str());
  }
}

Vector kron_all(const std::vector<Vector>& factors) {
  Vector out = Vector::Ones(1);
  for (const Vector& f : factors) {
    Vector next(out.size() * f.size());
    for (Index i = 0; i < out.size(); ++i) next.segment(i * f.size(), f.size()) = out[i] * f;
    out.swap(next);
  }
  return out;
}

Vector eval_product_basis(const BasisSpec& spec, std::span<const double> point, Side which) {
  const bool in = which == Side::inputs;
  const int n = in ? spec.n_features : spec.n_params;
  require_length(in ? "eval_product_basis(inputs)" : "eval_product_basis(params)",
                 static_cast<std::size_t>(n), point.size());
  const auto& freqs = in ? spec.input_freqs : spec.param_freqs;
  const bool c = in ? spec.input_constant : spec.param_constant;
  std::vector<Vector> locals;
  locals.reserve(point.size());
  for (double p : point) locals.push_back(eval_local_basis(freqs, c, p));
  return kron_all(locals);
}

Matrix derivative_tensor(const std::vector<int>& freqs, bool include_constant) {
  const Index nf = static_cast<Index>(freqs.size());
  const Index off = include_constant ? 1 : 0;
  Matrix beta = Matrix::Zero(2 * nf + off, 2 * nf + off);
  for (Index k = 0; k < nf; ++k) {
    // d/dt √2cos(ωt) = −ω √2sin(ωt);  d/dt √2sin(ωt) = ω √2cos(ωt)
    beta(off + k, off + nf + k) = -freqs[static_cast<std::size_t>(k)];
    beta(off + nf + k, off + k) = freqs[static_cast<std::size_t>(k)];
  }
  return beta;
}

Matrix derivative_tensor(const BasisSpec& spec) {
  return derivative_tensor(spec.param_freqs, spec.param_constant);
}

std::vector<double> trapezoid_nodes(int n) {
  if (n < 1) throw std::invalid_argument("trapezoid_nodes: need at least one node");
  std::vector<double> x(static_cast<std::size_t>(n));
  const double h = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = -std::numbers::pi + h * i;
  return x;
}

int gram_quadrature_nodes(int max_freq) { return 2 * max_freq + 1; }

}  // namespace fourier_ed
