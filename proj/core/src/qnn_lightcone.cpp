#include "fourier_ed/qnn_lightcone.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fourier_ed {

namespace {

constexpr double kFreqTol = 1e-9;

std::vector<double> dedupe(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > kFreqTol) out.push_back(x);
  return out;
}

// Number of local basis functions for a frequency set containing 0.
std::int64_t local_count(const std::vector<double>& freqs) {
  std::int64_t positive = 0;
  for (double w : freqs)
    if (w > kFreqTol) ++positive;
  return 1 + 2 * positive;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a)
    throw std::overflow_error("basis count overflows 64 bits");
  return a * b;
}

}  // namespace

void CircuitLayout::validate() const {
  if (n_qubits < 1) throw std::invalid_argument("n_qubits must be >= 1");
  if (n_layers < 1) throw std::invalid_argument("n_layers must be >= 1");
  if (entangling_depth < 0) throw std::invalid_argument("entangling_depth must be >= 0");
  if (measurement_depth < 0) throw std::invalid_argument("measurement_depth must be >= 0");
  for (const auto* e : {&encoding_eigenvalues, &variational_eigenvalues}) {
    if (e->empty()) throw std::invalid_argument("eigenvalue lists must be nonempty");
    for (double v : *e)
      if (!std::isfinite(v)) throw std::invalid_argument("eigenvalues must be finite");
  }
  for (int q : measured_qubits)
    if (q < 0 || q >= n_qubits) {
      std::ostringstream os;
      os << "measured qubit " << q << " outside [0, " << n_qubits << ")";
      throw std::invalid_argument(os.str());
    }
}

std::vector<int> CircuitLayout::measured() const {
  if (!measured_qubits.empty()) return measured_qubits;
  std::vector<int> all(static_cast<std::size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q) all[static_cast<std::size_t>(q)] = q;
  return all;
}

std::vector<double> frequency_set(const std::vector<double>& eigenvalues, int multiplicity) {
  if (multiplicity < 1) throw std::invalid_argument("frequency_set: multiplicity must be >= 1");
  if (eigenvalues.empty()) throw std::invalid_argument("frequency_set: no eigenvalues");
  std::vector<double> diffs;
  for (double a : eigenvalues)
    for (double b : eigenvalues) diffs.push_back(a - b);
  diffs = dedupe(diffs);
  std::vector<double> sums{0.0};
  for (int l = 0; l < multiplicity; ++l) {
    std::vector<double> next;
    for (double s : sums)
      for (double d : diffs) next.push_back(s + d);
    sums = dedupe(next);
  }
  std::vector<double> out;
  for (double s : sums)
    if (s > -kFreqTol) out.push_back(std::max(s, 0.0));
  return dedupe(out);
}

LightCone backward_light_cone(const CircuitLayout& layout, int qubit) {
  layout.validate();
  if (qubit < 0 || qubit >= layout.n_qubits) {
    std::ostringstream os;
    os << "backward_light_cone: qubit " << qubit << " outside [0, " << layout.n_qubits << ")";
    throw std::invalid_argument(os.str());
  }
  const int n = layout.n_qubits;
  LightCone cone;
  cone.qubit = qubit;
  cone.feature_multiplicity.assign(static_cast<std::size_t>(n), 0);
  int lo = std::max(0, qubit - layout.measurement_depth);
  int hi = std::min(n - 1, qubit + layout.measurement_depth);
  std::set<int> params;
  for (int l = layout.n_layers - 1; l >= 0; --l) {
    lo = std::max(0, lo - layout.entangling_depth);
    hi = std::min(n - 1, hi + layout.entangling_depth);
    for (int q = lo; q <= hi; ++q) {
      params.insert(l * n + q);
      ++cone.feature_multiplicity[static_cast<std::size_t>(q)];
    }
    cone.support_width.push_back(hi - lo + 1);
  }
  cone.params.assign(params.begin(), params.end());
  return cone;
}

namespace {

struct ConeSets {
  std::vector<std::vector<int>> mult;    // per measured qubit, per feature
  std::vector<std::vector<bool>> param;  // per measured qubit, per parameter
};

ConeSets cone_sets(const CircuitLayout& layout) {
  ConeSets cs;
  for (int q : layout.measured()) {
    const LightCone c = backward_light_cone(layout, q);
    cs.mult.push_back(c.feature_multiplicity);
    std::vector<bool> in(static_cast<std::size_t>(layout.n_params()), false);
    for (int p : c.params) in[static_cast<std::size_t>(p)] = true;
    cs.param.push_back(std::move(in));
  }
  return cs;
}

}  // namespace

BasisCounts admissible_basis_counts(const CircuitLayout& layout) {
  layout.validate();
  const ConeSets cs = cone_sets(layout);
  const std::size_t nq = cs.mult.size();
  if (nq > 24) throw std::invalid_argument("admissible_basis_counts: too many measured qubits");
  // Local counts per multiplicity.
  std::vector<std::int64_t> in_count(static_cast<std::size_t>(layout.n_layers) + 1, 1);
  for (int m = 1; m <= layout.n_layers; ++m)
    in_count[static_cast<std::size_t>(m)] = local_count(frequency_set(layout.encoding_eigenvalues, m));
  const std::int64_t par_count = local_count(frequency_set(layout.variational_eigenvalues, 1));

  BasisCounts bc;
  for (std::size_t i = 0; i < nq; ++i) {
    std::int64_t x = 1, t = 1;
    for (int m : cs.mult[i]) x = checked_mul(x, in_count[static_cast<std::size_t>(m)]);
    for (bool b : cs.param[i])
      if (b) t = checked_mul(t, par_count);
    bc.input_per_qubit.push_back(x);
    bc.param_per_qubit.push_back(t);
  }
  // Inclusion-exclusion: the sets are products of nested local sets, so an
  // intersection keeps the per-coordinate minimum.
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << nq); ++mask) {
    std::vector<int> mn(static_cast<std::size_t>(layout.n_qubits), layout.n_layers);
    std::vector<bool> all(static_cast<std::size_t>(layout.n_params()), true);
    int bits = 0;
    for (std::size_t i = 0; i < nq; ++i) {
      if (!(mask >> i & 1u)) continue;
      ++bits;
      for (std::size_t f = 0; f < mn.size(); ++f) mn[f] = std::min(mn[f], cs.mult[i][f]);
      for (std::size_t p = 0; p < all.size(); ++p) all[p] = all[p] && cs.param[i][p];
    }
    std::int64_t x = 1, t = 1;
    for (int m : mn) x = checked_mul(x, in_count[static_cast<std::size_t>(m)]);
    for (bool b : all)
      if (b) t = checked_mul(t, par_count);
    const std::int64_t sign = bits % 2 == 1 ? 1 : -1;
    bc.input_union += sign * x;
    bc.param_union += sign * t;
  }
  return bc;
}

BasisSpec spec_for_layout(const CircuitLayout& layout) {
  layout.validate();
  auto to_ints = [](const std::vector<double>& f) {
    std::vector<int> out;
    for (double w : f) {
      if (w <= kFreqTol) continue;
      const double r = std::round(w);
      if (std::abs(w - r) > kFreqTol)
        throw std::invalid_argument("layout produces non-integer frequencies");
      out.push_back(static_cast<int>(r));
    }
    return out;
  };
  BasisSpec spec;
  spec.n_features = layout.n_qubits;
  spec.n_params = layout.n_params();
  spec.input_freqs = to_ints(frequency_set(layout.encoding_eigenvalues, layout.n_layers));
  spec.param_freqs = to_ints(frequency_set(layout.variational_eigenvalues, 1));
  spec.input_constant = true;
  spec.param_constant = true;
  spec.validate();
  return spec;
}

std::vector<std::vector<bool>> admissible_mask(const CircuitLayout& layout, const BasisSpec& spec) {
  layout.validate();
  const BasisSpec expected = spec_for_layout(layout);
  if (!(spec == expected))
    throw std::invalid_argument("admissible_mask: basis spec does not match the layout");
  require_dense_feasible(spec);
  const ConeSets cs = cone_sets(layout);
  const int d = spec.local_input_dim(), dt = spec.local_param_dim();
  const Index dim = spec.input_dim(), k = spec.param_dim();
  const LocalBasisOrdering in_ord = spec.input_ordering();

  // Allowed local input indices per multiplicity.
  std::vector<std::vector<bool>> allowed(static_cast<std::size_t>(layout.n_layers) + 1);
  for (int m = 0; m <= layout.n_layers; ++m) {
    std::vector<bool> a(static_cast<std::size_t>(d), false);
    a[0] = true;  // constant
    if (m > 0)
      for (double w : frequency_set(layout.encoding_eigenvalues, m)) {
        if (w <= kFreqTol) continue;
        const int f = static_cast<int>(std::round(w));
        a[static_cast<std::size_t>(in_ord.index_of({BasisTag::Kind::cosine, f}))] = true;
        a[static_cast<std::size_t>(in_ord.index_of({BasisTag::Kind::sine, f}))] = true;
      }
    allowed[static_cast<std::size_t>(m)] = std::move(a);
  }

  std::vector<std::vector<bool>> row_in(cs.mult.size(), std::vector<bool>(static_cast<std::size_t>(dim)));
  std::vector<std::vector<bool>> col_in(cs.mult.size(), std::vector<bool>(static_cast<std::size_t>(k)));
  for (std::size_t q = 0; q < cs.mult.size(); ++q) {
    for (Index mu = 0; mu < dim; ++mu) {
      Index rest = mu;
      bool ok = true;
      for (int f = spec.n_features - 1; f >= 0 && ok; --f) {
        const auto local = static_cast<std::size_t>(rest % d);
        rest /= d;
        ok = allowed[static_cast<std::size_t>(cs.mult[q][static_cast<std::size_t>(f)])][local];
      }
      row_in[q][static_cast<std::size_t>(mu)] = ok;
    }
    for (Index nu = 0; nu < k; ++nu) {
      Index rest = nu;
      bool ok = true;
      for (int p = spec.n_params - 1; p >= 0 && ok; --p) {
        const Index local = rest % dt;
        rest /= dt;
        ok = local == 0 || cs.param[q][static_cast<std::size_t>(p)];
      }
      col_in[q][static_cast<std::size_t>(nu)] = ok;
    }
  }
  std::vector<std::vector<bool>> mask(static_cast<std::size_t>(dim),
                                      std::vector<bool>(static_cast<std::size_t>(k), false));
  for (std::size_t q = 0; q < cs.mult.size(); ++q)
    for (Index mu = 0; mu < dim; ++mu) {
      if (!row_in[q][static_cast<std::size_t>(mu)]) continue;
      auto& row = mask[static_cast<std::size_t>(mu)];
      for (Index nu = 0; nu < k; ++nu)
        if (col_in[q][static_cast<std::size_t>(nu)]) row[static_cast<std::size_t>(nu)] = true;
    }
  return mask;
}

StructureConstants masked_structure_constants(const CircuitLayout& layout, const BasisSpec& spec,
                                              Rng& rng) {
  const auto mask = admissible_mask(layout, spec);
  StructureConstants g = random_structure_constants(spec, rng);
  for (Index mu = 0; mu < g.gamma.rows(); ++mu)
    for (Index nu = 0; nu < g.gamma.cols(); ++nu)
      if (!mask[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)]) g.gamma(mu, nu) = 0.0;
  return g;
}

}  // namespace fourier_ed
