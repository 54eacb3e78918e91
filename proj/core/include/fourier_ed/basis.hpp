#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fourier_ed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class Side { inputs, params };

struct BasisTag {
  enum class Kind { constant, cosine, sine };
  Kind kind = Kind::constant;
  int frequency = 0;

  bool operator==(const BasisTag&) const = default;
  std::string str() const;
};

/// Canonical local ordering: constant, cosines ascending in ω, sines ascending in ω.
class LocalBasisOrdering {
 public:
  LocalBasisOrdering(const std::vector<int>& freqs, bool include_constant);

  int size() const { return static_cast<int>(tags_.size()); }
  const BasisTag& tag(int index) const { return tags_.at(static_cast<std::size_t>(index)); }
  /// Returns -1 when the tag is not part of the basis.
  int index_of(const BasisTag& tag) const;
  const std::vector<BasisTag>& tags() const { return tags_; }

 private:
  std::vector<BasisTag> tags_;
  std::vector<int> freqs_;
  bool constant_;
};

struct BasisSpec {
  int n_features = 1;
  int n_params = 1;
  std::vector<int> input_freqs{1};
  std::vector<int> param_freqs{1};
  bool input_constant = true;
  bool param_constant = true;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  int local_input_dim() const;  // d
  int local_param_dim() const;  // d̃
  /// D = d^N. Throws std::overflow_error when it does not fit in 63 bits.
  std::int64_t input_dim() const;
  /// K = d̃^M. Throws std::overflow_error when it does not fit in 63 bits.
  std::int64_t param_dim() const;
  double log10_input_dim() const;
  double log10_param_dim() const;
  int max_input_freq() const;
  int max_param_freq() const;

  LocalBasisOrdering input_ordering() const { return {input_freqs, input_constant}; }
  LocalBasisOrdering param_ordering() const { return {param_freqs, param_constant}; }

  bool operator==(const BasisSpec&) const = default;
};

/// Checked integer power; throws std::overflow_error.
std::int64_t checked_pow(std::int64_t base, int exponent);

/// Local trig basis [1?, √2 cos(ωt)..., √2 sin(ωt)...] for a frequency list.
Vector eval_local_basis(const std::vector<int>& freqs, bool include_constant, double t);
/// Same, written into `out` (size must be 2|Ω| + constant).
void eval_local_basis(const std::vector<int>& freqs, bool include_constant, double t,
                      double* out);

Vector eval_local_input_basis(const BasisSpec& spec, double x);
Vector eval_local_param_basis(const BasisSpec& spec, double theta);

/// Kronecker product of local basis vectors, first index slowest.
Vector eval_product_basis(const BasisSpec& spec, std::span<const double> point, Side which);

/// Kronecker product of a list of vectors, first factor slowest.
Vector kron_all(const std::vector<Vector>& factors);

/// β with d/dt ι(t) = β ι(t) for the given local basis.
Matrix derivative_tensor(const std::vector<int>& freqs, bool include_constant);
/// Parameter-side β for the given BasisSpec.
Matrix derivative_tensor(const BasisSpec& spec);

/// Uniform periodic trapezoid nodes on [−π, π).
std::vector<double> trapezoid_nodes(int n);
/// Smallest node count integrating products of two local functions exactly.
int gram_quadrature_nodes(int max_freq);

/// Throws std::invalid_argument with "expected N, got M" when sizes differ.
void require_length(const char* what, std::size_t expected, std::size_t actual);

}  // namespace fourier_ed
