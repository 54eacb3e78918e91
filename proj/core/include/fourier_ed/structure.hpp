#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "fourier_ed/basis.hpp"
#include "fourier_ed/rng.hpp"

namespace fourier_ed {

/// Maximum number of entries of any dense D×K object.
inline constexpr std::int64_t kDenseEntryLimit = 100'000'000;

/// Raised when a dense object would exceed kDenseEntryLimit.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Throws SizeGuardError unless D·K fits the dense limit.
void require_dense_feasible(const BasisSpec& spec);
bool dense_feasible(const BasisSpec& spec);

struct StructureConstants {
  BasisSpec spec;
  Matrix gamma;  // D × K
};

/// Γ = U diag(S) Vᵀ with U D×D orthogonal, S descending, V K×D orthonormal columns.
struct SvdFactors {
  Matrix u;
  Vector s;
  Matrix v;

  Index rank_dim() const { return s.size(); }
  Matrix reconstruct() const { return u * s.asDiagonal() * v.transpose(); }
};

StructureConstants random_structure_constants(const BasisSpec& spec, Rng& rng);

/// Thin SVD with the largest-magnitude entry of each U column made nonnegative.
SvdFactors svd_decompose(const StructureConstants& gamma);

/// tr S⁴ / (tr S²)².
double purity(const Vector& s);

/// f(x, θ) = Σ_ρ s_ρ (Uᵀe(x))_ρ (Vᵀι(θ))_ρ.
double evaluate_model(const SvdFactors& f, const BasisSpec& spec, std::span<const double> x,
                      std::span<const double> theta);

/// ∂f/∂θ_j, obtained by replacing ι_j with β ι_j in the parameter contraction.
Vector gradient(const SvdFactors& f, const BasisSpec& spec, std::span<const double> x,
                std::span<const double> theta);

/// s_ρ ← exp(−(ρ − R)/ξ) s_ρ for ρ > R (1-based); no renormalization.
Vector decay_spectrum(const Vector& s, int rank, double xi);
SvdFactors apply_spectrum_decay(const SvdFactors& f, int rank, double xi);

/// Local parameter vectors ι_m(θ_m) and their derivatives β ι_m(θ_m).
struct ParamLocals {
  std::vector<Vector> iota;
  std::vector<Vector> diota;
};
ParamLocals param_locals(const BasisSpec& spec, std::span<const double> theta);

/// Contracts a length-d̃^M tensor t (first index slowest) with ι_1⊗…⊗ι_M and
/// returns the value; grad[j] receives the contraction with ι_j replaced by
/// βι_j. O(d̃^M) work in total.
double contract_all_slots(const double* t, const ParamLocals& locals, double* grad);

/// Vᵀι(θ) for dense V.
Vector dense_param_features(const Matrix& v, const BasisSpec& spec, std::span<const double> theta);
/// Columns j: Vᵀ B_j ι(θ). Writes Vᵀι(θ) into `features` when non-null.
Matrix dense_param_jacobian(const Matrix& v, const BasisSpec& spec, std::span<const double> theta,
                            Vector* features);

}  // namespace fourier_ed
