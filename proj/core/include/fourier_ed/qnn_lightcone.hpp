#pragma once

#include <cstdint>
#include <vector>

#include "fourier_ed/structure.hpp"

namespace fourier_ed {

/// Chain of qubits; each layer applies the encoding S(x) (feature n on qubit
/// n), one variational rotation per qubit, then an entangling block of depth
/// `entangling_depth`. A final block of depth `measurement_depth` precedes the
/// measurement.
struct CircuitLayout {
  int n_qubits = 1;
  int n_layers = 1;
  int entangling_depth = 0;
  int measurement_depth = 0;
  std::vector<double> encoding_eigenvalues{-0.5, 0.5};
  std::vector<double> variational_eigenvalues{-0.5, 0.5};
  std::vector<int> measured_qubits;  // empty: all qubits

  void validate() const;
  int n_params() const { return n_layers * n_qubits; }
  std::vector<int> measured() const;
};

struct LightCone {
  int qubit = 0;
  std::vector<int> feature_multiplicity;  // indexed by feature (= qubit)
  std::vector<int> params;                // parameter indices ℓ·N + n, ascending
  std::vector<int> support_width;         // width after each layer, counted backwards
};

/// Non-negative values of ℓ-fold sums of eigenvalue differences, ascending.
std::vector<double> frequency_set(const std::vector<double>& eigenvalues, int multiplicity);

LightCone backward_light_cone(const CircuitLayout& layout, int qubit);

struct BasisCounts {
  std::vector<std::int64_t> input_per_qubit;  // |B_X| for each measured qubit
  std::vector<std::int64_t> param_per_qubit;  // |B̃_Θ| for each measured qubit
  std::int64_t input_union = 0;
  std::int64_t param_union = 0;
};

BasisCounts admissible_basis_counts(const CircuitLayout& layout);

/// Basis specification whose frequency sets are those reachable by the layout.
BasisSpec spec_for_layout(const CircuitLayout& layout);

/// mask(μ, ν) is true when some measured qubit has μ ∈ B_X and ν ∈ B̃_Θ.
std::vector<std::vector<bool>> admissible_mask(const CircuitLayout& layout, const BasisSpec& spec);

/// Uniform [−1, 1] entries on the admissible set, exact zeros elsewhere.
StructureConstants masked_structure_constants(const CircuitLayout& layout, const BasisSpec& spec,
                                              Rng& rng);

}  // namespace fourier_ed
