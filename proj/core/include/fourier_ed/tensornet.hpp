#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "fourier_ed/regressor.hpp"

namespace fourier_ed {

/// Input-side vectors longer than this are never materialized.
inline constexpr std::int64_t kDensifyLimit = 1'000'000;

/// Tensor train for a K × n_cols matrix with orthonormal columns.
/// Core m is stored as a χ_{m−1} × (d̃·χ_m) matrix with column index ν·χ_m + a_m;
/// right-normalization means each core has orthonormal rows.
struct TensorTrain {
  int phys = 0;
  std::vector<int> bonds;  // length M + 1; bonds[0] = n_cols, bonds[M] = 1
  std::vector<Matrix> cores;

  int n_sites() const { return static_cast<int>(cores.size()); }
  int n_cols() const { return bonds.empty() ? 0 : bonds.front(); }
  int max_bond() const;
  /// Slice core[m][:, ν, :].
  Matrix slice(int m, int nu) const;
  /// max over cores of |core coreᵀ − I|.
  double normalization_error() const;
};

/// Dense 4-index array with row-major storage.
struct Tensor4 {
  std::array<int, 4> dims{0, 0, 0, 0};
  std::vector<double> data;

  Tensor4() = default;
  Tensor4(int a, int b, int c, int d);
  double& operator()(int a, int b, int c, int d) {
    return data[static_cast<std::size_t>(((a * dims[1] + b) * dims[2] + c) * dims[3] + d)];
  }
  double operator()(int a, int b, int c, int d) const {
    return data[static_cast<std::size_t>(((a * dims[1] + b) * dims[2] + c) * dims[3] + d)];
  }
};

/// U = Ĝ₁ Ĝ₂ ⋯ Ĝ_{N−1}, Ĝ_n = I ⊗ G_n ⊗ I acting on sites (n, n+1).
/// Block rows index the input pair (μ_n, μ_{n+1}), columns the output pair.
struct StaircaseMpo {
  int n_sites = 1;
  int phys = 0;
  std::vector<Matrix> blocks;  // N−1 orthogonal d² × d²
  /// Site cores (k_left, μ_in, μ_out, k_right) of the same operator, from the
  /// SVD split of each block.
  std::vector<Tensor4> cores;

  double block_error() const;
};

/// Binary tree of isometries mapping ⊗ leaves (dimension leaf_dim each) to χ.
/// levels[ℓ][τ] is a (c₁·c₂) × o matrix with orthonormal columns, row index i₁·c₂ + i₂.
struct TreeIsometry {
  int n_leaves = 1;
  int leaf_dim = 0;
  int chi = 0;
  std::vector<std::vector<Matrix>> levels;

  double isometry_error() const;
};

struct TensorizedModel {
  BasisSpec spec;
  std::optional<StaircaseMpo> u;
  std::optional<TreeIsometry> t;
  Vector s;
  TensorTrain v;

  /// Length of the spectrum: output dimension of T, or D without a tree.
  int spectrum_length() const { return static_cast<int>(s.size()); }
  void validate() const;
};

TensorTrain random_right_normalized_tt(const BasisSpec& spec, int n_cols, int chi, Rng& rng);
/// Bond dimensions used for a TT with the given shape.
std::vector<int> tt_bonds(int n_sites, int phys, int n_cols, int chi);
StaircaseMpo random_staircase_mpo(const BasisSpec& spec, Rng& rng);
StaircaseMpo mpo_from_blocks(int n_sites, int phys, std::vector<Matrix> blocks);
TreeIsometry random_tree_isometry(int n_leaves, int leaf_dim, int chi, Rng& rng);

/// K × n_cols matrix represented by the train (tiny sizes only).
Matrix densify(const TensorTrain& tt);
/// D × D operator, composed from the blocks.
Matrix densify(const StaircaseMpo& mpo);
/// Same operator, contracted from the split site cores.
Matrix densify_from_cores(const StaircaseMpo& mpo);
/// D × χ isometry.
Matrix densify(const TreeIsometry& tree);
/// Dense factors (U·T, S, V) of a tensorized model.
SvdFactors densify(const TensorizedModel& model);

/// Uᵀ applied to a dense input-space vector.
Vector apply_mpo_transpose(const StaircaseMpo& mpo, const Vector& e);
/// U applied to a dense input-space vector.
Vector apply_mpo(const StaircaseMpo& mpo, const Vector& e);
/// Tᵀ applied to a dense input-space vector.
Vector apply_tree_transpose(const TreeIsometry& tree, const Vector& e);

/// Vᵀ ι(θ) by TT contraction.
Vector tt_param_features(const TensorTrain& tt, const BasisSpec& spec,
                         std::span<const double> theta);
/// Columns j: Vᵀ B_j ι(θ), from shared left/right partial contractions.
Matrix tt_param_jacobian(const TensorTrain& tt, const BasisSpec& spec,
                         std::span<const double> theta, Vector* features);

/// Tᵀ Uᵀ e(x) (without the spectrum). Dense when D ≤ kDensifyLimit unless
/// `force_stream`; otherwise e(x) is propagated as an MPS.
Vector tensorized_input_features(const TensorizedModel& model, std::span<const double> x,
                                 bool force_stream = false);

double tensorized_eval(const TensorizedModel& model, std::span<const double> x,
                       std::span<const double> theta);
Vector tensorized_gradient(const TensorizedModel& model, std::span<const double> x,
                           std::span<const double> theta);
Matrix tensorized_fim(const TensorizedModel& model, std::span<const double> theta);

class TensorizedRegressor final : public Regressor {
 public:
  explicit TensorizedRegressor(TensorizedModel model);

  const BasisSpec& spec() const override { return model_.spec; }
  const Vector& spectrum() const override { return model_.s; }
  const TensorizedModel& model() const { return model_; }

  Vector input_features(std::span<const double> x) const override;
  Vector param_features(std::span<const double> theta) const override;
  Matrix param_jacobian(std::span<const double> theta, Vector* features) const override;

 private:
  TensorizedModel model_;
};

struct TensorizedOptions {
  int chi = 30;          // TT bond dimension
  int n_cols = 0;        // spectrum length; 0 picks the tree output (or D)
  bool use_mpo = true;   // random staircase U (identity when false or N = 1)
  bool use_tree = true;  // TTN isometry T (identity when false or N not a power of two)
};

/// Spectrum length implied by the options.
int tensorized_spectrum_length(const BasisSpec& spec, const TensorizedOptions& opt);

/// Unbiased tensorized model with flat spectrum s = 1/√n_cols.
TensorizedModel random_tensorized_model(const BasisSpec& spec, const TensorizedOptions& opt,
                                        Rng& rng);

struct TensorizedGenerator {
  TensorizedModel model;  // full biased model (flat spectrum)
  Vector theta_star;
  int rank = 1;
  double epsilon = 0.0;
};

/// Biased tensorized construction: tail cores random right-normalized, first
/// core with orthonormal rows where rows R+1.. annihilate ι₁(θ*₁) ⊗ q(θ*_{2..M}).
TensorizedGenerator biased_tensorized_generator(const BasisSpec& spec, int rank,
                                                const TensorizedOptions& opt,
                                                const Vector& theta_star, Rng& rng);
TensorizedGenerator biased_tensorized_generator(const BasisSpec& spec, int rank,
                                                const TensorizedOptions& opt, Rng& rng);

/// y(x) = Σ_{σ ≤ R} s_σ (TᵀUᵀe(x))_σ (Vᵀι(θ*))_σ.
Vector generator_weights(const TensorizedGenerator& gen);
double eval_data_generator(const TensorizedGenerator& gen, std::span<const double> x);
TensorizedModel full_biased_model(const TensorizedGenerator& gen);
TensorizedModel cutoff_biased_model(const TensorizedGenerator& gen, double xi);
/// Fresh U, T and V with the given spectrum.
TensorizedModel unbiased_tensorized_model(const BasisSpec& spec, const TensorizedOptions& opt,
                                          const Vector& s, Rng& rng);
/// Each core matrix replaced by Gram-Schmidt(𝕍 + εG).
TensorizedGenerator perturb_generator(const TensorizedGenerator& gen, double epsilon, Rng& rng);
double bias_deviation(const TensorizedGenerator& gen, const TensorizedGenerator& gen_eps);
/// max_{σ > R} |(Vᵀ ι(θ*))_σ|.
double annihilation_residual(const TensorizedGenerator& gen);

}  // namespace fourier_ed
