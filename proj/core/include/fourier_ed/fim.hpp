#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fourier_ed/regressor.hpp"

namespace fourier_ed {

inline constexpr std::int64_t kDefaultDatasetSize = 100'000;

struct FimEstimate {
  Matrix f;                          // M × M
  Vector theta;                      // point of evaluation
  std::int64_t n_input_samples = 0;  // grid points or Monte-Carlo samples; 0 for analytic
  std::string sampling;              // "quadrature", "monte-carlo" or "analytic"
};

struct EdEstimate {
  double d_eff = 0.0;
  std::int64_t n_param_samples = 0;
  std::int64_t dataset_size = 0;  // 0 when c_n was given directly
  double c_n = 0.0;
};

/// c_n = n / (2π ln n).
double ed_constant(std::int64_t n);

/// Node count per input dimension for which the x-average of ∂f ∂f is exact.
int fim_quadrature_nodes(const BasisSpec& spec);

/// Uniform tensor-product trapezoid grid over [−π, π)^N. nodes_per_dim = 0
/// picks the exact rule; a smaller positive value is rejected.
FimEstimate fim_quadrature(const Regressor& model, std::span<const double> theta,
                           int nodes_per_dim = 0);
FimEstimate fim_monte_carlo(const Regressor& model, std::span<const double> theta,
                            std::int64_t n_samples, Rng& rng);

FimEstimate fim_analytic(const Regressor& model, std::span<const double> theta);
FimEstimate fim_analytic(const SvdFactors& f, const BasisSpec& spec,
                         std::span<const double> theta);

/// Scales every F(θ_i) by M / mean_i tr F(θ_i).
std::vector<FimEstimate> normalized_fim_batch(std::vector<FimEstimate> batch);
std::vector<FimEstimate> normalized_fim_batch(const Regressor& model,
                                              const std::vector<Vector>& thetas);

/// Normalized effective dimension with c_n = n / (2π ln n); requires c_n > 1.
EdEstimate effective_dimension(std::span<const FimEstimate> normalized, std::int64_t n);
/// Same with the constant given directly (c > 1).
EdEstimate effective_dimension_with_constant(std::span<const FimEstimate> normalized, double c);

/// logdet(I + c F) with negative eigenvalues clamped to zero.
double logdet_identity_plus(const Matrix& f, double c);

/// Uniform parameter samples on [−π, π]^M.
std::vector<Vector> sample_parameters(int n_params, int count, Rng& rng);

/// Full pipeline: analytic FIM at `n_param_samples` uniform θ, normalization, ED.
EdEstimate model_effective_dimension(const Regressor& model, int n_param_samples,
                                     std::int64_t n, Rng& rng);
/// Same at a fixed list of θ samples (used to pair models on common draws).
EdEstimate model_effective_dimension(const Regressor& model, const std::vector<Vector>& thetas,
                                     std::int64_t n);

/// Number of eigenvalues above rel_tol · λ_max.
int numerical_rank(const Matrix& f, double rel_tol = 1e-8);
int numerical_rank(const FimEstimate& f, double rel_tol = 1e-8);

struct RmtStatistics {
  Matrix mean;            // empirical E_V[F]
  Matrix variance;        // empirical Var_V[F]
  Matrix predicted_mean;  // tr(S²)/K · ιᵀ B_jᵀ B_k ι
  Matrix predicted_variance;  // leading-order tr(S⁴)/K² term
  double mean_diag = 0.0;     // average of mean(j, j)
  double mean_offdiag = 0.0;  // average of |mean(j, k)|, j ≠ k
  double mean_variance = 0.0; // average entry of `variance`
  int n_v_samples = 0;
};

/// Statistics of F_jk over V with Haar-distributed orthonormal columns.
RmtStatistics rmt_statistics(const Vector& s, const BasisSpec& spec,
                             std::span<const double> theta, int n_v_samples, Rng& rng);

}  // namespace fourier_ed
