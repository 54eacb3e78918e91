#pragma once

#include <span>

#include "fourier_ed/structure.hpp"

namespace fourier_ed {

inline constexpr int kMaxRedraws = 20;

/// y(x) = Σ_{ρ ≤ R} s_ρ (U⁽ᵈ⁾ᵀ e(x))_ρ (V⁽ᵈ⁾ᵀ ι(θ*))_ρ.
struct DataGenerator {
  BasisSpec spec;
  SvdFactors factors;  // U⁽ᵈ⁾, S, V⁽ᵈ⁾
  Vector theta_star;
  int rank = 1;
  double epsilon = 0.0;  // perturbation strength this generator was built with
};

DataGenerator make_data_generator(const BasisSpec& spec, int rank, Rng& rng);

/// w_ρ = s_ρ (V⁽ᵈ⁾ᵀ ι(θ*))_ρ for ρ ≤ R, zero beyond; y(x) = (U⁽ᵈ⁾ᵀ e(x))ᵀ w.
Vector generator_weights(const DataGenerator& gen);
double eval_data_generator(const DataGenerator& gen, std::span<const double> x);

SvdFactors full_biased_model(const DataGenerator& gen);
SvdFactors cutoff_biased_model(const DataGenerator& gen, double xi);
/// Fresh random U and V with the given spectrum.
SvdFactors unbiased_model(const BasisSpec& spec, const Vector& s, Rng& rng);

/// V⁽ᵈ⁾_ε = Gram-Schmidt(V⁽ᵈ⁾ + εG), G standard Gaussian; other fields copied.
DataGenerator perturb_generator(const DataGenerator& gen, double epsilon, Rng& rng);

/// ‖S (V⁽ᵈ⁾ᵀ − V⁽ᵈ⁾_εᵀ) ι(θ*)‖₁.
double bias_deviation(const DataGenerator& gen, const DataGenerator& gen_eps);

/// max_{ρ > R} |(V⁽ᵈ⁾ᵀ ι(θ*))_ρ|.
double annihilation_residual(const DataGenerator& gen);

}  // namespace fourier_ed
