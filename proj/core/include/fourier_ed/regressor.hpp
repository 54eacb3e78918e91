#pragma once

#include <span>

#include "fourier_ed/structure.hpp"

namespace fourier_ed {

/// A Fourier regression model written as f(x, θ) = a(x)ᵀ c(θ), where
/// a(x) = S ⊙ (input-side isometry)ᵀ e(x) and c(θ) = Vᵀ ι(θ).
/// Both dense factored models and tensorized models implement it.
class Regressor {
 public:
  virtual ~Regressor() = default;

  virtual const BasisSpec& spec() const = 0;
  virtual const Vector& spectrum() const = 0;
  virtual Vector input_features(std::span<const double> x) const = 0;
  virtual Vector param_features(std::span<const double> theta) const = 0;
  /// Columns j: Vᵀ B_j ι(θ). Writes c(θ) into `features` when non-null.
  virtual Matrix param_jacobian(std::span<const double> theta, Vector* features) const = 0;

  double value(std::span<const double> x, std::span<const double> theta) const;
  Vector gradient(std::span<const double> x, std::span<const double> theta) const;
  /// Jᵀ diag(S²) J; the input-side isometry drops out of the x-average.
  Matrix fisher(std::span<const double> theta) const;
};

class DenseRegressor final : public Regressor {
 public:
  DenseRegressor(BasisSpec spec, SvdFactors factors);

  const BasisSpec& spec() const override { return spec_; }
  const Vector& spectrum() const override { return f_.s; }
  const SvdFactors& factors() const { return f_; }

  Vector input_features(std::span<const double> x) const override;
  Vector param_features(std::span<const double> theta) const override;
  Matrix param_jacobian(std::span<const double> theta, Vector* features) const override;

 private:
  BasisSpec spec_;
  SvdFactors f_;
};

}  // namespace fourier_ed
