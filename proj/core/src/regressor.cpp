#include "fourier_ed/regressor.hpp"

namespace fourier_ed {

double Regressor::value(std::span<const double> x, std::span<const double> theta) const {
  return input_features(x).dot(param_features(theta));
}

Vector Regressor::gradient(std::span<const double> x, std::span<const double> theta) const {
  return param_jacobian(theta, nullptr).transpose() * input_features(x);
}

Matrix Regressor::fisher(std::span<const double> theta) const {
  const Matrix j = param_jacobian(theta, nullptr);
  const Matrix sj = spectrum().asDiagonal() * j;
  return sj.transpose() * sj;
}

DenseRegressor::DenseRegressor(BasisSpec spec, SvdFactors factors)
    : spec_(std::move(spec)), f_(std::move(factors)) {
  spec_.validate();
  require_length("U rows", static_cast<std::size_t>(spec_.input_dim()),
                 static_cast<std::size_t>(f_.u.rows()));
  require_length("V rows", static_cast<std::size_t>(spec_.param_dim()),
                 static_cast<std::size_t>(f_.v.rows()));
  require_length("spectrum length", static_cast<std::size_t>(f_.u.cols()),
                 static_cast<std::size_t>(f_.s.size()));
  require_length("V columns", static_cast<std::size_t>(f_.s.size()),
                 static_cast<std::size_t>(f_.v.cols()));
}

Vector DenseRegressor::input_features(std::span<const double> x) const {
  const Vector e = eval_product_basis(spec_, x, Side::inputs);
  return f_.s.cwiseProduct(f_.u.transpose() * e);
}

Vector DenseRegressor::param_features(std::span<const double> theta) const {
  return dense_param_features(f_.v, spec_, theta);
}

Matrix DenseRegressor::param_jacobian(std::span<const double> theta, Vector* features) const {
  return dense_param_jacobian(f_.v, spec_, theta, features);
}

}  // namespace fourier_ed
