#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "fourier_ed/fim.hpp"
#include "fourier_ed/regressor.hpp"
#include "fourier_ed/structure.hpp"
#include "fourier_ed/tensornet.hpp"

using namespace fourier_ed;

namespace {

BasisSpec spec_of(int n, int m, int max_freq) {
  BasisSpec s;
  s.n_features = n;
  s.n_params = m;
  s.input_freqs.clear();
  for (int w = 1; w <= max_freq; ++w) s.input_freqs.push_back(w);
  s.param_freqs = {1};
  return s;
}

std::vector<double> point(int n, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return v;
}

// Dense Jacobian of c(θ) = S Vᵀι(θ); K = 3^M, D = 17.
void BM_DenseJacobian(benchmark::State& state) {
  const BasisSpec spec = spec_of(1, static_cast<int>(state.range(0)), 8);
  Rng rng(1);
  const SvdFactors f = svd_decompose(random_structure_constants(spec, rng));
  const auto th = point(spec.n_params, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dense_param_jacobian(f.v, spec, th, nullptr));
  state.SetLabel("K=" + std::to_string(spec.param_dim()));
}
BENCHMARK(BM_DenseJacobian)->Arg(5)->Arg(7)->Arg(9);

// Tensor-train Jacobian with M = 24 sites and varying χ.
void BM_TensorTrainJacobian(benchmark::State& state) {
  const BasisSpec spec = spec_of(1, 24, 8);
  Rng rng(2);
  const TensorTrain tt = random_right_normalized_tt(spec, 17, static_cast<int>(state.range(0)), rng);
  const auto th = point(spec.n_params, rng);
  for (auto _ : state) benchmark::DoNotOptimize(tt_param_jacobian(tt, spec, th, nullptr));
}
BENCHMARK(BM_TensorTrainJacobian)->Arg(10)->Arg(30)->Arg(60);

// Full tensorized evaluation for N = 4, D = 2401.
void BM_TensorizedEval(benchmark::State& state) {
  const BasisSpec spec = spec_of(4, 24, 3);
  TensorizedOptions opt;
  opt.chi = 30;
  Rng rng(3);
  const TensorizedModel model = random_tensorized_model(spec, opt, rng);
  const auto x = point(4, rng);
  const auto th = point(spec.n_params, rng);
  for (auto _ : state) benchmark::DoNotOptimize(tensorized_eval(model, x, th));
}
BENCHMARK(BM_TensorizedEval);

// Normalized-FIM effective dimension from 150 parameter samples.
void BM_EffectiveDimension(benchmark::State& state) {
  const BasisSpec spec = spec_of(1, 7, 8);
  Rng rng(4);
  const DenseRegressor model(spec, svd_decompose(random_structure_constants(spec, rng)));
  const auto thetas = sample_parameters(spec.n_params, 150, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(model_effective_dimension(model, thetas, kDefaultDatasetSize));
}
BENCHMARK(BM_EffectiveDimension);

}  // namespace

BENCHMARK_MAIN();
