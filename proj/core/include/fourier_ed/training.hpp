#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fourier_ed/fim.hpp"
#include "fourier_ed/modelgen.hpp"
#include "fourier_ed/tensornet.hpp"

namespace fourier_ed {

struct TrainingConfig {
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 300;
  int batch_size = 5;
  int n_train = 25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Sample {
  std::vector<double> x;
  double y = 0.0;
};
using Dataset = std::vector<Sample>;

struct TrainingTrace {
  std::vector<double> mse;  // full-data MSE after each epoch
  double mse_min = 0.0;
  int argmin_epoch = 0;  // 0-based
  Vector theta;          // final parameters
};

/// Raised when the loss becomes non-finite; carries the epoch index.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

enum class Regime { biased, partial, unbiased };
std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct ExperimentRecord {
  std::uint64_t master_seed = 0;
  int realization = 0;
  int restart = 0;  // −1 marks the average over restarts
  Regime regime = Regime::biased;
  double epsilon = 0.0;
  double delta_data = 0.0;
  double xi = 0.0;
  int n_params = 0;             // M
  std::int64_t input_dim = 0;   // D
  double ed_full = 0.0;
  double ed_cut = 0.0;
  double mse_min_full = 0.0;
  double mse_min_cut = 0.0;
  double delta_mse = 0.0;  // mse_min_full − mse_min_cut
  double delta_ed = 0.0;   // ed_full − ed_cut
  int epochs = 0;
  double lr = 0.0;

  bool operator==(const ExperimentRecord&) const = default;
};

Dataset sample_training_set(const std::function<double(std::span<const double>)>& target,
                            int n_features, int n_train, Rng& rng);
Dataset sample_training_set(const DataGenerator& gen, int n_train, Rng& rng);
Dataset sample_training_set(const TensorizedGenerator& gen, int n_train, Rng& rng);

double mse(const Regressor& model, std::span<const double> theta, const Dataset& data);

/// Uniform initialization on [−π, π]^M.
Vector random_initialization(int n_params, Rng& rng);

/// Adam on minibatch MSE. θ₀ drawn from config.seed, then the same stream shuffles.
TrainingTrace train(const Regressor& model, const Dataset& data, const TrainingConfig& config);
/// Same from a given θ₀; shuffling still uses config.seed.
TrainingTrace train(const Regressor& model, const Dataset& data, const TrainingConfig& config,
                    const Vector& theta0);

/// Gradient of the MSE over a subset: (2/b) Σ (f − y) ∇f.
Vector batch_gradient(const Regressor& model, std::span<const double> theta, const Dataset& data,
                      std::span<const std::size_t> batch);

struct PairedOptions {
  std::vector<double> xis{1.0};
  double epsilon = 0.0;
  int n_restarts = 1;
  TrainingConfig training;
  int n_param_samples = 150;
  std::int64_t dataset_size = kDefaultDatasetSize;
  bool biased_arm = true;
  bool unbiased_arm = true;
  std::uint64_t master_seed = 0;
  int realization = 0;
};

/// Full vs cutoff comparison for one generator realization. For every ξ and
/// arm it emits one record per restart followed by the restart average
/// (restart = −1). Training data come from the ε-perturbed generator; the
/// biased arm models come from the unperturbed one.
std::vector<ExperimentRecord> paired_experiment(const DataGenerator& gen,
                                                const PairedOptions& options, Rng& rng);
std::vector<ExperimentRecord> paired_experiment(const TensorizedGenerator& gen,
                                                const TensorizedOptions& tn,
                                                const PairedOptions& options, Rng& rng);

}  // namespace fourier_ed
