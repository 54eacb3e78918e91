#include "fourier_ed/training.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

namespace fourier_ed {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0))
    throw std::invalid_argument("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw std::invalid_argument("adam_beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (n_train < 1) throw std::invalid_argument("n_train must be >= 1");
  if (batch_size < 1 || batch_size > n_train)
    throw std::invalid_argument("batch_size must satisfy 1 <= batch_size <= n_train");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::biased:
      return "biased";
    case Regime::partial:
      return "partial";
    case Regime::unbiased:
      return "unbiased";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "biased") return Regime::biased;
  if (s == "partial") return Regime::partial;
  if (s == "unbiased") return Regime::unbiased;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

Dataset sample_training_set(const std::function<double(std::span<const double>)>& target,
                            int n_features, int n_train, Rng& rng) {
  if (n_train < 1) throw std::invalid_argument("sample_training_set: n_train must be >= 1");
  Dataset data(static_cast<std::size_t>(n_train));
  for (Sample& s : data) {
    s.x.resize(static_cast<std::size_t>(n_features));
    for (double& v : s.x) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
  }
  for (Sample& s : data) s.y = target(s.x);
  return data;
}

Dataset sample_training_set(const DataGenerator& gen, int n_train, Rng& rng) {
  const Vector w = generator_weights(gen);
  const Vector uw = gen.factors.u * w;  // y(x) = e(x)ᵀ U w
  const BasisSpec& spec = gen.spec;
  return sample_training_set(
      [&](std::span<const double> x) { return eval_product_basis(spec, x, Side::inputs).dot(uw); },
      spec.n_features, n_train, rng);
}

Dataset sample_training_set(const TensorizedGenerator& gen, int n_train, Rng& rng) {
  const Vector w = generator_weights(gen);
  return sample_training_set(
      [&](std::span<const double> x) {
        return tensorized_input_features(gen.model, x).dot(w);
      },
      gen.model.spec.n_features, n_train, rng);
}

namespace {

// Input features a(x_i) stacked as rows, so f(x_i) = A.row(i) · c(θ).
Matrix feature_rows(const Regressor& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  const Index n = static_cast<Index>(data.size());
  Matrix a(n, model.spectrum().size());
  for (Index i = 0; i < n; ++i) a.row(i) = model.input_features(data[static_cast<std::size_t>(i)].x).transpose();
  return a;
}

Vector targets(const Dataset& data) {
  Vector y(static_cast<Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y[static_cast<Index>(i)] = data[i].y;
  return y;
}

double full_mse(const Matrix& a, const Vector& y, const Vector& c) {
  return (a * c - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

double mse(const Regressor& model, std::span<const double> theta, const Dataset& data) {
  const Matrix a = feature_rows(model, data);
  return full_mse(a, targets(data), model.param_features(theta));
}

Vector random_initialization(int n_params, Rng& rng) {
  Vector t(n_params);
  for (Index i = 0; i < n_params; ++i) t[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return t;
}

Vector batch_gradient(const Regressor& model, std::span<const double> theta, const Dataset& data,
                      std::span<const std::size_t> batch) {
  Vector c;
  const Matrix j = model.param_jacobian(theta, &c);
  Vector acc = Vector::Zero(c.size());
  for (std::size_t i : batch) {
    const Vector a = model.input_features(data[i].x);
    acc += (a.dot(c) - data[i].y) * a;
  }
  return (2.0 / static_cast<double>(batch.size())) * (j.transpose() * acc);
}

TrainingTrace train(const Regressor& model, const Dataset& data, const TrainingConfig& config) {
  Rng init(config.seed);
  const Vector theta0 = random_initialization(model.spec().n_params, init);
  return train(model, data, config, theta0);
}

TrainingTrace train(const Regressor& model, const Dataset& data, const TrainingConfig& config,
                    const Vector& theta0) {
  TrainingConfig cfg = config;
  cfg.n_train = static_cast<int>(data.size());
  cfg.batch_size = std::min(cfg.batch_size, cfg.n_train);
  cfg.validate();
  require_length("theta0", static_cast<std::size_t>(model.spec().n_params),
                 static_cast<std::size_t>(theta0.size()));
  const Matrix a = feature_rows(model, data);
  const Vector y = targets(data);
  const Index m = theta0.size();

  Rng shuffle_rng = Rng(config.seed).substream(0x5348u);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Vector theta = theta0, mom = Vector::Zero(m), vel = Vector::Zero(m);
  double b1t = 1.0, b2t = 1.0;
  TrainingTrace trace;
  trace.mse.reserve(static_cast<std::size_t>(cfg.epochs));
  Vector c;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const Matrix j = model.param_jacobian(std::span<const double>(theta.data(), m), &c);
      Vector acc = Vector::Zero(c.size());
      for (std::size_t k = start; k < stop; ++k) {
        const Index i = static_cast<Index>(order[k]);
        acc += (a.row(i).dot(c) - y[i]) * a.row(i).transpose();
      }
      const Vector g = (2.0 / static_cast<double>(stop - start)) * (j.transpose() * acc);
      b1t *= cfg.adam_beta1;
      b2t *= cfg.adam_beta2;
      mom = cfg.adam_beta1 * mom + (1.0 - cfg.adam_beta1) * g;
      vel = cfg.adam_beta2 * vel + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
      const Vector mhat = mom / (1.0 - b1t);
      const Vector vhat = vel / (1.0 - b2t);
      theta.array() -= cfg.learning_rate * mhat.array() / (vhat.array().sqrt() + cfg.adam_eps);
    }
    const double loss =
        full_mse(a, y, model.param_features(std::span<const double>(theta.data(), m)));
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "training diverged: non-finite loss at epoch " << epoch;
      throw TrainingDiverged(epoch, os.str());
    }
    trace.mse.push_back(loss);
  }
  const auto it = std::min_element(trace.mse.begin(), trace.mse.end());
  trace.mse_min = *it;
  trace.argmin_epoch = static_cast<int>(it - trace.mse.begin());
  trace.theta = theta;
  return trace;
}

namespace {

// Family-independent pieces of the paired protocol.
struct Arm {
  Regime regime;
  std::unique_ptr<Regressor> full;
  std::vector<std::unique_ptr<Regressor>> cut;  // one per ξ
  double ed_full = 0.0;
  std::vector<double> ed_cut;
};

std::vector<ExperimentRecord> run_arms(std::vector<Arm>& arms, const Dataset& data,
                                       const PairedOptions& opt, double delta_data, Rng& rng) {
  const int m = arms.front().full->spec().n_params;
  const std::vector<Vector> thetas = sample_parameters(m, opt.n_param_samples, rng);
  for (Arm& arm : arms) {
    arm.ed_full = model_effective_dimension(*arm.full, thetas, opt.dataset_size).d_eff;
    for (const auto& c : arm.cut)
      arm.ed_cut.push_back(model_effective_dimension(*c, thetas, opt.dataset_size).d_eff);
  }
  const std::size_t nx = opt.xis.size();
  // mins[arm][restart]: full, then cut per ξ.
  std::vector<std::vector<double>> full_min(arms.size());
  std::vector<std::vector<std::vector<double>>> cut_min(arms.size(),
                                                         std::vector<std::vector<double>>(nx));
  for (int r = 0; r < opt.n_restarts; ++r) {
    Rng restart_rng = rng.substream(1000u + static_cast<std::uint64_t>(r));
    const Vector theta0 = random_initialization(m, restart_rng);
    TrainingConfig cfg = opt.training;
    cfg.seed = restart_rng.next();
    for (std::size_t a = 0; a < arms.size(); ++a) {
      full_min[a].push_back(train(*arms[a].full, data, cfg, theta0).mse_min);
      for (std::size_t k = 0; k < nx; ++k)
        cut_min[a][k].push_back(train(*arms[a].cut[k], data, cfg, theta0).mse_min);
    }
  }
  std::vector<ExperimentRecord> out;
  for (std::size_t k = 0; k < nx; ++k) {
    for (std::size_t a = 0; a < arms.size(); ++a) {
      ExperimentRecord base;
      base.master_seed = opt.master_seed;
      base.realization = opt.realization;
      base.regime = arms[a].regime;
      base.epsilon = opt.epsilon;
      base.delta_data = delta_data;
      base.xi = opt.xis[k];
      base.n_params = m;
      base.input_dim = arms[a].full->spec().input_dim();
      base.ed_full = arms[a].ed_full;
      base.ed_cut = arms[a].ed_cut[k];
      base.delta_ed = base.ed_full - base.ed_cut;
      base.epochs = opt.training.epochs;
      base.lr = opt.training.learning_rate;
      double sf = 0.0, sc = 0.0;
      for (int r = 0; r < opt.n_restarts; ++r) {
        ExperimentRecord rec = base;
        rec.restart = r;
        rec.mse_min_full = full_min[a][static_cast<std::size_t>(r)];
        rec.mse_min_cut = cut_min[a][k][static_cast<std::size_t>(r)];
        rec.delta_mse = rec.mse_min_full - rec.mse_min_cut;
        sf += rec.mse_min_full;
        sc += rec.mse_min_cut;
        out.push_back(rec);
      }
      ExperimentRecord avg = base;
      avg.restart = -1;
      avg.mse_min_full = sf / opt.n_restarts;
      avg.mse_min_cut = sc / opt.n_restarts;
      avg.delta_mse = avg.mse_min_full - avg.mse_min_cut;
      out.push_back(avg);
    }
  }
  return out;
}

void check_options(const PairedOptions& opt) {
  if (opt.n_restarts < 1) throw std::invalid_argument("paired_experiment: n_restarts must be >= 1");
  if (opt.xis.empty()) throw std::invalid_argument("paired_experiment: empty xi grid");
  for (double xi : opt.xis)
    if (!(xi > 0.0)) throw std::invalid_argument("paired_experiment: xi must be > 0");
  if (!opt.biased_arm && !opt.unbiased_arm)
    throw std::invalid_argument("paired_experiment: no arm selected");
  if (!(opt.epsilon >= 0.0)) throw std::invalid_argument("paired_experiment: epsilon must be >= 0");
}

}  // namespace

std::vector<ExperimentRecord> paired_experiment(const DataGenerator& gen,
                                                const PairedOptions& opt, Rng& rng) {
  check_options(opt);
  const DataGenerator gen_eps = perturb_generator(gen, opt.epsilon, rng);
  const double delta = bias_deviation(gen, gen_eps);
  const Dataset data = sample_training_set(gen_eps, opt.training.n_train, rng);
  const SvdFactors unbiased = unbiased_model(gen.spec, gen.factors.s, rng);

  std::vector<Arm> arms;
  if (opt.biased_arm) {
    Arm arm{opt.epsilon > 0.0 ? Regime::partial : Regime::biased,
            std::make_unique<DenseRegressor>(gen.spec, full_biased_model(gen)), {}, 0.0, {}};
    for (double xi : opt.xis)
      arm.cut.push_back(std::make_unique<DenseRegressor>(gen.spec, cutoff_biased_model(gen, xi)));
    arms.push_back(std::move(arm));
  }
  if (opt.unbiased_arm) {
    Arm arm{Regime::unbiased, std::make_unique<DenseRegressor>(gen.spec, unbiased), {}, 0.0, {}};
    for (double xi : opt.xis)
      arm.cut.push_back(std::make_unique<DenseRegressor>(
          gen.spec, apply_spectrum_decay(unbiased, gen.rank, xi)));
    arms.push_back(std::move(arm));
  }
  return run_arms(arms, data, opt, delta, rng);
}

std::vector<ExperimentRecord> paired_experiment(const TensorizedGenerator& gen,
                                                const TensorizedOptions& tn,
                                                const PairedOptions& opt, Rng& rng) {
  check_options(opt);
  const TensorizedGenerator gen_eps = perturb_generator(gen, opt.epsilon, rng);
  const double delta = bias_deviation(gen, gen_eps);
  const Dataset data = sample_training_set(gen_eps, opt.training.n_train, rng);
  const TensorizedModel unbiased = unbiased_tensorized_model(gen.model.spec, tn, gen.model.s, rng);

  std::vector<Arm> arms;
  if (opt.biased_arm) {
    Arm arm{opt.epsilon > 0.0 ? Regime::partial : Regime::biased,
            std::make_unique<TensorizedRegressor>(full_biased_model(gen)), {}, 0.0, {}};
    for (double xi : opt.xis)
      arm.cut.push_back(std::make_unique<TensorizedRegressor>(cutoff_biased_model(gen, xi)));
    arms.push_back(std::move(arm));
  }
  if (opt.unbiased_arm) {
    Arm arm{Regime::unbiased, std::make_unique<TensorizedRegressor>(unbiased), {}, 0.0, {}};
    for (double xi : opt.xis) {
      TensorizedModel c = unbiased;
      c.s = decay_spectrum(c.s, gen.rank, xi);
      arm.cut.push_back(std::make_unique<TensorizedRegressor>(std::move(c)));
    }
    arms.push_back(std::move(arm));
  }
  return run_arms(arms, data, opt, delta, rng);
}

}  // namespace fourier_ed
