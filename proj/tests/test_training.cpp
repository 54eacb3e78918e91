#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fourier_ed/training.hpp"
#include "helpers.hpp"

using namespace fourier_ed;
using fe_test::sp;

namespace {

const BasisSpec kSpec = fe_test::make_spec(1, 4, {1, 2, 3}, {1});  // D = 7, K = 81

TrainingConfig small_config(int epochs = 40) {
  TrainingConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.n_train = 12;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("batch gradient matches differences of the batch MSE") {
  Rng rng(1);
  const DataGenerator gen = make_data_generator(kSpec, 2, rng);
  const DenseRegressor model(kSpec, full_biased_model(gen));
  const Dataset data = sample_training_set(gen, 10, rng);
  const std::vector<std::size_t> batch{0, 3, 4, 9};
  Dataset sub;
  for (std::size_t i : batch) sub.push_back(data[i]);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector th = fe_test::uniform_vector(4, rng);
    const Vector g = batch_gradient(model, sp(th), data, batch);
    const Vector fd =
        fe_test::central_difference([&](const Vector& t) { return mse(model, sp(t), sub); }, th);
    CHECK(fe_test::max_rel_error(g, fd) < 1e-6);
  }
}

TEST_CASE("theta* is a global minimum of both biased models") {
  Rng rng(2);
  const DataGenerator gen = make_data_generator(kSpec, 3, rng);
  const Dataset data = sample_training_set(gen, 12, rng);
  std::vector<std::size_t> all(12);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::span<const double> ts(gen.theta_star.data(), gen.theta_star.size());
  for (const SvdFactors& f : {full_biased_model(gen), cutoff_biased_model(gen, 0.3)}) {
    const DenseRegressor model(kSpec, f);
    CHECK(mse(model, ts, data) <= 1e-28);
    CHECK(batch_gradient(model, ts, data, all).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("training lowers the loss and records the minimum") {
  Rng rng(3);
  const DataGenerator gen = make_data_generator(kSpec, 2, rng);
  const DenseRegressor model(kSpec, full_biased_model(gen));
  const Dataset data = sample_training_set(gen, 12, rng);
  const TrainingConfig cfg = small_config(150);
  Rng init(11);
  const Vector th0 = random_initialization(4, init);
  const double before = mse(model, sp(th0), data);
  const TrainingTrace t = train(model, data, cfg, th0);
  CHECK(t.mse_min < before);
  CHECK(t.mse_min == *std::min_element(t.mse.begin(), t.mse.end()));
  CHECK(t.mse[static_cast<std::size_t>(t.argmin_epoch)] == t.mse_min);
  CHECK(mse(model, sp(t.theta), data) == doctest::Approx(t.mse.back()));
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(4);
  const DataGenerator gen = make_data_generator(kSpec, 2, rng);
  const DenseRegressor model(kSpec, full_biased_model(gen));
  const Dataset data = sample_training_set(gen, 12, rng);
  const TrainingTrace a = train(model, data, small_config());
  const TrainingTrace b = train(model, data, small_config());
  CHECK(a.mse == b.mse);
  TrainingConfig other = small_config();
  other.seed = 6;
  CHECK(train(model, data, other).mse != a.mse);
}

TEST_CASE("a non-finite loss aborts with the epoch index") {
  Rng rng(5);
  const DataGenerator gen = make_data_generator(kSpec, 2, rng);
  const DenseRegressor model(kSpec, full_biased_model(gen));
  Dataset data = sample_training_set(gen, 12, rng);
  data[3].y = std::nan("");
  try {
    train(model, data, small_config());
    FAIL("expected TrainingDiverged");
  } catch (const TrainingDiverged& e) {
    CHECK(e.epoch() == 0);
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  TrainingConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainingConfig{};
  c.batch_size = 30;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("batch_size"), std::invalid_argument);
  c = TrainingConfig{};
  c.adam_beta2 = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("regime names round-trip") {
  for (Regime r : {Regime::biased, Regime::partial, Regime::unbiased})
    CHECK(regime_from_string(to_string(r)) == r);
  CHECK_THROWS_AS(regime_from_string("other"), std::invalid_argument);
}

TEST_CASE("training data come from the generator") {
  Rng rng(6);
  const DataGenerator gen = make_data_generator(kSpec, 2, rng);
  const Dataset data = sample_training_set(gen, 20, rng);
  CHECK(data.size() == 20);
  for (const Sample& s : data) {
    CHECK(s.x.size() == 1);
    CHECK(std::abs(s.x[0]) <= M_PI);
    CHECK(s.y == doctest::Approx(eval_data_generator(gen, sp(s.x))).epsilon(1e-12));
  }
}

TEST_CASE("paired experiment layout of records") {
  Rng rng(7);
  const DataGenerator gen = make_data_generator(kSpec, 2, rng);
  PairedOptions opt;
  opt.xis = {1.0, 0.3};
  opt.n_restarts = 3;
  opt.training = small_config(20);
  opt.n_param_samples = 20;
  opt.master_seed = 99;
  opt.realization = 4;
  Rng r1(8);
  const auto recs = paired_experiment(gen, opt, r1);
  // 2 ξ × 2 arms × (3 restarts + average)
  REQUIRE(recs.size() == 16);
  for (const auto& r : recs) {
    CHECK(r.master_seed == 99);
    CHECK(r.realization == 4);
    CHECK(r.n_params == 4);
    CHECK(r.input_dim == 7);
    CHECK(r.delta_mse == doctest::Approx(r.mse_min_full - r.mse_min_cut));
    CHECK(r.delta_ed == doctest::Approx(r.ed_full - r.ed_cut));
    CHECK(r.epochs == 20);
  }
  CHECK(recs[0].regime == Regime::biased);
  CHECK(recs[4].regime == Regime::unbiased);
  CHECK(recs[3].restart == -1);
  CHECK(recs[3].mse_min_full ==
        doctest::Approx((recs[0].mse_min_full + recs[1].mse_min_full + recs[2].mse_min_full) / 3));
  // Stronger decay widens the ED gap.
  CHECK(recs[8].delta_ed > recs[0].delta_ed);
  // Same rng seed, same records.
  Rng r2(8);
  CHECK(paired_experiment(gen, opt, r2) == recs);

  opt.epsilon = 0.2;
  opt.unbiased_arm = false;
  Rng r3(8);
  const auto partial = paired_experiment(gen, opt, r3);
  CHECK(partial.size() == 8);
  CHECK(partial[0].regime == Regime::partial);
  CHECK(partial[0].delta_data > 0.0);
}

TEST_CASE("tensorized paired experiment") {
  Rng rng(9);
  const BasisSpec spec = fe_test::make_spec(2, 4, {1}, {1});
  TensorizedOptions tn;
  tn.chi = 5;
  const TensorizedGenerator gen = biased_tensorized_generator(spec, 2, tn, rng);
  PairedOptions opt;
  opt.xis = {0.5};
  opt.n_restarts = 2;
  opt.training = small_config(10);
  opt.n_param_samples = 10;
  const auto recs = paired_experiment(gen, tn, opt, rng);
  CHECK(recs.size() == 6);
  CHECK(recs[0].input_dim == 9);
}
