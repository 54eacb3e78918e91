#include <cmath>

#include "doctest.h"
#include "fourier_ed/linalg.hpp"
#include "fourier_ed/tensornet.hpp"
#include "helpers.hpp"

using namespace fourier_ed;
using fe_test::sp;

TEST_CASE("TT bonds and right normalization") {
  CHECK(tt_bonds(4, 3, 5, 6) == std::vector<int>{5, 6, 6, 3, 1});
  CHECK(tt_bonds(3, 2, 2, 10) == std::vector<int>{2, 4, 2, 1});
  Rng rng(1);
  const BasisSpec spec = fe_test::make_spec(1, 4, {1}, {1});
  const TensorTrain tt = random_right_normalized_tt(spec, 5, 6, rng);
  CHECK(tt.normalization_error() < 1e-12);
  const Matrix v = densify(tt);
  CHECK(v.rows() == 81);
  CHECK(v.cols() == 5);
  CHECK(orthonormality_error(v) < 1e-12);
  // n_cols larger than d̃·χ₁ cannot be represented.
  CHECK_THROWS_AS(random_right_normalized_tt(spec, 30, 6, rng), std::invalid_argument);
}

TEST_CASE("TT features and Jacobian agree with the densified matrix") {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    const BasisSpec spec = fe_test::make_spec(1, 3 + rep % 2, {1}, rep % 2 ? std::vector<int>{1, 2} : std::vector<int>{1});
    const TensorTrain tt = random_right_normalized_tt(spec, 4, 5, rng);
    const Matrix v = densify(tt);
    const Vector th = fe_test::uniform_vector(spec.n_params, rng);
    const Vector iota = eval_product_basis(spec, sp(th), Side::params);
    CHECK((tt_param_features(tt, spec, sp(th)) - v.transpose() * iota).norm() < 1e-12);
    Vector c;
    const Matrix j = tt_param_jacobian(tt, spec, sp(th), &c);
    CHECK((j - dense_param_jacobian(v, spec, sp(th), nullptr)).norm() < 1e-12);
    CHECK((c - v.transpose() * iota).norm() < 1e-12);
  }
}

TEST_CASE("staircase MPO: blocks and split cores give the same orthogonal operator") {
  Rng rng(3);
  const BasisSpec spec = fe_test::make_spec(3, 1, {1}, {1});
  const StaircaseMpo mpo = random_staircase_mpo(spec, rng);
  CHECK(mpo.block_error() < 1e-12);
  const Matrix u = densify(mpo);
  CHECK(u.rows() == 27);
  CHECK(orthonormality_error(u) < 1e-12);
  CHECK((densify_from_cores(mpo) - u).norm() < 1e-10);
  const Vector e = fe_test::uniform_vector(27, rng);
  CHECK((apply_mpo_transpose(mpo, e) - u.transpose() * e).norm() < 1e-12);
  CHECK((apply_mpo(mpo, e) - u * e).norm() < 1e-12);
  // Rebuilding from the blocks reproduces the operator.
  CHECK((densify(mpo_from_blocks(3, 3, mpo.blocks)) - u).norm() < 1e-13);
}

TEST_CASE("tree isometry") {
  Rng rng(4);
  const TreeIsometry t = random_tree_isometry(4, 3, 5, rng);
  CHECK(t.isometry_error() < 1e-12);
  const Matrix w = densify(t);
  CHECK(w.rows() == 81);
  CHECK(w.cols() == 5);
  CHECK(orthonormality_error(w) < 1e-12);
  const Vector e = fe_test::uniform_vector(81, rng);
  CHECK((apply_tree_transpose(t, e) - w.transpose() * e).norm() < 1e-12);
  CHECK_THROWS_AS(random_tree_isometry(3, 3, 5, rng), std::invalid_argument);
  CHECK_THROWS_AS(random_tree_isometry(1, 3, 5, rng), std::invalid_argument);
}

TEST_CASE("tensorized model equals its densification") {
  Rng rng(5);
  for (int rep = 0; rep < 6; ++rep) {
    const int n = rep % 2 ? 2 : 1;
    const BasisSpec spec = fe_test::make_spec(n, 3 + rep % 2, {1}, {1});
    TensorizedOptions opt;
    opt.chi = 4 + rep % 3;
    const TensorizedModel m = random_tensorized_model(spec, opt, rng);
    m.validate();
    const SvdFactors d = densify(m);
    const DenseRegressor dense(spec, d);
    const TensorizedRegressor tn(m);
    for (int k = 0; k < 3; ++k) {
      const auto x = fe_test::uniform_point(n, rng);
      const Vector th = fe_test::uniform_vector(spec.n_params, rng);
      CHECK(tensorized_eval(m, sp(x), sp(th)) == doctest::Approx(dense.value(sp(x), sp(th))).epsilon(1e-10));
      CHECK((tensorized_gradient(m, sp(x), sp(th)) - dense.gradient(sp(x), sp(th))).norm() < 1e-10);
      CHECK(fe_test::rel_diff(tensorized_fim(m, sp(th)), dense.fisher(sp(th))) < 1e-10);
      CHECK(tn.value(sp(x), sp(th)) == doctest::Approx(dense.value(sp(x), sp(th))).epsilon(1e-10));
    }
  }
}

TEST_CASE("tensorized gradient matches finite differences") {
  Rng rng(6);
  const BasisSpec spec = fe_test::make_spec(2, 6, {1, 2}, {1});
  TensorizedOptions opt;
  opt.chi = 6;
  const TensorizedModel m = random_tensorized_model(spec, opt, rng);
  for (int rep = 0; rep < 5; ++rep) {
    const auto x = fe_test::uniform_point(2, rng);
    const Vector th = fe_test::uniform_vector(6, rng);
    const Vector fd = fe_test::central_difference(
        [&](const Vector& t) { return tensorized_eval(m, sp(x), sp(t)); }, th);
    CHECK(fe_test::max_rel_error(tensorized_gradient(m, sp(x), sp(th)), fd) < 1e-6);
  }
}

TEST_CASE("streamed input features match the dense path") {
  Rng rng(7);
  const BasisSpec spec = fe_test::make_spec(4, 2, {1, 2}, {1});
  TensorizedOptions opt;
  opt.chi = 7;
  const TensorizedModel m = random_tensorized_model(spec, opt, rng);
  REQUIRE(m.u.has_value());
  REQUIRE(m.t.has_value());
  for (int rep = 0; rep < 3; ++rep) {
    const auto x = fe_test::uniform_point(4, rng);
    const Vector dense = tensorized_input_features(m, sp(x));
    const Vector streamed = tensorized_input_features(m, sp(x), true);
    CHECK((dense - streamed).norm() < 1e-10);
    const SvdFactors d = densify(m);
    CHECK((dense - d.u.transpose() * eval_product_basis(spec, sp(x), Side::inputs)).norm() < 1e-10);
  }
}

TEST_CASE("spectrum length follows the tree output") {
  const BasisSpec spec = fe_test::make_spec(4, 24, {1, 2, 3}, {1});
  TensorizedOptions opt;
  opt.chi = 30;
  CHECK(tensorized_spectrum_length(spec, opt) == 30);
  opt.use_tree = false;
  CHECK(tensorized_spectrum_length(spec, opt) == 2401);
  const BasisSpec odd = fe_test::make_spec(3, 5, {1}, {1});
  opt.use_tree = true;
  CHECK(tensorized_spectrum_length(odd, opt) == 27);
}

TEST_CASE("biased tensorized generator: exactness at theta*") {
  Rng rng(8);
  for (int n : {1, 2}) {
    const BasisSpec spec = fe_test::make_spec(n, 5, {1}, {1});
    TensorizedOptions opt;
    opt.chi = 6;
    const TensorizedGenerator gen = biased_tensorized_generator(spec, 2, opt, rng);
    CHECK(gen.model.v.normalization_error() < 1e-12);
    CHECK(annihilation_residual(gen) < 1e-12);
    for (double xi : {0.5, 1.0, 2.0, 1e6}) {
      const TensorizedModel cut = cutoff_biased_model(gen, xi);
      for (int rep = 0; rep < 10; ++rep) {
        const auto x = fe_test::uniform_point(n, rng);
        const double y = eval_data_generator(gen, sp(x));
        CHECK(std::abs(tensorized_eval(full_biased_model(gen), sp(x), sp(gen.theta_star)) - y) < 1e-12);
        CHECK(std::abs(tensorized_eval(cut, sp(x), sp(gen.theta_star)) - y) < 1e-12);
      }
    }
    // Densified generator behaves like the dense construction.
    const SvdFactors d = densify(gen.model);
    CHECK(orthonormality_error(d.v) < 1e-12);
    const Vector c = d.v.transpose() * eval_product_basis(spec, sp(gen.theta_star), Side::params);
    CHECK(c.tail(c.size() - 2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tensorized perturbation") {
  Rng rng(9);
  const BasisSpec spec = fe_test::make_spec(1, 5, {1, 2}, {1});
  TensorizedOptions opt;
  opt.chi = 6;
  const TensorizedGenerator gen = biased_tensorized_generator(spec, 2, opt, rng);
  CHECK(bias_deviation(gen, perturb_generator(gen, 0.0, rng)) < 1e-12);
  Rng a(1), b(1);
  const double small = bias_deviation(gen, perturb_generator(gen, 0.01, a));
  const double large = bias_deviation(gen, perturb_generator(gen, 1.0, b));
  CHECK(small > 0.0);
  CHECK(large > small);
  CHECK(perturb_generator(gen, 0.5, rng).model.v.normalization_error() < 1e-12);
}

TEST_CASE("unbiased tensorized model") {
  Rng rng(10);
  const BasisSpec spec = fe_test::make_spec(2, 4, {1}, {1});
  TensorizedOptions opt;
  opt.chi = 5;
  const Vector s = Vector::LinSpaced(tensorized_spectrum_length(spec, opt), 1.0, 0.1);
  const TensorizedModel m = unbiased_tensorized_model(spec, opt, s, rng);
  CHECK(m.s == s);
  CHECK(orthonormality_error(densify(m).u) < 1e-12);
}
