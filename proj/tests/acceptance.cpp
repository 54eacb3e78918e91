// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fourier_ed/fim.hpp"
#include "fourier_ed/linalg.hpp"
#include "fourier_ed/modelgen.hpp"
#include "fourier_ed/presets.hpp"
#include "fourier_ed/qnn_lightcone.hpp"
#include "fourier_ed/records.hpp"
#include "fourier_ed/tensornet.hpp"
#include "fourier_ed/training.hpp"
#include "helpers.hpp"

using namespace fourier_ed;
using fe_test::sp;

namespace {

// Tolerances and scales.
constexpr double kGramTol = 1e-10;
constexpr double kGradTol = 1e-6;
constexpr double kFimTol = 1e-9;
constexpr double kRankTol = 1e-8;
constexpr double kInvarianceTol = 1e-9;
constexpr double kExactnessTol = 1e-9;
constexpr double kFlatSpread = 0.05;
constexpr double kRmtFactor = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

void quiet(const std::string&) {}

SvdFactors random_dense(const BasisSpec& spec, Rng& rng) {
  return svd_decompose(random_structure_constants(spec, rng));
}

// Random small spec: N in {1, 2}, a few frequencies, M in [2, 4].
BasisSpec random_small_spec(Rng& rng, bool allow_two_features) {
  const int n = allow_two_features && rng.uniform(0.0, 1.0) < 0.5 ? 2 : 1;
  const int m = 2 + static_cast<int>(rng.uniform(0.0, 3.0));
  std::vector<int> in{1};
  if (n == 1) in = rng.uniform(0.0, 1.0) < 0.5 ? std::vector<int>{1, 2} : std::vector<int>{1, 3, 4};
  const bool pc = rng.uniform(0.0, 1.0) < 0.5;
  std::vector<int> par = pc ? std::vector<int>{1} : std::vector<int>{1, 2};
  BasisSpec s = fe_test::make_spec(n, m, in, par, true, pc);
  // K >= D is needed for an SVD with D columns.
  while (s.param_dim() < s.input_dim()) ++s.n_params;
  return s;
}

// ---------------------------------------------------------------------------

Outcome c1_orthonormality() {
  double worst = 0.0;
  auto gram_error = [&](const std::vector<int>& freqs, bool constant) {
    const int n = gram_quadrature_nodes(*std::max_element(freqs.begin(), freqs.end()));
    const std::vector<double> t = trapezoid_nodes(n);
    const int dim = LocalBasisOrdering(freqs, constant).size();
    Matrix g = Matrix::Zero(dim, dim);
    for (double x : t) {
      const Vector b = eval_local_basis(freqs, constant, x);
      g += b * b.transpose();
    }
    g /= static_cast<double>(t.size());
    worst = std::max(worst, (g - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff());
    return dim;
  };
  std::vector<int> dims;
  for (int d : {3, 5, 17, 35}) {
    std::vector<int> f;
    for (int w = 1; w <= (d - 1) / 2; ++w) f.push_back(w);
    dims.push_back(gram_error(f, true));
  }
  dims.push_back(gram_error({1}, false));
  dims.push_back(gram_error({1}, true));
  dims.push_back(gram_error({1, 2}, true));
  const bool sizes = dims == std::vector<int>{3, 5, 17, 35, 2, 3, 5};
  return {sizes && worst <= kGramTol, "max |G - I| = " + fmt("%.2e", worst)};
}

Outcome c2_gradients() {
  Rng rng(2002);
  double worst_dense = 0.0, worst_tn = 0.0;
  for (int i = 0; i < 50; ++i) {
    const BasisSpec spec = random_small_spec(rng, true);
    const SvdFactors f = random_dense(spec, rng);
    const auto x = fe_test::uniform_point(spec.n_features, rng);
    const Vector th = fe_test::uniform_vector(spec.n_params, rng);
    const Vector g = gradient(f, spec, sp(x), sp(th));
    const Vector fd = fe_test::central_difference(
        [&](const Vector& t) { return evaluate_model(f, spec, sp(x), sp(t)); }, th);
    worst_dense = std::max(worst_dense, fe_test::max_rel_error(g, fd));
  }
  for (int i = 0; i < 50; ++i) {
    const int n = i % 3 == 0 ? 1 : (i % 3 == 1 ? 2 : 4);
    const BasisSpec spec = fe_test::make_spec(n, 3 + i % 4, {1}, {1}, true, i % 2 == 0);
    TensorizedOptions opt;
    opt.chi = 3 + i % 5;
    const TensorizedModel model = random_tensorized_model(spec, opt, rng);
    const auto x = fe_test::uniform_point(spec.n_features, rng);
    const Vector th = fe_test::uniform_vector(spec.n_params, rng);
    const Vector g = tensorized_gradient(model, sp(x), sp(th));
    const Vector fd = fe_test::central_difference(
        [&](const Vector& t) { return tensorized_eval(model, sp(x), sp(t)); }, th);
    worst_tn = std::max(worst_tn, fe_test::max_rel_error(g, fd));
  }
  return {worst_dense <= kGradTol && worst_tn <= kGradTol,
          "dense " + fmt("%.2e", worst_dense) + ", tensorized " + fmt("%.2e", worst_tn)};
}

Outcome c3_fim() {
  Rng rng(3003);
  double worst = 0.0, worst_tn = 0.0;
  for (int i = 0; i < 50; ++i) {
    const BasisSpec spec = random_small_spec(rng, true);
    const DenseRegressor model(spec, random_dense(spec, rng));
    const Vector th = fe_test::uniform_vector(spec.n_params, rng);
    const Matrix a = fim_analytic(model, sp(th)).f;
    const Matrix q = fim_quadrature(model, sp(th)).f;
    worst = std::max(worst, fe_test::rel_diff(a, q));
  }
  for (int i = 0; i < 20; ++i) {
    const BasisSpec spec = fe_test::make_spec(i % 2 ? 2 : 4, 3, {1}, {1});
    TensorizedOptions opt;
    opt.chi = 4;
    const TensorizedModel model = random_tensorized_model(spec, opt, rng);
    const Vector th = fe_test::uniform_vector(spec.n_params, rng);
    const Matrix t = tensorized_fim(model, sp(th));
    const Matrix d = fim_analytic(densify(model), spec, sp(th)).f;
    worst_tn = std::max(worst_tn, fe_test::rel_diff(t, d));
  }
  return {worst <= kFimTol && worst_tn <= kFimTol,
          "analytic vs quadrature " + fmt("%.2e", worst) + ", tensorized vs dense " +
              fmt("%.2e", worst_tn)};
}

Outcome c4_rank_bound() {
  // D = 4 from frequencies {1, 2} without a constant; M = 8.
  const BasisSpec spec = fe_test::make_spec(1, 8, {1, 2}, {1}, false, true);
  int ok = 0, max_rank = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const DenseRegressor model(spec, random_dense(spec, rng));
    const Vector th = fe_test::uniform_vector(8, rng);
    const int r = numerical_rank(model.fisher(sp(th)), kRankTol);
    max_rank = std::max(max_rank, r);
    if (r <= 4) ++ok;
  }
  // Tensorized: the tree isometry maps D = 25 to a spectrum of length χ = 4.
  const BasisSpec tspec = fe_test::make_spec(2, 8, {1, 2}, {1});
  TensorizedOptions opt;
  opt.chi = 4;
  if (tensorized_spectrum_length(tspec, opt) != 4) return {false, "spectrum length is not chi"};
  int ok_tn = 0, max_rank_tn = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(1000 + seed);
    const TensorizedModel model = random_tensorized_model(tspec, opt, rng);
    const Vector th = fe_test::uniform_vector(8, rng);
    const int r = numerical_rank(tensorized_fim(model, sp(th)), kRankTol);
    max_rank_tn = std::max(max_rank_tn, r);
    if (r <= 4) ++ok_tn;
  }
  return {ok == 50 && ok_tn == 50, "dense " + std::to_string(ok) + "/50 (max rank " +
                                       std::to_string(max_rank) + "), tensorized " +
                                       std::to_string(ok_tn) + "/50 (max rank " +
                                       std::to_string(max_rank_tn) + ")"};
}

Outcome c5_invariances() {
  Rng rng(5005);
  double worst = 0.0;
  const std::int64_t n = kDefaultDatasetSize;
  for (int rep = 0; rep < 5; ++rep) {
    const BasisSpec spec = fe_test::make_spec(1, 5, {1, 2, 3, 4}, {1});
    SvdFactors f = random_dense(spec, rng);
    f.s = decay_spectrum(f.s, 2, 0.7);
    const auto thetas = sample_parameters(5, 40, rng);
    const double base = model_effective_dimension(DenseRegressor(spec, f), thetas, n).d_eff;
    SvdFactors scaled = f;
    scaled.s *= 13.7;
    SvdFactors fresh = f;
    fresh.u = random_orthogonal(f.u.rows(), rng);
    worst = std::max(worst, std::abs(model_effective_dimension(DenseRegressor(spec, scaled), thetas, n).d_eff - base));
    worst = std::max(worst, std::abs(model_effective_dimension(DenseRegressor(spec, fresh), thetas, n).d_eff - base));
  }
  double worst_tn = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const BasisSpec spec = fe_test::make_spec(4, 5, {1}, {1});
    TensorizedOptions opt;
    opt.chi = 6;
    TensorizedModel m = random_tensorized_model(spec, opt, rng);
    m.s = decay_spectrum(m.s, 2, 0.7);
    const auto thetas = sample_parameters(5, 40, rng);
    const double base = model_effective_dimension(TensorizedRegressor(m), thetas, n).d_eff;
    TensorizedModel scaled = m;
    scaled.s *= 0.031;
    TensorizedModel fresh = m;
    if (fresh.u) fresh.u = random_staircase_mpo(spec, rng);
    if (fresh.t) fresh.t = random_tree_isometry(fresh.t->n_leaves, fresh.t->leaf_dim, fresh.t->chi, rng);
    worst_tn = std::max(worst_tn, std::abs(model_effective_dimension(TensorizedRegressor(scaled), thetas, n).d_eff - base));
    worst_tn = std::max(worst_tn, std::abs(model_effective_dimension(TensorizedRegressor(fresh), thetas, n).d_eff - base));
    if (!m.u || !m.t) return {false, "tensorized model lacks U or T"};
  }
  return {worst <= kInvarianceTol && worst_tn <= kInvarianceTol,
          "dense " + fmt("%.2e", worst) + ", tensorized " + fmt("%.2e", worst_tn)};
}

Outcome c6_purity_scaling() {
  RunConfig c = preset_config("ed-vs-purity");
  c.n_realizations = 10;
  if (c.spec.input_dim() != 17 || c.spec.n_params != 7 || c.spec.local_param_dim() != 3 ||
      c.n_param_samples != 150)
    return {false, "preset does not match D=17, M=7, d~=3, 150 samples"};
  const RunResult r = execute(c, 1, quiet);
  if (!r.failures.empty()) return {false, "task failures: " + r.failures.front()};
  std::vector<EdRecord> recs = r.eds;
  std::stable_sort(recs.begin(), recs.end(),
                   [](const EdRecord& a, const EdRecord& b) { return a.purity < b.purity; });
  const double lo = recs.front().purity, hi = recs.back().purity;
  if (!(lo <= 1.0 / 17.0 + 1e-3 && hi >= 0.9))
    return {false, "purity range [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] too narrow"};
  std::vector<double> means;
  const std::size_t n = recs.size();
  for (int q = 0; q < 10; ++q) {
    std::vector<double> ed;
    for (std::size_t i = n * static_cast<std::size_t>(q) / 10; i < n * static_cast<std::size_t>(q + 1) / 10; ++i)
      ed.push_back(recs[i].ed);
    means.push_back(mean(ed));
  }
  bool dec = true;
  for (std::size_t i = 1; i < means.size(); ++i) dec = dec && means[i] < means[i - 1];
  std::ostringstream os;
  os << "purity [" << fmt("%.4f", lo) << ", " << fmt("%.4f", hi) << "], decile ED";
  for (double m : means) os << " " << fmt("%.6f", m);
  return {dec, os.str()};
}

Outcome c7_dm_ratio() {
  const RunConfig c = preset_config("ed-vs-dm-ratio");
  const RunResult r = execute(c, 1, quiet);
  if (!r.failures.empty()) return {false, "task failures: " + r.failures.front()};
  std::map<std::int64_t, std::vector<double>> by_d;
  for (const EdRecord& e : r.eds) by_d[e.input_dim].push_back(e.ed);
  const int m = c.spec.n_params;
  bool nondec = true;
  double prev = -1.0, flat_lo = 1e300, flat_hi = -1e300;
  std::ostringstream os;
  os << "M=" << m << ", mean ED by D:";
  for (const auto& [d, eds] : by_d) {
    const double v = mean(eds);
    os << " " << d << ":" << fmt("%.3f", v);
    if (d < m) {
      nondec = nondec && v >= prev;
      prev = v;
    } else {
      flat_lo = std::min(flat_lo, v);
      flat_hi = std::max(flat_hi, v);
    }
  }
  os << "; spread for D>=M " << fmt("%.3f", flat_hi - flat_lo);
  return {nondec && flat_hi - flat_lo < kFlatSpread, os.str()};
}

Outcome c8_exactness() {
  Rng rng(8008);
  double worst = 0.0, worst_tn = 0.0;
  const std::vector<double> xis{0.5, 1.0, 2.0, 1e6};
  const RunConfig dense_cfg = preset_config("train-compare-dense");
  const DataGenerator gen = make_data_generator(dense_cfg.spec, dense_cfg.rank, rng);
  const std::span<const double> ts(gen.theta_star.data(), gen.theta_star.size());
  std::vector<SvdFactors> models{full_biased_model(gen)};
  for (double xi : xis) models.push_back(cutoff_biased_model(gen, xi));
  for (int i = 0; i < 100; ++i) {
    const auto x = fe_test::uniform_point(gen.spec.n_features, rng);
    const double y = eval_data_generator(gen, sp(x));
    for (const SvdFactors& f : models)
      worst = std::max(worst, std::abs(evaluate_model(f, gen.spec, sp(x), ts) - y));
  }
  const RunConfig tn_cfg = preset_config("train-compare-tensorized");
  const TensorizedGenerator tgen = biased_tensorized_generator(tn_cfg.spec, tn_cfg.rank, tn_cfg.tensor, rng);
  const std::span<const double> tts(tgen.theta_star.data(), tgen.theta_star.size());
  std::vector<TensorizedModel> tmodels{full_biased_model(tgen)};
  for (double xi : xis) tmodels.push_back(cutoff_biased_model(tgen, xi));
  for (int i = 0; i < 100; ++i) {
    const auto x = fe_test::uniform_point(tgen.model.spec.n_features, rng);
    const double y = eval_data_generator(tgen, sp(x));
    for (const TensorizedModel& m : tmodels)
      worst_tn = std::max(worst_tn, std::abs(tensorized_eval(m, sp(x), tts) - y));
  }
  return {worst <= kExactnessTol && worst_tn <= kExactnessTol,
          "max |f(x, theta*) - y(x)|: dense " + fmt("%.2e", worst) + ", tensorized " +
              fmt("%.2e", worst_tn)};
}

// Restart averages (restart = -1) grouped by arm and realization.
std::map<std::pair<Regime, int>, double> realization_means(const RunResult& r, double xi) {
  std::map<std::pair<Regime, int>, double> out;
  for (const ExperimentRecord& e : r.experiments)
    if (e.restart == -1 && e.xi == xi) out[{e.regime, e.realization}] = e.delta_mse;
  return out;
}

struct SignSummary {
  double mean = 0.0;
  int agreeing = 0;
  int total = 0;
};

SignSummary sign_summary(const std::map<std::pair<Regime, int>, double>& m, Regime arm, int sign) {
  SignSummary s;
  std::vector<double> v;
  for (const auto& [key, d] : m)
    if (key.first == arm) {
      v.push_back(d);
      ++s.total;
      if ((sign > 0 && d > 0.0) || (sign < 0 && d < 0.0)) ++s.agreeing;
    }
  s.mean = mean(v);
  return s;
}

Outcome c9_dense_sign() {
  RunConfig c = preset_config("train-compare-dense");
  c.n_realizations = 10;
  c.n_restarts = 10;
  // Locate the grid point with the largest ED gap; EDs do not depend on training.
  RunConfig probe = c;
  probe.n_restarts = 1;
  probe.training.epochs = 1;
  const RunResult pr = execute(probe, 1, quiet);
  std::map<double, std::vector<double>> gap;
  for (const ExperimentRecord& e : pr.experiments)
    if (e.restart == -1 && e.regime == Regime::biased) gap[e.xi].push_back(e.delta_ed);
  double best_xi = 0.0, best_gap = -1e300;
  for (const auto& [xi, g] : gap)
    if (mean(g) > best_gap) {
      best_gap = mean(g);
      best_xi = xi;
    }
  c.xis = {best_xi};
  const RunResult r = execute(c, 1, quiet);
  if (!r.failures.empty()) return {false, "task failures: " + r.failures.front()};
  const auto m = realization_means(r, best_xi);
  const SignSummary b = sign_summary(m, Regime::biased, +1);
  const SignSummary u = sign_summary(m, Regime::unbiased, -1);
  std::ostringstream os;
  os << "xi=" << best_xi << " (mean dED " << fmt("%.3f", best_gap) << "); biased mean dMSE "
     << fmt("%.3e", b.mean) << " positive in " << b.agreeing << "/" << b.total
     << "; unbiased mean dMSE " << fmt("%.3e", u.mean) << " negative in " << u.agreeing << "/"
     << u.total;
  return {b.mean > 0.0 && u.mean < 0.0 && b.agreeing >= 8 && u.agreeing >= 8 && b.total == 10 &&
              u.total == 10,
          os.str()};
}

Outcome c10_crossover() {
  // Preset scale: 10 realizations x 30 restarts per epsilon.
  const RunConfig c = preset_config("train-compare-partial");
  const RunResult r = execute(c, 1, quiet);
  if (!r.failures.empty()) return {false, "task failures: " + r.failures.front()};
  std::vector<std::pair<double, double>> pts;  // δ_data, ΔMSE
  for (const ExperimentRecord& e : r.experiments)
    if (e.restart == -1) pts.emplace_back(e.delta_data, e.delta_mse);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> qm;
  const std::size_t n = pts.size();
  for (std::size_t q = 0; q < 4; ++q) {
    std::vector<double> v;
    for (std::size_t i = n * q / 4; i < n * (q + 1) / 4; ++i) v.push_back(pts[i].second);
    qm.push_back(mean(v));
  }
  bool dec = n >= 8;
  for (std::size_t i = 1; i < qm.size(); ++i) dec = dec && qm[i] < qm[i - 1];
  std::ostringstream os;
  os << "delta_data [" << fmt("%.2e", pts.front().first) << ", " << fmt("%.2e", pts.back().first)
     << "], quartile mean dMSE";
  for (double v : qm) os << " " << fmt("%.3e", v);
  return {dec, os.str()};
}

Outcome c11_tensorized_sign() {
  RunConfig c = preset_config("train-compare-tensorized");
  c.n_realizations = 3;
  c.n_restarts = 3;
  if (c.spec.n_features != 4) return {false, "preset is not N=4"};
  const RunResult r = execute(c, 1, quiet);
  if (!r.failures.empty()) return {false, "task failures: " + r.failures.front()};
  const auto m = realization_means(r, c.xis.front());
  const SignSummary b = sign_summary(m, Regime::biased, +1);
  const SignSummary u = sign_summary(m, Regime::unbiased, -1);
  std::ostringstream os;
  os << "biased mean dMSE " << fmt("%.3e", b.mean) << " (" << b.agreeing << "/" << b.total
     << " positive); unbiased mean dMSE " << fmt("%.3e", u.mean) << " (" << u.agreeing << "/"
     << u.total << " negative)";
  return {b.mean > 0.0 && u.mean < 0.0, os.str()};
}

// Mean biased ΔMSE per scan point, keyed by the swept dimension.
std::map<std::int64_t, double> scan_means(const RunResult& r, bool by_m) {
  std::map<std::int64_t, std::vector<double>> acc;
  for (const ExperimentRecord& e : r.experiments)
    if (e.restart == -1 && e.regime == Regime::biased)
      acc[by_m ? e.n_params : e.input_dim].push_back(e.delta_mse);
  std::map<std::int64_t, double> out;
  for (const auto& [k, v] : acc) out[k] = mean(v);
  return out;
}

Outcome c12_scans() {
  RunConfig sm = preset_config("scan-m");
  sm.spec.input_freqs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};  // D = 21
  sm.scan = {8, 21, 40};
  sm.n_realizations = 6;
  sm.n_restarts = 3;
  sm.unbiased_arm = false;
  RunConfig sd = preset_config("scan-d");
  sd.spec.n_params = 20;
  sd.tensor.chi = 50;
  sd.scan = {9, 21, 41};
  sd.n_realizations = 6;
  sd.n_restarts = 3;
  sd.unbiased_arm = false;
  const RunResult rm = execute(sm, 1, quiet);
  const RunResult rd = execute(sd, 1, quiet);
  if (!rm.failures.empty()) return {false, "scan-m failures: " + rm.failures.front()};
  if (!rd.failures.empty()) return {false, "scan-d failures: " + rd.failures.front()};
  const auto mm = scan_means(rm, true);
  const auto md = scan_means(rd, false);
  if (mm.size() != 3 || md.size() != 3) return {false, "missing scan points"};
  // scan-m: under (M=8) > near (M=21), under > over (M=40), plateau positive.
  const double mu = mm.at(8), mn = mm.at(21), mo = mm.at(40);
  // scan-d: over (D=9) < near (D=21), over < under (D=41), plateau positive.
  const double du = md.at(41), dn = md.at(21), dov = md.at(9);
  const bool ok_m = mu > mn && mu > mo && mn > 0.0 && mo > 0.0;
  const bool ok_d = dov < dn && dov < du && dn > 0.0 && du > 0.0;
  std::ostringstream os;
  os << "D=21, M 8/21/40: " << fmt("%.3e", mu) << " " << fmt("%.3e", mn) << " " << fmt("%.3e", mo)
     << "; M=20, D 9/21/41: " << fmt("%.3e", dov) << " " << fmt("%.3e", dn) << " "
     << fmt("%.3e", du);
  return {ok_m && ok_d, os.str()};
}

Outcome c13_rmt() {
  Rng rng(1313);
  const Vector s = Vector::Constant(5, 1.0 / std::sqrt(5.0));
  const int samples = 2000;
  double worst_ratio = 1.0;
  std::vector<double> offdiag;
  for (int m : {4, 6}) {
    const BasisSpec spec = fe_test::make_spec(1, m, {1, 2}, {1});
    const Vector th = fe_test::uniform_vector(m, rng);
    const RmtStatistics r = rmt_statistics(s, spec, sp(th), samples, rng);
    for (Index j = 0; j < m; ++j) {
      const double ratio = r.mean(j, j) / r.predicted_mean(j, j);
      worst_ratio = std::max({worst_ratio, ratio, 1.0 / ratio});
    }
    offdiag.push_back(r.mean_offdiag);
  }
  const double d2 = 9.0;  // d~² for d~ = 3
  const double suppression = offdiag[0] / offdiag[1];
  const bool mean_ok = worst_ratio <= kRmtFactor;
  const bool off_ok = suppression >= d2 / kRmtFactor && suppression <= d2 * kRmtFactor;
  return {mean_ok && off_ok,
          "diagonal mean within factor " + fmt("%.3f", worst_ratio) +
              " of closed form; off-diagonal |mean| M=4 " + fmt("%.2e", offdiag[0]) + ", M=6 " +
              fmt("%.2e", offdiag[1]) + ", suppression " + fmt("%.2f", suppression) +
              " (wanted 9 within factor 3)"};
}

Outcome c14_layout_counts() {
  CircuitLayout full;
  full.n_qubits = 4;
  full.n_layers = 2;
  full.entangling_depth = 2;
  const BasisCounts bc = admissible_basis_counts(full);
  CircuitLayout d0 = full;
  d0.entangling_depth = 0;
  const BasisCounts b0 = admissible_basis_counts(d0);
  bool per_qubit = true;
  for (auto v : b0.input_per_qubit) per_qubit = per_qubit && v == 2 * full.n_layers + 1;
  std::ostringstream os;
  os << "|B_X|=" << bc.input_union << ", |B_Theta|=" << bc.param_union << ", M=" << full.n_params()
     << ", depth-0 per-qubit |B_X|=" << b0.input_per_qubit.front();
  return {bc.input_union == 625 && bc.param_union == 6561 && full.n_params() == 8 && per_qubit,
          os.str()};
}

RunConfig tiny(const std::string& name) {
  RunConfig c = preset_config(name);
  c.n_realizations = 2;
  c.n_restarts = 2;
  c.n_param_samples = 8;
  c.training.epochs = 3;
  if (name == "ed-vs-purity") c.xis = {0.5, 5.0, 50.0};
  if (name == "ed-vs-dm-ratio") c.scan = {3, 13};
  if (name == "train-compare-partial") c.epsilons = {0.0, 0.3};
  if (name == "train-compare-tensorized") {
    c.spec.n_params = 6;
    c.tensor.chi = 8;
    c.training.n_train = 48;
  }
  if (name == "scan-m") c.scan = {4, 8};
  if (name == "scan-d") {
    c.spec.n_params = 8;
    c.tensor.chi = 10;
    c.scan = {5, 9};
  }
  if (name == "qnn-layouts") {
    c.n_qubits = 3;
    c.n_layers = 1;
  }
  return c;
}

Outcome c15_determinism() {
  const auto root = std::filesystem::temp_directory_path() / "fourier_ed_acceptance";
  std::filesystem::remove_all(root);
  int same = 0, total = 0;
  std::string bad;
  for (const std::string& name : preset_names()) {
    const RunConfig c = tiny(name);
    std::string files[2];
    for (int k = 0; k < 2; ++k) {
      const auto dir = root / (name + "_" + std::to_string(k));
      const RunResult r = execute(c, k + 1, quiet);
      write_run(c, r, dir.string(), 0.0);
      files[k] = read_text_file((dir / "records.csv").string());
    }
    ++total;
    if (!files[0].empty() && files[0] == files[1]) ++same;
    else bad += " " + name;
  }
  std::filesystem::remove_all(root);
  return {same == total, std::to_string(same) + "/" + std::to_string(total) +
                             " presets byte-identical" + (bad.empty() ? "" : ", differing:" + bad)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "basis orthonormality", c1_orthonormality},
      {2, "gradient correctness", c2_gradients},
      {3, "FIM equivalence", c3_fim},
      {4, "FIM rank bound", c4_rank_bound},
      {5, "ED invariances", c5_invariances},
      {6, "ED decreases with purity", c6_purity_scaling},
      {7, "ED versus D/M", c7_dm_ratio},
      {8, "biased exactness", c8_exactness},
      {9, "dense training sign pattern", c9_dense_sign},
      {10, "partial-bias crossover", c10_crossover},
      {11, "tensorized training sign pattern", c11_tensorized_sign},
      {12, "M and D scan trends", c12_scans},
      {13, "random-matrix FIM scalings", c13_rmt},
      {14, "QNN layout counts", c14_layout_counts},
      {15, "run determinism", c15_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s  %s: %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
