#include "fourier_ed/presets.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "fourier_ed/fim.hpp"
#include "fourier_ed/modelgen.hpp"
#include "fourier_ed/qnn_lightcone.hpp"
#include "fourier_ed/structure.hpp"
#include "fourier_ed/tensornet.hpp"

namespace fourier_ed {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

std::string RunResult::csv() const {
  if (table == "ed") return write_csv(eds);
  if (table == "layout") return write_csv(layouts);
  return write_csv(experiments);
}

namespace {

// Per-task output; merged in task order after the pool finishes.
struct TaskOut {
  std::vector<ExperimentRecord> experiments;
  std::vector<EdRecord> eds;
  std::vector<LayoutRecord> layouts;
  std::vector<std::pair<std::string, std::string>> spectra;
  std::string error;
  bool ok = false;
};

struct Task {
  int realization = 0;
  int point = 0;  // ε index, scan index or layout index
  std::string label;
};

std::string spectrum_csv(const std::vector<std::pair<double, Vector>>& rows) {
  std::string out = "# schema=1 table=spectrum\nxi,sigma,s\n";
  for (const auto& [xi, s] : rows)
    for (Index i = 0; i < s.size(); ++i)
      out += format_real(xi) + "," + std::to_string(i + 1) + "," + format_real(s[i]) + "\n";
  return out;
}

std::string spectrum_name(std::uint64_t seed) { return "spectrum_" + std::to_string(seed) + ".csv"; }

PairedOptions paired_options(const RunConfig& c, int realization, double epsilon) {
  PairedOptions o;
  o.xis = c.xis;
  o.epsilon = epsilon;
  o.n_restarts = c.n_restarts;
  o.training = c.training;
  o.n_param_samples = c.n_param_samples;
  o.dataset_size = c.dataset_size;
  o.biased_arm = c.biased_arm;
  o.unbiased_arm = c.unbiased_arm;
  o.master_seed = c.master_seed;
  o.realization = realization;
  return o;
}

void run_ed_purity(const RunConfig& c, const Task& t, TaskOut& out) {
  Rng rng(substream_seed(c.master_seed, static_cast<std::uint64_t>(t.realization)));
  const BasisSpec& spec = c.spec;
  SvdFactors f = svd_decompose(random_structure_constants(spec, rng));
  const Index d = f.s.size();
  const Vector flat = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  const std::vector<Vector> thetas = sample_parameters(spec.n_params, c.n_param_samples, rng);
  std::vector<std::pair<double, Vector>> dump;
  for (double xi : c.xis) {
    f.s = decay_spectrum(flat, c.rank, xi);
    const DenseRegressor model(spec, f);
    EdRecord r;
    r.master_seed = c.master_seed;
    r.realization = t.realization;
    r.n_params = spec.n_params;
    r.input_dim = spec.input_dim();
    r.d_tilde = spec.local_param_dim();
    r.n_param_samples = c.n_param_samples;
    r.dataset_size = c.dataset_size;
    r.xi = xi;
    r.purity = purity(f.s);
    r.ed = model_effective_dimension(model, thetas, c.dataset_size).d_eff;
    out.eds.push_back(r);
    dump.emplace_back(xi, f.s);
  }
  if (c.dump_spectra) out.spectra.emplace_back(spectrum_name(rng.seed()), spectrum_csv(dump));
}

void run_ed_ratio(const RunConfig& c, const BasisSpec& spec, const Task& t, TaskOut& out) {
  Rng rng(substream_seed(c.master_seed, static_cast<std::uint64_t>(t.realization),
                         static_cast<std::uint64_t>(t.point)));
  const SvdFactors f = svd_decompose(random_structure_constants(spec, rng));
  const DenseRegressor model(spec, f);
  EdRecord r;
  r.master_seed = c.master_seed;
  r.realization = t.realization;
  r.n_params = spec.n_params;
  r.input_dim = spec.input_dim();
  r.d_tilde = spec.local_param_dim();
  r.n_param_samples = c.n_param_samples;
  r.dataset_size = c.dataset_size;
  r.purity = purity(f.s);
  r.ed = model_effective_dimension(model, c.n_param_samples, c.dataset_size, rng).d_eff;
  out.eds.push_back(r);
  if (c.dump_spectra) out.spectra.emplace_back(spectrum_name(rng.seed()), spectrum_csv({{0.0, f.s}}));
}

void run_training(const RunConfig& c, const BasisSpec& spec, double epsilon, const Task& t,
                  std::uint64_t gen_key, TaskOut& out) {
  // The generator depends on (realization, gen_key) only, so every ε of a
  // realization perturbs the same generator.
  Rng gen_rng(substream_seed(c.master_seed, static_cast<std::uint64_t>(t.realization), gen_key));
  Rng rng(substream_seed(c.master_seed, static_cast<std::uint64_t>(t.realization), gen_key,
                         1u + static_cast<std::uint64_t>(t.point)));
  const PairedOptions opt = paired_options(c, t.realization, epsilon);
  Vector s;
  if (c.family == ModelFamily::dense) {
    const DataGenerator gen = make_data_generator(spec, c.rank, gen_rng);
    out.experiments = paired_experiment(gen, opt, rng);
    s = gen.factors.s;
  } else {
    const TensorizedGenerator gen = biased_tensorized_generator(spec, c.rank, c.tensor, gen_rng);
    out.experiments = paired_experiment(gen, c.tensor, opt, rng);
    s = gen.model.s;
  }
  if (c.dump_spectra) {
    std::vector<std::pair<double, Vector>> dump{{0.0, s}};
    for (double xi : c.xis) dump.emplace_back(xi, decay_spectrum(s, c.rank, xi));
    out.spectra.emplace_back(spectrum_name(gen_rng.seed()), spectrum_csv(dump));
  }
}

void run_layout(const RunConfig& c, const Task& t, TaskOut& out) {
  CircuitLayout l;
  l.n_qubits = c.n_qubits;
  l.n_layers = c.n_layers;
  l.entangling_depth = c.entangling_depths[static_cast<std::size_t>(t.point)];
  l.measurement_depth = c.measurement_depth;
  const BasisCounts counts = admissible_basis_counts(l);
  const std::vector<int> measured = l.measured();
  LayoutRecord base;
  base.n_qubits = l.n_qubits;
  base.n_layers = l.n_layers;
  base.entangling_depth = l.entangling_depth;
  base.measurement_depth = l.measurement_depth;
  for (std::size_t q = 0; q < measured.size(); ++q) {
    LayoutRecord r = base;
    r.qubit = measured[q];
    r.input_count = counts.input_per_qubit[q];
    r.param_count = counts.param_per_qubit[q];
    out.layouts.push_back(r);
  }
  LayoutRecord u = base;
  u.qubit = -1;
  u.input_count = counts.input_union;
  u.param_count = counts.param_union;
  const BasisSpec spec = spec_for_layout(l);
  if (dense_feasible(spec)) {
    double sum = 0.0;
    for (int r = 0; r < c.n_realizations; ++r) {
      Rng rng(substream_seed(c.master_seed, static_cast<std::uint64_t>(r),
                             static_cast<std::uint64_t>(t.point)));
      sum += purity(svd_decompose(masked_structure_constants(l, spec, rng)).s);
    }
    u.purity_mean = sum / c.n_realizations;
  } else {
    u.purity_mean = std::nan("");
  }
  out.layouts.push_back(u);
}

}  // namespace

RunResult execute(const RunConfig& c, int jobs, const LogFn& log) {
  check_config(c);
  const std::vector<BasisSpec> specs = run_specs(c);
  const std::string& p = c.preset;

  std::vector<Task> tasks;
  auto label = [](int r, const std::string& what, int k) {
    return "realization " + std::to_string(r) + (what.empty() ? "" : ", " + what + " " + std::to_string(k));
  };
  if (p == "qnn-layouts") {
    for (std::size_t k = 0; k < c.entangling_depths.size(); ++k)
      tasks.push_back({0, static_cast<int>(k),
                       "entangling depth " + std::to_string(c.entangling_depths[k])});
  } else if (p == "ed-vs-purity") {
    for (int r = 0; r < c.n_realizations; ++r) tasks.push_back({r, 0, label(r, "", 0)});
  } else if (p == "train-compare-dense" || p == "train-compare-partial" ||
             p == "train-compare-tensorized") {
    for (int r = 0; r < c.n_realizations; ++r)
      for (std::size_t k = 0; k < c.epsilons.size(); ++k)
        tasks.push_back({r, static_cast<int>(k), label(r, "epsilon index", static_cast<int>(k))});
  } else {
    for (int r = 0; r < c.n_realizations; ++r)
      for (std::size_t k = 0; k < specs.size(); ++k)
        tasks.push_back({r, static_cast<int>(k), label(r, "scan point", c.scan[k])});
  }

  std::vector<TaskOut> outs(tasks.size());
  std::mutex log_mu;
  std::atomic<int> done{0};
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    TaskOut& out = outs[static_cast<std::size_t>(i)];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (p == "ed-vs-purity") {
        run_ed_purity(c, t, out);
      } else if (p == "ed-vs-dm-ratio") {
        run_ed_ratio(c, specs[static_cast<std::size_t>(t.point)], t, out);
      } else if (p == "qnn-layouts") {
        run_layout(c, t, out);
      } else if (p == "scan-m" || p == "scan-d") {
        Task shifted = t;
        shifted.point = 0;
        run_training(c, specs[static_cast<std::size_t>(t.point)], c.epsilons.front(), shifted,
                     100u + static_cast<std::uint64_t>(t.point), out);
      } else {
        run_training(c, specs.front(), c.epsilons[static_cast<std::size_t>(t.point)], t, 0u, out);
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out = TaskOut{};
      out.error = t.label + ": " + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) {
      std::lock_guard<std::mutex> lock(log_mu);
      std::ostringstream os;
      os << "[" << ++done << "/" << tasks.size() << "] " << t.label
         << (out.ok ? " done" : " FAILED: " + out.error) << " (" << secs << " s)";
      log(os.str());
    }
  });

  RunResult res;
  res.table = p == "qnn-layouts" ? "layout" : (p.rfind("ed-", 0) == 0 ? "ed" : "experiment");
  res.n_tasks = static_cast<int>(tasks.size());
  for (TaskOut& o : outs) {
    if (!o.ok) {
      res.failures.push_back(o.error);
      continue;
    }
    res.experiments.insert(res.experiments.end(), o.experiments.begin(), o.experiments.end());
    res.eds.insert(res.eds.end(), o.eds.begin(), o.eds.end());
    res.layouts.insert(res.layouts.end(), o.layouts.begin(), o.layouts.end());
    res.spectra.insert(res.spectra.end(), o.spectra.begin(), o.spectra.end());
  }
  return res;
}

int write_run(const RunConfig& cfg, const RunResult& res, const std::string& out_dir,
              double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string csv = res.csv();
  write_text_file((fs::path(out_dir) / "records.csv").string(), csv);
  Manifest m;
  m.preset = cfg.preset;
  m.config_json = config_to_json(cfg);
  m.master_seed = cfg.master_seed;
  m.n_tasks = res.n_tasks;
  m.n_failed = static_cast<int>(res.failures.size());
  m.failures = res.failures;
  m.wall_seconds = wall_seconds;
  m.files.push_back("records.csv");
  for (const auto& [name, text] : res.spectra) {
    write_text_file((fs::path(out_dir) / name).string(), text);
    m.files.push_back(name);
  }
  m.records_hash = git_blob_hash(csv);
  write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest_json(m));
  return res.too_many_failures() ? 1 : 0;
}

}  // namespace fourier_ed
