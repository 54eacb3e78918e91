#include "fourier_ed/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "fourier_ed/fim.hpp"
#include "fourier_ed/qnn_lightcone.hpp"
#include "fourier_ed/structure.hpp"

namespace fourier_ed {

using nlohmann::json;

std::string to_string(ModelFamily f) { return f == ModelFamily::dense ? "dense" : "tensorized"; }

namespace {

std::vector<int> range_freqs(int hi) {
  std::vector<int> f(static_cast<std::size_t>(hi));
  std::iota(f.begin(), f.end(), 1);
  return f;
}

const std::vector<std::string> kPresets{
    "ed-vs-purity",   "ed-vs-dm-ratio", "train-compare-dense", "train-compare-partial",
    "train-compare-tensorized", "scan-m", "scan-d", "qnn-layouts"};

}  // namespace

const std::vector<std::string>& preset_names() { return kPresets; }

bool is_preset(const std::string& name) {
  return std::find(kPresets.begin(), kPresets.end(), name) != kPresets.end();
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  // Shared single-feature setup: Ω = {1..8}, d̃ = 3, M = 7.
  c.spec.n_features = 1;
  c.spec.input_freqs = range_freqs(8);
  c.spec.param_freqs = {1};
  c.spec.n_params = 7;
  c.training.n_train = 25;
  c.training.batch_size = 5;

  if (name == "ed-vs-purity") {
    c.rank = 1;
    // Decay lengths giving purities log-spaced from 1/17 to 0.95 (R = 1, D = 17).
    c.xis = {1000.0, 21.3, 14.0, 10.5, 8.33, 6.77, 5.55, 4.57,
             3.77,   3.1,  2.53, 2.05, 1.64, 1.27, 0.935, 0.546};
    c.n_realizations = 50;
    c.biased_arm = c.unbiased_arm = false;
  } else if (name == "ed-vs-dm-ratio") {
    c.spec.param_constant = false;  // d̃ = 2
    c.spec.n_params = 12;
    c.scan = {3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25};
    c.n_realizations = 50;
    c.biased_arm = c.unbiased_arm = false;
  } else if (name == "train-compare-dense") {
    c.rank = 6;
    c.xis = {8.0, 2.0, 1.0, 0.5, 0.25};
    c.n_realizations = 10;
    c.n_restarts = 30;
  } else if (name == "train-compare-partial") {
    c.rank = 6;
    c.xis = {0.25};
    c.epsilons = {0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
    c.n_realizations = 10;
    c.n_restarts = 30;
    c.unbiased_arm = false;
  } else if (name == "train-compare-tensorized") {
    c.family = ModelFamily::tensorized;
    c.spec.n_features = 4;
    c.spec.input_freqs = range_freqs(3);
    c.spec.n_params = 24;
    c.rank = 2;
    c.tensor.chi = 30;
    c.xis = {0.5};
    c.n_param_samples = 200;
    c.training.n_train = 1296;
    c.training.batch_size = 12;
    c.n_realizations = 10;
    c.n_restarts = 7;
  } else if (name == "scan-m") {
    c.family = ModelFamily::tensorized;
    c.spec.input_freqs = range_freqs(12);
    c.rank = 3;
    c.tensor.chi = 50;
    c.scan = {4, 6, 8, 12, 16, 20, 25, 30, 40, 50};
    c.xis = {0.5};
    c.n_param_samples = 200;
    c.n_realizations = 30;
    c.n_restarts = 30;
  } else if (name == "scan-d") {
    c.family = ModelFamily::tensorized;
    c.spec.n_params = 50;
    c.rank = 2;
    c.tensor.chi = 120;
    c.scan = {5, 9, 15, 21, 31, 41, 51, 61, 81, 101};
    c.xis = {0.5};
    c.n_param_samples = 200;
    c.n_realizations = 30;
    c.n_restarts = 30;
  } else if (name == "qnn-layouts") {
    c.n_qubits = 4;
    c.n_layers = 2;
    c.entangling_depths = {0, 1, 2};
    c.measurement_depth = 0;
    c.n_realizations = 5;
    c.biased_arm = c.unbiased_arm = false;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

// ------------------------------------------------------------------ json

namespace {

[[noreturn]] void field_error(const std::string& key, const std::string& what) {
  throw ConfigError("field '" + key + "': " + what);
}

template <class T>
T get_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) field_error(key, "expected an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
    if (v.get<std::int64_t>() < 0) field_error(key, "expected a non-negative integer");
    return static_cast<T>(v.get<std::int64_t>());
  } else {
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
      field_error(key, "integer out of range");
    return static_cast<T>(x);
  }
}

double get_real(const json& v, const std::string& key) {
  if (!v.is_number()) field_error(key, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) field_error(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) field_error(key, "expected a string");
  return v.get<std::string>();
}

template <class T, class F>
std::vector<T> get_list(const json& v, const std::string& key, F elem) {
  if (!v.is_array()) field_error(key, "expected a list");
  std::vector<T> out;
  for (const json& e : v) out.push_back(elem(e, key));
  return out;
}

// One table drives parsing and echoing so the two cannot drift apart.
struct Field {
  const char* key;
  void (*set)(RunConfig&, const json&, const std::string&);
  json (*get)(const RunConfig&);
};

#define FE_INT(name, member, type)                                                         \
  Field {                                                                                  \
    name, [](RunConfig& c, const json& v, const std::string& k) { c.member = get_int<type>(v, k); }, \
        [](const RunConfig& c) { return json(c.member); }                                  \
  }
#define FE_REAL(name, member)                                                              \
  Field {                                                                                  \
    name, [](RunConfig& c, const json& v, const std::string& k) { c.member = get_real(v, k); }, \
        [](const RunConfig& c) { return json(c.member); }                                  \
  }
#define FE_BOOL(name, member)                                                              \
  Field {                                                                                  \
    name, [](RunConfig& c, const json& v, const std::string& k) { c.member = get_bool(v, k); }, \
        [](const RunConfig& c) { return json(c.member); }                                  \
  }
#define FE_INTS(name, member)                                                              \
  Field {                                                                                  \
    name,                                                                                  \
        [](RunConfig& c, const json& v, const std::string& k) {                            \
          c.member = get_list<int>(v, k, get_int<int>);                                    \
        },                                                                                 \
        [](const RunConfig& c) { return json(c.member); }                                  \
  }
#define FE_REALS(name, member)                                                             \
  Field {                                                                                  \
    name,                                                                                  \
        [](RunConfig& c, const json& v, const std::string& k) {                            \
          c.member = get_list<double>(v, k, get_real);                                     \
        },                                                                                 \
        [](const RunConfig& c) { return json(c.member); }                                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      Field{"preset",
            [](RunConfig& c, const json& v, const std::string& k) { c.preset = get_string(v, k); },
            [](const RunConfig& c) { return json(c.preset); }},
      Field{"family",
            [](RunConfig& c, const json& v, const std::string& k) {
              const std::string s = get_string(v, k);
              if (s == "dense") c.family = ModelFamily::dense;
              else if (s == "tensorized") c.family = ModelFamily::tensorized;
              else field_error(k, "expected \"dense\" or \"tensorized\", got \"" + s + "\"");
            },
            [](const RunConfig& c) { return json(to_string(c.family)); }},
      FE_INT("n_features", spec.n_features, int),
      FE_INT("n_params", spec.n_params, int),
      FE_INTS("input_freqs", spec.input_freqs),
      FE_INTS("param_freqs", spec.param_freqs),
      FE_BOOL("input_constant", spec.input_constant),
      FE_BOOL("param_constant", spec.param_constant),
      FE_INT("rank", rank, int),
      FE_REALS("epsilons", epsilons),
      FE_REALS("xis", xis),
      FE_INT("n_param_samples", n_param_samples, int),
      FE_INT("dataset_size", dataset_size, std::int64_t),
      FE_REAL("learning_rate", training.learning_rate),
      FE_REAL("adam_beta1", training.adam_beta1),
      FE_REAL("adam_beta2", training.adam_beta2),
      FE_REAL("adam_eps", training.adam_eps),
      FE_INT("epochs", training.epochs, int),
      FE_INT("batch_size", training.batch_size, int),
      FE_INT("n_train", training.n_train, int),
      FE_BOOL("biased_arm", biased_arm),
      FE_BOOL("unbiased_arm", unbiased_arm),
      FE_INT("chi", tensor.chi, int),
      FE_INT("n_cols", tensor.n_cols, int),
      FE_BOOL("use_mpo", tensor.use_mpo),
      FE_BOOL("use_tree", tensor.use_tree),
      FE_INT("master_seed", master_seed, std::uint64_t),
      FE_INT("n_realizations", n_realizations, int),
      FE_INT("n_restarts", n_restarts, int),
      FE_INTS("scan", scan),
      FE_INT("n_qubits", n_qubits, int),
      FE_INT("n_layers", n_layers, int),
      FE_INTS("entangling_depths", entangling_depths),
      FE_INT("measurement_depth", measurement_depth, int),
      Field{"output",
            [](RunConfig& c, const json& v, const std::string& k) { c.output = get_string(v, k); },
            [](const RunConfig& c) { return json(c.output); }},
      FE_BOOL("dump_spectra", dump_spectra),
  };
  return f;
}

#undef FE_INT
#undef FE_REAL
#undef FE_BOOL
#undef FE_INTS
#undef FE_REALS

const Field* find_field(const std::string& key) {
  for (const Field& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

void apply_object(RunConfig& cfg, const json& obj) {
  if (!obj.is_object()) throw ConfigError("configuration must be a JSON object");
  if (auto it = obj.find("preset"); it != obj.end()) {
    const std::string name = get_string(*it, "preset");
    if (!is_preset(name)) field_error("preset", "unknown preset '" + name + "'");
    if (name != cfg.preset) cfg = preset_config(name);
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const Field* f = find_field(it.key());
    if (f == nullptr) throw ConfigError("unknown key '" + it.key() + "'");
    f->set(cfg, it.value(), it.key());
  }
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1, start = 0;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
      start = i + 1;
    } else {
      ++col;
    }
  }
  const std::size_t end = text.find('\n', start);
  std::ostringstream os;
  os << "line " << line << ", column " << col << ": "
     << text.substr(start, end == std::string::npos ? std::string::npos : end - start);
  return os.str();
}

}  // namespace

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error at " + line_context(text, e.byte) + "\n  " + e.what());
  }
  RunConfig cfg = base;
  apply_object(cfg, obj);
  return cfg;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json obj;
  obj[key] = value;
  apply_object(cfg, obj);
}

std::string config_to_json(const RunConfig& cfg, int indent) {
  json obj = json::object();
  for (const Field& f : fields()) obj[f.key] = f.get(cfg);
  return obj.dump(indent);
}

// ------------------------------------------------------------ validation

void check_config(const RunConfig& c) {
  auto wrap = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      field_error(key, e.what());
    }
  };
  if (!is_preset(c.preset)) field_error("preset", "unknown preset '" + c.preset + "'");
  wrap("spec", [&] { c.spec.validate(); });
  wrap("training", [&] { c.training.validate(); });
  if (c.rank < 1) field_error("rank", "must be >= 1");
  if (c.xis.empty()) field_error("xis", "must not be empty");
  for (double x : c.xis)
    if (!(x > 0.0)) field_error("xis", "every entry must be > 0");
  if (c.epsilons.empty()) field_error("epsilons", "must not be empty");
  for (double e : c.epsilons)
    if (!(e >= 0.0)) field_error("epsilons", "every entry must be >= 0");
  if (c.n_param_samples < 1) field_error("n_param_samples", "must be >= 1");
  if (!(ed_constant(c.dataset_size) > 1.0)) field_error("dataset_size", "must be at least 19");
  if (c.n_realizations < 1) field_error("n_realizations", "must be >= 1");
  if (c.n_restarts < 1) field_error("n_restarts", "must be >= 1");
  if (c.tensor.chi < 1) field_error("chi", "must be >= 1");
  if (c.tensor.n_cols < 0) field_error("n_cols", "must be >= 0");

  const bool training = c.preset.rfind("train-", 0) == 0 || c.preset.rfind("scan-", 0) == 0;
  if (training && !c.biased_arm && !c.unbiased_arm)
    field_error("biased_arm", "at least one of biased_arm / unbiased_arm must be true");
  const bool scanned = c.preset == "ed-vs-dm-ratio" || c.preset == "scan-m" || c.preset == "scan-d";
  if (scanned && c.scan.empty()) field_error("scan", "must not be empty for " + c.preset);
  if (c.preset == "ed-vs-dm-ratio" || c.preset == "scan-d") {
    for (int dim : c.scan)
      if (dim < 3 || dim % 2 == 0) field_error("scan", "D values must be odd and >= 3");
    if (c.spec.n_features != 1) field_error("n_features", c.preset + " sweeps D with one feature");
  }
  if (c.preset == "scan-m")
    for (int m : c.scan)
      if (m < 1) field_error("scan", "M values must be >= 1");
  if (c.preset == "qnn-layouts") {
    if (c.entangling_depths.empty()) field_error("entangling_depths", "must not be empty");
    for (int depth : c.entangling_depths) {
      CircuitLayout l;
      l.n_qubits = c.n_qubits;
      l.n_layers = c.n_layers;
      l.entangling_depth = depth;
      l.measurement_depth = c.measurement_depth;
      wrap("entangling_depths", [&] { l.validate(); });
    }
  }
}

std::vector<BasisSpec> run_specs(const RunConfig& c) {
  if (c.preset == "qnn-layouts") {
    CircuitLayout l;
    l.n_qubits = c.n_qubits;
    l.n_layers = c.n_layers;
    l.measurement_depth = c.measurement_depth;
    return {spec_for_layout(l)};
  }
  if (c.scan.empty() || c.preset.rfind("ed-vs-purity", 0) == 0) return {c.spec};
  std::vector<BasisSpec> out;
  for (int v : c.scan) {
    BasisSpec s = c.spec;
    if (c.preset == "scan-m") {
      s.n_params = v;
    } else {
      s.input_freqs = range_freqs((v - 1) / 2);
      s.input_constant = true;
    }
    out.push_back(s);
  }
  return out;
}

namespace {

std::string dim_string(int base, int exponent, double log10v) {
  std::ostringstream os;
  if (log10v < 9.0) {
    os << static_cast<std::int64_t>(std::llround(std::pow(10.0, log10v)));
  } else {
    os << base << "^" << exponent << " (~1e" << std::fixed << std::setprecision(1) << log10v
       << ")";
  }
  return os.str();
}

std::string bytes_string(double b) {
  const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
  int u = 0;
  while (b >= 1024.0 && u < 4) {
    b /= 1024.0;
    ++u;
  }
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << b << " " << units[u];
  return os.str();
}

double tensorized_bytes(const BasisSpec& s, const TensorizedOptions& t, int n_cols) {
  double words = 0.0;
  const auto bonds = tt_bonds(s.n_params, s.local_param_dim(), n_cols, t.chi);
  for (std::size_t m = 0; m + 1 < bonds.size(); ++m)
    words += static_cast<double>(bonds[m]) * s.local_param_dim() * bonds[m + 1];
  const double d = s.local_input_dim();
  if (t.use_mpo && s.n_features > 1) words += (s.n_features - 1) * d * d * d * d * 2.0;
  if (t.use_tree) words += s.n_features * d * d * t.chi;
  if (s.input_dim() <= kDensifyLimit) words += static_cast<double>(s.input_dim());
  return 8.0 * words;
}

}  // namespace

ValidationReport validate_config(const RunConfig& c) {
  ValidationReport r;
  auto fail = [&](const std::string& msg) {
    r.ok = false;
    r.errors.push_back(msg);
  };
  try {
    check_config(c);
  } catch (const std::exception& e) {
    fail(e.what());
    return r;
  }
  r.lines.push_back("preset: " + c.preset);
  r.lines.push_back("family: " + to_string(c.family));
  std::vector<BasisSpec> specs;
  try {
    specs = run_specs(c);
  } catch (const std::exception& e) {
    fail(e.what());
    return r;
  }
  for (const BasisSpec& s : specs) {
    std::ostringstream os;
    const int nodes = fim_quadrature_nodes(s);
    os << "N=" << s.n_features << " M=" << s.n_params << " d=" << s.local_input_dim()
       << " d~=" << s.local_param_dim()
       << " D=" << dim_string(s.local_input_dim(), s.n_features, s.log10_input_dim())
       << " K=" << dim_string(s.local_param_dim(), s.n_params, s.log10_param_dim())
       << " quadrature_nodes=" << nodes << "^" << s.n_features;
    const bool feasible = dense_feasible(s);
    if (c.family == ModelFamily::dense) {
      if (!feasible) {
        fail("dense model rejected: D*K exceeds the dense size guard of " +
             std::to_string(static_cast<long long>(kDenseEntryLimit)) + " entries (K=" +
             dim_string(s.local_param_dim(), s.n_params, s.log10_param_dim()) +
             "); use family=tensorized");
        continue;
      }
      const double d = static_cast<double>(s.input_dim()), k = static_cast<double>(s.param_dim());
      os << " dense feasible, memory ~" << bytes_string(8.0 * (2.0 * d * k + d * d));
      if (c.preset != "qnn-layouts" && c.preset != "ed-vs-dm-ratio" && !(c.rank < s.input_dim()))
        fail("field 'rank': R must be < D=" + std::to_string(s.input_dim()));
    } else {
      try {
        const int n = tensorized_spectrum_length(s, c.tensor);
        const auto bonds = tt_bonds(s.n_params, s.local_param_dim(), n, c.tensor.chi);
        os << " spectrum_length=" << n << " chi=" << c.tensor.chi << " memory ~"
           << bytes_string(tensorized_bytes(s, c.tensor, n));
        if (n > s.local_param_dim() * bonds[1])
          fail("spectrum length " + std::to_string(n) + " exceeds d~*chi_1 = " +
               std::to_string(s.local_param_dim() * bonds[1]) + " for M=" +
               std::to_string(s.n_params));
        if (!(c.rank < n)) fail("field 'rank': R must be < spectrum length " + std::to_string(n));
        if (c.biased_arm && n - c.rank + 1 > s.local_param_dim() * bonds[1])
          fail("biased construction needs n-R+1 <= d~*chi_1 for M=" + std::to_string(s.n_params));
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
    r.lines.push_back(os.str());
  }
  std::ostringstream seeds;
  seeds << "master_seed=" << c.master_seed << " realizations=" << c.n_realizations
        << " restarts=" << c.n_restarts;
  r.lines.push_back(seeds.str());
  return r;
}

ValidationReport validate_config_file(const std::string& path) {
  try {
    return validate_config(load_config(path));
  } catch (const std::exception& e) {
    ValidationReport r;
    r.ok = false;
    r.errors.push_back(e.what());
    return r;
  }
}

std::string ValidationReport::text() const {
  std::ostringstream os;
  for (const auto& l : lines) os << l << "\n";
  for (const auto& e : errors) os << "error: " << e << "\n";
  os << (ok ? "OK" : "INVALID") << "\n";
  return os.str();
}

}  // namespace fourier_ed
