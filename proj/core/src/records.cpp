#include "fourier_ed/records.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

namespace fourier_ed {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using Row = std::vector<std::string>;

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("csv line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    csv_error(line, "bad number '" + s + "'");
  return v;
}

template <class T>
T parse_integer(const std::string& s, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    csv_error(line, "bad integer '" + s + "'");
  return v;
}

std::string join(const Row& r) {
  std::string out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) out += ',';
    out += r[i];
  }
  return out;
}

Row split(const std::string& line) {
  Row r;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) r.push_back(cell);
  if (!line.empty() && line.back() == ',') r.emplace_back();
  return r;
}

std::string write_table(const std::string& table, const Row& header, const std::vector<Row>& rows) {
  std::string out = "# schema=" + std::to_string(kCsvSchema) + " table=" + table + "\n";
  out += join(header) + "\n";
  for (const Row& r : rows) out += join(r) + "\n";
  return out;
}

template <class Rec>
std::vector<Rec> parse_table(const std::string& text, const std::string& table, const Row& header,
                             const std::function<Rec(const Row&, std::size_t)>& decode) {
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  const std::string magic = "# schema=" + std::to_string(kCsvSchema) + " table=" + table;
  if (!std::getline(is, line) || line != magic) csv_error(1, "expected header comment '" + magic + "'");
  ++n;
  if (!std::getline(is, line) || split(line) != header) csv_error(2, "unexpected column header");
  ++n;
  std::vector<Rec> out;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const Row r = split(line);
    if (r.size() != header.size())
      csv_error(n, "expected " + std::to_string(header.size()) + " cells, got " +
                       std::to_string(r.size()));
    out.push_back(decode(r, n));
  }
  return out;
}

const Row kExperimentHeader{"master_seed", "realization", "restart",      "regime",
                            "epsilon",     "delta_data",  "xi",           "n_params",
                            "input_dim",   "ed_full",     "ed_cut",       "mse_min_full",
                            "mse_min_cut", "delta_mse",   "delta_ed",     "epochs",
                            "lr"};
const Row kEdHeader{"master_seed", "realization",     "input_dim",    "n_params", "d_tilde",
                    "xi",          "purity",          "n_param_samples", "dataset_size", "d_eff"};
const Row kLayoutHeader{"n_qubits", "n_layers",    "entangling_depth", "measurement_depth",
                        "qubit",    "input_count", "param_count",      "purity_mean"};

}  // namespace

std::string write_csv(const std::vector<ExperimentRecord>& rows) {
  std::vector<Row> out;
  for (const auto& r : rows)
    out.push_back({std::to_string(r.master_seed), std::to_string(r.realization),
                   std::to_string(r.restart), to_string(r.regime), format_real(r.epsilon),
                   format_real(r.delta_data), format_real(r.xi), std::to_string(r.n_params),
                   std::to_string(r.input_dim), format_real(r.ed_full), format_real(r.ed_cut),
                   format_real(r.mse_min_full), format_real(r.mse_min_cut),
                   format_real(r.delta_mse), format_real(r.delta_ed), std::to_string(r.epochs),
                   format_real(r.lr)});
  return write_table("experiment", kExperimentHeader, out);
}

std::vector<ExperimentRecord> parse_experiment_csv(const std::string& text) {
  return parse_table<ExperimentRecord>(
      text, "experiment", kExperimentHeader, [](const Row& c, std::size_t n) {
        ExperimentRecord r;
        r.master_seed = parse_integer<std::uint64_t>(c[0], n);
        r.realization = parse_integer<int>(c[1], n);
        r.restart = parse_integer<int>(c[2], n);
        try {
          r.regime = regime_from_string(c[3]);
        } catch (const std::exception& e) {
          csv_error(n, e.what());
        }
        r.epsilon = parse_real(c[4], n);
        r.delta_data = parse_real(c[5], n);
        r.xi = parse_real(c[6], n);
        r.n_params = parse_integer<int>(c[7], n);
        r.input_dim = parse_integer<std::int64_t>(c[8], n);
        r.ed_full = parse_real(c[9], n);
        r.ed_cut = parse_real(c[10], n);
        r.mse_min_full = parse_real(c[11], n);
        r.mse_min_cut = parse_real(c[12], n);
        r.delta_mse = parse_real(c[13], n);
        r.delta_ed = parse_real(c[14], n);
        r.epochs = parse_integer<int>(c[15], n);
        r.lr = parse_real(c[16], n);
        return r;
      });
}

std::string write_csv(const std::vector<EdRecord>& rows) {
  std::vector<Row> out;
  for (const auto& r : rows)
    out.push_back({std::to_string(r.master_seed), std::to_string(r.realization),
                   std::to_string(r.input_dim), std::to_string(r.n_params),
                   std::to_string(r.d_tilde), format_real(r.xi), format_real(r.purity),
                   std::to_string(r.n_param_samples), std::to_string(r.dataset_size),
                   format_real(r.ed)});
  return write_table("ed", kEdHeader, out);
}

std::vector<EdRecord> parse_ed_csv(const std::string& text) {
  return parse_table<EdRecord>(text, "ed", kEdHeader, [](const Row& c, std::size_t n) {
    EdRecord r;
    r.master_seed = parse_integer<std::uint64_t>(c[0], n);
    r.realization = parse_integer<int>(c[1], n);
    r.input_dim = parse_integer<std::int64_t>(c[2], n);
    r.n_params = parse_integer<int>(c[3], n);
    r.d_tilde = parse_integer<int>(c[4], n);
    r.xi = parse_real(c[5], n);
    r.purity = parse_real(c[6], n);
    r.n_param_samples = parse_integer<int>(c[7], n);
    r.dataset_size = parse_integer<std::int64_t>(c[8], n);
    r.ed = parse_real(c[9], n);
    return r;
  });
}

std::string write_csv(const std::vector<LayoutRecord>& rows) {
  std::vector<Row> out;
  for (const auto& r : rows)
    out.push_back({std::to_string(r.n_qubits), std::to_string(r.n_layers),
                   std::to_string(r.entangling_depth), std::to_string(r.measurement_depth),
                   std::to_string(r.qubit), std::to_string(r.input_count),
                   std::to_string(r.param_count), format_real(r.purity_mean)});
  return write_table("layout", kLayoutHeader, out);
}

std::vector<LayoutRecord> parse_layout_csv(const std::string& text) {
  return parse_table<LayoutRecord>(text, "layout", kLayoutHeader, [](const Row& c, std::size_t n) {
    LayoutRecord r;
    r.n_qubits = parse_integer<int>(c[0], n);
    r.n_layers = parse_integer<int>(c[1], n);
    r.entangling_depth = parse_integer<int>(c[2], n);
    r.measurement_depth = parse_integer<int>(c[3], n);
    r.qubit = parse_integer<int>(c[4], n);
    r.input_count = parse_integer<std::int64_t>(c[5], n);
    r.param_count = parse_integer<std::int64_t>(c[6], n);
    r.purity_mean = parse_real(c[7], n);
    return r;
  });
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["preset"] = m.preset;
  j["master_seed"] = m.master_seed;
  j["config"] = nlohmann::ordered_json::parse(m.config_json);
  j["input_hash"] = git_blob_hash(m.config_json);
  j["records_hash"] = m.records_hash;
  j["n_tasks"] = m.n_tasks;
  j["n_failed"] = m.n_failed;
  j["failures"] = m.failures;
  j["files"] = m.files;
  j["wall_seconds"] = m.wall_seconds;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace fourier_ed
