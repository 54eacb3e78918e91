#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fourier_ed/training.hpp"

namespace fourier_ed {

inline constexpr int kCsvSchema = 1;

/// One d̂_eff measurement (ed-vs-purity, ed-vs-dm-ratio).
struct EdRecord {
  std::uint64_t master_seed = 0;
  int realization = 0;
  std::int64_t input_dim = 0;  // D
  int n_params = 0;            // M
  int d_tilde = 0;
  double xi = 0.0;  // 0 when no decay was imposed
  double purity = 0.0;
  int n_param_samples = 0;
  std::int64_t dataset_size = 0;  // 𝔫 in c_n
  double ed = 0.0;
  bool operator==(const EdRecord&) const = default;
};

/// Basis-count row for one layout; qubit = −1 is the union over measured qubits.
struct LayoutRecord {
  int n_qubits = 0;
  int n_layers = 0;
  int entangling_depth = 0;
  int measurement_depth = 0;
  int qubit = -1;
  std::int64_t input_count = 0;
  std::int64_t param_count = 0;
  double purity_mean = 0.0;  // masked-model purity over realizations (union rows only)
  bool operator==(const LayoutRecord&) const = default;
};

/// CSV text: "# schema=1 table=<name>", a header row, then one row per record.
/// Reals use shortest round-trip formatting, so parse(write(x)) == x.
std::string write_csv(const std::vector<ExperimentRecord>& rows);
std::string write_csv(const std::vector<EdRecord>& rows);
std::string write_csv(const std::vector<LayoutRecord>& rows);
std::vector<ExperimentRecord> parse_experiment_csv(const std::string& text);
std::vector<EdRecord> parse_ed_csv(const std::string& text);
std::vector<LayoutRecord> parse_layout_csv(const std::string& text);

/// Shortest decimal that parses back to the same double.
std::string format_real(double v);

/// Git blob id: SHA-1 over "blob <size>\0" + content, lowercase hex.
std::string git_blob_hash(const std::string& content);

struct Manifest {
  std::string preset;
  std::string config_json;  // canonical echo
  std::uint64_t master_seed = 0;
  int n_tasks = 0;
  int n_failed = 0;
  std::vector<std::string> failures;
  double wall_seconds = 0.0;
  std::vector<std::string> files;
  std::string records_hash;
};

std::string manifest_json(const Manifest& m);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace fourier_ed
