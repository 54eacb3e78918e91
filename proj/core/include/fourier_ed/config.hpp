#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fourier_ed/basis.hpp"
#include "fourier_ed/tensornet.hpp"
#include "fourier_ed/training.hpp"

namespace fourier_ed {

enum class ModelFamily { dense, tensorized };

std::string to_string(ModelFamily f);

/// Everything a run needs. Serialized as a flat JSON object; keys match the
/// member names (BasisSpec and TrainingConfig fields are inlined).
struct RunConfig {
  std::string preset;  // empty until a preset is chosen
  BasisSpec spec;
  ModelFamily family = ModelFamily::dense;

  // generator / decay
  int rank = 1;
  std::vector<double> epsilons{0.0};
  std::vector<double> xis{1.0};

  // fim
  int n_param_samples = 150;
  std::int64_t dataset_size = kDefaultDatasetSize;

  TrainingConfig training;
  bool biased_arm = true;
  bool unbiased_arm = true;

  // tensorized
  TensorizedOptions tensor;

  // seeds
  std::uint64_t master_seed = 0;
  int n_realizations = 1;
  int n_restarts = 1;

  /// Swept dimension: D for ed-vs-dm-ratio and scan-d, M for scan-m.
  std::vector<int> scan;

  // qnn-layouts
  int n_qubits = 4;
  int n_layers = 2;
  std::vector<int> entangling_depths{0, 1, 2};
  int measurement_depth = 0;

  std::string output = "out";
  bool dump_spectra = false;
};

/// Preset names accepted by run_preset and `fourier-ed <preset>`.
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);

/// Default configuration of a preset.
RunConfig preset_config(const std::string& name);

/// Raised for malformed or invalid configuration; the message names the field.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Applies a JSON object to `base`. Unknown keys are rejected. When the text
/// carries a "preset" key, that preset's defaults replace `base` first.
RunConfig parse_config(const std::string& json_text, const RunConfig& base = RunConfig{});
RunConfig load_config(const std::string& path, const RunConfig& base = RunConfig{});

/// "key=value" where value is JSON (bare words are taken as strings).
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Canonical JSON echo (sorted keys, round-trips through parse_config).
std::string config_to_json(const RunConfig& cfg, int indent = 2);

/// Basis specs the run instantiates (one per scan point, else the configured one).
std::vector<BasisSpec> run_specs(const RunConfig& cfg);

/// Cross-field checks; throws ConfigError with the field name.
void check_config(const RunConfig& cfg);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> lines;  // derived quantities, one per line
  std::string text() const;
};

/// Static validation without execution: D, K, memory estimate, quadrature nodes.
ValidationReport validate_config(const RunConfig& cfg);
ValidationReport validate_config_file(const std::string& path);

}  // namespace fourier_ed
