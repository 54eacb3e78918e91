#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fourier_ed/config.hpp"
#include "fourier_ed/records.hpp"

namespace fourier_ed {

/// In-memory result of a run. Exactly one of the record lists is filled,
/// matching `table`.
struct RunResult {
  std::string table;  // "experiment", "ed" or "layout"
  std::vector<ExperimentRecord> experiments;
  std::vector<EdRecord> eds;
  std::vector<LayoutRecord> layouts;
  std::vector<std::pair<std::string, std::string>> spectra;  // file name, csv text
  int n_tasks = 0;
  std::vector<std::string> failures;

  std::string csv() const;
  /// More than 10% of the tasks failed.
  bool too_many_failures() const { return failures.size() * 10 > static_cast<std::size_t>(n_tasks); }
};

using LogFn = std::function<void(const std::string&)>;

/// Runs the preset pipeline named by cfg.preset on `jobs` worker threads.
/// Every task draws from its own substream of cfg.master_seed, so the
/// result does not depend on `jobs`. A failing task is logged and skipped.
RunResult execute(const RunConfig& cfg, int jobs = 1, const LogFn& log = {});

/// Writes records.csv, manifest.json and spectrum dumps under `out_dir`.
/// Returns the process exit status (nonzero when too many tasks failed).
int write_run(const RunConfig& cfg, const RunResult& result, const std::string& out_dir,
              double wall_seconds);

/// Runs `fn(i)` for i in [0, n) on a pool of `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace fourier_ed
