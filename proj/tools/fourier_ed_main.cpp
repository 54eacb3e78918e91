// fourier-ed: run figure presets or custom configs, or validate a config.
#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fourier_ed/config.hpp"
#include "fourier_ed/presets.hpp"

namespace fe = fourier_ed;

namespace {

int run(const std::string& command, const std::string& config_path, const std::string* seed,
        int jobs, const std::string* out, const std::vector<std::string>& overrides) {
  fe::RunConfig cfg;
  if (command == "run") {
    if (config_path.empty()) throw fe::ConfigError("'run' needs --config");
    cfg = fe::load_config(config_path);
  } else {
    cfg = fe::preset_config(command);
    if (!config_path.empty()) {
      cfg = fe::load_config(config_path, cfg);
      if (cfg.preset != command)
        throw fe::ConfigError("config names preset '" + cfg.preset + "' but '" + command +
                              "' was requested");
    }
  }
  if (seed != nullptr) fe::apply_override(cfg, "master_seed=" + *seed);
  for (const auto& o : overrides) fe::apply_override(cfg, o);
  if (out != nullptr) cfg.output = *out;

  const fe::ValidationReport report = fe::validate_config(cfg);
  if (!report.ok) {
    std::cerr << report.text();
    return 2;
  }
  std::cerr << "running " << cfg.preset << " -> " << cfg.output << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  const fe::RunResult res =
      fe::execute(cfg, jobs, [](const std::string& line) { std::cerr << line << "\n"; });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int status = fe::write_run(cfg, res, cfg.output, wall);
  std::cerr << res.n_tasks - static_cast<int>(res.failures.size()) << "/" << res.n_tasks
            << " tasks succeeded in " << wall << " s\n";
  if (status != 0) std::cerr << "more than 10% of the tasks failed\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective-dimension and training experiments for Fourier-series models"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("--config", validate_path, "Config file (JSON)")->required();

  app.add_subcommand("list", "List presets");

  struct RunArgs {
    std::string config;
    std::string seed;
    int jobs = 1;
    std::string out;
    std::vector<std::string> overrides;
  };
  std::vector<std::string> commands = fe::preset_names();
  commands.push_back("run");
  std::vector<RunArgs> args(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(
        commands[i], commands[i] == "run" ? "Run the preset named in --config" : "Run a preset");
    RunArgs& a = args[i];
    sub->add_option("--config", a.config, "Config file (JSON); keys override preset defaults");
    sub->add_option("--seed", a.seed, "Master seed");
    sub->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", a.out, "Output directory");
    sub->add_option("--override", a.overrides, "key=value, value in JSON syntax")
        ->allow_extra_args(false);
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const fe::ValidationReport r = fe::validate_config_file(validate_path);
      std::cout << r.text();
      return r.ok ? 0 : 2;
    }
    if (app.got_subcommand("list")) {
      for (const auto& n : fe::preset_names()) std::cout << n << "\n";
      return 0;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const RunArgs& a = args[i];
      return run(commands[i], a.config, subs[i]->count("--seed") ? &a.seed : nullptr, a.jobs,
                 subs[i]->count("--out") ? &a.out : nullptr, a.overrides);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
