#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "irslab/harness.hpp"

namespace {

// Exit codes: 0 success, 2 configuration error, 3 I/O error.
enum { kOk = 0, kConfigError = 2, kIoError = 3 };

int run_command(const std::string& config_path, const std::string& out_override,
                bool has_seed, std::uint64_t seed, bool paper_scale, int realizations,
                const std::string& schemes_csv, bool timing) {
  irslab::ExperimentConfig cfg = irslab::load_config(config_path);
  if (!out_override.empty()) cfg.output = out_override;
  if (has_seed) cfg.master_seed = seed;
  if (paper_scale) {
    cfg.restarts = 100;
    cfg.realizations = 100;
  }
  if (realizations > 0) cfg.realizations = realizations;
  if (!schemes_csv.empty()) {
    cfg.schemes.clear();
    std::stringstream ss(schemes_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) cfg.schemes.push_back(item);
  }
  cfg.record_timing = timing;
  irslab::run(cfg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irs-lab: capacity optimizer for reflecting-surface-aided MIMO links"};
  app.require_subcommand(1);

  std::string config_path, out_override, schemes_csv;
  std::uint64_t seed = 0;
  bool paper_scale = false, timing = false;
  int realizations = 0;

  auto* run = app.add_subcommand("run", "run an experiment config and write CSV rows");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_override, "output CSV path (overrides config)");
  auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides config)");
  run->add_flag("--paper-scale", paper_scale,
                "use 100 restarts and 100 realizations");
  run->add_option("--realizations", realizations, "realization count override");
  run->add_option("--schemes", schemes_csv, "comma-separated scheme subset");
  run->add_flag("--timing", timing,
                "record wall-clock times in the CSV (makes reruns differ)");

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "experiment config file")->required();

  app.add_subcommand("list-experiments", "print experiment ids and scheme names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kConfigError : kOk;
  }

  try {
    if (run->parsed())
      return run_command(config_path, out_override, seed_opt->count() > 0, seed,
                         paper_scale, realizations, schemes_csv, timing);
    if (validate->parsed()) {
      irslab::load_config(config_path).validate();
      std::cout << "config OK: " << config_path << "\n";
      return kOk;
    }
    // list-experiments
    std::cout << "experiments:\n";
    for (const auto& e : irslab::registered_experiments()) std::cout << "  " << e << "\n";
    std::cout << "schemes:\n";
    for (const auto& s : irslab::registered_schemes()) std::cout << "  " << s << "\n";
    return kOk;
  } catch (const irslab::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
