#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopfcl/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hopfcl: long-wave Hopf bifurcation experiments"};
  std::string config_path;
  std::string out_dir;
  std::string subcommand;
  std::uint64_t seed = 0;
  int workers = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--subcommand", subcommand, "experiment to run")
      ->check(CLI::IsMember(hopfcl::subcommands()));
  app.add_option("--set", overrides, "extra key=value settings applied after the config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(hopfcl::ExitCode::config_error);
  }

  hopfcl::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = hopfcl::load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw hopfcl::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!subcommand.empty()) cfg.subcommand = subcommand;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (app.count("--seed")) cfg.seed = seed;
    if (workers > 0) cfg.workers = workers;
  } catch (const hopfcl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(hopfcl::ExitCode::config_error);
  }

  const hopfcl::RunResult r = hopfcl::run(cfg);
  if (r.code == hopfcl::ExitCode::ok) {
    std::cout << cfg.subcommand << ": ok (" << r.files.size() << " files in " << cfg.out_dir << ")\n";
  } else {
    std::cerr << cfg.subcommand << ": " << r.message << "\n";
  }
  return static_cast<int>(r.code);
}
