// mmtcsim: run and validate random-access scenario sweeps.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "mmtc/sweep.hpp"
#include "mmtc_presets.hpp"

namespace fs = std::filesystem;
using namespace mmtc;

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> m(std::begin(mmtc_presets::kPresets), std::end(mmtc_presets::kPresets));
  return m;
}

// A readable file wins; otherwise the argument names a bundled preset.
ScenarioConfig load(const std::string& arg, const std::vector<std::string>& overrides, std::string& source) {
  if (fs::exists(arg)) {
    source = fs::absolute(arg).string();
    return load_config_file(arg, overrides);
  }
  auto it = presets().find(arg);
  if (it == presets().end()) throw ConfigError("no config file or preset named '" + arg + "'");
  source = "preset:" + arg;
  return load_config_text(it->second, arg + ".ini", overrides);
}

int cmd_run(const std::string& config, std::vector<std::string> overrides, const std::vector<std::string>& lambdas,
            int jobs, std::string out_dir) {
  if (!lambdas.empty()) {
    std::string grid;
    for (const auto& l : lambdas) grid += (grid.empty() ? "" : ",") + l;
    overrides.push_back("traffic.lambda=" + grid);
  }
  std::string source;
  ScenarioConfig cfg = load(config, overrides, source);
  auto errs = validate_config(cfg);
  if (!errs.empty()) {
    for (const auto& e : errs) std::cerr << "error: " << e << "\n";
    return 2;
  }
  if (out_dir.empty()) {
    const char* env = std::getenv("MMTCSIM_OUT_DIR");
    out_dir = env && *env ? env : "results";
  }
  fs::create_directories(out_dir);
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  std::vector<KpiRow> rows = run_sweep(cfg, jobs);
  const fs::path csv = fs::path(out_dir) / (cfg.name + ".csv");
  {
    std::ofstream os(csv);
    write_kpi_csv(os, rows);
  }
  {
    std::ofstream os(fs::path(out_dir) / (cfg.name + ".effective.ini"));
    os << cfg.canonical;
  }
  {
    std::ofstream os(fs::path(out_dir) / (cfg.name + ".manifest"));
    write_manifest(os, cfg, {source, overrides, csv.filename().string(), jobs});
  }
  std::cout << "wrote " << csv.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_validate(const std::string& config, const std::vector<std::string>& overrides) {
  std::string source;
  ScenarioConfig cfg = load(config, overrides, source);
  auto errs = validate_config(cfg);
  for (const auto& e : errs) std::cerr << "error: " << e << "\n";
  if (!errs.empty()) return 2;
  std::cout << source << ": ok (" << cfg.schemes.size() << " schemes, " << cfg.lambdas.size() << " lambdas, "
            << cfg.seeds << " seeds)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Massive machine-type random access simulator"};
  app.require_subcommand(1);

  std::string config, out_dir;
  std::vector<std::string> overrides, lambdas;
  int jobs = 0;

  auto* run = app.add_subcommand("run", "Run a sweep and write CSV + manifest");
  run->add_option("config", config, "Config file or preset name")->required();
  run->add_option("--override,-o", overrides, "section.key=value")->take_all();
  run->add_option("--lambda", lambdas, "Shorthand for traffic.lambda=...")->delimiter(',');
  run->add_option("--jobs,-j", jobs, "Worker threads (default: hardware concurrency)");
  run->add_option("--out", out_dir, "Output directory (default: $MMTCSIM_OUT_DIR or ./results)");

  auto* val = app.add_subcommand("validate", "Check a config without running");
  val->add_option("config", config, "Config file or preset name")->required();
  val->add_option("--override,-o", overrides, "section.key=value")->take_all();

  auto* list = app.add_subcommand("list-presets", "List bundled presets");
  auto* show = app.add_subcommand("show-preset", "Print a bundled preset");
  std::string preset_name;
  show->add_option("name", preset_name)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, overrides, lambdas, jobs, out_dir);
    if (*val) return cmd_validate(config, overrides);
    if (*list) {
      for (const auto& [name, text] : presets()) std::cout << name << "\n";
      return 0;
    }
    if (*show) {
      auto it = presets().find(preset_name);
      if (it == presets().end()) {
        std::cerr << "error: no preset named '" << preset_name << "'\n";
        return 2;
      }
      std::cout << it->second;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << (std::string(e.what()).back() == '\n' ? "" : "\n");
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
