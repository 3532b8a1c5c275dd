// Command-line front end: one subcommand per experiment command, plus `suite`.
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or I/O error.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "isospec/workbench.hpp"

using namespace isospec;

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

ExperimentConfig load(Command cmd, const Flags& f) {
  ExperimentConfig cfg = default_config(cmd);
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    if (!is) throw IoError("cannot read config " + f.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    cfg = parse_config(j);
    if (cfg.command != cmd)
      throw ConfigError("config command " + command_name(cfg.command) + " does not match subcommand " +
                        subcommand_name(cmd));
  }
  if (f.seed_set) cfg.seed = f.seed;
  cfg.jobs = f.jobs;
  return cfg;
}

bool run_one(const ExperimentConfig& cfg, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = run(cfg);
  emit_report(rep, out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << command_name(cfg.command) << " " << cfg.family << ": " << (rep.pass() ? "pass" : "FAIL") << " ("
            << rep.records.size() << " checks, " << secs << " s) -> " << (std::filesystem::path(out) / cfg.json_name).string()
            << "\n";
  for (const auto& c : rep.records)
    if (!c.pass)
      std::cout << "  failing: " << c.name << " measured " << format_double(c.measured) << (c.lower_bound ? " < " : " > ")
                << format_double(c.tolerance) << "\n";
  return rep.pass();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isospectral metrics workbench"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::pair<CLI::App*, Command>> subs;
  auto add_flags = [&](CLI::App* s, bool with_config) {
    if (with_config) s->add_option("--config", flags.config, "JSON config (schema 1)")->check(CLI::ExistingFile);
    s->add_option("--out", flags.out, "output directory");
    s->add_option("--seed", flags.seed, "seed, overrides the config")->each([&](const std::string&) { flags.seed_set = true; });
    s->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  for (Command c : all_commands()) {
    auto* s = app.add_subcommand(subcommand_name(c), "run the " + command_name(c) + " pipeline");
    add_flags(s, true);
    subs.emplace_back(s, c);
  }
  auto* suite = app.add_subcommand("suite", "run every pipeline with default settings");
  add_flags(suite, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (suite->parsed()) {
      bool ok = true;
      for (auto cfg : suite_configs(flags.seed)) {
        cfg.jobs = flags.jobs;
        ok = run_one(cfg, flags.out) && ok;
      }
      return ok ? 0 : 1;
    }
    for (const auto& [s, c] : subs)
      if (s->parsed()) return run_one(load(c, flags), flags.out) ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
