// nodallab list
// nodallab run <id> [--config PATH] [--out DIR] [--seed N] [--resolution R]
//
// Exit status: 0 every criterion passed, 1 a criterion failed, 2 usage or
// configuration error.

#include <chrono>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "nodallab/harness.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

int list_experiments() {
  for (const auto& s : nodallab::experiment_registry())
    std::cout << std::left << std::setw(4) << s.id << s.claim << "\n    anchor: " << s.anchor << '\n';
  return kPass;
}

int run(const std::string& id, const std::string& config_path, const std::string& out_dir,
        const nodallab::RunOptions& opts) {
  const nodallab::Config config = config_path.empty() ? nodallab::Config{} : nodallab::Config::load(config_path);
  nodallab::find_experiment(id);
  const auto start = std::chrono::steady_clock::now();
  const auto result = nodallab::run_experiment(id, config, opts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string dir = out_dir.empty() ? "out/" + id : out_dir;
  nodallab::write_outputs(result, dir);
  for (const auto& c : result.part.criteria)
    std::cout << (c.pass ? "PASS " : "FAIL ") << id << ' ' << c.name << ": " << c.detail << '\n';
  std::cout << id << (result.pass() ? " passed" : " failed") << " in " << std::fixed << std::setprecision(2) << seconds
            << " s; outputs in " << dir << '\n';
  return result.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal sets of Dirac-type eigensections: experiments and reports"};
  app.require_subcommand(1);
  auto* list = app.add_subcommand("list", "List registered experiments");
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its reports");
  std::string id, config_path, out_dir;
  std::uint64_t seed = 0;
  int resolution = 0;
  run_cmd->add_option("id", id, "Experiment id (E1..E9)")->required();
  run_cmd->add_option("--config", config_path, "INI configuration file");
  run_cmd->add_option("--out", out_dir, "Output directory (default out/<id>)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Random seed");
  auto* res_opt = run_cmd->add_option("--resolution", resolution, "Finest grid resolution per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*list) return list_experiments();
    nodallab::RunOptions opts;
    if (*seed_opt) opts.seed = seed;
    if (*res_opt) opts.resolution = resolution;
    return run(id, config_path, out_dir, opts);
  } catch (const nodallab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nodallab::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
