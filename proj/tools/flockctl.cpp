// flockctl: simulate, optimise and study Cucker-Smale consensus control.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "flock/commands.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("FLOCKCTL_THREADS")) {
    const int threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);
  }
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cucker-Smale consensus control: simulation, adjoint descent, PSO-NMPC, "
               "mean-field study"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> n_list;
  std::vector<std::string> sets;

  app.add_option("--config", config_path, "INI run configuration");
  app.add_option("--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--out", out_dir, "output directory (overrides run.output_dir)");
  app.add_option("--n-list", n_list, "comma separated agent counts for meanfield");
  app.add_option("--set", sets, "override a config key, e.g. --set model.N=40")
      ->allow_extra_args(false);

  auto* simulate = app.add_subcommand("simulate", "free dynamics and consensus prediction");
  auto* optimize = app.add_subcommand("optimize", "l2 optimal control by BB gradient descent");
  auto* sparse = app.add_subcommand("sparse", "l_r control by PSO inside receding horizon");
  auto* meanfield = app.add_subcommand("meanfield", "optimal control for increasing N");

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap();

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value: " + s);
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) overrides.emplace_back("run.seed", std::to_string(*seed));
    if (out_dir) overrides.emplace_back("run.output_dir", *out_dir);
    if (n_list) overrides.emplace_back("run.n_list", *n_list);

    std::optional<std::filesystem::path> file;
    if (config_path) file = *config_path;
    const flock::RunConfig cfg = flock::load_config(file, overrides);

    if (simulate->parsed()) {
      flock::cmd_simulate(cfg, std::cout);
    } else if (optimize->parsed()) {
      flock::cmd_optimize(cfg, std::cout);
    } else if (sparse->parsed()) {
      flock::cmd_sparse(cfg, std::cout);
    } else if (meanfield->parsed()) {
      flock::cmd_meanfield(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "flockctl: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
