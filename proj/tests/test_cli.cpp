#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "flock/commands.hpp"
#include "flock/csv_io.hpp"

using namespace flock;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flock_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string first_line(const fs::path& path) {
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  return line;
}

std::size_t line_count(const fs::path& path) {
  std::ifstream is(path);
  std::size_t n = 0;
  for (std::string line; std::getline(is, line);) ++n;
  return n;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

std::string consensus_csv(std::size_t n) {
  std::ostringstream os;
  os << "agent,x1,x2,v1,v2\n";
  for (std::size_t i = 0; i < n; ++i) os << i << ',' << 0.5 * static_cast<double>(i) << ",-1,0.3,-0.7\n";
  return os.str();
}

RunConfig small_config(const fs::path& out) {
  return load_config(std::nullopt, {{"model.N", "6"}, {"grid.T", "1"}, {"run.output_dir", out.string()}});
}

}  // namespace

TEST_CASE("configuration file and overrides") {
  const fs::path dir = scratch("config");
  const fs::path file = dir / "run.ini";
  write_text(file,
             "# sample run\n"
             "[model]\nK = 2\nbeta = 0.75\nN = 8\nd = 1\n"
             "[grid]\nT = 3\ndt = 0.05\n"
             "[cost]\ngamma = 0.5\n"
             "[descent]\ntol = 1e-4\nk_max = 50\n"
             "[nmpc]\nH = 2\nr = 2\n"
             "[run]\nseed = 77\nn_list = 10,20,40\n");

  const auto entries = read_config_file(file);
  CHECK(entries.at("model.K") == "2");
  CHECK(entries.at("run.n_list") == "10,20,40");

  const RunConfig cfg = load_config(file, {{"model.N", "9"}});
  CHECK(cfg.model.K == 2.0);
  CHECK(cfg.model.beta == 0.75);
  CHECK(cfg.model.N == 9);
  CHECK(cfg.model.d == 1);
  CHECK(cfg.grid.nodes == 61);
  CHECK(cfg.gamma == 0.5);
  CHECK(cfg.descent.tol == 1e-4);
  CHECK(cfg.descent.k_max == 50);
  CHECK(cfg.nmpc.horizon == 2);
  CHECK(cfg.nmpc.r == 2);
  CHECK(cfg.seed == 77);
  CHECK(cfg.pso.seed == 77);
  CHECK(cfg.mixture.seed == 77);
  CHECK(cfg.mixture.mu1 == std::vector<double>{-1.0});
  CHECK(cfg.n_list == std::vector<std::size_t>{10, 20, 40});

  const RunConfig defaults = load_config(std::nullopt, {});
  CHECK(defaults.grid.nodes == 101);
  CHECK(defaults.model.N == 20);

  CHECK_THROWS_AS(load_config(std::nullopt, {{"model.M", "3"}}), std::invalid_argument);
  CHECK_THROWS_AS(load_config(std::nullopt, {{"model.N", "three"}}), std::invalid_argument);
  CHECK_THROWS_AS(load_config(std::nullopt, {{"model.K", "-1"}}), std::invalid_argument);
  CHECK_THROWS_AS(load_config(std::nullopt, {{"grid.dt", "0.3"}}), std::invalid_argument);
  CHECK_THROWS_AS(load_config(std::nullopt, {{"init.kind", "box"}}), std::invalid_argument);
  CHECK_THROWS(load_config(dir / "missing.ini", {}));

  CHECK(parse_size_list(" 50, 100 ,200") == std::vector<std::size_t>{50, 100, 200});
  CHECK_THROWS_AS(parse_size_list(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_size_list("10,-2"), std::invalid_argument);
}

TEST_CASE("state files") {
  std::istringstream good(consensus_csv(3));
  const SwarmState s = csv::read_state(good);
  CHECK(s.agents() == 3);
  CHECK(s.dim() == 2);
  CHECK(s.x(2, 0) == 1.0);
  CHECK(s.v(1, 1) == -0.7);

  std::istringstream bad_header("id,x1,v1\n0,1,2\n");
  CHECK_THROWS(csv::read_state(bad_header));
  std::istringstream bad_order("agent,x1,v1\n1,1,2\n");
  CHECK_THROWS(csv::read_state(bad_order));
  std::istringstream short_row("agent,x1,v1\n0,1\n");
  CHECK_THROWS(csv::read_state(short_row));
  std::istringstream non_finite("agent,x1,v1\n0,inf,2\n");
  CHECK_THROWS(csv::read_state(non_finite));

  SUBCASE("trajectory output round-trips through the state reader") {
    const auto grid = TimeGrid::from_horizon(0.2, 0.1);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> g;
    SwarmState r(4, 3);
    for (auto& a : r.x.flat()) a = g(gen);
    for (auto& a : r.v.flat()) a = g(gen);
    const auto traj = integrate_forward(r, ControlField(grid.nodes, 4, 3), grid, {1, 1, 4, 3});
    std::ostringstream os;
    csv::write_trajectory(os, traj);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,agent,x1,x2,x3,v1,v2,v3");
    // Strip the time column of the final node and read it back.
    std::ostringstream last;
    last << "agent,x1,x2,x3,v1,v2,v3\n";
    std::size_t row = 0;
    while (std::getline(is, line)) {
      if (row++ >= 4 * (grid.nodes - 1)) last << line.substr(line.find(',') + 1) << '\n';
    }
    std::istringstream back(last.str());
    CHECK(csv::read_state(back) == traj.states.back());
  }
}

TEST_CASE("simulate") {
  const fs::path out = scratch("simulate");
  write_text(out / "consensus.csv", consensus_csv(5));
  const RunConfig cfg = load_config(
      std::nullopt, {{"model.N", "5"}, {"init.file", (out / "consensus.csv").string()},
                     {"grid.T", "2"}, {"run.output_dir", out.string()}});
  std::ostringstream log;
  const auto report = cmd_simulate(cfg, log);
  CHECK(first_line(out / "trajectory.csv") == "t,agent,x1,x2,v1,v2");
  CHECK(line_count(out / "trajectory.csv") == 1 + 5 * 21);
  CHECK(first_line(out / "functionals.csv") == "t,V,X");
  CHECK(line_count(out / "functionals.csv") == 22);

  std::ifstream is(out / "functionals.csv");
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    CHECK(std::stod(line.substr(a + 1, b - a - 1)) == 0.0);
  }
  CHECK(log.str().find("verdict:") != std::string::npos);
  CHECK(report.prediction.verdict == ConsensusVerdict::Conditional);

  const RunConfig weak = load_config(std::nullopt, {{"model.beta", "0.25"}, {"grid.T", "1"},
                                                    {"run.output_dir", out.string()}});
  std::ostringstream log2;
  cmd_simulate(weak, log2);
  CHECK(log2.str().find("verdict: Unconditional") != std::string::npos);

  const RunConfig mismatch = load_config(
      std::nullopt, {{"model.N", "4"}, {"init.file", (out / "consensus.csv").string()},
                     {"run.output_dir", out.string()}});
  CHECK_THROWS_AS(cmd_simulate(mismatch, log), std::invalid_argument);
}

TEST_CASE("optimize") {
  const fs::path out = scratch("optimize");
  write_text(out / "consensus.csv", consensus_csv(4));
  const RunConfig cfg = load_config(
      std::nullopt, {{"model.N", "4"}, {"init.file", (out / "consensus.csv").string()},
                     {"grid.T", "1"}, {"run.output_dir", out.string()}});
  std::ostringstream log;
  cmd_optimize(cfg, log);
  CHECK(first_line(out / "history.csv") == "iter,cost,grad_norm");
  CHECK(line_count(out / "history.csv") == 2);
  CHECK(slurp(out / "history.csv") == "iter,cost,grad_norm\n0,0,0\n");
  CHECK(first_line(out / "control.csv") == "t,agent,u1,u2");
  CHECK(line_count(out / "heatmap.csv") == 4);

  SUBCASE("reruns are byte-identical") {
    const fs::path a = scratch("optimize_a");
    const fs::path b = scratch("optimize_b");
    std::ostringstream quiet;
    const auto ra = cmd_optimize(small_config(a), quiet);
    cmd_optimize(small_config(b), quiet);
    CHECK(ra.result.iterations > 0);
    for (const char* name : {"control.csv", "trajectory.csv", "functionals.csv", "history.csv", "heatmap.csv"})
      CHECK(slurp(a / name) == slurp(b / name));
    CHECK(line_count(a / "functionals.csv") == 12);
  }
}

TEST_CASE("sparse") {
  const fs::path out = scratch("sparse");
  write_text(out / "consensus.csv", consensus_csv(3));
  const RunConfig cfg = load_config(
      std::nullopt, {{"model.N", "3"}, {"init.file", (out / "consensus.csv").string()},
                     {"grid.T", "0.5"}, {"pso.max_iters", "20"}, {"pso.swarm_size", "10"},
                     {"run.output_dir", out.string()}});
  std::ostringstream log;
  const auto report = cmd_sparse(cfg, log);
  std::ifstream is(out / "heatmap.csv");
  std::size_t cells = 0;
  for (std::string line; std::getline(is, line);) {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      CHECK(std::stod(cell) <= 1e-6);
      ++cells;
    }
  }
  CHECK(cells == 3 * 6);
  CHECK(fs::exists(out / "sparsity.txt"));
  CHECK(std::stod(slurp(out / "sparsity.txt")) == report.sparsity);
}

TEST_CASE("meanfield") {
  const fs::path out = scratch("meanfield");
  const RunConfig cfg = load_config(std::nullopt, {{"grid.T", "1"}, {"run.n_list", "8,16"},
                                                   {"run.bins", "10"}, {"run.output_dir", out.string()}});
  std::ostringstream log;
  const auto entries = cmd_meanfield(cfg, log);
  REQUIRE(entries.size() == 2);
  CHECK(first_line(out / "study.csv") == "N,J_star,iterations,wall_time,mean_control_norm,V_final");
  CHECK(line_count(out / "study.csv") == 3);
  CHECK(first_line(out / "marginal_N16.csv") == "axis,lo,hi,free,controlled");
  CHECK(line_count(out / "marginal_N16.csv") == 1 + 2 * 10);
}

TEST_CASE("command-line executable") {
  const fs::path out = scratch("exe");
  const std::string exe = FLOCKCTL_PATH;
  const std::string ok = exe + " simulate --out " + out.string() + " --set grid.T=1 --set model.N=5 > " +
                         (out / "log.txt").string() + " 2>&1";
  CHECK(std::system(ok.c_str()) == 0);
  CHECK(fs::exists(out / "trajectory.csv"));

  const std::string unknown = exe + " simulate --out " + out.string() + " --set model.Q=1 2> " +
                              (out / "err.txt").string();
  CHECK(std::system(unknown.c_str()) != 0);
  CHECK(slurp(out / "err.txt").find("unknown key") != std::string::npos);

  const std::string missing = exe + " optimize --config " + (out / "nope.ini").string() + " 2> " +
                              (out / "err.txt").string();
  CHECK(std::system(missing.c_str()) != 0);

  const std::string no_command = exe + " > " + (out / "log.txt").string() + " 2>&1";
  CHECK(std::system(no_command.c_str()) != 0);
}
