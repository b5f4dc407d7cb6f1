#include "flock/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "flock/csv_io.hpp"

namespace flock {

namespace {

constexpr double kSparsityThreshold = 1e-3;

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  auto os = csv::open_output(path);
  writer(os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void prepare_output(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + cfg.output_dir.string());
}

}  // namespace

SwarmState initial_state(const RunConfig& cfg) {
  if (cfg.init.kind == InitialKind::File) {
    SwarmState s = csv::read_state(cfg.init.file);
    if (s.agents() != cfg.model.N || s.dim() != cfg.model.d)
      throw std::invalid_argument("initial state file has " + std::to_string(s.agents()) +
                                  " agents in dimension " + std::to_string(s.dim()) +
                                  ", config expects N = " + std::to_string(cfg.model.N) +
                                  ", d = " + std::to_string(cfg.model.d));
    return s;
  }
  return sample_initial(cfg.model.N, cfg.mixture);
}

SimulateReport cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const SwarmState state0 = initial_state(cfg);
  SimulateReport report;
  report.prediction = predict_consensus(state0, cfg.model);
  const ControlField zero(cfg.grid.nodes, cfg.model.N, cfg.model.d);
  report.traj = integrate_forward(state0, zero, cfg.grid, cfg.model);

  prepare_output(cfg);
  write_file(cfg.output_dir / "trajectory.csv",
             [&](std::ostream& os) { csv::write_trajectory(os, report.traj); });
  write_file(cfg.output_dir / "functionals.csv",
             [&](std::ostream& os) { csv::write_functionals(os, report.traj); });

  const auto f0 = consensus_functionals(report.traj.states.front());
  const auto fT = consensus_functionals(report.traj.states.back());
  log << "verdict: " << to_string(report.prediction.verdict) << '\n'
      << "V(0) = " << f0.V << ", V(T) = " << fT.V << '\n';
  return report;
}

OptimizeReport cmd_optimize(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const SwarmState state0 = initial_state(cfg);
  const CostParams cost = cfg.cost();
  const ControlField zero(cfg.grid.nodes, cfg.model.N, cfg.model.d);

  OptimizeReport report;
  report.zero_control_cost = total_cost(state0, zero, cfg.model, cost);
  report.result = bb_descent(state0, zero, cfg.model, cost, cfg.descent);
  report.stationarity =
      stationarity_residual(report.result.u_opt, report.result.adjoint, cost, cfg.model);

  const OcpResult& r = report.result;
  prepare_output(cfg);
  write_file(cfg.output_dir / "control.csv",
             [&](std::ostream& os) { csv::write_control(os, r.u_opt, cfg.grid); });
  write_file(cfg.output_dir / "trajectory.csv",
             [&](std::ostream& os) { csv::write_trajectory(os, r.traj); });
  write_file(cfg.output_dir / "functionals.csv",
             [&](std::ostream& os) { csv::write_functionals(os, r.traj); });
  write_file(cfg.output_dir / "history.csv",
             [&](std::ostream& os) { csv::write_history(os, r); });
  write_file(cfg.output_dir / "heatmap.csv",
             [&](std::ostream& os) { csv::write_heatmap(os, heat_map(r.u_opt)); });

  log << "iterations: " << r.iterations << (r.converged ? " (converged)" : " (not converged)")
      << '\n'
      << "cost: " << r.cost_history.back() << " (zero control " << report.zero_control_cost
      << ")\n"
      << "gradient norm: " << r.grad_norm_history.back() << '\n';
  return report;
}

SparseReport cmd_sparse(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const SwarmState state0 = initial_state(cfg);

  SparseReport report;
  report.result = nmpc_loop(state0, cfg.grid, cfg.model, cfg.nmpc, cfg.pso);
  const HeatMap map = heat_map(report.result.u_applied);
  report.sparsity = sparsity_fraction(map, kSparsityThreshold);

  prepare_output(cfg);
  write_file(cfg.output_dir / "control.csv", [&](std::ostream& os) {
    csv::write_control(os, report.result.u_applied, cfg.grid);
  });
  write_file(cfg.output_dir / "trajectory.csv",
             [&](std::ostream& os) { csv::write_trajectory(os, report.result.traj); });
  write_file(cfg.output_dir / "functionals.csv",
             [&](std::ostream& os) { csv::write_functionals(os, report.result.traj); });
  write_file(cfg.output_dir / "heatmap.csv",
             [&](std::ostream& os) { csv::write_heatmap(os, map); });
  write_file(cfg.output_dir / "sparsity.txt", [&](std::ostream& os) {
    os << std::setprecision(17) << report.sparsity << '\n';
  });

  const auto f0 = consensus_functionals(report.result.traj.states.front());
  const auto fT = consensus_functionals(report.result.traj.states.back());
  log << "r = " << cfg.nmpc.r << ", H = " << cfg.nmpc.horizon << '\n'
      << "V(0) = " << f0.V << ", V(T) = " << fT.V << '\n'
      << "sparsity: " << report.sparsity << '\n';
  return report;
}

std::vector<StudyEntry> cmd_meanfield(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  auto entries = run_study(cfg.n_list, cfg.mixture, cfg.model, cfg.cost(), cfg.descent.tol,
                           cfg.descent.k_max);

  prepare_output(cfg);
  write_file(cfg.output_dir / "study.csv",
             [&](std::ostream& os) { csv::write_study(os, entries); });
  for (const auto& e : entries) {
    if (e.error) {
      log << "N = " << e.record.N << " failed: " << *e.error << '\n';
      continue;
    }
    write_file(cfg.output_dir / ("marginal_N" + std::to_string(e.record.N) + ".csv"),
               [&](std::ostream& os) { csv::write_marginals(os, e, cfg.bins); });
    log << "N = " << e.record.N << ": J* = " << e.record.J_star
        << ", iterations = " << e.record.iterations << ", wall time = " << e.record.wall_time
        << " s\n";
  }
  return entries;
}

}  // namespace flock
