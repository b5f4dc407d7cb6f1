#pragma once

// The four CLI workflows. Each runs to completion, writes its CSV files
// into cfg.output_dir in one pass at the end, and returns the in-memory
// results. Progress and summaries go to `log`.

#include <iosfwd>
#include <vector>

#include "flock/config.hpp"

namespace flock {

/// Initial state from the configured CSV file or a mixture draw with v = x.
SwarmState initial_state(const RunConfig& cfg);

struct SimulateReport {
  Trajectory traj;
  ConsensusPrediction prediction;
};

/// Free dynamics: trajectory.csv, functionals.csv.
SimulateReport cmd_simulate(const RunConfig& cfg, std::ostream& log);

struct OptimizeReport {
  OcpResult result;
  double zero_control_cost = 0.0;
  double stationarity = 0.0;
};

/// Barzilai-Borwein descent from zero control: control.csv, trajectory.csv,
/// functionals.csv, history.csv, heatmap.csv.
OptimizeReport cmd_optimize(const RunConfig& cfg, std::ostream& log);

struct SparseReport {
  NmpcResult result;
  double sparsity = 0.0;  // at relative threshold 1e-3
};

/// PSO-NMPC with the configured norm: control.csv, trajectory.csv,
/// functionals.csv, heatmap.csv, sparsity.txt.
SparseReport cmd_sparse(const RunConfig& cfg, std::ostream& log);

/// Mean-field study over cfg.n_list: study.csv and marginal_N<k>.csv.
std::vector<StudyEntry> cmd_meanfield(const RunConfig& cfg, std::ostream& log);

}  // namespace flock
