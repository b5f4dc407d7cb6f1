#pragma once

// CSV export of run results. Reals are written with 17 significant digits
// so files round-trip exactly and reruns are byte-identical.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <vector>

#include "flock/integrator.hpp"
#include "flock/meanfield.hpp"
#include "flock/nmpc.hpp"
#include "flock/ocp.hpp"

namespace flock::csv {

/// t,agent,x1..xd,v1..vd; one row per (node, agent).
void write_trajectory(std::ostream& os, const Trajectory& traj);

/// t,V,X
void write_functionals(std::ostream& os, const Trajectory& traj);

/// t,agent,u1..ud
void write_control(std::ostream& os, const ControlField& u, const TimeGrid& grid);

/// N rows by N_T columns, no header.
void write_heatmap(std::ostream& os, const HeatMap& map);

/// iter,cost,grad_norm
void write_history(std::ostream& os, const OcpResult& result);

/// N,J_star,iterations,wall_time,mean_control_norm,V_final; failed entries skipped.
void write_study(std::ostream& os, const std::vector<StudyEntry>& entries);

/// axis,lo,hi,free,controlled; both marginals share the bins of each axis.
void write_marginals(std::ostream& os, const StudyEntry& entry, std::size_t bins);

/// Reads agent,x1..xd,v1..vd (header required, agents in order 0..N-1).
SwarmState read_state(std::istream& is);
SwarmState read_state(const std::filesystem::path& path);

/// Opens `path` for writing or throws std::runtime_error.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace flock::csv
