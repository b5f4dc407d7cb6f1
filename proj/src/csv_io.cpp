#include "flock/csv_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace flock::csv {

namespace {

void set_precision(std::ostream& os) { os << std::setprecision(17); }

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  set_precision(os);
  const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().dim();
  os << "t,agent";
  for (std::size_t c = 1; c <= dim; ++c) os << ",x" << c;
  for (std::size_t c = 1; c <= dim; ++c) os << ",v" << c;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const SwarmState& s = traj.states[k];
    for (std::size_t i = 0; i < s.agents(); ++i) {
      os << traj.grid.time(k) << ',' << i;
      for (double a : s.x.row(i)) os << ',' << a;
      for (double a : s.v.row(i)) os << ',' << a;
      os << '\n';
    }
  }
}

void write_functionals(std::ostream& os, const Trajectory& traj) {
  set_precision(os);
  os << "t,V,X\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto f = consensus_functionals(traj.states[k]);
    os << traj.grid.time(k) << ',' << f.V << ',' << f.X << '\n';
  }
}

void write_control(std::ostream& os, const ControlField& u, const TimeGrid& grid) {
  set_precision(os);
  os << "t,agent";
  for (std::size_t c = 1; c <= u.dim(); ++c) os << ",u" << c;
  os << '\n';
  for (std::size_t k = 0; k < u.nodes(); ++k)
    for (std::size_t i = 0; i < u.agents(); ++i) {
      os << grid.time(k) << ',' << i;
      for (double a : u[k].row(i)) os << ',' << a;
      os << '\n';
    }
}

void write_heatmap(std::ostream& os, const HeatMap& map) {
  set_precision(os);
  for (std::size_t i = 0; i < map.agents(); ++i) {
    for (std::size_t k = 0; k < map.nodes(); ++k) {
      if (k > 0) os << ',';
      os << map(i, k);
    }
    os << '\n';
  }
}

void write_history(std::ostream& os, const OcpResult& result) {
  set_precision(os);
  os << "iter,cost,grad_norm\n";
  for (std::size_t k = 0; k < result.cost_history.size(); ++k)
    os << k << ',' << result.cost_history[k] << ',' << result.grad_norm_history[k] << '\n';
}

void write_study(std::ostream& os, const std::vector<StudyEntry>& entries) {
  set_precision(os);
  os << "N,J_star,iterations,wall_time,mean_control_norm,V_final\n";
  for (const auto& e : entries) {
    if (e.error) continue;
    const auto& r = e.record;
    os << r.N << ',' << r.J_star << ',' << r.iterations << ',' << r.wall_time << ','
       << r.mean_control_norm << ',' << r.V_final << '\n';
  }
}

void write_marginals(std::ostream& os, const StudyEntry& entry, std::size_t bins) {
  set_precision(os);
  os << "axis,lo,hi,free,controlled\n";
  const auto& free_final = entry.free.states.back().v;
  const auto& ctrl_final = entry.controlled.states.back().v;
  const std::size_t last = entry.free.states.size() - 1;
  for (std::size_t axis = 0; axis < free_final.dim(); ++axis) {
    double lo = free_final(0, axis);
    double hi = lo;
    for (const AgentArray* v : {&free_final, &ctrl_final})
      for (std::size_t i = 0; i < v->agents(); ++i) {
        lo = std::min(lo, (*v)(i, axis));
        hi = std::max(hi, (*v)(i, axis));
      }
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const auto hf = velocity_marginal(entry.free, last, axis, bins, lo, hi);
    const auto hc = velocity_marginal(entry.controlled, last, axis, bins, lo, hi);
    for (std::size_t b = 0; b < bins; ++b)
      os << axis + 1 << ',' << hf.edges[b] << ',' << hf.edges[b + 1] << ',' << hf.counts[b] << ','
         << hc.counts[b] << '\n';
  }
}

SwarmState read_state(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("state csv: missing header");
  const auto header = split_row(line);
  if (header.size() < 3 || header[0] != "agent" || (header.size() - 1) % 2 != 0)
    throw std::runtime_error("state csv: header must be agent,x1..xd,v1..vd");
  const std::size_t dim = (header.size() - 1) / 2;

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw std::runtime_error("state csv: row " + std::to_string(rows.size()) +
                               " has the wrong number of columns");
    if (std::stoull(cells[0]) != rows.size())
      throw std::runtime_error("state csv: agents must be listed in order from 0");
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(std::stod(cells[c]));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error("state csv: no agents");

  SwarmState state(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < dim; ++c) {
      state.x(i, c) = rows[i][c];
      state.v(i, c) = rows[i][dim + c];
    }
  state.validate();
  return state;
}

SwarmState read_state(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("state csv: cannot open " + path.string());
  return read_state(is);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace flock::csv
