#include "flock/nmpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace flock {

namespace {

double control_penalty(std::span<const double> block, int r) {
  double acc = 0.0;
  if (r == 1) {
    for (double a : block) acc += std::abs(a);
  } else {
    for (double a : block) acc += a * a;
  }
  return acc;
}

AgentArray block_to_array(std::span<const double> block, std::size_t n, std::size_t dim) {
  AgentArray u(n, dim);
  std::copy(block.begin(), block.end(), u.flat().begin());
  return u;
}

}  // namespace

void NmpcConfig::validate(const TimeGrid& grid) const {
  if (horizon < 1 || horizon > grid.nodes - 1)
    throw std::invalid_argument("nmpc: horizon must satisfy 1 <= H <= N_T - 1");
  if (r != 1 && r != 2) throw std::invalid_argument("nmpc: r must be 1 or 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("nmpc: gamma must be > 0");
}

double nmpc_cost(const SwarmState& state_k, std::span<const double> window,
                 const ModelParams& params, const NmpcConfig& cfg, double dt) {
  const std::size_t n = state_k.agents();
  const std::size_t dim = state_k.dim();
  const std::size_t block = n * dim;
  if (block == 0 || window.empty() || window.size() % block != 0)
    throw std::invalid_argument("nmpc_cost: window is not a whole number of N x d blocks");
  const std::size_t blocks = window.size() / block;

  const double inv_n = 1.0 / static_cast<double>(n);
  SwarmState state = state_k;
  double acc = 0.0;
  for (std::size_t h = 0; h < blocks; ++h) {
    const auto u = window.subspan(h * block, block);
    acc += velocity_deviation(state.v) + cfg.gamma * inv_n * control_penalty(u, cfg.r);
    if (h + 1 < blocks) {
      state = rk4_step(state, block_to_array(u, n, dim), dt, params);
      if (!state.all_finite()) return std::numeric_limits<double>::infinity();
    }
  }
  return acc;
}

NmpcResult nmpc_loop(const SwarmState& state0, const TimeGrid& grid, const ModelParams& params,
                     const NmpcConfig& nmpc, const PsoConfig& pso) {
  params.validate();
  grid.validate();
  nmpc.validate(grid);
  pso.validate();
  state0.validate();
  if (state0.agents() != params.N || state0.dim() != params.d)
    throw std::invalid_argument("nmpc_loop: state shape does not match model parameters");

  const std::size_t n = params.N;
  const std::size_t dim = params.d;
  const std::size_t block = n * dim;

  NmpcResult result;
  result.u_applied = ControlField(grid.nodes, n, dim);
  result.traj.grid = grid;
  result.traj.states.reserve(grid.nodes);
  result.traj.states.push_back(state0);

  std::vector<double> previous;  // last window solution
  for (std::size_t k = 0; k + 1 < grid.nodes; ++k) {
    const std::size_t h_eff = std::min(nmpc.horizon, grid.nodes - 1 - k);
    const std::size_t D = (h_eff + 1) * block;

    PsoWarmStart start;
    start.stream = k;
    start.center.assign(D, 0.0);
    if (previous.size() > block) {
      const std::size_t carry = std::min(previous.size() - block, D);
      std::copy_n(previous.begin() + static_cast<std::ptrdiff_t>(block), carry,
                  start.center.begin());
    }
    start.anchors.emplace_back(D, 0.0);

    const SwarmState& current = result.traj.states.back();
    auto objective = [&](std::span<const double> z) {
      return nmpc_cost(current, z, params, nmpc, grid.dt);
    };
    PsoResult best = pso_minimize(objective, D, pso, start);

    AgentArray u_k = block_to_array(std::span<const double>(best.z_best).first(block), n, dim);
    SwarmState next = rk4_step(current, u_k, grid.dt, params);
    if (!next.all_finite())
      throw std::runtime_error("nmpc_loop: non-finite state at step " + std::to_string(k));
    result.u_applied[k] = std::move(u_k);
    result.window_costs.push_back(best.f_best);
    result.traj.states.push_back(std::move(next));
    previous = std::move(best.z_best);
  }
  result.traj.control = result.u_applied;
  return result;
}

HeatMap heat_map(const ControlField& u) {
  HeatMap map(u.agents(), u.nodes());
  for (std::size_t k = 0; k < u.nodes(); ++k)
    for (std::size_t i = 0; i < u.agents(); ++i) {
      double acc = 0.0;
      for (double a : u[k].row(i)) acc += a * a;
      map(i, k) = std::sqrt(acc);
    }
  return map;
}

double sparsity_fraction(const HeatMap& map, double rel_threshold) {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
    throw std::invalid_argument("sparsity_fraction: threshold must lie in (0, 1)");
  const auto values = map.values();
  if (values.empty()) return 1.0;
  const double peak = *std::max_element(values.begin(), values.end());
  if (peak == 0.0) return 1.0;
  const double cut = rel_threshold * peak;
  const auto below = std::count_if(values.begin(), values.end(), [cut](double a) { return a < cut; });
  return static_cast<double>(below) / static_cast<double>(values.size());
}

}  // namespace flock
