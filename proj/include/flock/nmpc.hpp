#pragma once

// Receding-horizon consensus control with an l_r control penalty, each
// window optimised by particle swarm search, plus heat-map diagnostics.

#include <cstddef>
#include <span>
#include <vector>

#include "flock/integrator.hpp"
#include "flock/pso.hpp"
#include "flock/swarm.hpp"

namespace flock {

struct NmpcConfig {
  std::size_t horizon = 3;  // H, prediction steps
  int r = 1;                // control norm exponent, 1 or 2
  double gamma = 1.0;

  void validate(const TimeGrid& grid) const;
};

/// Performance index of one window. `window` holds (H + 1) blocks of N x d
/// controls, flattened block-major; the state is rolled forward H RK4 steps
/// from state_k. Returns
///   sum_{h=0}^{H} (1/N) sum_j ( |vbar^{k+h} - v_j^{k+h}|^2 + gamma |u_j^{k+h}|_r^r ).
double nmpc_cost(const SwarmState& state_k, std::span<const double> window,
                 const ModelParams& params, const NmpcConfig& cfg, double dt);

struct NmpcResult {
  ControlField u_applied;
  Trajectory traj;
  std::vector<double> window_costs;  // PSO optimum of each window
};

/// Runs windows k = 0 .. N_T - 2 with horizon min(H, N_T - 1 - k), applying
/// only the first control block of each. Each window's swarm is centred on
/// the previous solution shifted one block, with zero control as an anchor.
/// The control at the final node is zero.
NmpcResult nmpc_loop(const SwarmState& state0, const TimeGrid& grid, const ModelParams& params,
                     const NmpcConfig& nmpc, const PsoConfig& pso);

/// values(i, k) = |u[k][i]|_2, agents by rows and time nodes by columns.
class HeatMap {
 public:
  HeatMap(std::size_t agents, std::size_t nodes)
      : agents_(agents), nodes_(nodes), values_(agents * nodes, 0.0) {}

  std::size_t agents() const noexcept { return agents_; }
  std::size_t nodes() const noexcept { return nodes_; }
  double& operator()(std::size_t i, std::size_t k) { return values_[i * nodes_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return values_[i * nodes_ + k]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t agents_;
  std::size_t nodes_;
  std::vector<double> values_;
};

HeatMap heat_map(const ControlField& u);

/// Fraction of entries strictly below rel_threshold * max; 1 for an all-zero map.
double sparsity_fraction(const HeatMap& map, double rel_threshold);

}  // namespace flock
