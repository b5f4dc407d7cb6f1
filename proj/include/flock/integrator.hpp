#pragma once

// Fixed-step RK4 on a uniform time grid: forward state integration under a
// piecewise-constant control, and the matching backward costate sweep.

#include <cstddef>
#include <vector>

#include "flock/swarm.hpp"

namespace flock {

/// Uniform grid t_k = k * dt, k = 0 .. nodes - 1, with t_{nodes-1} = T.
struct TimeGrid {
  double T = 1.0;
  double dt = 0.1;
  std::size_t nodes = 11;

  /// Builds the grid with nodes = round(T / dt) + 1. Throws if T is not an
  /// integer multiple of dt (to 1e-9 relative) or either value is not positive.
  static TimeGrid from_horizon(double T, double dt);

  double time(std::size_t k) const { return k + 1 == nodes ? T : static_cast<double>(k) * dt; }
  std::size_t steps() const noexcept { return nodes - 1; }

  /// Composite trapezoidal weight of node k.
  double weight(std::size_t k) const { return (k == 0 || k + 1 == nodes) ? 0.5 * dt : dt; }

  void validate() const;
};

/// Control weight and time grid of the consensus cost.
struct CostParams {
  double gamma = 1.0;
  TimeGrid grid;

  void validate() const;
};

/// Nodal control values, u[k] held constant on [t_k, t_{k+1}).
class ControlField {
 public:
  ControlField() = default;
  ControlField(std::size_t nodes, std::size_t agents, std::size_t dim);

  std::size_t nodes() const noexcept { return values_.size(); }
  std::size_t agents() const noexcept { return agents_; }
  std::size_t dim() const noexcept { return dim_; }

  AgentArray& operator[](std::size_t k) { return values_[k]; }
  const AgentArray& operator[](std::size_t k) const { return values_[k]; }

  bool all_finite() const noexcept;
  void axpy(double a, const ControlField& other);
  bool same_shape(const ControlField& other) const noexcept {
    return nodes() == other.nodes() && agents_ == other.agents_ && dim_ == other.dim_;
  }

  friend bool operator==(const ControlField&, const ControlField&) = default;

 private:
  std::size_t agents_ = 0;
  std::size_t dim_ = 0;
  std::vector<AgentArray> values_;
};

double dot(const ControlField& a, const ControlField& b);

/// Discrete L2(0, T) norm, sqrt(dt * sum_k sum_i |u[k][i]|^2).
double l2_norm(const ControlField& u, const TimeGrid& grid);

/// Forward solution on the grid together with the control that produced it.
struct Trajectory {
  TimeGrid grid;
  std::vector<SwarmState> states;
  ControlField control;
};

/// Costates on the grid. (p[k], q[k]) is the stage-averaged costate of step
/// k normalised by the trapezoid weight of node k, so the cost gradient at
/// node k is q[k] + (2 gamma / N) u[k]. Both vanish at the final node.
struct AdjointTrajectory {
  TimeGrid grid;
  std::vector<AgentArray> p;
  std::vector<AgentArray> q;
};

/// One classical RK4 step with u_k frozen across all four stages.
SwarmState rk4_step(const SwarmState& state, const AgentArray& u_k, double dt,
                    const ModelParams& params);

/// Integrates the controlled system over the grid. Throws std::runtime_error
/// naming the step if the state becomes non-finite.
Trajectory integrate_forward(const SwarmState& state0, const ControlField& u, const TimeGrid& grid,
                             const ModelParams& params);

/// Backward sweep of the exact discrete adjoint of integrate_forward and the
/// trapezoidal cost. Each step applies the RK4 reverse recursion to the
/// costate equations, with the running-cost source -(2/N)(vbar - v_i)
/// injected at the nodes.
AdjointTrajectory integrate_adjoint(const Trajectory& traj, const ModelParams& params,
                                    const CostParams& cost);

}  // namespace flock
