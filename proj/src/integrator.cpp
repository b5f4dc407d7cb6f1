#include "flock/integrator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flock {

namespace {

void check_shapes(const SwarmState& state0, const ControlField& u, const TimeGrid& grid,
                  const ModelParams& params) {
  state0.validate();
  if (state0.agents() != params.N || state0.dim() != params.d)
    throw std::invalid_argument("state shape does not match model parameters");
  if (u.nodes() != grid.nodes || u.agents() != params.N || u.dim() != params.d)
    throw std::invalid_argument("control field shape does not match grid and model");
}

}  // namespace

TimeGrid TimeGrid::from_horizon(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0) || !std::isfinite(T) || !std::isfinite(dt))
    throw std::invalid_argument("time grid: T and dt must be positive");
  const double ratio = T / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * steps)
    throw std::invalid_argument("time grid: T = " + std::to_string(T) +
                                " is not an integer multiple of dt = " + std::to_string(dt));
  return {T, dt, static_cast<std::size_t>(steps) + 1};
}

void TimeGrid::validate() const {
  if (!(T > 0.0) || !(dt > 0.0) || nodes < 2)
    throw std::invalid_argument("time grid: invalid T, dt or node count");
  if (std::abs(static_cast<double>(nodes - 1) * dt - T) > 1e-12 * T + 1e-9 * dt)
    throw std::invalid_argument("time grid: (nodes - 1) * dt does not reach T");
}

void CostParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("cost: gamma must be > 0");
  grid.validate();
}

ControlField::ControlField(std::size_t nodes, std::size_t agents, std::size_t dim)
    : agents_(agents), dim_(dim), values_(nodes, AgentArray(agents, dim)) {}

bool ControlField::all_finite() const noexcept {
  for (const auto& a : values_)
    if (!a.all_finite()) return false;
  return true;
}

void ControlField::axpy(double a, const ControlField& other) {
  if (!same_shape(other)) throw std::invalid_argument("ControlField::axpy: shape mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k].axpy(a, other.values_[k]);
}

double dot(const ControlField& a, const ControlField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: control shape mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.nodes(); ++k) acc += dot(a[k], b[k]);
  return acc;
}

double l2_norm(const ControlField& u, const TimeGrid& grid) {
  return std::sqrt(grid.dt * dot(u, u));
}

SwarmState rk4_step(const SwarmState& state, const AgentArray& u_k, double dt,
                    const ModelParams& params) {
  const SwarmState k1 = controlled_rhs(state, u_k, params);
  SwarmState y = state;
  y.axpy(0.5 * dt, k1);
  const SwarmState k2 = controlled_rhs(y, u_k, params);
  y = state;
  y.axpy(0.5 * dt, k2);
  const SwarmState k3 = controlled_rhs(y, u_k, params);
  y = state;
  y.axpy(dt, k3);
  const SwarmState k4 = controlled_rhs(y, u_k, params);

  SwarmState next = state;
  next.axpy(dt / 6.0, k1);
  next.axpy(dt / 3.0, k2);
  next.axpy(dt / 3.0, k3);
  next.axpy(dt / 6.0, k4);
  return next;
}

Trajectory integrate_forward(const SwarmState& state0, const ControlField& u, const TimeGrid& grid,
                             const ModelParams& params) {
  params.validate();
  grid.validate();
  check_shapes(state0, u, grid, params);

  Trajectory traj{grid, {}, u};
  traj.states.reserve(grid.nodes);
  traj.states.push_back(state0);
  for (std::size_t k = 0; k + 1 < grid.nodes; ++k) {
    SwarmState next = rk4_step(traj.states.back(), u[k], grid.dt, params);
    if (!next.all_finite())
      throw std::runtime_error("integrate_forward: non-finite state at step " + std::to_string(k));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

AdjointTrajectory integrate_adjoint(const Trajectory& traj, const ModelParams& params,
                                    const CostParams& cost) {
  params.validate();
  const TimeGrid& grid = traj.grid;
  if (traj.states.size() != grid.nodes)
    throw std::invalid_argument("integrate_adjoint: incomplete trajectory");
  if (cost.grid.nodes != grid.nodes)
    throw std::invalid_argument("integrate_adjoint: cost grid does not match trajectory");

  const std::size_t n = params.N;
  const std::size_t dim = params.d;
  const std::size_t last = grid.nodes - 1;
  const double h = grid.dt;

  AdjointTrajectory adj{grid, std::vector<AgentArray>(grid.nodes, AgentArray(n, dim)),
                        std::vector<AgentArray>(grid.nodes, AgentArray(n, dim))};

  // lambda is the sensitivity of the discrete cost to the state at node k+1.
  SwarmState lambda(n, dim);
  lambda.v = velocity_deviation_gradient(traj.states[last].v);
  lambda.v *= grid.weight(last);

  for (std::size_t k = last; k-- > 0;) {
    const SwarmState& y = traj.states[k];
    const AgentArray& u_k = traj.control[k];

    // Recompute the forward stages of step k.
    const SwarmState& Y1 = y;
    const SwarmState K1 = controlled_rhs(Y1, u_k, params);
    SwarmState Y2 = y;
    Y2.axpy(0.5 * h, K1);
    const SwarmState K2 = controlled_rhs(Y2, u_k, params);
    SwarmState Y3 = y;
    Y3.axpy(0.5 * h, K2);
    const SwarmState K3 = controlled_rhs(Y3, u_k, params);
    SwarmState Y4 = y;
    Y4.axpy(h, K3);

    // Reverse the stage recursion.
    SwarmState K4bar(n, dim);
    K4bar.axpy(h / 6.0, lambda);
    const SwarmState Y4bar = free_rhs_vjp(Y4, K4bar, params);

    SwarmState K3bar(n, dim);
    K3bar.axpy(h / 3.0, lambda);
    K3bar.axpy(h, Y4bar);
    const SwarmState Y3bar = free_rhs_vjp(Y3, K3bar, params);

    SwarmState K2bar(n, dim);
    K2bar.axpy(h / 3.0, lambda);
    K2bar.axpy(0.5 * h, Y3bar);
    const SwarmState Y2bar = free_rhs_vjp(Y2, K2bar, params);

    SwarmState K1bar(n, dim);
    K1bar.axpy(h / 6.0, lambda);
    K1bar.axpy(0.5 * h, Y2bar);
    const SwarmState Y1bar = free_rhs_vjp(Y1, K1bar, params);

    const double inv_w = 1.0 / grid.weight(k);
    SwarmState stage_sum = K1bar;
    stage_sum.axpy(1.0, K2bar);
    stage_sum.axpy(1.0, K3bar);
    stage_sum.axpy(1.0, K4bar);
    adj.p[k] = stage_sum.x;
    adj.p[k] *= inv_w;
    adj.q[k] = stage_sum.v;
    adj.q[k] *= inv_w;

    lambda.axpy(1.0, Y1bar);
    lambda.axpy(1.0, Y2bar);
    lambda.axpy(1.0, Y3bar);
    lambda.axpy(1.0, Y4bar);
    lambda.v.axpy(grid.weight(k), velocity_deviation_gradient(y.v));

    if (!lambda.all_finite() || !adj.q[k].all_finite() || !adj.p[k].all_finite())
      throw std::runtime_error("integrate_adjoint: non-finite costate at step " +
                               std::to_string(k));
  }
  return adj;
}

}  // namespace flock
