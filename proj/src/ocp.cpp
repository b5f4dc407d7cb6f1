#include "flock/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flock {

namespace {

struct Evaluation {
  Trajectory traj;
  AdjointTrajectory adjoint;
  ControlField grad;
  double cost = 0.0;
  double grad_norm = 0.0;
};

Evaluation evaluate(const SwarmState& state0, const ControlField& u, const ModelParams& params,
                    const CostParams& cost) {
  Evaluation e;
  e.traj = integrate_forward(state0, u, cost.grid, params);
  e.cost = total_cost(e.traj, cost);
  e.adjoint = integrate_adjoint(e.traj, params, cost);
  e.grad = compute_gradient(u, e.adjoint, cost, params);
  e.grad_norm = l2_norm(e.grad, cost.grid);
  return e;
}

void clamp(ControlField& u, double bound) {
  for (std::size_t k = 0; k < u.nodes(); ++k)
    for (double& a : u[k].flat()) a = std::clamp(a, -bound, bound);
}

}  // namespace

double running_cost(const SwarmState& state, const AgentArray& u_k, double gamma) {
  if (!u_k.same_shape(state.v)) throw std::invalid_argument("running_cost: shape mismatch");
  return velocity_deviation(state.v) + gamma * squared_norm(u_k) / static_cast<double>(state.agents());
}

double total_cost(const Trajectory& traj, const CostParams& cost) {
  const TimeGrid& grid = traj.grid;
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.nodes; ++k)
    acc += grid.weight(k) * running_cost(traj.states[k], traj.control[k], cost.gamma);
  return acc;
}

double total_cost(const SwarmState& state0, const ControlField& u, const ModelParams& params,
                  const CostParams& cost) {
  return total_cost(integrate_forward(state0, u, cost.grid, params), cost);
}

AdjointRates adjoint_rhs(const SwarmState& state, const AgentArray& p, const AgentArray& q,
                         const ModelParams& params) {
  if (!p.same_shape(state.x) || !q.same_shape(state.v))
    throw std::invalid_argument("adjoint_rhs: shape mismatch");
  SwarmState rates = free_rhs_vjp(state, SwarmState(p, q), params);
  rates.v.axpy(1.0, velocity_deviation_gradient(state.v));
  return {std::move(rates.x), std::move(rates.v)};
}

ControlField compute_gradient(const ControlField& u, const AdjointTrajectory& adj,
                              const CostParams& cost, const ModelParams& params) {
  if (adj.q.size() != u.nodes()) throw std::invalid_argument("compute_gradient: node mismatch");
  const double scale = 2.0 * cost.gamma / static_cast<double>(params.N);
  ControlField grad = u;
  for (std::size_t k = 0; k < u.nodes(); ++k) {
    grad[k] *= scale;
    grad[k].axpy(1.0, adj.q[k]);
  }
  return grad;
}

ControlField fd_gradient(const SwarmState& state0, const ControlField& u, const ModelParams& params,
                         const CostParams& cost, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: h must be > 0");
  ControlField grad(u.nodes(), u.agents(), u.dim());
  ControlField probe = u;
  for (std::size_t k = 0; k < u.nodes(); ++k) {
    const double w = cost.grid.weight(k);
    auto entries = probe[k].flat();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const double saved = entries[e];
      entries[e] = saved + h;
      const double plus = total_cost(state0, probe, params, cost);
      entries[e] = saved - h;
      const double minus = total_cost(state0, probe, params, cost);
      entries[e] = saved;
      grad[k].flat()[e] = (plus - minus) / (2.0 * h) / w;
    }
  }
  return grad;
}

OcpResult bb_descent(const SwarmState& state0, const ControlField& u0, const ModelParams& params,
                     const CostParams& cost, const DescentOptions& options) {
  params.validate();
  cost.validate();
  if (!(options.tol >= 0.0)) throw std::invalid_argument("bb_descent: tol must be >= 0");
  if (options.k_max < 1) throw std::invalid_argument("bb_descent: k_max must be >= 1");
  if (!(options.alpha_init > 0.0))
    throw std::invalid_argument("bb_descent: alpha_init must be > 0");

  ControlField u = u0;
  if (options.u_max) clamp(u, *options.u_max);
  Evaluation current = evaluate(state0, u, params, cost);

  OcpResult result;
  result.cost_history.push_back(current.cost);
  result.grad_norm_history.push_back(current.grad_norm);

  ControlField u_prev;
  ControlField grad_prev;
  std::size_t k = 0;
  while (current.grad_norm > options.tol && k < options.k_max) {
    double alpha = options.alpha_init;
    if (k > 0) {
      ControlField s = u;
      s.axpy(-1.0, u_prev);
      ControlField y = current.grad;
      y.axpy(-1.0, grad_prev);
      const double yy = dot(y, y);
      const double candidate = dot(s, y) / yy;
      if (yy >= 1e-14 && std::isfinite(candidate) && candidate > 0.0) alpha = candidate;
    }

    u_prev = u;
    grad_prev = current.grad;
    u.axpy(-alpha, current.grad);
    if (options.u_max) clamp(u, *options.u_max);

    current = evaluate(state0, u, params, cost);
    ++k;
    if (!std::isfinite(current.cost) || !std::isfinite(current.grad_norm))
      throw std::runtime_error("bb_descent: non-finite cost or gradient at iteration " +
                               std::to_string(k));
    result.step_history.push_back(alpha);
    result.cost_history.push_back(current.cost);
    result.grad_norm_history.push_back(current.grad_norm);
  }

  result.u_opt = std::move(u);
  result.traj = std::move(current.traj);
  result.adjoint = std::move(current.adjoint);
  result.iterations = k;
  result.converged = current.grad_norm <= options.tol;
  return result;
}

double stationarity_residual(const ControlField& u, const AdjointTrajectory& adj,
                             const CostParams& cost, const ModelParams& params) {
  const double scale = static_cast<double>(params.N) / (2.0 * cost.gamma);
  ControlField r = u;
  for (std::size_t k = 0; k < u.nodes(); ++k) r[k].axpy(scale, adj.q[k]);
  return l2_norm(r, cost.grid);
}

}  // namespace flock
