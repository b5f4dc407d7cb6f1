#pragma once

// Smooth consensus control problem
//
//   J(u) = int_0^T (1/N) sum_j ( |vbar - v_j|^2 + gamma |u_j|^2 ) dt
//
// discretised with the trapezoidal rule on the RK4 grid. The gradient is
// represented in the trapezoid-weighted L2 inner product, where it takes the
// pointwise form grad[k] = q[k] + (2 gamma / N) u[k].

#include <cstddef>
#include <optional>
#include <vector>

#include "flock/integrator.hpp"
#include "flock/swarm.hpp"

namespace flock {

/// (1/N) sum_j ( |vbar - v_j|^2 + gamma |u_j|^2 ).
double running_cost(const SwarmState& state, const AgentArray& u_k, double gamma);

/// Trapezoidal quadrature of the running cost along an existing trajectory.
double total_cost(const Trajectory& traj, const CostParams& cost);

double total_cost(const SwarmState& state0, const ControlField& u, const ModelParams& params,
                  const CostParams& cost);

struct AdjointRates {
  AgentArray dp;  // -dp/dt
  AgentArray dq;  // -dq/dt
};

/// Right-hand sides of the backward costate equations,
///   -dp_i/dt = (1/N) sum_j a'(r)/r <q_j - q_i, v_j - v_i> (x_j - x_i)
///   -dq_i/dt = p_i + (1/N) sum_j a(r) (q_j - q_i) - (2/N)(vbar - v_i).
AdjointRates adjoint_rhs(const SwarmState& state, const AgentArray& p, const AgentArray& q,
                         const ModelParams& params);

/// grad[k][i] = q[k][i] + (2 gamma / N) u[k][i].
ControlField compute_gradient(const ControlField& u, const AdjointTrajectory& adj,
                              const CostParams& cost, const ModelParams& params);

/// Central differences of total_cost, one control entry at a time, divided
/// by the node's trapezoid weight so the result is directly comparable with
/// compute_gradient. Test oracle; costs 2 * N_T * N * d forward solves.
ControlField fd_gradient(const SwarmState& state0, const ControlField& u, const ModelParams& params,
                         const CostParams& cost, double h);

struct DescentOptions {
  double tol = 1e-3;
  std::size_t k_max = 500;
  double alpha_init = 1e-2;           // first step and BB fallback
  std::optional<double> u_max;        // componentwise box clamp, off by default
};

struct OcpResult {
  ControlField u_opt;
  Trajectory traj;
  AdjointTrajectory adjoint;
  std::vector<double> cost_history;
  std::vector<double> grad_norm_history;
  std::vector<double> step_history;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Gradient descent with Barzilai-Borwein steps. Stops once the discrete
/// L2 norm of the gradient is <= tol or after k_max updates. Throws
/// std::runtime_error if the cost or gradient becomes non-finite.
OcpResult bb_descent(const SwarmState& state0, const ControlField& u0, const ModelParams& params,
                     const CostParams& cost, const DescentOptions& options);

/// Discrete L2 norm of u + (N / 2 gamma) q, the residual of the pointwise
/// optimality condition u = -(N / 2 gamma) q.
double stationarity_residual(const ControlField& u, const AdjointTrajectory& adj,
                             const CostParams& cost, const ModelParams& params);

}  // namespace flock
