#pragma once

// Cucker-Smale alignment model: agent states, communication kernel,
// right-hand sides and the consensus functionals V and X.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace flock {

struct ModelParams {
  double K = 1.0;     // kernel strength, > 0
  double beta = 1.0;  // kernel decay exponent, >= 0
  std::size_t N = 1;  // number of agents
  std::size_t d = 2;  // space dimension

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Row-major N x d block holding one d-vector per agent.
class AgentArray {
 public:
  AgentArray() = default;
  AgentArray(std::size_t agents, std::size_t dim, double fill = 0.0);

  std::size_t agents() const noexcept { return agents_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t c) { return data_[i * dim_ + c]; }
  double operator()(std::size_t i, std::size_t c) const { return data_[i * dim_ + c]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  bool same_shape(const AgentArray& other) const noexcept {
    return agents_ == other.agents_ && dim_ == other.dim_;
  }
  bool all_finite() const noexcept;
  void fill(double value);

  /// this += a * other
  void axpy(double a, const AgentArray& other);
  AgentArray& operator*=(double s);

  friend bool operator==(const AgentArray&, const AgentArray&) = default;

 private:
  std::size_t agents_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double dot(const AgentArray& a, const AgentArray& b);
double squared_norm(const AgentArray& a);

/// Positions and velocities of the whole population at one instant.
struct SwarmState {
  AgentArray x;
  AgentArray v;

  SwarmState() = default;
  SwarmState(std::size_t agents, std::size_t dim) : x(agents, dim), v(agents, dim) {}
  SwarmState(AgentArray positions, AgentArray velocities);

  std::size_t agents() const noexcept { return x.agents(); }
  std::size_t dim() const noexcept { return x.dim(); }

  /// Throws std::invalid_argument on shape mismatch or non-finite entries.
  void validate() const;
  bool all_finite() const noexcept { return x.all_finite() && v.all_finite(); }

  /// this += a * other, on both components.
  void axpy(double a, const SwarmState& other);

  friend bool operator==(const SwarmState&, const SwarmState&) = default;
};

/// a(r) = K / (1 + r^2)^beta.
double kernel_eval(double r, const ModelParams& params);

/// a'(r) / r in closed form, -2 beta K / (1 + r^2)^(beta + 1). Finite at r = 0.
double kernel_slope_ratio(double r, const ModelParams& params);

/// Time derivative of the uncontrolled system. The returned x block holds
/// dx/dt = v and the v block holds the alignment term.
SwarmState free_rhs(const SwarmState& state, const ModelParams& params);

/// free_rhs with u_k added to the velocity derivative.
SwarmState controlled_rhs(const SwarmState& state, const AgentArray& u_k,
                          const ModelParams& params);

/// Transposed Jacobian of free_rhs at `state` applied to the cotangent
/// (p, q) = (cot.x, cot.v). This is the homogeneous part of the costate
/// equations; the result's x block pairs with p and its v block with q.
SwarmState free_rhs_vjp(const SwarmState& state, const SwarmState& cot,
                        const ModelParams& params);

/// B(w, v) = 1/(2N^2) sum_{i,j} |w_i - v_j|^2.
double bilinear_B(const AgentArray& w, const AgentArray& v);

struct ConsensusFunctionals {
  double V = 0.0;  // velocity spread B(v, v)
  double X = 0.0;  // position spread B(x, x)
};

ConsensusFunctionals consensus_functionals(const SwarmState& state);

/// Row mean of an agent array.
std::vector<double> mean_row(const AgentArray& a);

inline std::vector<double> mean_velocity(const SwarmState& state) { return mean_row(state.v); }

/// (1/N) sum_j |vbar - v_j|^2, which equals B(v, v).
double velocity_deviation(const AgentArray& v);

/// Gradient of velocity_deviation with respect to v: -(2/N)(vbar - v_i).
AgentArray velocity_deviation_gradient(const AgentArray& v);

enum class ConsensusVerdict { Unconditional, Conditional, Unknown };

std::string_view to_string(ConsensusVerdict verdict);

struct ConsensusPrediction {
  ConsensusVerdict verdict = ConsensusVerdict::Unknown;
  double sqrt_V0 = 0.0;
  double sqrt_X0 = 0.0;
  double threshold = 0.0;  // integral bound; 0 when not evaluated
};

/// Integral of a(2 sqrt(N) s) over [lower, infinity). Requires beta > 1/2.
/// Uses the arctan closed form for beta = 1 and adaptive Gauss-Kronrod
/// panels otherwise. Throws std::runtime_error if a panel does not converge.
double consensus_threshold(double lower, const ModelParams& params);

/// Self-organisation verdict from the unconditional (beta <= 1/2) and
/// conditional (sqrt V(0) below the kernel integral) sufficient criteria.
ConsensusPrediction predict_consensus(const SwarmState& state0, const ModelParams& params);

}  // namespace flock
