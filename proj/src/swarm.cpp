#include "flock/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace flock {

namespace {

// Kernel as a function of the squared distance; avoids the sqrt in pair loops.
inline double kernel_sq(double r2, double K, double beta) {
  if (beta == 0.0) return K;
  if (beta == 1.0) return K / (1.0 + r2);
  return K * std::pow(1.0 + r2, -beta);
}

inline double slope_ratio_sq(double r2, double K, double beta) {
  if (beta == 0.0) return 0.0;
  if (beta == 1.0) {
    const double s = 1.0 + r2;
    return -2.0 * K / (s * s);
  }
  return -2.0 * beta * K * std::pow(1.0 + r2, -(beta + 1.0));
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    acc += diff * diff;
  }
  return acc;
}

void check_radius(double r) {
  if (!std::isfinite(r) || r < 0.0)
    throw std::domain_error("kernel radius must be finite and non-negative, got " +
                            std::to_string(r));
}

}  // namespace

void ModelParams::validate() const {
  if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("model: K must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("model: beta must be >= 0");
  if (N < 1) throw std::invalid_argument("model: N must be >= 1");
  if (d < 1) throw std::invalid_argument("model: d must be >= 1");
}

AgentArray::AgentArray(std::size_t agents, std::size_t dim, double fill)
    : agents_(agents), dim_(dim), data_(agents * dim, fill) {}

bool AgentArray::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double a) { return std::isfinite(a); });
}

void AgentArray::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void AgentArray::axpy(double a, const AgentArray& other) {
  if (!same_shape(other)) throw std::invalid_argument("AgentArray::axpy: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += a * other.data_[k];
}

AgentArray& AgentArray::operator*=(double s) {
  for (auto& a : data_) a *= s;
  return *this;
}

double dot(const AgentArray& a, const AgentArray& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
  const auto fa = a.flat();
  const auto fb = b.flat();
  double acc = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) acc += fa[k] * fb[k];
  return acc;
}

double squared_norm(const AgentArray& a) { return dot(a, a); }

SwarmState::SwarmState(AgentArray positions, AgentArray velocities)
    : x(std::move(positions)), v(std::move(velocities)) {
  if (!x.same_shape(v)) throw std::invalid_argument("SwarmState: x and v shapes differ");
}

void SwarmState::validate() const {
  if (!x.same_shape(v)) throw std::invalid_argument("SwarmState: x and v shapes differ");
  if (!all_finite()) throw std::invalid_argument("SwarmState: non-finite entry");
}

void SwarmState::axpy(double a, const SwarmState& other) {
  x.axpy(a, other.x);
  v.axpy(a, other.v);
}

double kernel_eval(double r, const ModelParams& params) {
  check_radius(r);
  return kernel_sq(r * r, params.K, params.beta);
}

double kernel_slope_ratio(double r, const ModelParams& params) {
  check_radius(r);
  return slope_ratio_sq(r * r, params.K, params.beta);
}

SwarmState free_rhs(const SwarmState& state, const ModelParams& params) {
  const std::size_t n = state.agents();
  const std::size_t dim = state.dim();
  SwarmState out(n, dim);
  out.x = state.v;
  const double inv_n = 1.0 / static_cast<double>(n);

#pragma omp parallel for if (n >= 64) schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = state.x.row(i);
    const auto vi = state.v.row(i);
    auto dvi = out.v.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = kernel_sq(squared_distance(xi, state.x.row(j)), params.K, params.beta);
      const auto vj = state.v.row(j);
      for (std::size_t c = 0; c < dim; ++c) dvi[c] += a * (vj[c] - vi[c]);
    }
    for (std::size_t c = 0; c < dim; ++c) dvi[c] *= inv_n;
  }
  return out;
}

SwarmState controlled_rhs(const SwarmState& state, const AgentArray& u_k,
                          const ModelParams& params) {
  if (!u_k.same_shape(state.v))
    throw std::invalid_argument("controlled_rhs: control shape does not match state");
  SwarmState out = free_rhs(state, params);
  out.v.axpy(1.0, u_k);
  return out;
}

SwarmState free_rhs_vjp(const SwarmState& state, const SwarmState& cot,
                        const ModelParams& params) {
  const std::size_t n = state.agents();
  const std::size_t dim = state.dim();
  if (!cot.x.same_shape(state.x) || !cot.v.same_shape(state.v))
    throw std::invalid_argument("free_rhs_vjp: cotangent shape mismatch");
  const AgentArray& p = cot.x;
  const AgentArray& q = cot.v;
  SwarmState out(n, dim);
  out.v = p;
  const double inv_n = 1.0 / static_cast<double>(n);

#pragma omp parallel for if (n >= 64) schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = state.x.row(i);
    const auto vi = state.v.row(i);
    const auto qi = q.row(i);
    auto dpi = out.x.row(i);
    auto dqi = out.v.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto xj = state.x.row(j);
      const auto vj = state.v.row(j);
      const auto qj = q.row(j);
      const double r2 = squared_distance(xi, xj);
      const double a = kernel_sq(r2, params.K, params.beta);
      const double s = slope_ratio_sq(r2, params.K, params.beta);
      double qv = 0.0;
      for (std::size_t c = 0; c < dim; ++c) qv += (qj[c] - qi[c]) * (vj[c] - vi[c]);
      for (std::size_t c = 0; c < dim; ++c) {
        dpi[c] += inv_n * s * qv * (xj[c] - xi[c]);
        dqi[c] += inv_n * a * (qj[c] - qi[c]);
      }
    }
  }
  return out;
}

double bilinear_B(const AgentArray& w, const AgentArray& v) {
  if (!w.same_shape(v)) throw std::invalid_argument("bilinear_B: shape mismatch");
  const std::size_t n = w.agents();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) acc += squared_distance(w.row(i), v.row(j));
  const double nn = static_cast<double>(n);
  return acc / (2.0 * nn * nn);
}

ConsensusFunctionals consensus_functionals(const SwarmState& state) {
  return {bilinear_B(state.v, state.v), bilinear_B(state.x, state.x)};
}

std::vector<double> mean_row(const AgentArray& a) {
  std::vector<double> mean(a.dim(), 0.0);
  for (std::size_t i = 0; i < a.agents(); ++i)
    for (std::size_t c = 0; c < a.dim(); ++c) mean[c] += a(i, c);
  for (auto& m : mean) m /= static_cast<double>(a.agents());
  return mean;
}

double velocity_deviation(const AgentArray& v) {
  const auto vbar = mean_row(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.agents(); ++i)
    for (std::size_t c = 0; c < v.dim(); ++c) {
      const double diff = vbar[c] - v(i, c);
      acc += diff * diff;
    }
  return acc / static_cast<double>(v.agents());
}

AgentArray velocity_deviation_gradient(const AgentArray& v) {
  const auto vbar = mean_row(v);
  const double scale = -2.0 / static_cast<double>(v.agents());
  AgentArray g(v.agents(), v.dim());
  for (std::size_t i = 0; i < v.agents(); ++i)
    for (std::size_t c = 0; c < v.dim(); ++c) g(i, c) = scale * (vbar[c] - v(i, c));
  return g;
}

std::string_view to_string(ConsensusVerdict verdict) {
  switch (verdict) {
    case ConsensusVerdict::Unconditional: return "Unconditional";
    case ConsensusVerdict::Conditional: return "Conditional";
    case ConsensusVerdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

double consensus_threshold(double lower, const ModelParams& params) {
  params.validate();
  if (!(params.beta > 0.5))
    throw std::invalid_argument("consensus_threshold: integral diverges for beta <= 1/2");
  if (!std::isfinite(lower) || lower < 0.0)
    throw std::domain_error("consensus_threshold: lower limit must be finite and >= 0");

  const double c = 2.0 * std::sqrt(static_cast<double>(params.N));
  const double K = params.K;
  const double beta = params.beta;

  if (beta == 1.0) return K / c * (std::numbers::pi / 2.0 - std::atan(c * lower));

  // Truncate where the integrand has dropped 12 decades below its value at
  // the lower limit, then add the power-law tail K (c s)^(-2 beta) beyond it.
  const double ratio = std::pow(1e12, 1.0 / beta);
  const double upper = std::sqrt(ratio * (1.0 + c * c * lower * lower) - 1.0) / c;

  auto integrand = [&](double s) { return kernel_sq(c * c * s * s, K, beta); };
  using boost::math::quadrature::gauss_kronrod;

  constexpr double panel_abs_tol = 1e-10;
  double total = 0.0;
  double a = lower;
  int panel = 0;
  while (a < upper) {
    const double b = std::min(upper, 2.0 * a + 1.0 / c);
    double err = 0.0;
    const double part = gauss_kronrod<double, 31>::integrate(integrand, a, b, 20, 1e-13, &err);
    if (!std::isfinite(part) || err > panel_abs_tol)
      throw std::runtime_error("consensus_threshold: quadrature did not converge on panel " +
                               std::to_string(panel) + " [" + std::to_string(a) + ", " +
                               std::to_string(b) + "], error estimate " + std::to_string(err));
    total += part;
    a = b;
    ++panel;
  }
  total += K * std::pow(c, -2.0 * beta) * std::pow(upper, 1.0 - 2.0 * beta) / (2.0 * beta - 1.0);
  return total;
}

ConsensusPrediction predict_consensus(const SwarmState& state0, const ModelParams& params) {
  params.validate();
  state0.validate();
  const auto [V0, X0] = consensus_functionals(state0);
  ConsensusPrediction out;
  out.sqrt_V0 = std::sqrt(V0);
  out.sqrt_X0 = std::sqrt(X0);
  if (params.beta <= 0.5) {
    out.verdict = ConsensusVerdict::Unconditional;
    return out;
  }
  ModelParams p = params;
  p.N = state0.agents();
  out.threshold = consensus_threshold(out.sqrt_X0, p);
  out.verdict = out.sqrt_V0 < out.threshold ? ConsensusVerdict::Conditional
                                            : ConsensusVerdict::Unknown;
  return out;
}

}  // namespace flock
