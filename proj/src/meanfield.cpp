#include "flock/meanfield.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "flock/pso.hpp"

namespace flock {

void MixtureConfig::validate(std::size_t dim) const {
  if (mu1.size() != dim || mu2.size() != dim)
    throw std::invalid_argument("mixture: means must have the state dimension");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("mixture: sigmas must be > 0");
  if (!(weight > 0.0 && weight < 1.0))
    throw std::invalid_argument("mixture: weight must lie in (0, 1)");
}

SwarmState sample_initial(std::size_t N, const MixtureConfig& cfg) {
  if (N < 1) throw std::invalid_argument("sample_initial: N must be >= 1");
  const std::size_t dim = cfg.mu1.size();
  cfg.validate(dim);

  std::mt19937_64 gen(cfg.seed);
  std::bernoulli_distribution first(cfg.weight);
  std::normal_distribution<double> normal(0.0, 1.0);

  AgentArray x(N, dim);
  for (std::size_t i = 0; i < N; ++i) {
    const bool pick_first = first(gen);
    const auto& mu = pick_first ? cfg.mu1 : cfg.mu2;
    const double sigma = pick_first ? cfg.sigma1 : cfg.sigma2;
    for (std::size_t c = 0; c < dim; ++c) x(i, c) = mu[c] + sigma * normal(gen);
  }
  AgentArray v = x;
  return {std::move(x), std::move(v)};
}

std::vector<StudyEntry> run_study(const std::vector<std::size_t>& N_list,
                                  const MixtureConfig& mixture, const ModelParams& params,
                                  const CostParams& cost, double tol, std::size_t k_max) {
  if (N_list.empty()) throw std::invalid_argument("run_study: empty N list");
  if (!std::is_sorted(N_list.begin(), N_list.end()) ||
      std::adjacent_find(N_list.begin(), N_list.end()) != N_list.end())
    throw std::invalid_argument("run_study: N list must be strictly increasing");

  std::vector<StudyEntry> entries;
  entries.reserve(N_list.size());
  for (std::size_t N : N_list) {
    StudyEntry entry;
    entry.record.N = N;
    try {
      MixtureConfig draw = mixture;
      draw.seed = derive_seed({mixture.seed, N});
      const SwarmState state0 = sample_initial(N, draw);

      ModelParams model = params;
      model.N = N;
      model.d = state0.dim();
      const ControlField zero(cost.grid.nodes, N, model.d);
      entry.free = integrate_forward(state0, zero, cost.grid, model);

      const auto t0 = std::chrono::steady_clock::now();
      DescentOptions options;
      options.tol = tol;
      options.k_max = k_max;
      OcpResult solved = bb_descent(state0, zero, model, cost, options);
      const auto t1 = std::chrono::steady_clock::now();

      entry.record.wall_time = std::chrono::duration<double>(t1 - t0).count();
      entry.record.J_star = solved.cost_history.back();
      entry.record.iterations = solved.iterations;
      entry.record.mean_control_norm = control_norm_stats(solved.u_opt, cost.grid).mean_norm;
      entry.record.V_final = consensus_functionals(solved.traj.states.back()).V;
      entry.converged = solved.converged;
      entry.controlled = std::move(solved.traj);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

Histogram1D velocity_marginal(const Trajectory& traj, std::size_t node, std::size_t axis,
                              std::size_t bins) {
  if (node >= traj.states.size()) throw std::out_of_range("velocity_marginal: node out of range");
  const AgentArray& v = traj.states[node].v;
  if (axis >= v.dim()) throw std::out_of_range("velocity_marginal: axis out of range");
  double lo = v(0, axis);
  double hi = lo;
  for (std::size_t i = 1; i < v.agents(); ++i) {
    lo = std::min(lo, v(i, axis));
    hi = std::max(hi, v(i, axis));
  }
  if (lo == hi) return {{lo - 0.5, lo + 0.5}, {1.0}};
  return velocity_marginal(traj, node, axis, bins, lo, hi);
}

Histogram1D velocity_marginal(const Trajectory& traj, std::size_t node, std::size_t axis,
                              std::size_t bins, double lo, double hi) {
  if (node >= traj.states.size()) throw std::out_of_range("velocity_marginal: node out of range");
  const AgentArray& v = traj.states[node].v;
  if (axis >= v.dim()) throw std::out_of_range("velocity_marginal: axis out of range");
  if (bins < 1) throw std::invalid_argument("velocity_marginal: bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("velocity_marginal: empty range");

  Histogram1D hist;
  hist.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) hist.edges[b] = lo + width * static_cast<double>(b);
  hist.edges.back() = hi;
  hist.counts.assign(bins, 0.0);

  const double unit = 1.0 / static_cast<double>(v.agents());
  for (std::size_t i = 0; i < v.agents(); ++i) {
    const double pos = std::floor((v(i, axis) - lo) / width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    hist.counts[b] += unit;
  }
  return hist;
}

double max_window_mass(const Histogram1D& hist, std::size_t width) {
  const std::size_t bins = hist.counts.size();
  if (width == 0) return 0.0;
  if (width >= bins) return std::accumulate(hist.counts.begin(), hist.counts.end(), 0.0);
  double best = 0.0;
  for (std::size_t b = 0; b + width <= bins; ++b) {
    const double mass = std::accumulate(hist.counts.begin() + static_cast<std::ptrdiff_t>(b),
                                        hist.counts.begin() + static_cast<std::ptrdiff_t>(b + width), 0.0);
    best = std::max(best, mass);
  }
  return best;
}

ControlNormStats control_norm_stats(const ControlField& u, const TimeGrid& grid) {
  ControlNormStats stats;
  const std::size_t nodes = u.nodes();
  const std::size_t n = u.agents();
  if (nodes == 0 || n == 0) return stats;

  std::vector<double> norms(nodes * n);
  double peak = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (double a : u[k].row(i)) acc += a * a;
      const double norm = std::sqrt(acc);
      norms[k * n + i] = norm;
      peak = std::max(peak, norm);
      sum += norm;
    }
  stats.mean_norm = sum / static_cast<double>(nodes * n);
  if (peak == 0.0) return stats;

  const double cut = 1e-2 * peak;
  std::size_t first_quiet = nodes;
  for (std::size_t k = nodes; k-- > 0;) {
    const bool quiet = std::all_of(norms.begin() + static_cast<std::ptrdiff_t>(k * n),
                                   norms.begin() + static_cast<std::ptrdiff_t>((k + 1) * n),
                                   [cut](double a) { return a < cut; });
    if (!quiet) break;
    first_quiet = k;
  }
  stats.near_zero_time = first_quiet < nodes ? grid.time(first_quiet) : grid.T;
  return stats;
}

}  // namespace flock
