#pragma once

// Global-best particle swarm optimisation with inertia.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace flock {

struct PsoConfig {
  std::size_t swarm_size = 40;
  double c1 = 1.49;       // pull towards the particle's own best
  double c2 = 1.49;       // pull towards the swarm best
  double inertia = 0.72;  // 1 recovers the bare update without damping
  std::size_t max_iters = 100;
  double init_spread = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Where the swarm starts. Particle 0 sits exactly at `center` (zeros when
/// empty), the next particles at the given anchors, and the rest at
/// center + N(0, init_spread^2). `stream` separates random substreams of
/// independent runs sharing a seed.
struct PsoWarmStart {
  std::vector<double> center;
  std::vector<std::vector<double>> anchors;
  std::uint64_t stream = 0;
};

struct PsoResult {
  std::vector<double> z_best;
  double f_best = 0.0;
  std::vector<double> best_history;  // swarm best after initialisation and each iteration
  std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimises `objective` over R^D. Non-finite objective values count as
/// +infinity. Random draws come from per-(seed, stream, particle, iteration)
/// substreams, so results do not depend on evaluation order or threading.
PsoResult pso_minimize(const Objective& objective, std::size_t D, const PsoConfig& cfg,
                       const PsoWarmStart& start = {});

/// Mixes a list of integers into one 64-bit seed (splitmix64 finaliser).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace flock
