#pragma once

// Particle study of the large-population limit: initial data drawn from a
// two-component Gaussian mixture with v = x, solved for increasing N.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flock/integrator.hpp"
#include "flock/ocp.hpp"
#include "flock/swarm.hpp"

namespace flock {

struct MixtureConfig {
  std::vector<double> mu1{-1.0, -1.0};
  std::vector<double> mu2{1.0, 1.0};
  double sigma1 = 0.3;
  double sigma2 = 0.3;
  double weight = 0.5;  // probability of the first component
  std::uint64_t seed = 0;

  void validate(std::size_t dim) const;
};

/// x_i ~ weight N(mu1, sigma1^2 I) + (1 - weight) N(mu2, sigma2^2 I), v_i = x_i.
SwarmState sample_initial(std::size_t N, const MixtureConfig& cfg);

struct StudyRecord {
  std::size_t N = 0;
  double J_star = 0.0;
  std::size_t iterations = 0;
  double wall_time = 0.0;  // seconds spent in the descent for this N
  double mean_control_norm = 0.0;
  double V_final = 0.0;
};

struct StudyEntry {
  StudyRecord record;
  bool converged = false;
  std::optional<std::string> error;  // set when this N failed; other fields unset
  Trajectory controlled;
  Trajectory free;
};

/// Solves the consensus problem for every N in N_list (increasing), each on
/// an independent draw seeded from (mixture.seed, N). A failure for one N is
/// recorded in its entry and the study continues.
std::vector<StudyEntry> run_study(const std::vector<std::size_t>& N_list,
                                  const MixtureConfig& mixture, const ModelParams& params,
                                  const CostParams& cost, double tol, std::size_t k_max);

struct Histogram1D {
  std::vector<double> edges;   // bins + 1, strictly increasing
  std::vector<double> counts;  // normalised to sum 1
};

/// Normalised histogram of velocity component `axis` at grid node `node`
/// over the data range. All-equal data gives one bin of unit width centred
/// on the value.
Histogram1D velocity_marginal(const Trajectory& traj, std::size_t node, std::size_t axis,
                              std::size_t bins);

/// Same on the fixed range [lo, hi]; values outside are counted in the end bins.
Histogram1D velocity_marginal(const Trajectory& traj, std::size_t node, std::size_t axis,
                              std::size_t bins, double lo, double hi);

/// Largest mass held by `width` adjacent bins.
double max_window_mass(const Histogram1D& hist, std::size_t width);

struct ControlNormStats {
  double mean_norm = 0.0;       // average of |u[k][i]| over nodes and agents
  double near_zero_time = 0.0;  // earliest t_k after which every |u[k'][i]| < 1e-2 max
};

ControlNormStats control_norm_stats(const ControlField& u, const TimeGrid& grid);

}  // namespace flock
