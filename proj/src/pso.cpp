#include "flock/pso.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace flock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double safe_eval(const Objective& f, std::span<const double> z) {
  const double value = f(z);
  return std::isfinite(value) ? value : kInf;
}

// Lowest value wins; ties go to the lower index.
std::size_t argmin(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

void PsoConfig::validate() const {
  if (swarm_size < 2) throw std::invalid_argument("pso: swarm_size must be >= 2");
  if (max_iters < 1) throw std::invalid_argument("pso: max_iters must be >= 1");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("pso: c1, c2 must be > 0");
  if (!(inertia >= 0.0)) throw std::invalid_argument("pso: inertia must be >= 0");
  if (!(init_spread > 0.0)) throw std::invalid_argument("pso: init_spread must be > 0");
}

PsoResult pso_minimize(const Objective& objective, std::size_t D, const PsoConfig& cfg,
                       const PsoWarmStart& start) {
  cfg.validate();
  if (D < 1) throw std::invalid_argument("pso: dimension must be >= 1");
  if (!start.center.empty() && start.center.size() != D)
    throw std::invalid_argument("pso: warm-start centre has wrong dimension");
  for (const auto& a : start.anchors)
    if (a.size() != D) throw std::invalid_argument("pso: anchor has wrong dimension");

  const std::size_t S = cfg.swarm_size;
  const std::vector<double> center = start.center.empty() ? std::vector<double>(D, 0.0) : start.center;

  std::vector<std::vector<double>> z(S, center);
  std::vector<std::vector<double>> w(S, std::vector<double>(D, 0.0));
  for (std::size_t i = 1; i < S; ++i) {
    if (i - 1 < start.anchors.size()) {
      z[i] = start.anchors[i - 1];
      continue;
    }
    std::mt19937_64 gen(derive_seed({cfg.seed, start.stream, i, 0}));
    std::normal_distribution<double> noise(0.0, cfg.init_spread);
    for (auto& zj : z[i]) zj += noise(gen);
  }

  std::vector<double> f(S);
  auto evaluate_all = [&] {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < S; ++i) f[i] = safe_eval(objective, z[i]);
  };

  evaluate_all();
  PsoResult result;
  result.evaluations = S;
  std::vector<std::vector<double>> m = z;
  std::vector<double> fm = f;
  std::size_t h = argmin(fm);
  result.best_history.push_back(fm[h]);

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    for (std::size_t i = 0; i < S; ++i) {
      std::mt19937_64 gen(derive_seed({cfg.seed, start.stream, i, it}));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t j = 0; j < D; ++j) {
        const double xi = unit(gen);
        const double eta = unit(gen);
        w[i][j] = cfg.inertia * w[i][j] + cfg.c1 * xi * (m[i][j] - z[i][j]) +
                  cfg.c2 * eta * (m[h][j] - z[i][j]);
        z[i][j] += w[i][j];
      }
    }
    evaluate_all();
    result.evaluations += S;
    for (std::size_t i = 0; i < S; ++i) {
      if (f[i] < fm[i]) {
        fm[i] = f[i];
        m[i] = z[i];
      }
    }
    h = argmin(fm);
    result.best_history.push_back(fm[h]);
  }

  result.z_best = m[h];
  result.f_best = fm[h];
  return result;
}

}  // namespace flock
