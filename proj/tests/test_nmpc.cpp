#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "flock/nmpc.hpp"
#include "flock/ocp.hpp"

using namespace flock;

namespace {

SwarmState random_state(std::uint64_t seed, std::size_t n, std::size_t d, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, scale);
  SwarmState s(n, d);
  for (auto& a : s.x.flat()) a = g(gen);
  for (auto& a : s.v.flat()) a = g(gen);
  return s;
}

SwarmState consensus_state(std::size_t n) {
  SwarmState s = random_state(1, n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    s.v(i, 0) = 0.5;
    s.v(i, 1) = 0.25;
  }
  return s;
}

}  // namespace

TEST_CASE("window cost") {
  NmpcConfig cfg{1, 1, 1.0};
  const ModelParams p{1, 1, 1, 2};
  CHECK(nmpc_cost(consensus_state(3), std::vector<double>(2 * 3 * 2, 0.0), {1, 1, 3, 2}, cfg, 0.1) == 0.0);

  SwarmState single(1, 2);
  const std::vector<double> u{3.0, -4.0};
  CHECK(nmpc_cost(single, u, p, cfg, 0.1) == 7.0);
  cfg.r = 2;
  CHECK(nmpc_cost(single, u, p, cfg, 0.1) == 25.0);

  CHECK_THROWS_AS(nmpc_cost(single, std::vector<double>{1.0, 2.0, 3.0}, p, cfg, 0.1),
                  std::invalid_argument);

  SUBCASE("full-frame window equals the undiscounted nodal sum along the trajectory") {
    const auto grid = TimeGrid::from_horizon(1.0, 0.1);
    const ModelParams model{1, 1, 4, 2};
    const SwarmState s = random_state(3, 4, 2);
    std::mt19937_64 gen(4);
    std::normal_distribution<double> g(0.0, 0.3);
    ControlField u_field(grid.nodes, 4, 2);
    std::vector<double> window;
    for (std::size_t k = 0; k < grid.nodes; ++k)
      for (auto& a : u_field[k].flat()) {
        a = g(gen);
        window.push_back(a);
      }
    for (int r : {1, 2}) {
      const NmpcConfig full{grid.nodes - 1, r, 0.7};
      const auto traj = integrate_forward(s, u_field, grid, model);
      double expected = 0.0;
      for (std::size_t k = 0; k < grid.nodes; ++k) {
        double pen = 0.0;
        for (double a : u_field[k].flat()) pen += r == 1 ? std::abs(a) : a * a;
        expected += velocity_deviation(traj.states[k].v) + 0.7 * pen / 4.0;
      }
      CHECK(nmpc_cost(s, window, model, full, grid.dt) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("configuration checks") {
  const auto grid = TimeGrid::from_horizon(1.0, 0.1);
  CHECK_NOTHROW(NmpcConfig({10, 1, 1.0}).validate(grid));
  CHECK_THROWS_AS(NmpcConfig({11, 1, 1.0}).validate(grid), std::invalid_argument);
  CHECK_THROWS_AS(NmpcConfig({0, 1, 1.0}).validate(grid), std::invalid_argument);
  CHECK_THROWS_AS(NmpcConfig({3, 3, 1.0}).validate(grid), std::invalid_argument);
  CHECK_THROWS_AS(NmpcConfig({3, 1, 0.0}).validate(grid), std::invalid_argument);
}

TEST_CASE("receding-horizon loop") {
  const auto grid = TimeGrid::from_horizon(1.0, 0.1);
  PsoConfig pso;
  pso.swarm_size = 20;
  pso.max_iters = 40;
  pso.seed = 5;

  SUBCASE("consensus needs no control") {
    const auto r = nmpc_loop(consensus_state(3), grid, {1, 1, 3, 2}, {3, 1, 1.0}, pso);
    const auto map = heat_map(r.u_applied);
    for (double a : map.values()) CHECK(a <= 1e-6);
    for (const auto& s : r.traj.states) CHECK(consensus_functionals(s).V <= 1e-12);
  }

  SUBCASE("deterministic under a fixed seed") {
    const SwarmState s = random_state(2, 3, 2);
    const auto a = nmpc_loop(s, grid, {1, 1, 3, 2}, {2, 1, 0.5}, pso);
    const auto b = nmpc_loop(s, grid, {1, 1, 3, 2}, {2, 1, 0.5}, pso);
    CHECK(a.u_applied == b.u_applied);
    CHECK(a.traj.states.back() == b.traj.states.back());
  }

  SUBCASE("applied controls reproduce the trajectory") {
    const SwarmState s = random_state(6, 3, 2);
    const ModelParams p{1, 1, 3, 2};
    const auto r = nmpc_loop(s, grid, p, {3, 2, 0.5}, pso);
    const auto replay = integrate_forward(s, r.u_applied, grid, p);
    CHECK(replay.states.back() == r.traj.states.back());
    CHECK(r.window_costs.size() == grid.nodes - 1);
    CHECK(squared_norm(r.u_applied[grid.nodes - 1]) == 0.0);
    CHECK(consensus_functionals(r.traj.states.back()).V < consensus_functionals(s).V);
  }
}

TEST_CASE("heat map and sparsity") {
  const auto grid = TimeGrid::from_horizon(1.0, 0.1);
  ControlField u(grid.nodes, 3, 2);
  HeatMap zero = heat_map(u);
  CHECK(zero.agents() == 3);
  CHECK(zero.nodes() == grid.nodes);
  for (double a : zero.values()) CHECK(a == 0.0);
  CHECK(sparsity_fraction(zero, 0.5) == 1.0);

  u[3](1, 0) = 3.0;
  u[3](1, 1) = 4.0;
  const HeatMap one = heat_map(u);
  CHECK(one(1, 3) == 5.0);
  double others = 0.0;
  for (double a : one.values()) others += a;
  CHECK(others == 5.0);

  HeatMap sparse(10, 10);
  sparse(4, 7) = 2.0;
  CHECK(sparsity_fraction(sparse, 0.5) == doctest::Approx(0.99));

  HeatMap uniform(4, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 5; ++k) uniform(i, k) = 1.5;
  CHECK(sparsity_fraction(uniform, 0.5) == 0.0);

  CHECK_THROWS_AS(sparsity_fraction(uniform, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sparsity_fraction(uniform, 1.0), std::invalid_argument);
}
