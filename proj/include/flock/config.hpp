#pragma once

// Run configuration: one INI-style file with [model], [grid], [cost],
// [descent], [nmpc], [pso], [mixture], [init] and [run] sections. Command
// line overrides use the same dotted keys, e.g. "model.N=40".

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flock/integrator.hpp"
#include "flock/meanfield.hpp"
#include "flock/nmpc.hpp"
#include "flock/ocp.hpp"
#include "flock/pso.hpp"
#include "flock/swarm.hpp"

namespace flock {

enum class InitialKind { Mixture, File };

struct InitialCondition {
  InitialKind kind = InitialKind::Mixture;
  std::filesystem::path file;  // CSV with header agent,x1..xd,v1..vd
};

struct RunConfig {
  ModelParams model{1.0, 1.0, 20, 2};
  TimeGrid grid = TimeGrid::from_horizon(10.0, 0.1);
  double gamma = 1.0;
  DescentOptions descent;
  NmpcConfig nmpc;
  PsoConfig pso;
  MixtureConfig mixture;
  InitialCondition init;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::vector<std::size_t> n_list{50, 100, 200, 400};
  std::size_t bins = 50;

  CostParams cost() const { return {gamma, grid}; }

  /// Checks every sub-configuration; throws std::invalid_argument.
  void validate() const;
};

using ConfigEntries = std::map<std::string, std::string>;

/// Flattened "section.key" -> value map read from an INI file. Lists are
/// joined with commas.
ConfigEntries read_config_file(const std::filesystem::path& path);

/// Builds a RunConfig from defaults plus entries. Unknown keys and
/// unparsable values throw std::invalid_argument. The run seed is copied
/// into the PSO and mixture seeds.
RunConfig make_run_config(const ConfigEntries& entries);

/// Reads the optional file, then applies overrides in order.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace flock
