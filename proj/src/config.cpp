#include "flock/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

namespace flock {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw std::invalid_argument("config: " + key + " expects a number, got '" + text + "'");
  return value;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("config: " + key + " expects a non-negative integer, got '" +
                                text + "'");
  return value;
}

std::vector<double> to_vector(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(key, part));
  if (out.empty()) throw std::invalid_argument("config: " + key + " expects a list of numbers");
  return out;
}

}  // namespace

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text, ','))
    out.push_back(static_cast<std::size_t>(to_u64("N list", part)));
  if (out.empty()) throw std::invalid_argument("config: empty N list");
  return out;
}

void RunConfig::validate() const {
  model.validate();
  grid.validate();
  cost().validate();
  if (!(descent.tol >= 0.0) || descent.k_max < 1 || !(descent.alpha_init > 0.0))
    throw std::invalid_argument("descent: need tol >= 0, k_max >= 1, alpha_init > 0");
  if (descent.u_max && !(*descent.u_max > 0.0))
    throw std::invalid_argument("descent: u_max must be > 0");
  nmpc.validate(grid);
  pso.validate();
  mixture.validate(model.d);
  if (init.kind == InitialKind::File && init.file.empty())
    throw std::invalid_argument("init: kind = file requires init.file");
  if (bins < 1) throw std::invalid_argument("run: bins must be >= 1");
  if (n_list.empty()) throw std::invalid_argument("run: n_list must not be empty");
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("config: cannot read " + path.string());
  ConfigEntries entries;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path.string());
  } catch (const std::exception& e) {
    throw std::runtime_error("config: cannot parse " + path.string() + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string value;
    for (std::size_t k = 0; k < item.inputs.size(); ++k) {
      if (k > 0) value += ',';
      value += item.inputs[k];
    }
    entries[item.fullname()] = value;
  }
  return entries;
}

RunConfig make_run_config(const ConfigEntries& entries) {
  RunConfig cfg;
  double T = cfg.grid.T;
  double dt = cfg.grid.dt;
  bool mu1_set = false;
  bool mu2_set = false;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto size_setter = [](std::size_t& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) {
      field = static_cast<std::size_t>(to_u64(k, v));
    };
  };
  auto real_setter = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = to_double(k, v); };
  };

  const std::map<std::string, Setter> setters{
      {"model.K", real_setter(cfg.model.K)},
      {"model.beta", real_setter(cfg.model.beta)},
      {"model.N", size_setter(cfg.model.N)},
      {"model.d", size_setter(cfg.model.d)},
      {"grid.T", real_setter(T)},
      {"grid.dt", real_setter(dt)},
      {"cost.gamma", real_setter(cfg.gamma)},
      {"descent.tol", real_setter(cfg.descent.tol)},
      {"descent.k_max", size_setter(cfg.descent.k_max)},
      {"descent.alpha_init", real_setter(cfg.descent.alpha_init)},
      {"descent.u_max",
       [&](const std::string& k, const std::string& v) { cfg.descent.u_max = to_double(k, v); }},
      {"nmpc.H", size_setter(cfg.nmpc.horizon)},
      {"nmpc.r",
       [&](const std::string& k, const std::string& v) {
         cfg.nmpc.r = static_cast<int>(to_u64(k, v));
       }},
      {"nmpc.gamma", real_setter(cfg.nmpc.gamma)},
      {"pso.swarm_size", size_setter(cfg.pso.swarm_size)},
      {"pso.c1", real_setter(cfg.pso.c1)},
      {"pso.c2", real_setter(cfg.pso.c2)},
      {"pso.inertia", real_setter(cfg.pso.inertia)},
      {"pso.max_iters", size_setter(cfg.pso.max_iters)},
      {"pso.init_spread", real_setter(cfg.pso.init_spread)},
      {"mixture.mu1",
       [&](const std::string& k, const std::string& v) {
         cfg.mixture.mu1 = to_vector(k, v);
         mu1_set = true;
       }},
      {"mixture.mu2",
       [&](const std::string& k, const std::string& v) {
         cfg.mixture.mu2 = to_vector(k, v);
         mu2_set = true;
       }},
      {"mixture.sigma1", real_setter(cfg.mixture.sigma1)},
      {"mixture.sigma2", real_setter(cfg.mixture.sigma2)},
      {"mixture.weight", real_setter(cfg.mixture.weight)},
      {"init.kind",
       [&](const std::string& k, const std::string& v) {
         if (v == "mixture") cfg.init.kind = InitialKind::Mixture;
         else if (v == "file") cfg.init.kind = InitialKind::File;
         else throw std::invalid_argument("config: " + k + " must be 'mixture' or 'file'");
       }},
      {"init.file",
       [&](const std::string&, const std::string& v) {
         cfg.init.file = v;
         cfg.init.kind = InitialKind::File;
       }},
      {"run.seed", [&](const std::string& k, const std::string& v) { cfg.seed = to_u64(k, v); }},
      {"run.output_dir", [&](const std::string&, const std::string& v) { cfg.output_dir = v; }},
      {"run.n_list",
       [&](const std::string&, const std::string& v) { cfg.n_list = parse_size_list(v); }},
      {"run.bins", size_setter(cfg.bins)},
  };

  for (const auto& [key, value] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
    it->second(key, trim(value));
  }

  cfg.grid = TimeGrid::from_horizon(T, dt);
  if (!mu1_set) cfg.mixture.mu1.assign(cfg.model.d, -1.0);
  if (!mu2_set) cfg.mixture.mu2.assign(cfg.model.d, 1.0);
  cfg.pso.seed = cfg.seed;
  cfg.mixture.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  ConfigEntries entries;
  if (file) entries = read_config_file(*file);
  for (const auto& [key, value] : overrides) entries[key] = value;
  return make_run_config(entries);
}

}  // namespace flock
