#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <limits>

#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"
#include "evbandit/experiment.hpp"

namespace evbandit::experiment {

namespace {

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("`" + key + "`: expected a number, got `" + value + "`");
  }
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("`" + key + "`: expected an integer, got `" + value + "`");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("`" + key + "`: expected a boolean, got `" + value + "`");
}

std::filesystem::path to_path(const std::string& value, const std::filesystem::path& base) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : io::split(text, ',')) {
    if (part.empty()) continue;
    const auto v = to_int("seeds", part);
    if (v < 0) throw ConfigError("seeds must be nonnegative");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

std::vector<bandit::PolicyKind> parse_policy_list(const std::string& text) {
  std::vector<bandit::PolicyKind> out;
  for (const auto& part : io::split(text, ',')) {
    if (part.empty()) continue;
    const auto kind = bandit::parse_policy(part);
    if (!kind) throw ConfigError("unknown policy `" + part + "`");
    out.push_back(*kind);
  }
  if (out.empty()) throw ConfigError("policy list is empty");
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& raw, const std::filesystem::path& base_dir) {
  const std::string value(io::trim(raw));
  const std::string name = section + "." + key;
  auto num = [&] { return to_double(name, value); };
  auto integer = [&] { return to_int(name, value); };

  if (section == "instance") {
    if (key == "nodes") return void(cfg.nodes_file = to_path(value, base_dir));
    if (key == "edges") return void(cfg.edges_file = to_path(value, base_dir));
    if (key == "feasibility_stations") {
      return void(cfg.feasibility_stations_file = to_path(value, base_dir));
    }
    if (key == "feasibility_edges") {
      return void(cfg.feasibility_edges_file = to_path(value, base_dir));
    }
    if (key == "source") return void(cfg.source = integer());
    if (key == "target") return void(cfg.target = integer());
  } else if (section == "generator") {
    auto& g = cfg.generator;
    if (key == "nodes") {
      const auto n = integer();
      if (n < 2) throw ConfigError("generator.nodes must be at least 2");
      return void(g.node_count = static_cast<std::size_t>(n));
    }
    if (key == "charger_fraction") return void(g.charger_fraction = num());
    if (key == "lat0") return void(g.lat0 = num());
    if (key == "lon0") return void(g.lon0 = num());
    if (key == "extent_lat_deg") return void(g.extent_lat_deg = num());
    if (key == "extent_lon_deg") return void(g.extent_lon_deg = num());
    if (key == "connection_radius_m") return void(g.connection_radius_m = num());
    if (key == "speed_min_mps") return void(g.speed_min_mps = num());
    if (key == "speed_max_mps") return void(g.speed_max_mps = num());
    if (key == "max_power_choices_w") {
      g.max_power_choices_w.clear();
      for (const auto& part : io::split(value, ',')) {
        if (!part.empty()) g.max_power_choices_w.push_back(to_double(name, part));
      }
      return;
    }
    if (key == "seed") return void(g.seed = static_cast<std::uint64_t>(integer()));
  } else if (section == "vehicle") {
    auto& v = cfg.vehicle;
    if (key == "mass_kg") return void(v.mass_kg = num());
    if (key == "gravity_mps2") return void(v.gravity_mps2 = num());
    if (key == "rolling_coeff") return void(v.rolling_coeff = num());
    if (key == "drag_coeff") return void(v.drag_coeff = num());
    if (key == "frontal_area_m2") return void(v.frontal_area_m2 = num());
    if (key == "air_density_kgm3") return void(v.air_density_kgm3 = num());
    if (key == "efficiency") return void(v.efficiency = num());
    if (key == "battery_capacity_ws") return void(v.battery_capacity_ws = num());
    if (key == "soc_min_frac") return void(v.soc_min_frac = num());
    if (key == "soc_max_frac") return void(v.soc_max_frac = num());
  } else if (section == "prior") {
    auto& p = cfg.priors;
    if (key == "queue_alpha") return void(p.queue.alpha = num());
    if (key == "queue_beta") return void(p.queue.beta = num());
    if (key == "charge_ln_pi") return void(p.charge.ln_pi = num());
    if (key == "charge_gamma") return void(p.charge.gamma_p = num());
    if (key == "charge_xi") return void(p.charge.xi = num());
    if (key == "deficit_scale") return void(p.charge.deficit_scale = num());
  } else if (section == "experiment") {
    if (key == "horizon") return void(cfg.horizon = integer());
    if (key == "seeds") return void(cfg.seeds = parse_seed_list(value));
    if (key == "policies") return void(cfg.policies = parse_policy_list(value));
    if (key == "truncation") return void(cfg.truncation = to_bool(name, value));
    if (key == "oracle_priors") return void(cfg.oracle_priors = to_bool(name, value));
    if (key == "oracle_concentration") return void(cfg.oracle_concentration = num());
    if (key == "jobs") {
      const auto j = integer();
      if (j < 1) throw ConfigError("experiment.jobs must be at least 1");
      return void(cfg.jobs = static_cast<unsigned>(j));
    }
    if (key == "output_dir") return void(cfg.output_dir = to_path(value, base_dir));
  }
  throw ConfigError("unknown setting `" + name + "`");
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(file.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig cfg;
  const auto base = file.parent_path();
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError("setting `" + section + "` must live in a [section]");
    }
    for (const auto& [key, leaf] : body) {
      apply_setting(cfg, section, key, leaf.get_value<std::string>(), base);
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> warnings;
  if (horizon < 1) throw ConfigError("experiment.horizon must be at least 1");
  if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  for (const auto s : seeds) {
    if (s > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw ConfigError("seeds must fit in a signed 64-bit integer");
    }
  }
  if (policies.empty()) throw ConfigError("experiment.policies must not be empty");
  if (!(oracle_concentration > 1.0)) throw ConfigError("oracle_concentration must exceed 1");
  if (nodes_file.empty() != edges_file.empty()) {
    throw ConfigError("instance.nodes and instance.edges must be given together");
  }
  if (feasibility_stations_file.empty() != feasibility_edges_file.empty()) {
    throw ConfigError("feasibility cache needs both stations and edges files");
  }
  if (!nodes_file.empty() && (!source || !target)) {
    throw ConfigError("instance.source and instance.target are required with instance files");
  }
  try {
    vehicle.validate();
    priors.queue.validate();
    if (!(priors.queue.alpha > 1.0)) {
      throw ConfigError("prior.queue_alpha must exceed 1 for MAP estimates");
    }
    priors.charge.validate();
    if (nodes_file.empty()) generator.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  const auto& c = priors.charge;
  if (c.xi * std::exp(0.5 * c.ln_pi) >= 1.0) {
    warnings.push_back(
        "charge prior has xi*sqrt(pi) >= 1; it still satisfies the integrability condition "
        "pi^(1/xi)*xi/gamma < 1, which is the one enforced");
  }
  return warnings;
}

}  // namespace evbandit::experiment
