#include "faris/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace faris {
namespace {

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.line < 0) return "(override)";
  return "line " + std::to_string(mark.line + 1);
}

void check_keys(const YAML::Node& node, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(section + ": expected a mapping at " + where(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + (section.empty() ? key : section + "." + key) + "' at " +
                        where(kv.first));
    }
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, const std::string& section, T& out) {
  const YAML::Node node = map[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + section + "." + key + "' at " + where(node));
  }
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void set_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t i,
              const YAML::Node& value) {
  const std::string& part = parts[i];
  const bool last = i + 1 == parts.size();
  if (node.IsSequence()) {
    if (!is_index(part)) throw ConfigError("override: '" + part + "' is not a sequence index");
    const auto idx = std::stoul(part);
    if (idx >= node.size()) throw ConfigError("override: index " + part + " out of range");
    if (last) {
      node[idx] = value;
    } else {
      set_path(node[idx], parts, i + 1, value);
    }
    return;
  }
  if (last) {
    node[part] = value;
  } else {
    YAML::Node child = node[part];
    if (!child) node[part] = YAML::Node(YAML::NodeType::Map);
    set_path(node[part], parts, i + 1, value);
  }
}

void apply_override(YAML::Node& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + text + "' must look like key.path=value");
  }
  std::vector<std::string> parts;
  std::stringstream ss(text.substr(0, eq));
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ConfigError("override '" + text + "' has an empty path component");
    parts.push_back(p);
  }
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + text + "': " + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  set_path(root, parts, 0, value);
}

ScenarioSpec read_scenario(const YAML::Node& node, std::size_t index) {
  const std::string section = "scenarios." + std::to_string(index);
  check_keys(node, section, {"name", "mode", "sweep_var", "sweep_values", "trials", "master_seed"});
  ScenarioSpec s;
  read(node, "name", section, s.name);
  if (s.name.empty()) throw ConfigError(section + ": missing name at " + where(node));
  std::string text = "faris";
  read(node, "mode", section, text);
  try {
    s.mode = parse_mode(text);
    text = "none";
    read(node, "sweep_var", section, text);
    s.sweep_var = parse_sweep_var(text);
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(section + ": " + e.what());
  }
  read(node, "sweep_values", section, s.sweep_values);
  if (s.sweep_var == SweepVar::kNone && !node["sweep_values"]) s.sweep_values = {0.0};
  read(node, "trials", section, s.trials);
  if (node["master_seed"]) {
    s.has_master_seed = true;
    read(node, "master_seed", section, s.master_seed);
  }
  return s;
}

}  // namespace

Config parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(root, o);

  Config cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root, "", {"geometry", "system", "m_o", "seed", "threads", "saa_samples", "inner",
                        "cem", "outer", "bfs", "scenarios"});

  ExperimentBase& b = cfg.base;
  if (const auto g = root["geometry"]) {
    check_keys(g, "geometry", {"m_x", "m_y", "w_x", "wavelength_m"});
    read(g, "m_x", "geometry", b.geom.m_x);
    read(g, "m_y", "geometry", b.geom.m_y);
    read(g, "w_x", "geometry", b.geom.w_x);
    read(g, "wavelength_m", "geometry", b.geom.wavelength);
  }
  if (const auto s = root["system"]) {
    check_keys(s, "system", {"tx_power_dbm", "p_max_dbm", "g_max_db", "noise_ris_dbm",
                             "noise_mu_dbm", "rician_k", "l_f_m", "l_u_m", "pl_exp_f", "pl_exp_u",
                             "mu_azimuth_deg", "mu_elevation_deg"});
    auto& d = b.system;
    read(s, "tx_power_dbm", "system", d.tx_power_dbm);
    read(s, "p_max_dbm", "system", d.p_max_dbm);
    read(s, "g_max_db", "system", d.g_max_db);
    read(s, "noise_ris_dbm", "system", d.noise_ris_dbm);
    read(s, "noise_mu_dbm", "system", d.noise_mu_dbm);
    read(s, "rician_k", "system", d.rician_k);
    read(s, "l_f_m", "system", d.l_f_m);
    read(s, "l_u_m", "system", d.l_u_m);
    read(s, "pl_exp_f", "system", d.pl_exp_f);
    read(s, "pl_exp_u", "system", d.pl_exp_u);
    read(s, "mu_azimuth_deg", "system", d.mu_azimuth_deg);
    read(s, "mu_elevation_deg", "system", d.mu_elevation_deg);
  }
  read(root, "m_o", "", b.m_o);
  read(root, "seed", "", cfg.seed);
  read(root, "threads", "", cfg.threads);
  read(root, "saa_samples", "", b.outer.saa_samples);
  if (const auto n = root["inner"]) {
    check_keys(n, "inner", {"eps_v", "n_rand", "max_iters", "solver_tol", "solver_max_iters",
                            "rank_one_ratio"});
    auto& in = b.outer.inner;
    read(n, "eps_v", "inner", in.eps_v);
    read(n, "n_rand", "inner", in.n_rand);
    read(n, "max_iters", "inner", in.max_inner_iters);
    read(n, "solver_tol", "inner", in.solver_tol);
    read(n, "solver_max_iters", "inner", in.solver_max_iters);
    read(n, "rank_one_ratio", "inner", in.rank_one_ratio_threshold);
  }
  if (const auto c = root["cem"]) {
    check_keys(c, "cem", {"n_mc", "rho", "omega", "eps_c", "max_iters", "nu_tol"});
    auto& cem = b.outer.cem;
    read(c, "n_mc", "cem", cem.n_mc);
    read(c, "rho", "cem", cem.rho);
    read(c, "omega", "cem", cem.omega);
    read(c, "eps_c", "cem", cem.eps_c);
    read(c, "max_iters", "cem", cem.max_cem_iters);
    read(c, "nu_tol", "cem", cem.nu_bisect_tol);
  }
  if (const auto o = root["outer"]) {
    check_keys(o, "outer", {"eps_out", "max_iters"});
    read(o, "eps_out", "outer", b.outer.eps_out);
    read(o, "max_iters", "outer", b.outer.max_outer_iters);
  }
  if (const auto f = root["bfs"]) {
    check_keys(f, "bfs", {"phase_bits", "gain_levels", "max_configs", "trials"});
    read(f, "phase_bits", "bfs", b.bfs.phase_bits);
    read(f, "gain_levels", "bfs", b.bfs.gain_levels);
    read(f, "max_configs", "bfs", b.bfs.max_search_size);
    read(f, "trials", "bfs", cfg.bfs_trials);
  }
  if (const auto list = root["scenarios"]) {
    if (!list.IsSequence()) throw ConfigError("scenarios: expected a list at " + where(list));
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.scenarios.push_back(read_scenario(list[i], i));
      if (!names.insert(cfg.scenarios.back().name).second) {
        throw ConfigError("duplicate scenario name '" + cfg.scenarios.back().name + "'");
      }
    }
  }

  try {
    b.geom.validate();
    b.outer.validate();
    b.bfs.validate();
    b.outer.cem.validate(b.geom.num_elements());
    b.system.to_linear().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (b.m_o < 1 || b.m_o > b.geom.num_elements()) {
    throw ConfigError("m_o=" + std::to_string(b.m_o) + " must lie in [1, " +
                      std::to_string(b.geom.num_elements()) + "]");
  }
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.bfs_trials < 1) throw ConfigError("bfs.trials must be >= 1");
  return cfg;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return parse_config("", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string default_config_yaml() {
  const Config cfg;
  const ExperimentBase& b = cfg.base;
  YAML::Emitter out;
  out.SetDoublePrecision(15);
  out << YAML::BeginMap;
  out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "m_x" << YAML::Value << b.geom.m_x;
  out << YAML::Key << "m_y" << YAML::Value << b.geom.m_y;
  out << YAML::Key << "w_x" << YAML::Value << b.geom.w_x;
  out << YAML::Key << "wavelength_m" << YAML::Value << b.geom.wavelength;
  out << YAML::EndMap;
  const auto& d = b.system;
  out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tx_power_dbm" << YAML::Value << d.tx_power_dbm;
  out << YAML::Key << "p_max_dbm" << YAML::Value << d.p_max_dbm;
  out << YAML::Key << "g_max_db" << YAML::Value << d.g_max_db;
  out << YAML::Key << "noise_ris_dbm" << YAML::Value << d.noise_ris_dbm;
  out << YAML::Key << "noise_mu_dbm" << YAML::Value << d.noise_mu_dbm;
  out << YAML::Key << "rician_k" << YAML::Value << d.rician_k;
  out << YAML::Key << "l_f_m" << YAML::Value << d.l_f_m;
  out << YAML::Key << "l_u_m" << YAML::Value << d.l_u_m;
  out << YAML::Key << "pl_exp_f" << YAML::Value << d.pl_exp_f;
  out << YAML::Key << "pl_exp_u" << YAML::Value << d.pl_exp_u;
  out << YAML::Key << "mu_azimuth_deg" << YAML::Value << d.mu_azimuth_deg;
  out << YAML::Key << "mu_elevation_deg" << YAML::Value << d.mu_elevation_deg;
  out << YAML::EndMap;
  out << YAML::Key << "m_o" << YAML::Value << b.m_o;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "threads" << YAML::Value << cfg.threads;
  out << YAML::Key << "saa_samples" << YAML::Value << b.outer.saa_samples;
  const auto& in = b.outer.inner;
  out << YAML::Key << "inner" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps_v" << YAML::Value << in.eps_v;
  out << YAML::Key << "n_rand" << YAML::Value << in.n_rand;
  out << YAML::Key << "max_iters" << YAML::Value << in.max_inner_iters;
  out << YAML::Key << "solver_tol" << YAML::Value << in.solver_tol;
  out << YAML::Key << "solver_max_iters" << YAML::Value << in.solver_max_iters;
  out << YAML::Key << "rank_one_ratio" << YAML::Value << in.rank_one_ratio_threshold;
  out << YAML::EndMap;
  const auto& cem = b.outer.cem;
  out << YAML::Key << "cem" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_mc" << YAML::Value << cem.n_mc << YAML::Comment("0 means 5*M");
  out << YAML::Key << "rho" << YAML::Value << cem.rho;
  out << YAML::Key << "omega" << YAML::Value << cem.omega;
  out << YAML::Key << "eps_c" << YAML::Value << cem.eps_c;
  out << YAML::Key << "max_iters" << YAML::Value << cem.max_cem_iters;
  out << YAML::Key << "nu_tol" << YAML::Value << cem.nu_bisect_tol;
  out << YAML::EndMap;
  out << YAML::Key << "outer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps_out" << YAML::Value << b.outer.eps_out;
  out << YAML::Key << "max_iters" << YAML::Value << b.outer.max_outer_iters;
  out << YAML::EndMap;
  out << YAML::Key << "bfs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "phase_bits" << YAML::Value << b.bfs.phase_bits;
  out << YAML::Key << "gain_levels" << YAML::Value << b.bfs.gain_levels;
  out << YAML::Key << "max_configs" << YAML::Value << b.bfs.max_search_size;
  out << YAML::Key << "trials" << YAML::Value << cfg.bfs_trials;
  out << YAML::EndMap;
  out << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Scenario make_scenario(const Config& cfg, const std::string& name) {
  for (const ScenarioSpec& spec : cfg.scenarios) {
    if (spec.name != name) continue;
    Scenario sc;
    sc.name = spec.name;
    sc.mode = spec.mode;
    sc.sweep_var = spec.sweep_var;
    sc.sweep_values = spec.sweep_values;
    sc.trials = spec.trials;
    sc.master_seed = spec.has_master_seed ? spec.master_seed : cfg.seed;
    sc.base = cfg.base;
    sc.threads = cfg.threads;
    return sc;
  }
  std::string known;
  for (const auto& s : cfg.scenarios) known += (known.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scenario '" + name + "'; available: " +
                    (known.empty() ? std::string("(none)") : known));
}

}  // namespace faris
