#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faris/config.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  long long seed = -1;
  int threads = 0;
  std::string out_dir = "out";
  double max_configs = 0.0;
};

faris::Config load(const CommonOptions& opt) {
  std::vector<std::string> overrides = opt.overrides;
  if (opt.seed >= 0) overrides.push_back("seed=" + std::to_string(opt.seed));
  if (opt.threads > 0) overrides.push_back("threads=" + std::to_string(opt.threads));
  if (opt.max_configs > 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "bfs.max_configs=%.17g", opt.max_configs);
    overrides.emplace_back(buf);
  }
  return faris::load_config(opt.config_path, overrides);
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw faris::ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string join(const std::vector<int>& xs, char sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(xs[i]);
  }
  return s;
}

int cmd_run(const CommonOptions& opt) {
  const faris::Config cfg = load(opt);
  faris::OuterConfig outer = cfg.base.outer;
  outer.seed = cfg.seed;
  const faris::SystemParams params = cfg.base.system.to_linear();
  const faris::OuterResult res = faris::run(cfg.base.geom, params, cfg.base.m_o, outer);

  json j;
  j["m"] = cfg.base.geom.num_elements();
  j["m_o"] = cfg.base.m_o;
  j["seed"] = cfg.seed;
  j["saa_samples"] = outer.saa_samples;
  j["rate_bps_hz"] = res.rate_star;
  j["converged"] = res.converged;
  j["outer_iterations"] = res.iteration_count;
  j["selection"] = res.selection_star.indices;
  json v = json::array();
  for (Eigen::Index i = 0; i < res.v_star.size(); ++i) {
    v.push_back({{"port", res.selection_star.indices[static_cast<std::size_t>(i)]},
                 {"magnitude", std::abs(res.v_star[i])},
                 {"phase_rad", std::arg(res.v_star[i])}});
  }
  j["v"] = v;
  j["radiated_power_w"] =
      faris::radiated_power(res.v_star, faris::precompute(faris::Problem::create(
                                                               cfg.base.geom, params, outer.saa_samples,
                                                               faris::derive_seed(outer.seed, faris::Stream::kChannels)),
                                                           res.selection_star));
  j["outer_trace"] = res.outer_trace;
  j["inner_traces"] = res.inner_traces;
  json details = json::array();
  for (const auto& it : res.details) {
    details.push_back({{"iteration", it.iteration},
                       {"rate_after_inner", it.rate_after_inner},
                       {"rate_after_cem", it.rate_after_cem},
                       {"inner_iterations", it.inner_iterations},
                       {"cem_iterations", it.cem_iterations},
                       {"selection_accepted", it.selection_accepted}});
  }
  j["iterations"] = details;

  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_file(dir / "result.json", j.dump(2) + "\n");

  std::string trace = "iteration,rate_bps_hz,selection\n";
  for (std::size_t t = 0; t < res.outer_trace.size(); ++t) {
    trace += std::to_string(t) + "," + fmt(res.outer_trace[t]) + "," +
             join(res.selection_trace[t].indices, ' ') + "\n";
  }
  write_file(dir / "trace.csv", trace);

  std::string inner = "outer_iteration,inner_iteration,rate_bps_hz\n";
  for (std::size_t t = 0; t < res.inner_traces.size(); ++t) {
    for (std::size_t k = 0; k < res.inner_traces[t].size(); ++k) {
      inner += std::to_string(t + 1) + "," + std::to_string(k) + "," + fmt(res.inner_traces[t][k]) + "\n";
    }
  }
  write_file(dir / "inner_trace.csv", inner);

  std::cout << "rate " << fmt(res.rate_star) << " bps/Hz after " << res.iteration_count
            << " outer iterations; selection [" << join(res.selection_star.indices, ',') << "]\n";
  return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::string& name) {
  const faris::Config cfg = load(opt);
  const faris::Scenario sc = faris::make_scenario(cfg, name);
  sc.validate();
  const fs::path dir = prepare_out_dir(opt.out_dir);
  std::ofstream csv(dir / (name + ".csv"), std::ios::binary);
  if (!csv) throw faris::ValidationError("cannot write CSV into '" + dir.string() + "'");
  const faris::ScenarioSummary summary = faris::run_scenario(sc, &csv);
  write_file(dir / (name + "_summary.json"), faris::summary_json(summary) + "\n");
  for (const auto& pt : summary.points) {
    std::cout << faris::to_string(sc.sweep_var) << "=" << fmt(pt.value) << ": mean " << fmt(pt.mean)
              << " std " << fmt(pt.stddev) << " (" << pt.trials << " trials, " << pt.errors
              << " errors)\n";
  }
  return 0;
}

int cmd_bfs_compare(const CommonOptions& opt) {
  const faris::Config cfg = load(opt);
  const auto& base = cfg.base;
  const double count = faris::bfs_search_size(base.geom.num_elements(), base.m_o, base.bfs);
  if (count > base.bfs.max_search_size) {
    throw faris::ValidationError("BFS search space has " + fmt(count) +
                                 " configurations, above the cap of " + fmt(base.bfs.max_search_size) +
                                 " (raise --max-configs)");
  }
  faris::Scenario ao;
  ao.name = "bfs_compare_ao";
  ao.mode = faris::Mode::kFaris;
  ao.trials = cfg.bfs_trials;
  ao.master_seed = cfg.seed;
  ao.base = base;
  ao.threads = cfg.threads;
  faris::Scenario oracle = ao;
  oracle.name = "bfs_compare_bfs";
  oracle.mode = faris::Mode::kBfs;

  const faris::ScenarioSummary sa = faris::run_scenario(ao);
  const faris::ScenarioSummary sb = faris::run_scenario(oracle);
  for (const auto* s : {&sa, &sb}) {
    for (const auto& r : s->rows) {
      if (r.error) throw faris::NumericalError("trial " + std::to_string(r.trial) + " failed: " + r.error_message);
    }
  }
  const auto cdf = faris::gap_cdf(sa.rows, sb.rows);

  const fs::path dir = prepare_out_dir(opt.out_dir);
  std::string paired = "trial,seed,ao_rate_bps_hz,bfs_rate_bps_hz,gap_bps_hz\n";
  double sum = 0.0;
  double sum_abs = 0.0;
  for (std::size_t i = 0; i < sa.rows.size(); ++i) {
    const double gap = sa.rows[i].rate - sb.rows[i].rate;
    sum += gap;
    sum_abs += std::abs(gap);
    paired += std::to_string(sa.rows[i].trial) + "," + std::to_string(sa.rows[i].seed) + "," +
              fmt(sa.rows[i].rate) + "," + fmt(sb.rows[i].rate) + "," + fmt(gap) + "\n";
  }
  write_file(dir / "bfs_compare.csv", paired);
  std::string cdf_text = "gap_bps_hz,cdf\n";
  for (const auto& pt : cdf) cdf_text += fmt(pt.gap) + "," + fmt(pt.cdf) + "\n";
  write_file(dir / "gap_cdf.csv", cdf_text);

  const double n = static_cast<double>(sa.rows.size());
  json j;
  j["m"] = base.geom.num_elements();
  j["m_o"] = base.m_o;
  j["phase_bits"] = base.bfs.phase_bits;
  j["gain_levels"] = base.bfs.gain_levels;
  j["configurations"] = count;
  j["trials"] = sa.rows.size();
  j["seed"] = cfg.seed;
  j["gap_sign"] = "ao_minus_bfs";
  j["mean_gap_bps_hz"] = sum / n;
  j["mean_abs_gap_bps_hz"] = sum_abs / n;
  j["mean_ao_rate_bps_hz"] = sa.points.front().mean;
  j["mean_bfs_rate_bps_hz"] = sb.points.front().mean;
  write_file(dir / "bfs_compare_summary.json", j.dump(2) + "\n");
  std::cout << "mean gap (AO - BFS) " << fmt(sum / n) << " bps/Hz, mean |gap| " << fmt(sum_abs / n)
            << " over " << sa.rows.size() << " trials\n";
  return 0;
}

// Quick numerical identities on random small instances.
int cmd_selfcheck(const CommonOptions& opt) {
  const faris::Config cfg = load(opt);
  faris::Rng rng(faris::derive_seed(cfg.seed, faris::Stream::kInner, 9999));
  double equiv_err = 0.0;
  double qt_err = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    faris::SurfaceGeometry geom;
    geom.m_x = 2 + trial % 3;
    geom.w_x = 1.0 + rng.uniform() * 3.0;
    const int m = geom.num_elements();
    const int m_o = 1 + static_cast<int>(rng.uniform() * std::min(m, 8));
    const faris::SystemParams params = cfg.base.system.to_linear();
    const auto problem = faris::Problem::create(geom, params, 1 + trial % 4,
                                                faris::derive_seed(cfg.seed, faris::Stream::kChannels, trial));
    const auto sel = faris::random_selection(m, std::min(m_o, m), rng.engine()());
    const auto pre = faris::precompute(problem, sel);
    faris::ReflectVector v(sel.size());
    for (int i = 0; i < sel.size(); ++i) v[i] = params.g_max * rng.uniform() * std::polar(1.0, 2 * faris::kPi * rng.uniform());
    const faris::LiftedMatrix vv = v * v.adjoint();
    for (int s = 0; s < problem.num_samples(); ++s) {
      const double d = faris::sinr_direct(v, sel, problem.corr, problem.channels, params, problem.gains, s);
      equiv_err = std::max(equiv_err, std::abs(d - faris::sinr_lifted(vv, pre, s)) / std::max(1.0, std::abs(d)));
    }
    const double pd = faris::radiated_power_direct(v, sel, problem.corr, problem.channels, params, problem.gains);
    equiv_err = std::max(equiv_err, std::abs(pd - faris::radiated_power(vv, pre)) / std::max(1e-300, std::abs(pd)));
    const faris::RVec y = faris::update_y(vv, pre);
    const faris::RVec xi = faris::transformed_sinr(vv, y, pre);
    for (int s = 0; s < problem.num_samples(); ++s) {
      const double g = faris::sinr_lifted(vv, pre, s);
      qt_err = std::max(qt_err, std::abs(xi[s] - g) / (1.0 + g));
    }
  }
  double kkt = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 6 + trial % 10;
    const int m_o = 1 + trial % (m - 1);
    faris::RVec mu(m);
    for (int i = 0; i < m; ++i) mu[i] = rng.uniform();
    mu = faris::clamp_mu(mu);
    const double nu = faris::solve_nu(mu, m_o, 1e-14);
    const faris::RVec p = faris::p_of_nu(mu, nu);
    kkt = std::max(kkt, std::abs(p.sum() - m_o));
  }
  const bool ok1 = equiv_err <= 1e-9;
  const bool ok2 = qt_err <= 1e-9;
  const bool ok3 = kkt <= 1e-8;
  std::printf("%s lifted-vs-direct SINR/power max rel err %.3e\n", ok1 ? "PASS" : "FAIL", equiv_err);
  std::printf("%s quadratic-transform tightness max err %.3e\n", ok2 ? "PASS" : "FAIL", qt_err);
  std::printf("%s CEM multiplier |sum p - M_o| max %.3e\n", ok3 ? "PASS" : "FAIL", kkt);
  return ok1 && ok2 && ok3 ? 0 : kExitCheckFailed;
}

void add_common(CLI::App* sub, CommonOptions& opt, bool with_out_dir) {
  sub->add_option("--config", opt.config_path, "YAML configuration file (defaults if omitted)");
  sub->add_option("--set", opt.overrides, "Override a key, e.g. --set m_o=9 or --set inner.n_rand=20")
      ->take_all();
  sub->add_option("--seed", opt.seed, "Master seed (overrides the config)");
  sub->add_option("--threads", opt.threads, "Worker threads for trials");
  if (with_out_dir) sub->add_option("--out-dir", opt.out_dir, "Directory for output files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid active RIS ergodic-rate optimizer"};
  app.require_subcommand(1);
  CommonOptions opt;
  std::string scenario;

  auto* run = app.add_subcommand("run", "Optimize one configuration and write result.json");
  add_common(run, opt, true);
  auto* sweep = app.add_subcommand("sweep", "Run a named scenario and write CSV plus summary JSON");
  add_common(sweep, opt, true);
  sweep->add_option("--scenario", scenario, "Scenario name from the config")->required();
  auto* bfs = app.add_subcommand("bfs-compare", "Paired AO vs brute-force comparison");
  add_common(bfs, opt, true);
  bfs->add_option("--max-configs", opt.max_configs, "Cap on the brute-force search size");
  auto* check = app.add_subcommand("selfcheck", "Numerical identity checks on random instances");
  add_common(check, opt, false);
  auto* defaults = app.add_subcommand("defaults", "Print the default configuration as YAML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(opt);
    if (*sweep) return cmd_sweep(opt, scenario);
    if (*bfs) return cmd_bfs_compare(opt);
    if (*check) return cmd_selfcheck(opt);
    if (*defaults) {
      std::cout << faris::default_config_yaml();
      return 0;
    }
  } catch (const faris::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const faris::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
