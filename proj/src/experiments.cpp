#include "faris/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace faris {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kFaris: return "faris";
    case Mode::kFrisMode: return "fris_mode";
    case Mode::kArisMode: return "aris_mode";
    case Mode::kBfs: return "bfs";
  }
  return "unknown";
}

std::string to_string(SweepVar var) {
  switch (var) {
    case SweepVar::kNone: return "none";
    case SweepVar::kTxPowerDbm: return "tx_power_dbm";
    case SweepVar::kM: return "M";
    case SweepVar::kWx: return "w_x";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::kFaris, Mode::kFrisMode, Mode::kArisMode, Mode::kBfs}) {
    if (to_string(m) == text) return m;
  }
  throw ValidationError("unknown mode '" + text + "' (expected faris, fris_mode, aris_mode, bfs)");
}

SweepVar parse_sweep_var(const std::string& text) {
  for (SweepVar v : {SweepVar::kNone, SweepVar::kTxPowerDbm, SweepVar::kM, SweepVar::kWx}) {
    if (to_string(v) == text) return v;
  }
  throw ValidationError("unknown sweep variable '" + text + "' (expected none, tx_power_dbm, M, w_x)");
}

void Scenario::validate() const {
  if (name.empty()) throw ValidationError("scenario: name must not be empty");
  if (trials < 1) throw ValidationError("scenario '" + name + "': trials must be >= 1");
  if (sweep_values.empty()) throw ValidationError("scenario '" + name + "': no sweep values");
  for (std::size_t i = 1; i < sweep_values.size(); ++i) {
    if (!(sweep_values[i] > sweep_values[i - 1])) {
      throw ValidationError("scenario '" + name + "': sweep values must be strictly increasing");
    }
  }
  if (threads < 1) throw ValidationError("scenario '" + name + "': threads must be >= 1");
  for (double value : sweep_values) {
    const ExperimentBase b = apply_sweep(base, sweep_var, value);
    b.geom.validate();
    if (b.m_o < 1 || b.m_o > b.geom.num_elements()) {
      throw ValidationError("scenario '" + name + "': M_o=" + std::to_string(b.m_o) +
                            " exceeds M=" + std::to_string(b.geom.num_elements()));
    }
    if (mode == Mode::kBfs) {
      const double count = bfs_search_size(b.geom.num_elements(), b.m_o, b.bfs);
      if (count > b.bfs.max_search_size) {
        throw ValidationError("scenario '" + name + "': BFS search space " + std::to_string(count) +
                              " exceeds the cap " + std::to_string(b.bfs.max_search_size));
      }
    }
  }
}

const std::string& csv_header() {
  static const std::string header =
      "scenario,mode,sweep_var,sweep_value,trial,seed,rate_bps_hz,outer_iters,wall_time_s";
  return header;
}

std::string format_row(const ResultRow& row) {
  char buf[256];
  if (row.error) {
    std::snprintf(buf, sizeof(buf), ",%.10g,%d,%llu,nan,-1,%.6f", row.sweep_value, row.trial,
                  static_cast<unsigned long long>(row.seed), row.wall_time_s);
  } else {
    std::snprintf(buf, sizeof(buf), ",%.10g,%d,%llu,%.12g,%d,%.6f", row.sweep_value, row.trial,
                  static_cast<unsigned long long>(row.seed), row.rate, row.outer_iters,
                  row.wall_time_s);
  }
  return row.scenario + "," + to_string(row.mode) + "," + to_string(row.sweep_var) + buf;
}

ExperimentBase apply_sweep(const ExperimentBase& base, SweepVar var, double value) {
  ExperimentBase out = base;
  switch (var) {
    case SweepVar::kNone: break;
    case SweepVar::kTxPowerDbm: out.system.tx_power_dbm = value; break;
    case SweepVar::kWx: out.geom.w_x = value; break;
    case SweepVar::kM: {
      const int side = static_cast<int>(std::lround(std::sqrt(value)));
      if (side * side != static_cast<int>(std::lround(value)) || side < 2) {
        throw ValidationError("sweep over M requires perfect squares >= 4, got " + std::to_string(value));
      }
      out.geom.m_x = side;
      out.geom.m_y = 0;
      break;
    }
  }
  return out;
}

PortSelection centered_block(const SurfaceGeometry& geom, int m_o) {
  const int m = geom.num_elements();
  if (m_o < 1 || m_o > m) throw ValidationError("centered_block: need 1 <= M_o <= M");
  const int width = std::min(geom.m_x, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m_o)) - 1e-12)));
  const int height = (m_o + width - 1) / width;
  if (height > geom.rows()) throw ValidationError("centered_block: block does not fit the surface");
  const int col0 = (geom.m_x - width) / 2;
  const int row0 = (geom.rows() - height) / 2;
  std::vector<int> idx;
  for (int r = 0; r < height && static_cast<int>(idx.size()) < m_o; ++r) {
    for (int c = 0; c < width && static_cast<int>(idx.size()) < m_o; ++c) {
      idx.push_back((row0 + r) * geom.m_x + col0 + c);
    }
  }
  return build_selection(std::move(idx), m);
}

TrialOutcome run_trial(const ExperimentBase& base, Mode mode, std::uint64_t seed) {
  SystemParams params = base.system.to_linear();
  OuterConfig cfg = base.outer;
  cfg.seed = seed;
  if (mode == Mode::kFrisMode) {
    // Passive surface: unit gains, no amplifier budget.
    params.g_max = 1.0;
    params.p_max_w = std::numeric_limits<double>::infinity();
    cfg.inner.unit_modulus = true;
  }
  const Problem problem =
      Problem::create(base.geom, params, cfg.saa_samples, derive_seed(seed, Stream::kChannels));

  TrialOutcome out;
  switch (mode) {
    case Mode::kFaris:
    case Mode::kFrisMode:
      out.detail = run(problem, base.m_o, cfg);
      out.rate = out.detail.rate_star;
      out.outer_iters = out.detail.iteration_count;
      break;
    case Mode::kArisMode:
      out.detail = run_fixed_selection(problem, centered_block(base.geom, base.m_o), cfg);
      out.rate = out.detail.rate_star;
      out.outer_iters = out.detail.iteration_count;
      break;
    case Mode::kBfs: {
      const BfsResult res = bfs(problem, base.m_o, base.bfs);
      out.rate = res.rate;
      out.outer_iters = 0;
      break;
    }
  }
  return out;
}

ScenarioSummary run_scenario(const Scenario& sc, std::ostream* csv) {
  sc.validate();
  struct Job {
    std::size_t sweep_index;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < sc.sweep_values.size(); ++k) {
    for (int t = 0; t < sc.trials; ++t) jobs.push_back({k, t});
  }
  std::vector<ResultRow> rows(jobs.size());

  auto execute = [&](std::size_t j) {
    const Job& job = jobs[j];
    ResultRow& row = rows[j];
    row.scenario = sc.name;
    row.mode = sc.mode;
    row.sweep_var = sc.sweep_var;
    row.sweep_value = sc.sweep_values[job.sweep_index];
    row.trial = job.trial;
    row.seed = sc.master_seed + static_cast<std::uint64_t>(job.trial);
    const auto start = std::chrono::steady_clock::now();
    try {
      const ExperimentBase b = apply_sweep(sc.base, sc.sweep_var, row.sweep_value);
      const TrialOutcome res = run_trial(b, sc.mode, row.seed);
      row.rate = res.rate;
      row.outer_iters = res.outer_iters;
    } catch (const std::exception& e) {
      row.error = true;
      row.error_message = e.what();
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const int workers = std::max(1, std::min<int>(sc.threads, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) execute(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) execute(j);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (csv != nullptr) {
    *csv << csv_header() << '\n';
    for (const ResultRow& row : rows) *csv << format_row(row) << '\n';
  }

  ScenarioSummary summary;
  summary.scenario = sc.name;
  summary.mode = sc.mode;
  summary.sweep_var = sc.sweep_var;
  for (std::size_t k = 0; k < sc.sweep_values.size(); ++k) {
    SweepPointSummary pt;
    pt.value = sc.sweep_values[k];
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].sweep_index != k) continue;
      if (rows[j].error) {
        ++pt.errors;
        continue;
      }
      ++pt.trials;
      sum += rows[j].rate;
      sum2 += rows[j].rate * rows[j].rate;
    }
    if (pt.trials > 0) {
      pt.mean = sum / pt.trials;
      pt.stddev = pt.trials > 1
                      ? std::sqrt(std::max(0.0, (sum2 - pt.trials * pt.mean * pt.mean) / (pt.trials - 1)))
                      : 0.0;
    }
    summary.points.push_back(pt);
  }
  summary.rows = std::move(rows);
  return summary;
}

std::string summary_json(const ScenarioSummary& summary) {
  nlohmann::ordered_json j;
  j["scenario"] = summary.scenario;
  j["mode"] = to_string(summary.mode);
  j["sweep_var"] = to_string(summary.sweep_var);
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const auto& pt : summary.points) {
    nlohmann::ordered_json p;
    p["sweep_value"] = pt.value;
    p["mean_rate_bps_hz"] = pt.mean;
    p["std_rate_bps_hz"] = pt.stddev;
    p["trials"] = pt.trials;
    p["errors"] = pt.errors;
    points.push_back(p);
  }
  j["points"] = points;
  return j.dump(2);
}

std::vector<GapCdfPoint> gap_cdf(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
  using Key = std::tuple<double, int>;
  std::map<Key, const ResultRow*> index_b;
  for (const ResultRow& r : b) index_b[{r.sweep_value, r.trial}] = &r;
  if (index_b.size() != a.size() || b.size() != a.size()) {
    throw ValidationError("gap_cdf: scenarios do not cover the same trials");
  }
  std::vector<double> gaps;
  for (const ResultRow& r : a) {
    auto it = index_b.find({r.sweep_value, r.trial});
    if (it == index_b.end()) throw ValidationError("gap_cdf: unmatched trial " + std::to_string(r.trial));
    if (it->second->seed != r.seed) {
      throw ValidationError("gap_cdf: seed mismatch at trial " + std::to_string(r.trial));
    }
    if (r.error || it->second->error) continue;
    gaps.push_back(r.rate - it->second->rate);
  }
  std::sort(gaps.begin(), gaps.end());
  std::vector<GapCdfPoint> out;
  out.reserve(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    out.push_back({gaps[i], static_cast<double>(i + 1) / static_cast<double>(gaps.size())});
  }
  return out;
}

BootstrapInterval bootstrap_mean(const std::vector<double>& values, double confidence,
                                 int resamples, std::uint64_t seed) {
  if (values.empty()) throw ValidationError("bootstrap_mean: no values");
  BootstrapInterval out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(values.size());
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  const auto n = values.size();
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
      s += values[k];
    }
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - confidence);
  auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::clamp(q * (resamples - 1), 0.0, resamples - 1.0));
    return means[idx];
  };
  out.lower = pick(alpha);
  out.upper = pick(1.0 - alpha);
  return out;
}

}  // namespace faris
