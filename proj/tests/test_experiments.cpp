#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "faris/experiments.hpp"

using namespace faris;

namespace {

Scenario small_scenario(Mode mode = Mode::kFaris) {
  Scenario sc;
  sc.name = "unit";
  sc.mode = mode;
  sc.base.geom.m_x = 3;
  sc.base.m_o = 3;
  sc.base.outer.saa_samples = 4;
  sc.base.outer.max_outer_iters = 5;
  sc.master_seed = 10;
  return sc;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string strip_wall_time(const std::string& row) { return row.substr(0, row.rfind(',')); }

}  // namespace

TEST(Csv, HeaderIsExact) {
  EXPECT_EQ(csv_header(), "scenario,mode,sweep_var,sweep_value,trial,seed,rate_bps_hz,outer_iters,wall_time_s");
}

TEST(Csv, ErrorRowMarkers) {
  ResultRow row;
  row.scenario = "s";
  row.mode = Mode::kBfs;
  row.sweep_var = SweepVar::kWx;
  row.sweep_value = 2.5;
  row.trial = 3;
  row.seed = 13;
  row.error = true;
  EXPECT_EQ(strip_wall_time(format_row(row)), "s,bfs,w_x,2.5,3,13,nan,-1");
}

TEST(Names, RoundTrip) {
  for (Mode m : {Mode::kFaris, Mode::kFrisMode, Mode::kArisMode, Mode::kBfs}) EXPECT_EQ(parse_mode(to_string(m)), m);
  for (SweepVar v : {SweepVar::kNone, SweepVar::kTxPowerDbm, SweepVar::kM, SweepVar::kWx}) {
    EXPECT_EQ(parse_sweep_var(to_string(v)), v);
  }
  EXPECT_THROW(parse_mode("pso"), ValidationError);
}

TEST(Sweep, AppliesValues) {
  ExperimentBase base;
  EXPECT_EQ(apply_sweep(base, SweepVar::kM, 16).geom.m_x, 4);
  EXPECT_THROW(apply_sweep(base, SweepVar::kM, 15), ValidationError);
  EXPECT_EQ(apply_sweep(base, SweepVar::kWx, 3.5).geom.w_x, 3.5);
  EXPECT_EQ(apply_sweep(base, SweepVar::kTxPowerDbm, 7).system.tx_power_dbm, 7.0);
}

TEST(Scenario, Validation) {
  Scenario sc = small_scenario();
  EXPECT_NO_THROW(sc.validate());
  sc.trials = 0;
  EXPECT_THROW(sc.validate(), ValidationError);
  sc = small_scenario();
  sc.sweep_var = SweepVar::kTxPowerDbm;
  sc.sweep_values = {5, 5};
  EXPECT_THROW(sc.validate(), ValidationError);
  sc = small_scenario(Mode::kBfs);
  sc.base.bfs.max_search_size = 10;
  EXPECT_THROW(sc.validate(), ValidationError);
}

TEST(CenteredBlock, SixBySix) {
  SurfaceGeometry g;
  g.m_x = 6;
  EXPECT_EQ(centered_block(g, 9).indices, (std::vector<int>{7, 8, 9, 13, 14, 15, 19, 20, 21}));
  EXPECT_EQ(centered_block(g, 4).indices, (std::vector<int>{14, 15, 20, 21}));
  EXPECT_EQ(centered_block(g, 3).size(), 3);
}

TEST(RunScenario, OneRow) {
  std::ostringstream csv;
  const auto summary = run_scenario(small_scenario(), &csv);
  const auto ls = lines(csv.str());
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], csv_header());
  EXPECT_EQ(summary.rows.size(), 1u);
  EXPECT_EQ(summary.rows[0].seed, 10u);
  EXPECT_GE(summary.rows[0].rate, 0.0);
}

TEST(RunScenario, OrderAndThreadIndependence) {
  Scenario sc = small_scenario();
  sc.sweep_var = SweepVar::kTxPowerDbm;
  sc.sweep_values = {0, 10, 20};
  sc.trials = 2;
  std::ostringstream a;
  std::ostringstream b;
  const auto sa = run_scenario(sc, &a);
  sc.threads = 3;
  run_scenario(sc, &b);
  const auto la = lines(a.str());
  const auto lb = lines(b.str());
  ASSERT_EQ(la.size(), 7u);
  ASSERT_EQ(lb.size(), 7u);
  for (std::size_t i = 1; i < la.size(); ++i) EXPECT_EQ(strip_wall_time(la[i]), strip_wall_time(lb[i]));
  for (std::size_t j = 0; j < sa.rows.size(); ++j) {
    EXPECT_EQ(sa.rows[j].sweep_value, sc.sweep_values[j / 2]);
    EXPECT_EQ(sa.rows[j].trial, static_cast<int>(j % 2));
    EXPECT_EQ(sa.rows[j].seed, 10u + j % 2);
  }
  ASSERT_EQ(sa.points.size(), 3u);
  for (const auto& pt : sa.points) EXPECT_EQ(pt.trials, 2);
}

TEST(RunScenario, SummaryJsonShape) {
  Scenario sc = small_scenario();
  sc.trials = 2;
  const auto summary = run_scenario(sc);
  const auto j = nlohmann::json::parse(summary_json(summary));
  EXPECT_EQ(j["scenario"], "unit");
  EXPECT_EQ(j["mode"], "faris");
  EXPECT_EQ(j["sweep_var"], "none");
  ASSERT_EQ(j["points"].size(), 1u);
  const double r0 = summary.rows[0].rate;
  const double r1 = summary.rows[1].rate;
  EXPECT_NEAR(j["points"][0]["mean_rate_bps_hz"].get<double>(), 0.5 * (r0 + r1), 1e-12);
  EXPECT_NEAR(j["points"][0]["std_rate_bps_hz"].get<double>(), std::abs(r0 - r1) / std::sqrt(2.0), 1e-9);
}

TEST(RunTrial, ModesShareChannels) {
  const ExperimentBase base = small_scenario().base;
  const auto fris = run_trial(base, Mode::kFrisMode, 4);
  for (Eigen::Index i = 0; i < fris.detail.v_star.size(); ++i) {
    EXPECT_NEAR(std::abs(fris.detail.v_star[i]), 1.0, 1e-12);
  }
  const auto aris = run_trial(base, Mode::kArisMode, 4);
  EXPECT_EQ(aris.detail.selection_star, centered_block(base.geom, base.m_o));
  // BFS uses no randomness of its own, so it sees exactly the trial's channels.
  ExperimentBase small = base;
  small.m_o = 1;
  small.bfs.gain_levels = 2;
  small.bfs.phase_bits = 1;
  const auto bfs_res = run_trial(small, Mode::kBfs, 4);
  const Problem prob = Problem::create(small.geom, small.system.to_linear(), small.outer.saa_samples,
                                       derive_seed(4, Stream::kChannels));
  EXPECT_NEAR(bfs_res.rate, bfs(prob, 1, small.bfs).rate, 1e-15);
}

TEST(GapCdf, IdenticalIsStepAtZero) {
  Scenario sc = small_scenario();
  sc.trials = 3;
  const auto s = run_scenario(sc);
  const auto cdf = gap_cdf(s.rows, s.rows);
  ASSERT_EQ(cdf.size(), 3u);
  for (const auto& pt : cdf) EXPECT_EQ(pt.gap, 0.0);
  EXPECT_EQ(cdf.back().cdf, 1.0);
}

TEST(GapCdf, SortedAndValidated) {
  std::vector<ResultRow> a(4);
  std::vector<ResultRow> b(4);
  for (int i = 0; i < 4; ++i) {
    a[i].trial = b[i].trial = i;
    a[i].seed = b[i].seed = 100 + i;
    a[i].rate = 1.0 + 0.5 * ((i * 7) % 4);
    b[i].rate = 2.0;
  }
  const auto cdf = gap_cdf(a, b);
  for (std::size_t k = 1; k < cdf.size(); ++k) {
    EXPECT_GE(cdf[k].gap, cdf[k - 1].gap);
    EXPECT_GT(cdf[k].cdf, cdf[k - 1].cdf);
  }
  EXPECT_EQ(cdf.front().cdf, 0.25);
  EXPECT_EQ(cdf.back().cdf, 1.0);
  b[2].seed = 999;
  EXPECT_THROW(gap_cdf(a, b), ValidationError);
}

TEST(Bootstrap, Interval) {
  const auto flat = bootstrap_mean({2.0, 2.0, 2.0}, 0.95, 500, 1);
  EXPECT_EQ(flat.lower, 2.0);
  EXPECT_EQ(flat.upper, 2.0);
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(i % 5);
  const auto ci = bootstrap_mean(xs, 0.95, 2000, 2);
  EXPECT_NEAR(ci.mean, 2.0, 1e-12);
  EXPECT_LT(ci.lower, 2.0);
  EXPECT_GT(ci.upper, 2.0);
  EXPECT_GT(ci.lower, 1.4);
  EXPECT_LT(ci.upper, 2.6);
}
