#include <gtest/gtest.h>

#include "faris/config.hpp"

using namespace faris;

namespace {

std::string error_of(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(yaml, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyGivesDefaults) {
  const Config c = parse_config("");
  EXPECT_EQ(c.base.m_o, 9);
  EXPECT_EQ(c.base.geom.m_x, 10);
  EXPECT_EQ(c.base.outer.saa_samples, 64);
  EXPECT_EQ(c.base.system.tx_power_dbm, 15.0);
}

TEST(Config, DefaultsReferenceRoundTrips) {
  const Config c = parse_config(default_config_yaml());
  const Config d;
  EXPECT_EQ(c.base.geom.wavelength, d.base.geom.wavelength);
  EXPECT_EQ(c.base.system.pl_exp_u, d.base.system.pl_exp_u);
  EXPECT_EQ(c.base.outer.inner.solver_tol, d.base.outer.inner.solver_tol);
  EXPECT_EQ(c.base.outer.cem.omega, d.base.outer.cem.omega);
  EXPECT_EQ(c.base.bfs.max_search_size, d.base.bfs.max_search_size);
  EXPECT_EQ(c.bfs_trials, d.bfs_trials);
}

TEST(Config, ParsesSections) {
  const Config c = parse_config(R"(
geometry: {m_x: 4, m_y: 2, w_x: 3}
system: {tx_power_dbm: 20, rician_k: 2}
m_o: 3
inner: {n_rand: 7}
cem: {rho: 0.2}
outer: {max_iters: 5}
bfs: {gain_levels: 3, trials: 4}
scenarios:
  - {name: a, mode: aris_mode, sweep_var: w_x, sweep_values: [1, 2], trials: 2, master_seed: 5}
  - {name: b}
)");
  EXPECT_EQ(c.base.geom.num_elements(), 8);
  EXPECT_EQ(c.base.system.tx_power_dbm, 20.0);
  EXPECT_EQ(c.base.outer.inner.n_rand, 7);
  EXPECT_EQ(c.base.outer.cem.rho, 0.2);
  EXPECT_EQ(c.base.outer.max_outer_iters, 5);
  EXPECT_EQ(c.base.bfs.gain_levels, 3);
  EXPECT_EQ(c.bfs_trials, 4);
  ASSERT_EQ(c.scenarios.size(), 2u);
  EXPECT_EQ(c.scenarios[0].mode, Mode::kArisMode);
  EXPECT_EQ(c.scenarios[0].sweep_values, (std::vector<double>{1, 2}));
  EXPECT_EQ(make_scenario(c, "a").master_seed, 5u);
  EXPECT_EQ(make_scenario(c, "b").master_seed, c.seed);
}

TEST(Config, UnknownKeyReportsLine) {
  const std::string msg = error_of("geometry:\n  m_x: 4\n  bogus: 1\n");
  EXPECT_NE(msg.find("geometry.bogus"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(error_of("speed: 3\n").find("speed"), std::string::npos);
  EXPECT_NE(error_of("scenarios:\n  - {name: a, colour: red}\n").find("colour"), std::string::npos);
}

TEST(Config, BadValues) {
  EXPECT_NE(error_of("m_o: many\n").find("m_o"), std::string::npos);
  EXPECT_NE(error_of("m_o: 200\n").find("m_o"), std::string::npos);
  EXPECT_FALSE(error_of("scenarios:\n  - {name: a, mode: pso}\n").empty());
  EXPECT_FALSE(error_of("scenarios:\n  - {name: a}\n  - {name: a}\n").empty());
  EXPECT_FALSE(error_of("geometry: [1, 2]\n").empty());
  EXPECT_FALSE(error_of("a: [\n").empty());
}

TEST(Config, Overrides) {
  const Config c = parse_config("scenarios:\n  - {name: a, trials: 1}\n",
                                {"m_o=4", "inner.n_rand=11", "scenarios.0.trials=3", "system.tx_power_dbm=-5"});
  EXPECT_EQ(c.base.m_o, 4);
  EXPECT_EQ(c.base.outer.inner.n_rand, 11);
  EXPECT_EQ(c.scenarios[0].trials, 3);
  EXPECT_EQ(c.base.system.tx_power_dbm, -5.0);
  EXPECT_FALSE(error_of("", {"inner.colour=3"}).empty());
  EXPECT_FALSE(error_of("", {"no_equals"}).empty());
  EXPECT_FALSE(error_of("scenarios:\n  - {name: a}\n", {"scenarios.4.trials=3"}).empty());
}

TEST(Config, UnknownScenarioListsNames) {
  const Config c = parse_config("scenarios:\n  - {name: alpha}\n  - {name: beta}\n");
  try {
    make_scenario(c, "gamma");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpha, beta"), std::string::npos) << msg;
  }
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}
