#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "faris/port_select.hpp"
#include "instances.hpp"

using namespace faris;
using faris::testing::random_v;

namespace {

// 2×3 surface (M = 6) with a fixed v on two ports.
Problem six_port_problem(std::uint64_t seed) {
  SurfaceGeometry geom;
  geom.m_x = 3;
  geom.m_y = 2;
  geom.w_x = 1.5;
  return Problem::create(geom, SystemParamsDb{}.to_linear(), 8, seed);
}

// Direct-path SAA rate, independent of the whitened fast path.
double direct_rate(const Problem& p, const PortSelection& sel, const ReflectVector& v) {
  double sum = 0.0;
  for (int s = 0; s < p.num_samples(); ++s) {
    sum += std::log2(1.0 + sinr_direct(v, sel, p.corr, p.channels, p.params, p.gains, s));
  }
  return sum / p.num_samples();
}

std::vector<PortSelection> all_pairs(int m) {
  std::vector<PortSelection> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) out.push_back(build_selection({i, j}, m));
  return out;
}

}  // namespace

TEST(Sampling, ConcentratedProbabilities) {
  RVec p = RVec::Constant(6, kProbabilityFloor);
  p(1) = p(4) = 1.0 - kProbabilityFloor;
  Rng rng(1);
  int hits = 0;
  for (int n = 0; n < 1000; ++n) {
    const Activation z = sample_activation(p, 2, rng);
    hits += (z == Activation{0, 1, 0, 0, 1, 0});
  }
  EXPECT_GE(hits, 995);
}

TEST(Sampling, AlwaysExactCardinality) {
  Rng rng(2);
  for (int n = 0; n < 2000; ++n) {
    const int m = 4 + n % 9;
    const int m_o = 1 + n % (m - 1);
    RVec p(m);
    for (int i = 0; i < m; ++i) p(i) = rng.uniform();
    const Activation z = sample_activation(p, m_o, rng);
    EXPECT_EQ(std::accumulate(z.begin(), z.end(), 0), m_o);
  }
}

TEST(Sampling, UniformFrequencies) {
  const int m = 10;
  const int m_o = 3;
  const RVec p = RVec::Constant(m, static_cast<double>(m_o) / m);
  Rng rng(3);
  RVec freq = RVec::Zero(m);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Activation z = sample_activation(p, m_o, rng);
    for (int i = 0; i < m; ++i) freq(i) += z[static_cast<std::size_t>(i)];
  }
  freq /= n;
  for (int i = 0; i < m; ++i) EXPECT_NEAR(freq(i), 0.3, 0.02) << i;
}

TEST(Sampling, Deterministic) {
  const RVec p = RVec::Constant(8, 0.5);
  EXPECT_EQ(sample_activation(p, 4, 77u), sample_activation(p, 4, 77u));
}

TEST(EvaluateSample, ConsistencyAndZero) {
  const Problem prob = six_port_problem(1);
  Rng rng(4);
  const ReflectVector v = random_v(2, prob.params.g_max, rng);
  const Activation z{0, 1, 0, 0, 1, 0};
  const PortSelection sel = build_selection({1, 4}, 6);
  EXPECT_NEAR(evaluate_sample(z, v, prob), saa_rate(v, precompute(prob, sel)), 1e-12);
  EXPECT_EQ(evaluate_sample(z, ReflectVector::Zero(2), prob), 0.0);
  EXPECT_THROW(evaluate_sample(Activation{1, 1, 1, 0, 0, 0}, v, prob), ValidationError);
}

TEST(EvaluateSample, RankingMatchesDirectLoop) {
  const Problem prob = six_port_problem(2);
  Rng rng(5);
  const ReflectVector v = random_v(2, prob.params.g_max, rng);
  for (const PortSelection& sel : all_pairs(6)) {
    Activation z(6, 0);
    for (int i : sel.indices) z[static_cast<std::size_t>(i)] = 1;
    const double d = direct_rate(prob, sel, v);
    EXPECT_NEAR(evaluate_sample(z, v, prob), d, 1e-10 * (1.0 + d));
  }
}

TEST(Elite, CountAndTies) {
  CemConfig cfg;
  cfg.rho = 0.3;
  EXPECT_EQ(cfg.elite_count(10), 3);
  cfg.rho = 0.1;
  EXPECT_EQ(cfg.elite_count(10), 1);
  EXPECT_EQ(elite_select({1.0, 5.0, 2.0, 0.5, 4.0, 3.0, 0.1, 0.2, 0.3, 0.4}, 0.1).indices,
            (std::vector<int>{1}));
  EXPECT_EQ(elite_select(std::vector<double>(10, 2.0), 0.3).indices, (std::vector<int>{0, 1, 2}));
  const auto e = elite_select({1.0, 3.0, 3.0, 2.0}, 0.5);
  EXPECT_EQ(e.indices, (std::vector<int>{1, 2}));
  EXPECT_EQ(e.threshold_rate, 3.0);
}

TEST(Elite, Mean) {
  const std::vector<Activation> samples{{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  const RVec mu = elite_mean(samples, {0, 1});
  EXPECT_TRUE(mu.isApprox((RVec(4) << 0.5, 1.0, 0.5, 0.0).finished()));
  EXPECT_NEAR(mu.sum(), 2.0, 1e-15);
  EXPECT_TRUE(elite_mean(samples, {2}).isApprox((RVec(4) << 0, 0, 1, 1).finished()));
}

TEST(Multiplier, PointValues) {
  EXPECT_EQ(p_of_nu(0.3, 0.0), 0.3);
  EXPECT_NEAR(p_of_nu(0.5, 1.0), (2.0 - std::sqrt(2.0)) / 2.0, 1e-15);
  // Substitution into ν p² − (ν+1) p + μ = 0.
  for (double mu : {1e-6, 0.2, 0.5, 0.9, 1.0 - 1e-6}) {
    for (double nu : {-50.0, -1.0, -1e-9, 1e-9, 0.5, 3.0, 1e4}) {
      const double p = p_of_nu(mu, nu);
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
      EXPECT_NEAR(nu * p * p - (nu + 1.0) * p + mu, 0.0, 1e-12 * (1.0 + std::abs(nu)));
    }
  }
}

TEST(Multiplier, StrictlyDecreasingInNu) {
  Rng rng(6);
  RVec mu(8);
  for (int i = 0; i < 8; ++i) mu(i) = 0.05 + 0.9 * rng.uniform();
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const double nu = -20.0 + 40.0 * k / 99.0;
    const double g = p_of_nu(mu, nu).sum();
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_NEAR(p_of_nu(mu, -1e6).sum(), 8.0, 1e-4);
  EXPECT_NEAR(p_of_nu(mu, 1e6).sum(), 0.0, 1e-4);
}

TEST(Multiplier, SolveResidual) {
  const RVec mu = (RVec(4) << 0.9, 0.9, 0.1, 0.1).finished();
  const double nu = solve_nu(mu, 2, 1e-12);
  EXPECT_NEAR(p_of_nu(mu, nu).sum(), 2.0, 1e-8);
  EXPECT_NEAR(nu, 0.0, 1e-9);  // Σμ = M_o already

  const RVec skew = (RVec(5) << 0.99, 0.95, 0.9, 0.8, 0.7).finished();
  const double nu2 = solve_nu(skew, 2, 1e-12);
  EXPECT_GT(nu2, 0.0);
  EXPECT_NEAR(p_of_nu(skew, nu2).sum(), 2.0, 1e-8);
  EXPECT_THROW(solve_nu(skew, 5, 1e-12), ValidationError);
}

TEST(Update, FullStepAndFixedPoint) {
  const RVec p_old = (RVec(5) << 0.2, 0.4, 0.6, 0.3, 0.5).finished();
  const RVec mu = (RVec(5) << 1.0, 0.0, 1.0, 0.0, 0.0).finished();
  const CeStep full = ce_step(p_old, mu, 1.0, 2, 1e-12);
  EXPECT_EQ(full.p_new, full.p_ce);
  EXPECT_NEAR(full.p_new.sum(), 2.0, 1e-9);
  EXPECT_LE((ce_update(p_old, p_old, 0.7, 2, 1e-14) - p_old).norm(), 1e-8);
}

TEST(Update, LikelihoodNonDecreasing) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 5 + trial % 8;
    const int m_o = 1 + trial % (m - 1);
    RVec raw(m);
    for (int i = 0; i < m; ++i) raw(i) = rng.uniform();
    const RVec p_old = p_of_nu(clamp_mu(raw), solve_nu(clamp_mu(raw), m_o, 1e-13));
    std::vector<Activation> samples;
    for (int k = 0; k < 10; ++k) samples.push_back(sample_activation(RVec::Constant(m, 0.5), m_o, rng));
    const RVec mu = elite_mean(samples, {0, 1, 2});
    const CeStep step = ce_step(p_old, mu, 0.1 + 0.9 * rng.uniform(), m_o, 1e-12);
    EXPECT_GE(log_likelihood(step.p_new, step.mu_clamped), log_likelihood(p_old, step.mu_clamped) - 1e-12);
    EXPECT_NEAR(step.p_new.sum(), m_o, 1e-9);
  }
}

TEST(RunCem, FullSetWhenAllPortsActive) {
  SurfaceGeometry geom;
  geom.m_x = 2;
  const Problem prob = Problem::create(geom, SystemParamsDb{}.to_linear(), 2, 1);
  Rng rng(8);
  const auto res = run_cem(random_v(4, 10.0, rng), 4, CemConfig{}, prob, 1);
  EXPECT_EQ(res.selection.indices, (std::vector<int>{0, 1, 2, 3}));
}

TEST(RunCem, BudgetPreservedAndTrace) {
  const Problem prob = six_port_problem(3);
  Rng rng(9);
  const auto res = run_cem(random_v(2, prob.params.g_max, rng), 2, CemConfig{}, prob, 4);
  ASSERT_FALSE(res.trace.empty());
  for (const auto& it : res.trace) {
    EXPECT_NEAR(it.p_sum, 2.0, 1e-8);
    EXPECT_GE(it.phi_after, it.phi_before - 1e-12);
    EXPECT_LE(it.kkt_residual, 1e-10);
  }
  EXPECT_EQ(res.selection.size(), 2);
  EXPECT_GE(res.rate, res.best_sampled_rate);
}

TEST(RunCem, RecoversExhaustiveBestPair) {
  CemConfig cfg;
  cfg.n_mc = 60;
  cfg.max_cem_iters = 30;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Problem prob = six_port_problem(1000 + seed);
    Rng rng(seed);
    const ReflectVector v = random_v(2, prob.params.g_max, rng);
    PortSelection best;
    double best_rate = -1.0;
    for (const PortSelection& sel : all_pairs(6)) {
      const double r = direct_rate(prob, sel, v);
      if (r > best_rate) {
        best_rate = r;
        best = sel;
      }
    }
    hits += run_cem(v, 2, cfg, prob, seed).selection == best;
  }
  EXPECT_GE(hits, 45);
}

TEST(RunCem, Deterministic) {
  const Problem prob = six_port_problem(5);
  Rng rng(10);
  const ReflectVector v = random_v(2, prob.params.g_max, rng);
  const auto a = run_cem(v, 2, CemConfig{}, prob, 9);
  const auto b = run_cem(v, 2, CemConfig{}, prob, 9);
  EXPECT_EQ(a.selection, b.selection);
  EXPECT_EQ(a.p, b.p);
}
