#pragma once

#include <cstdint>
#include <vector>

#include "faris/reformulation.hpp"
#include "faris/rng.hpp"

namespace faris {

/// Floor applied to elite means before the multiplier solve, keeping every
/// μ_i strictly inside (0, 1).
inline constexpr double kProbabilityFloor = 1e-6;

/// Binary port-activation vector ζ (one byte per candidate port).
using Activation = std::vector<std::uint8_t>;

struct CemConfig {
  int n_mc = 0;  // 0 selects 5·M
  double rho = 0.1;
  double omega = 0.7;
  double eps_c = 1e-3;
  int max_cem_iters = 50;
  double nu_bisect_tol = 1e-12;

  int resolved_n_mc(int num_elements) const { return n_mc > 0 ? n_mc : 5 * num_elements; }
  int elite_count(int n) const;
  void validate(int num_elements) const;
};

struct EliteStats {
  std::vector<int> indices;
  RVec mu;
  double threshold_rate = 0.0;
};

/// Independent Bernoulli(p_i) draws repaired to exactly `m_o` ones: excess ones
/// are dropped where p_i is smallest, missing ones added where p_i is largest,
/// ties broken uniformly at random from the same stream.
Activation sample_activation(const RVec& p, int m_o, Rng& rng);
Activation sample_activation(const RVec& p, int m_o, std::uint64_t seed);

/// SAA rate with v assigned to the active ports in ascending index order.
double evaluate_sample(const Activation& zeta, const ReflectVector& v, const Problem& problem);

/// Top-⌈ρN⌉ samples by rate, lowest index first among equal rates. Fills
/// `indices` and `threshold_rate`; `mu` is left empty.
EliteStats elite_select(const std::vector<double>& rates, double rho);

RVec elite_mean(const std::vector<Activation>& samples, const std::vector<int>& elite_indices);

RVec clamp_mu(const RVec& mu);

/// Root in (0,1) of ν p² − (ν+1) p + μ = 0 (μ itself at ν = 0).
double p_of_nu(double mu, double nu);
RVec p_of_nu(const RVec& mu, double nu);

/// Unique ν† with Σ_i p_i(ν†) = m_o, by bracket doubling from [−1, 1] and bisection.
double solve_nu(const RVec& mu, int m_o, double tol);

/// Φ(p) = Σ μ_i log p_i + (1 − μ_i) log(1 − p_i).
double log_likelihood(const RVec& p, const RVec& mu);

/// Bernoulli entropy of p in bits.
double entropy_bits(const RVec& p);

struct CeStep {
  RVec p_new;
  RVec p_ce;
  RVec mu_clamped;
  double nu = 0.0;
};

CeStep ce_step(const RVec& p_old, const RVec& mu, double omega, int m_o, double tol);

/// p_new = (1 − ω)·p_old + ω·p(ν†).
RVec ce_update(const RVec& p_old, const RVec& mu, double omega, int m_o, double tol);

struct CemIteration {
  int iteration = 0;
  double phi_before = 0.0;  // Φ(p^t) under this iteration's elite means
  double phi_after = 0.0;   // Φ(p^{t+1})
  double best_rate = 0.0;   // best rate among this iteration's samples
  double entropy = 0.0;
  double nu = 0.0;
  double p_sum = 0.0;
  double kkt_residual = 0.0;  // max_i |ν p_i² − (ν+1) p_i + μ_i|
  double delta_p = 0.0;
};

struct CemResult {
  PortSelection selection;
  double rate = 0.0;
  PortSelection top_selection;  // top-M_o of the final probabilities
  double top_rate = 0.0;
  PortSelection best_sampled;
  double best_sampled_rate = 0.0;
  RVec p;
  std::vector<CemIteration> trace;
  int iterations = 0;
  bool converged = false;
};

/// Top-m_o entries of p (ties by lowest index), as a selection.
PortSelection top_selection(const RVec& p, int m_o);

CemResult run_cem(const ReflectVector& v, int m_o, const CemConfig& cfg, const Problem& problem,
                  std::uint64_t seed);

}  // namespace faris
