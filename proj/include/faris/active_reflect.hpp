#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "faris/reformulation.hpp"

namespace faris {

/// Inner AO over the lifted matrix V and the quadratic-transform auxiliaries y_s.
struct InnerConfig {
  double eps_v = 1e-3;  // absolute, bps/Hz
  int n_rand = 50;
  int max_inner_iters = 50;
  double solver_tol = 1e-9;
  int solver_max_iters = 300;
  double rank_one_ratio_threshold = 1e-6;
  /// Passive-surface restriction: every returned coefficient has |v_i| = g_max.
  bool unit_modulus = false;

  void validate() const;
};

struct SubproblemResult {
  LiftedMatrix v_mat;
  double objective = 0.0;          // surrogate at v_mat
  double initial_objective = 0.0;  // surrogate at V_init
  int iterations = 0;
  bool converged = false;
};

struct RankOneExtraction {
  bool is_rank_one = true;
  ReflectVector principal;
  double eigen_ratio = 0.0;  // λ₂/λ₁
};

struct RandomizationResult {
  ReflectVector v;
  int best_index = 0;
  double best_value = 0.0;  // reduced surrogate R̃ of the selected candidate
  std::vector<double> candidate_values;
};

struct InnerResult {
  ReflectVector v;
  std::vector<double> rate_trace;
  std::vector<bool> stalled;  // per iteration: elitist safeguard kept the incumbent
  int iterations = 0;
  bool converged = false;
};

/// Random phases at full gain, scaled down uniformly until the power budget holds.
ReflectVector init_v(const PrecomputedQuantities& pre, std::uint64_t seed);

/// y_s = sqrt(tr(a_s a_sᴴ V)) / (σ_0² + tr(C_s V)).
RVec update_y(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre);

/// ξ_s = c·(2 y_s sqrt(tr(a_s a_sᴴ V)) − y_s² (σ_0² + tr(C_s V))).
RVec transformed_sinr(const LiftedMatrix& v_mat, const RVec& y, const PrecomputedQuantities& pre);

/// (1/S)·Σ log2(1 + max(0, ξ_s)).
double surrogate_value(const LiftedMatrix& v_mat, const RVec& y, const PrecomputedQuantities& pre);

/// Maximizes the surrogate at fixed y over {V ⪰ 0, tr(FV) ≤ P_max, V_ii ≤ g_max²}
/// by projected gradient ascent with Armijo backtracking. Never returns a point
/// worse than V_init.
SubproblemResult solve_v_subproblem(const PrecomputedQuantities& pre, const RVec& y,
                                    const LiftedMatrix& v_init, const InnerConfig& cfg);

RankOneExtraction extract_rank_one(const LiftedMatrix& v_mat, const InnerConfig& cfg);

ReflectVector magnitude_project(const ReflectVector& v, double g_max);

/// Uniform down-scaling onto the radiated-power budget; a no-op when feasible.
ReflectVector power_scale(const ReflectVector& v, const PrecomputedQuantities& pre);

/// Magnitude projection followed by power scaling (or the unit-modulus map).
ReflectVector make_feasible(const ReflectVector& v, const PrecomputedQuantities& pre,
                            const InnerConfig& cfg);

bool is_feasible(const ReflectVector& v, const PrecomputedQuantities& pre, double rel_tol = 1e-9);

/// Draws v_n = L z_n from V0 = L Lᴴ and keeps the feasible candidate with the best
/// reduced surrogate (lowest index on ties).
RandomizationResult gaussian_randomization(const LiftedMatrix& v0, const PrecomputedQuantities& pre,
                                           const RVec& y, const InnerConfig& cfg,
                                           std::uint64_t seed);

InnerResult inner_ao(const PrecomputedQuantities& pre, const InnerConfig& cfg, std::uint64_t seed,
                     const std::optional<ReflectVector>& v_start = std::nullopt);

}  // namespace faris
