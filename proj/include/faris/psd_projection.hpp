#pragma once

#include "faris/common.hpp"

namespace faris {

/// Nearest Hermitian PSD matrix in Frobenius norm (eigenvalues clipped at 0).
CMat project_psd(const CMat& x);

/// {V ⪰ 0} ∩ {V_ii ≤ diag_bound} ∩ {tr(F V) ≤ budget}. An empty `f` disables the
/// budget halfspace.
struct LiftedFeasibleSet {
  CMat f;
  double budget = 1.0;
  double diag_bound = 1.0;

  bool has_budget() const { return f.size() > 0; }
  /// Worst relative violation; ≤ 0 means feasible.
  double violation(const CMat& x) const;
};

struct DykstraOptions {
  int max_iters = 200;
  double tol = 1e-10;
};

/// Dykstra alternating projections onto the three sets, finished with a PSD
/// projection and a uniform down-scaling so the result is exactly feasible.
CMat project_feasible(const CMat& x, const LiftedFeasibleSet& set, const DykstraOptions& opt = {});

}  // namespace faris
