#include "faris/psd_projection.hpp"

#include <algorithm>

namespace faris {

CMat project_psd(const CMat& x) {
  const CMat h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("project_psd: eigendecomposition failed");
  const RVec lambda = eig.eigenvalues().cwiseMax(0.0);
  const CMat& u = eig.eigenvectors();
  CMat out = u * lambda.cast<Complex>().asDiagonal() * u.adjoint();
  return hermitian_from_upper(out);
}

double LiftedFeasibleSet::violation(const CMat& x) const {
  double worst = x.diagonal().real().maxCoeff() / diag_bound - 1.0;
  if (has_budget()) worst = std::max(worst, trace_product(f, x) / budget - 1.0);
  return worst;
}

namespace {

CMat project_diag(const CMat& x, double bound) {
  CMat y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, i) = std::min(y(i, i).real(), bound);
  return y;
}

CMat project_halfspace(const CMat& x, const CMat& f, double budget, double f_norm2) {
  const double excess = trace_product(f, x) - budget;
  if (excess <= 0.0 || f_norm2 <= 0.0) return x;
  return x - (excess / f_norm2) * f;
}

}  // namespace

CMat project_feasible(const CMat& x, const LiftedFeasibleSet& set, const DykstraOptions& opt) {
  const double f_norm2 = set.has_budget() ? set.f.squaredNorm() : 0.0;
  CMat cur = 0.5 * (x + x.adjoint());
  CMat p_diag = CMat::Zero(x.rows(), x.cols());
  CMat p_half = p_diag;
  CMat p_psd = p_diag;
  for (int it = 0; it < opt.max_iters; ++it) {
    const CMat prev = cur;
    CMat y = project_diag(cur + p_diag, set.diag_bound);
    p_diag = cur + p_diag - y;
    CMat z = set.has_budget() ? project_halfspace(y + p_half, set.f, set.budget, f_norm2) : y;
    if (set.has_budget()) p_half = y + p_half - z;
    cur = project_psd(z + p_psd);
    p_psd = z + p_psd - cur;
    if ((cur - prev).norm() <= opt.tol * std::max(1.0, cur.norm()) &&
        set.violation(cur) <= opt.tol) {
      break;
    }
  }
  // Scaling a PSD matrix down keeps it PSD and shrinks both linear constraints.
  double scale = std::max(1.0, cur.diagonal().real().maxCoeff() / set.diag_bound);
  if (set.has_budget()) scale = std::max(scale, trace_product(set.f, cur) / set.budget);
  if (scale > 1.0) cur /= scale;
  return cur;
}

}  // namespace faris
