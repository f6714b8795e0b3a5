#include "faris/active_reflect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "faris/psd_projection.hpp"
#include "faris/rng.hpp"

namespace faris {

void InnerConfig::validate() const {
  if (!(eps_v > 0.0) || n_rand < 1 || max_inner_iters < 1 || !(solver_tol > 0.0) ||
      solver_max_iters < 1) {
    throw ValidationError("inner config: tolerances and iteration counts must be positive");
  }
  if (!(rank_one_ratio_threshold > 0.0 && rank_one_ratio_threshold < 1.0)) {
    throw ValidationError("inner config: rank_one_ratio_threshold must lie in (0, 1)");
  }
}

ReflectVector init_v(const PrecomputedQuantities& pre, std::uint64_t seed) {
  Rng rng(seed);
  ReflectVector v(pre.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::polar(pre.g_max, 2.0 * kPi * rng.uniform());
  return power_scale(v, pre);
}

RVec update_y(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre) {
  RVec y(pre.num_samples());
  for (int s = 0; s < pre.num_samples(); ++s) {
    const auto k = static_cast<std::size_t>(s);
    const double num = std::max(0.0, pre.a[k].dot(v_mat * pre.a[k]).real());
    y(s) = std::sqrt(num) / (pre.noise_mu + trace_product(pre.c[k], v_mat));
  }
  return y;
}

RVec transformed_sinr(const LiftedMatrix& v_mat, const RVec& y, const PrecomputedQuantities& pre) {
  RVec xi(pre.num_samples());
  for (int s = 0; s < pre.num_samples(); ++s) {
    const auto k = static_cast<std::size_t>(s);
    const double num = std::max(0.0, pre.a[k].dot(v_mat * pre.a[k]).real());
    const double den = pre.noise_mu + trace_product(pre.c[k], v_mat);
    xi(s) = pre.signal_coeff * (2.0 * y(s) * std::sqrt(num) - y(s) * y(s) * den);
  }
  return xi;
}

double surrogate_value(const LiftedMatrix& v_mat, const RVec& y, const PrecomputedQuantities& pre) {
  const RVec xi = transformed_sinr(v_mat, y, pre);
  double sum = 0.0;
  for (Eigen::Index s = 0; s < xi.size(); ++s) sum += std::log2(1.0 + std::max(0.0, xi(s)));
  return sum / static_cast<double>(xi.size());
}

namespace {

// The subproblem in normalized units: V = g_max²·X, so X_ii ≤ 1, the budget is
// tr(F̂X) ≤ 1 and ξ_s = 2ŷ_s sqrt(â_sᴴXâ_s) − ŷ_s²(1 + tr(Ĉ_s X)). The objective
// value is unchanged by the rescaling.
struct NormalizedSubproblem {
  double g2 = 1.0;
  std::vector<CVec> a_hat;
  std::vector<CMat> c_hat;
  RVec y_hat;
  LiftedFeasibleSet set;

  NormalizedSubproblem(const PrecomputedQuantities& pre, const RVec& y) {
    g2 = pre.g_max * pre.g_max;
    const double a_scale = std::sqrt(pre.signal_coeff * g2 / pre.noise_mu);
    const double c_scale = g2 / pre.noise_mu;
    for (int s = 0; s < pre.num_samples(); ++s) {
      a_hat.push_back(a_scale * pre.a[static_cast<std::size_t>(s)]);
      c_hat.push_back(c_scale * pre.c[static_cast<std::size_t>(s)]);
    }
    y_hat = y * std::sqrt(pre.signal_coeff * pre.noise_mu);
    if (std::isfinite(pre.p_max)) set.f = (g2 / pre.p_max) * pre.f;
    set.budget = 1.0;
    set.diag_bound = 1.0;
  }

  int samples() const { return static_cast<int>(a_hat.size()); }

  // Returns false when some ξ_s < 0 (outside the conic feasible region).
  bool evaluate(const CMat& x, RVec& xi, RVec& t, double& value) const {
    xi.resize(samples());
    t.resize(samples());
    value = 0.0;
    bool ok = true;
    for (int s = 0; s < samples(); ++s) {
      const auto k = static_cast<std::size_t>(s);
      t(s) = std::max(0.0, a_hat[k].dot(x * a_hat[k]).real());
      const double den = 1.0 + trace_product(c_hat[k], x);
      xi(s) = 2.0 * y_hat(s) * std::sqrt(t(s)) - y_hat(s) * y_hat(s) * den;
      if (xi(s) < 0.0) ok = false;
      value += std::log2(1.0 + std::max(0.0, xi(s)));
    }
    value /= samples();
    return ok;
  }

  CMat gradient(const RVec& xi, const RVec& t) const {
    const Eigen::Index n = a_hat.empty() ? 0 : a_hat[0].size();
    CMat g = CMat::Zero(n, n);
    for (int s = 0; s < samples(); ++s) {
      const auto k = static_cast<std::size_t>(s);
      if (y_hat(s) == 0.0) continue;
      const double w = 1.0 / (1.0 + xi(s));
      const double root = std::sqrt(std::max(t(s), 1e-300));
      g.noalias() += (w * y_hat(s) / root) * (a_hat[k] * a_hat[k].adjoint());
      g -= (w * y_hat(s) * y_hat(s)) * c_hat[k];
    }
    g /= samples() * std::log(2.0);
    return hermitian_from_upper(g);
  }
};

}  // namespace

SubproblemResult solve_v_subproblem(const PrecomputedQuantities& pre, const RVec& y,
                                    const LiftedMatrix& v_init, const InnerConfig& cfg) {
  SubproblemResult out;
  out.v_mat = v_init;
  out.initial_objective = surrogate_value(v_init, y, pre);
  out.objective = out.initial_objective;
  if (y.size() != pre.num_samples()) throw ValidationError("solve_v_subproblem: |y| != S");
  if (y.cwiseAbs().maxCoeff() == 0.0) {
    out.converged = true;
    return out;
  }

  const NormalizedSubproblem prob(pre, y);
  DykstraOptions dyk;
  dyk.max_iters = 100;
  dyk.tol = 1e-9;

  CMat x = v_init / prob.g2;
  if (prob.set.violation(x) > 1e-12) x = project_feasible(x, prob.set, dyk);
  RVec xi, t;
  double value = 0.0;
  if (!prob.evaluate(x, xi, t, value)) {
    // V_init sits outside {ξ ≥ 0}; nothing to ascend from.
    out.converged = true;
    return out;
  }

  double step = -1.0;
  constexpr double kArmijo = 1e-4;
  for (int it = 0; it < cfg.solver_max_iters; ++it) {
    out.iterations = it + 1;
    const CMat grad = prob.gradient(xi, t);
    const double gnorm = grad.norm();
    if (!(gnorm > 0.0) || !std::isfinite(gnorm)) {
      out.converged = true;
      break;
    }
    if (step <= 0.0) step = 1.0 / gnorm;

    const CMat target = project_feasible(x + step * grad, prob.set, dyk);
    const CMat dir = target - x;
    const double slope = trace_product(grad, dir);
    if (!(slope > 0.0) || dir.norm() <= 1e-14 * std::max(1.0, x.norm())) {
      out.converged = true;
      break;
    }

    double tau = 1.0;
    bool accepted = false;
    CMat x_new;
    RVec xi_new, t_new;
    double value_new = 0.0;
    while (tau > 1e-12) {
      x_new = x + tau * dir;
      if (prob.evaluate(x_new, xi_new, t_new, value_new) &&
          value_new >= value + kArmijo * tau * slope) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double gain = value_new - value;
    x = x_new;
    xi = xi_new;
    t = t_new;
    value = value_new;
    step = tau == 1.0 ? step * 2.0 : step * tau;
    if (gain <= cfg.solver_tol * std::max(1.0, std::abs(value))) {
      out.converged = true;
      break;
    }
  }

  if (value > out.initial_objective) {
    out.v_mat = hermitian_from_upper(prob.g2 * x);
    out.objective = surrogate_value(out.v_mat, y, pre);
    if (out.objective < out.initial_objective) {
      out.v_mat = v_init;
      out.objective = out.initial_objective;
    }
  }
  return out;
}

RankOneExtraction extract_rank_one(const LiftedMatrix& v_mat, const InnerConfig& cfg) {
  RankOneExtraction out;
  const Eigen::Index n = v_mat.rows();
  out.principal = ReflectVector::Zero(n);
  if (n == 0 || v_mat.norm() == 0.0) return out;
  Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_from_upper(v_mat));
  if (eig.info() != Eigen::Success) throw NumericalError("extract_rank_one: eigendecomposition failed");
  const RVec& lambda = eig.eigenvalues();  // ascending
  const double top = lambda(n - 1);
  if (!(top > 0.0)) return out;
  out.eigen_ratio = n >= 2 ? std::max(0.0, lambda(n - 2)) / top : 0.0;
  out.is_rank_one = out.eigen_ratio <= cfg.rank_one_ratio_threshold;
  const double trace = std::max(0.0, v_mat.diagonal().real().sum());
  out.principal = std::sqrt(trace) * eig.eigenvectors().col(n - 1);
  return out;
}

ReflectVector magnitude_project(const ReflectVector& v, double g_max) {
  ReflectVector out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double mag = std::abs(out(i));
    if (mag > g_max) out(i) *= g_max / mag;
  }
  return out;
}

ReflectVector power_scale(const ReflectVector& v, const PrecomputedQuantities& pre) {
  if (!std::isfinite(pre.p_max)) return v;
  const double power = radiated_power(v, pre);
  if (power <= pre.p_max) return v;
  return v * std::sqrt(pre.p_max / power);
}

ReflectVector make_feasible(const ReflectVector& v, const PrecomputedQuantities& pre,
                            const InnerConfig& cfg) {
  if (cfg.unit_modulus) {
    ReflectVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out(i) = std::abs(v(i)) > 0.0 ? std::polar(pre.g_max, std::arg(v(i))) : Complex(pre.g_max, 0.0);
    }
    return power_scale(out, pre);
  }
  return power_scale(magnitude_project(v, pre.g_max), pre);
}

bool is_feasible(const ReflectVector& v, const PrecomputedQuantities& pre, double rel_tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > pre.g_max * (1.0 + rel_tol)) return false;
  }
  return !std::isfinite(pre.p_max) || radiated_power(v, pre) <= pre.p_max * (1.0 + rel_tol);
}

namespace {

// R̃ at a fixed rank-one V_n = v vᴴ: w_s sits on its SOC bound |a_sᴴ v|, and ξ_s
// is clamped at 0.
double reduced_surrogate(const ReflectVector& v, const RVec& y, const PrecomputedQuantities& pre) {
  double sum = 0.0;
  for (int s = 0; s < pre.num_samples(); ++s) {
    const auto k = static_cast<std::size_t>(s);
    const double w = std::abs(pre.a[k].dot(v));
    const double den = pre.noise_mu + v.dot(pre.c[k] * v).real();
    const double xi = pre.signal_coeff * (2.0 * y(s) * w - y(s) * y(s) * den);
    sum += std::log2(1.0 + std::max(0.0, xi));
  }
  return sum / pre.num_samples();
}

CMat factor_psd(const LiftedMatrix& v0) {
  const CMat h = hermitian_from_upper(v0);
  Eigen::LLT<CMat> llt(h);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double jitter = 1e-12 * std::max(h.diagonal().real().mean(), 1e-300);
  Eigen::LLT<CMat> llt_j(h + jitter * CMat::Identity(h.rows(), h.cols()));
  if (llt_j.info() == Eigen::Success) return llt_j.matrixL();
  Eigen::SelfAdjointEigenSolver<CMat> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("gaussian_randomization: cannot factor V0");
  const RVec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.cast<Complex>().asDiagonal();
}

}  // namespace

RandomizationResult gaussian_randomization(const LiftedMatrix& v0, const PrecomputedQuantities& pre,
                                           const RVec& y, const InnerConfig& cfg,
                                           std::uint64_t seed) {
  const CMat l = factor_psd(v0);
  Rng rng(seed);
  RandomizationResult out;
  out.best_value = -std::numeric_limits<double>::infinity();
  out.candidate_values.reserve(static_cast<std::size_t>(cfg.n_rand));
  for (int n = 0; n < cfg.n_rand; ++n) {
    const ReflectVector cand = make_feasible(l * rng.complex_normal_vector(l.cols()), pre, cfg);
    const double value = reduced_surrogate(cand, y, pre);
    out.candidate_values.push_back(value);
    if (value > out.best_value) {
      out.best_value = value;
      out.best_index = n;
      out.v = cand;
    }
  }
  return out;
}

InnerResult inner_ao(const PrecomputedQuantities& pre, const InnerConfig& cfg, std::uint64_t seed,
                     const std::optional<ReflectVector>& v_start) {
  cfg.validate();
  InnerResult out;
  ReflectVector v = v_start ? *v_start : init_v(pre, derive_seed(seed, Stream::kInitV));
  if (v.size() != pre.size()) throw ValidationError("inner_ao: starting vector has wrong length");
  if (cfg.unit_modulus || !is_feasible(v, pre)) v = make_feasible(v, pre, cfg);

  double rate = saa_rate(v, pre);
  out.rate_trace.push_back(rate);
  LiftedMatrix v_mat = v * v.adjoint();
  RVec y = update_y(v_mat, pre);

  for (int t = 1; t <= cfg.max_inner_iters; ++t) {
    const SubproblemResult sub = solve_v_subproblem(pre, y, v_mat, cfg);
    if (sub.objective <= sub.initial_objective) {
      // No certified ascent at fixed y: the incumbent is a fixed point.
      out.converged = true;
      break;
    }
    out.iterations = t;

    const RankOneExtraction ext = extract_rank_one(sub.v_mat, cfg);
    ReflectVector cand = make_feasible(ext.principal, pre, cfg);
    double cand_rate = saa_rate(cand, pre);
    if (!ext.is_rank_one) {
      const RandomizationResult rr = gaussian_randomization(
          sub.v_mat, pre, y, cfg, derive_seed(seed, Stream::kRandomization, static_cast<std::uint64_t>(t)));
      const double rr_rate = saa_rate(rr.v, pre);
      if (rr_rate > cand_rate) {
        cand = rr.v;
        cand_rate = rr_rate;
      }
    }

    const bool stalled = !(cand_rate >= rate);
    out.stalled.push_back(stalled);
    const double prev = rate;
    if (!stalled) {
      v = cand;
      rate = cand_rate;
      v_mat = v * v.adjoint();
      y = update_y(v_mat, pre);
    }
    out.rate_trace.push_back(rate);
    if (std::abs(rate - prev) < cfg.eps_v) {
      out.converged = true;
      break;
    }
  }
  out.v = v;
  return out;
}

}  // namespace faris
