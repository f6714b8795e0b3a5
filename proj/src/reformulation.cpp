#include "faris/reformulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "faris/rng.hpp"

namespace faris {

CVec PortSelection::rows(const CVec& x) const {
  CVec out(size());
  for (int n = 0; n < size(); ++n) out(n) = x(indices[n]);
  return out;
}

RMat PortSelection::submatrix(const RMat& m) const {
  RMat out(size(), size());
  for (int r = 0; r < size(); ++r) {
    for (int c = 0; c < size(); ++c) out(r, c) = m(indices[r], indices[c]);
  }
  return out;
}

PortSelection build_selection(std::vector<int> indices, int num_elements) {
  if (indices.empty()) throw ValidationError("selection: at least one port must be active");
  if (static_cast<int>(indices.size()) > num_elements) {
    throw ValidationError("selection: M_o=" + std::to_string(indices.size()) +
                          " exceeds M=" + std::to_string(num_elements));
  }
  std::sort(indices.begin(), indices.end());
  for (std::size_t n = 0; n < indices.size(); ++n) {
    if (indices[n] < 0 || indices[n] >= num_elements) {
      throw ValidationError("selection: index " + std::to_string(indices[n]) +
                            " out of range [0, " + std::to_string(num_elements) + ")");
    }
    if (n > 0 && indices[n] == indices[n - 1]) {
      throw ValidationError("selection: duplicate port index " + std::to_string(indices[n]));
    }
  }
  return PortSelection{std::move(indices)};
}

PortSelection selection_from_activation(const std::vector<std::uint8_t>& zeta) {
  PortSelection sel;
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    if (zeta[i]) sel.indices.push_back(static_cast<int>(i));
  }
  return sel;
}

LinkGains link_gains(const SurfaceGeometry& geom, const SystemParams& params) {
  return {path_loss(params.l_f_m, params.pl_exp_f, geom.wavelength),
          path_loss(params.l_u_m, params.pl_exp_u, geom.wavelength)};
}

Problem Problem::create(const SurfaceGeometry& geom, const SystemParams& params, int samples,
                        std::uint64_t channel_seed) {
  geom.validate();
  params.validate();
  return create(geom, params, build_correlation(geom),
                make_channel_set(geom, params, samples, channel_seed));
}

Problem Problem::create(const SurfaceGeometry& geom, const SystemParams& params,
                        CorrelationModel corr, ChannelSet channels) {
  Problem p;
  p.geom = geom;
  p.params = params;
  p.gains = link_gains(geom, params);
  p.corr = std::move(corr);
  p.channels = std::move(channels);
  const int m = geom.num_elements();
  if (p.corr.j_sqrt.rows() != m || p.channels.h_f_los.size() != m) {
    throw ValidationError("problem: channel/correlation dimensions do not match the geometry");
  }
  p.b_full = p.corr.j_sqrt.cast<Complex>() * p.channels.h_f_los;
  p.u_full.reserve(p.channels.samples.size());
  for (const CVec& h : p.channels.samples) {
    if (h.size() != m) throw ValidationError("problem: channel sample has wrong dimension");
    p.u_full.push_back(p.corr.j_sqrt.cast<Complex>() * h);
  }
  return p;
}

namespace {

PrecomputedQuantities assemble(CVec b, std::vector<CVec> u, RMat k_sel, const SystemParams& params,
                               const LinkGains& gains) {
  PrecomputedQuantities pre;
  pre.signal_coeff = params.tx_power_w * gains.l_f * gains.l_u;
  pre.tx_power = params.tx_power_w;
  pre.l_f = gains.l_f;
  pre.l_u = gains.l_u;
  pre.noise_ris = params.noise_ris_w;
  pre.noise_mu = params.noise_mu_w;
  pre.p_max = params.p_max_w;
  pre.g_max = params.g_max;

  const CMat k = k_sel.cast<Complex>();
  pre.a.reserve(u.size());
  pre.c.reserve(u.size());
  for (const CVec& us : u) {
    pre.a.push_back(us.cwiseProduct(b.conjugate()));
    CMat outer = us * us.adjoint();
    pre.c.push_back(hermitian_from_upper(gains.l_u * params.noise_ris_w * k.cwiseProduct(outer)));
  }
  pre.q1 = hermitian_from_upper(k.cwiseProduct(b.conjugate() * b.transpose()));
  pre.q2 = hermitian_from_upper(k.cwiseProduct(k));
  pre.f = hermitian_from_upper(params.tx_power_w * gains.l_f * pre.q1 + params.noise_ris_w * pre.q2);
  pre.b = std::move(b);
  pre.u = std::move(u);
  pre.k_sel = std::move(k_sel);
  return pre;
}

void check_selection(const PortSelection& sel, int m) {
  if (sel.size() < 1 || sel.size() > m) {
    throw ValidationError("precompute: selection size " + std::to_string(sel.size()) +
                          " incompatible with M=" + std::to_string(m));
  }
  for (int idx : sel.indices) {
    if (idx < 0 || idx >= m) throw ValidationError("precompute: selection index out of range");
  }
}

}  // namespace

PrecomputedQuantities precompute(const CorrelationModel& corr, const PortSelection& sel,
                                 const ChannelSet& channels, const SystemParams& params,
                                 const LinkGains& gains) {
  const int m = static_cast<int>(corr.j.rows());
  if (corr.j_sqrt.rows() != m || channels.h_f_los.size() != m) {
    throw ValidationError("precompute: dimension mismatch between correlation and channels");
  }
  check_selection(sel, m);
  const CMat js = corr.j_sqrt.cast<Complex>();
  CVec b = sel.rows(js * channels.h_f_los);
  std::vector<CVec> u;
  u.reserve(channels.samples.size());
  for (const CVec& h : channels.samples) {
    if (h.size() != m) throw ValidationError("precompute: channel sample has wrong dimension");
    u.push_back(sel.rows(js * h));
  }
  return assemble(std::move(b), std::move(u), sel.submatrix(corr.j), params, gains);
}

PrecomputedQuantities precompute(const Problem& problem, const PortSelection& sel) {
  check_selection(sel, problem.num_elements());
  std::vector<CVec> u;
  u.reserve(problem.u_full.size());
  for (const CVec& us : problem.u_full) u.push_back(sel.rows(us));
  return assemble(sel.rows(problem.b_full), std::move(u), sel.submatrix(problem.corr.j),
                  problem.params, problem.gains);
}

CMat effective_operator(const ReflectVector& v, const PortSelection& sel,
                        const CorrelationModel& corr) {
  if (v.size() != sel.size()) throw ValidationError("effective_operator: |v| != M_o");
  const Eigen::Index m = corr.j_sqrt.rows();
  // J^{1/2} Sᵀ: the selected columns of J^{1/2}.
  CMat left(m, sel.size());
  for (int n = 0; n < sel.size(); ++n) {
    left.col(n) = corr.j_sqrt.col(sel.indices[n]).cast<Complex>() * v(n);
  }
  CMat right(sel.size(), m);
  for (int n = 0; n < sel.size(); ++n) right.row(n) = corr.j_sqrt.row(sel.indices[n]).cast<Complex>();
  return left * right;
}

double sinr_direct(const ReflectVector& v, const PortSelection& sel, const CorrelationModel& corr,
                   const ChannelSet& channels, const SystemParams& params, const LinkGains& gains,
                   int sample_index) {
  if (sample_index < 0 || sample_index >= static_cast<int>(channels.samples.size())) {
    throw ValidationError("sinr_direct: sample index out of range");
  }
  const CMat a_act = effective_operator(v, sel, corr);
  const CVec& h = channels.samples[static_cast<std::size_t>(sample_index)];
  const Complex signal = h.dot(a_act * channels.h_f_los);  // hᴴ A h̃_f
  const CMat b_mat = gains.l_u * params.noise_ris_w * (a_act * a_act.adjoint());
  const double noise = h.dot(b_mat * h).real();
  return params.tx_power_w * gains.l_f * gains.l_u * std::norm(signal) / (params.noise_mu_w + noise);
}

double radiated_power_direct(const ReflectVector& v, const PortSelection& sel,
                             const CorrelationModel& corr, const ChannelSet& channels,
                             const SystemParams& params, const LinkGains& gains) {
  const CMat a_act = effective_operator(v, sel, corr);
  return params.tx_power_w * gains.l_f * (a_act * channels.h_f_los).squaredNorm() +
         params.noise_ris_w * a_act.squaredNorm();
}

double sinr_lifted(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre, int sample_index) {
  const auto s = static_cast<std::size_t>(sample_index);
  const double num = pre.a[s].dot(v_mat * pre.a[s]).real();  // tr(a aᴴ V) = aᴴ V a
  const double den = pre.noise_mu + trace_product(pre.c[s], v_mat);
  return pre.signal_coeff * std::max(num, 0.0) / den;
}

double sinr(const ReflectVector& v, const PrecomputedQuantities& pre, int sample_index) {
  const auto s = static_cast<std::size_t>(sample_index);
  const double num = std::norm(pre.a[s].dot(v));
  const double den = pre.noise_mu + v.dot(pre.c[s] * v).real();
  return pre.signal_coeff * num / den;
}

double radiated_power(const ReflectVector& v, const PrecomputedQuantities& pre) {
  return v.dot(pre.f * v).real();
}

double radiated_power(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre) {
  return trace_product(pre.f, v_mat);
}

double saa_rate(const ReflectVector& v, const PrecomputedQuantities& pre) {
  double sum = 0.0;
  for (int s = 0; s < pre.num_samples(); ++s) sum += std::log2(1.0 + sinr(v, pre, s));
  return sum / pre.num_samples();
}

double saa_rate(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre) {
  double sum = 0.0;
  for (int s = 0; s < pre.num_samples(); ++s) sum += std::log2(1.0 + sinr_lifted(v_mat, pre, s));
  return sum / pre.num_samples();
}

double selection_rate(const Problem& problem, const PortSelection& sel, const ReflectVector& v) {
  if (v.size() != sel.size()) {
    throw ValidationError("selection_rate: |v|=" + std::to_string(v.size()) +
                          " does not match M_o=" + std::to_string(sel.size()));
  }
  const int n = sel.size();
  const CMat k = sel.submatrix(problem.corr.j).cast<Complex>();
  const CVec bv = sel.rows(problem.b_full).cwiseProduct(v);
  const double coeff = problem.params.tx_power_w * problem.gains.l_f * problem.gains.l_u;
  const double noise_scale = problem.gains.l_u * problem.params.noise_ris_w;
  CVec w(n);
  double sum = 0.0;
  for (const CVec& u_full : problem.u_full) {
    Complex signal{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const Complex ui = std::conj(u_full(sel.indices[static_cast<std::size_t>(i)]));
      signal += ui * bv(i);
      w(i) = ui * v(i);
    }
    const double noise = noise_scale * w.dot(k * w).real();
    sum += std::log2(1.0 + coeff * std::norm(signal) / (problem.params.noise_mu_w + noise));
  }
  return sum / problem.num_samples();
}

double selection_power(const Problem& problem, const PortSelection& sel, const ReflectVector& v) {
  const RMat k = sel.submatrix(problem.corr.j);
  const CMat kc = k.cast<Complex>();
  const CVec bv = sel.rows(problem.b_full).cwiseProduct(v);
  const CMat k2 = kc.cwiseProduct(kc);
  return problem.params.tx_power_w * problem.gains.l_f * bv.dot(kc * bv).real() +
         problem.params.noise_ris_w * v.dot(k2 * v).real();
}

}  // namespace faris
