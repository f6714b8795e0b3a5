#pragma once

#include <cstdint>
#include <vector>

#include "faris/channel.hpp"
#include "faris/common.hpp"

namespace faris {

/// Amplification-reflection vector v (one complex coefficient per active port)
/// and its lifted counterpart V = v vᴴ.
using ReflectVector = CVec;
using LiftedMatrix = CMat;

/// Active ports as a strictly increasing index list. Acts as a row extractor;
/// the M_o×M selection matrix is never materialized.
struct PortSelection {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  CVec rows(const CVec& x) const;
  RMat submatrix(const RMat& m) const;
  bool operator==(const PortSelection&) const = default;
};

/// Sorts `indices`; rejects duplicates, out-of-range entries and empty sets.
PortSelection build_selection(std::vector<int> indices, int num_elements);

/// Converts a 0/1 activation vector into the selection of its ones.
PortSelection selection_from_activation(const std::vector<std::uint8_t>& zeta);

struct LinkGains {
  double l_f = 0.0;  // BS→surface path loss
  double l_u = 0.0;  // surface→MU path loss
};

LinkGains link_gains(const SurfaceGeometry& geom, const SystemParams& params);

/// Everything fixed for one optimization run: geometry, parameters, the frozen
/// SAA channel set, and the correlation-whitened channels J^{1/2}h.
struct Problem {
  SurfaceGeometry geom;
  SystemParams params;
  LinkGains gains;
  CorrelationModel corr;
  ChannelSet channels;
  CVec b_full;                // J^{1/2} h̃_f
  std::vector<CVec> u_full;   // J^{1/2} h^(s)

  int num_elements() const { return geom.num_elements(); }
  int num_samples() const { return static_cast<int>(channels.samples.size()); }

  static Problem create(const SurfaceGeometry& geom, const SystemParams& params, int samples,
                        std::uint64_t channel_seed);
  static Problem create(const SurfaceGeometry& geom, const SystemParams& params,
                        CorrelationModel corr, ChannelSet channels);
};

/// Lifted-form quantities for one port selection:
///   γ_s = c·tr(a_s a_sᴴ V) / (σ_0² + tr(C_s V)),   P_RIS = tr(F V).
struct PrecomputedQuantities {
  CVec b;
  RMat k_sel;
  std::vector<CVec> u;
  std::vector<CVec> a;
  std::vector<CMat> c;
  CMat q1;
  CMat q2;
  CMat f;

  double signal_coeff = 0.0;  // P·L_f·L_u
  double tx_power = 0.0;
  double l_f = 0.0;
  double l_u = 0.0;
  double noise_ris = 0.0;
  double noise_mu = 0.0;
  double p_max = 0.0;
  double g_max = 0.0;

  int size() const { return static_cast<int>(b.size()); }
  int num_samples() const { return static_cast<int>(a.size()); }
};

PrecomputedQuantities precompute(const CorrelationModel& corr, const PortSelection& sel,
                                 const ChannelSet& channels, const SystemParams& params,
                                 const LinkGains& gains);
PrecomputedQuantities precompute(const Problem& problem, const PortSelection& sel);

/// Effective operator J^{1/2} Sᵀ diag(v) S J^{1/2} (M×M).
CMat effective_operator(const ReflectVector& v, const PortSelection& sel,
                        const CorrelationModel& corr);

/// SINR of sample s evaluated from the physical operator, without the lifted
/// reformulation.
double sinr_direct(const ReflectVector& v, const PortSelection& sel, const CorrelationModel& corr,
                   const ChannelSet& channels, const SystemParams& params, const LinkGains& gains,
                   int sample_index);
double radiated_power_direct(const ReflectVector& v, const PortSelection& sel,
                             const CorrelationModel& corr, const ChannelSet& channels,
                             const SystemParams& params, const LinkGains& gains);

double sinr_lifted(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre, int sample_index);
double sinr(const ReflectVector& v, const PrecomputedQuantities& pre, int sample_index);

double radiated_power(const ReflectVector& v, const PrecomputedQuantities& pre);
double radiated_power(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre);

/// (1/S)·Σ log2(1 + γ_s).
double saa_rate(const ReflectVector& v, const PrecomputedQuantities& pre);
double saa_rate(const LiftedMatrix& v_mat, const PrecomputedQuantities& pre);

/// SAA rate for an arbitrary selection straight from the whitened channels,
/// O(S·M_o²) with no per-selection matrices. Used in the CEM inner loop.
double selection_rate(const Problem& problem, const PortSelection& sel, const ReflectVector& v);
double selection_power(const Problem& problem, const PortSelection& sel, const ReflectVector& v);

}  // namespace faris
