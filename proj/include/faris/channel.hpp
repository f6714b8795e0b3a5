#pragma once

#include <cstdint>
#include <vector>

#include "faris/common.hpp"

namespace faris {

/// Planar grid of candidate ports. Element i sits at (row, col) =
/// (i / m_x, i % m_x), 0-based row-major. Spacing is d = w_x·λ/m_x along both
/// axes; m_y defaults to m_x (square surface).
struct SurfaceGeometry {
  int m_x = 10;
  int m_y = 0;  // 0 means square (m_y = m_x)
  double w_x = 2.0;
  double wavelength = 0.06;

  int rows() const { return m_y > 0 ? m_y : m_x; }
  int num_elements() const { return m_x * rows(); }
  double spacing() const { return w_x * wavelength / m_x; }
  int row_of(int i) const { return i / m_x; }
  int col_of(int i) const { return i % m_x; }
  /// Position relative to the surface centre, in meters.
  double x_of(int i) const { return (col_of(i) - 0.5 * (m_x - 1)) * spacing(); }
  double y_of(int i) const { return (row_of(i) - 0.5 * (rows() - 1)) * spacing(); }

  void validate() const;
};

/// Physical system parameters in linear units (W, amplitude gain, meters).
/// Produced once from the dB-denominated config.
struct SystemParams {
  double tx_power_w = 0.0;
  double p_max_w = 0.0;  // +inf disables the radiated-power budget
  double g_max = 0.0;    // amplitude
  double noise_ris_w = 0.0;
  double noise_mu_w = 0.0;
  double rician_k = 1.0;
  double l_f_m = 3.0;
  double l_u_m = 15.0;
  double pl_exp_f = 2.0;
  double pl_exp_u = 2.2;
  double mu_azimuth_rad = 0.0;
  double mu_elevation_rad = 0.0;

  void validate() const;
  /// BS distance inside the near-field LoS region (l_f < λM).
  bool los_condition_holds(const SurfaceGeometry& geom) const;
};

/// dB-denominated view of SystemParams, as written in configuration files.
struct SystemParamsDb {
  double tx_power_dbm = 15.0;
  double p_max_dbm = 25.0;
  double g_max_db = 40.0;
  double noise_ris_dbm = -90.0;
  double noise_mu_dbm = -90.0;
  double rician_k = 1.0;
  double l_f_m = 3.0;
  double l_u_m = 15.0;
  double pl_exp_f = 2.0;
  double pl_exp_u = 2.2;
  double mu_azimuth_deg = 0.0;
  double mu_elevation_deg = 0.0;

  SystemParams to_linear() const;
};

struct CorrelationModel {
  RMat j;
  RMat j_sqrt;
};

struct ChannelSet {
  CVec h_f_los;
  CVec h_u_los;
  std::vector<CVec> samples;
};

double element_distance(int i, int j, const SurfaceGeometry& geom);

/// Jakes correlation J_ij = sin(x)/x, x = 2π d_ij/λ, and its PSD square root.
CorrelationModel build_correlation(const SurfaceGeometry& geom);

/// Spherical-wave steering from a BS on boresight at distance l_f.
CVec los_bs_faris(const SurfaceGeometry& geom, double l_f);

/// Far-field planar steering toward (azimuth, elevation); broadside is all ones.
CVec los_mu_planar(const SurfaceGeometry& geom, double azimuth_rad, double elevation_rad);

std::vector<CVec> sample_rician(const CVec& h_u_los, double rician_k, int count,
                                std::uint64_t seed);

/// Friis reference at 1 m: (λ/4π)² · distance^(−exponent).
double path_loss(double distance, double exponent, double wavelength);

/// LoS channels plus `samples` Rician draws of the surface→MU link.
ChannelSet make_channel_set(const SurfaceGeometry& geom, const SystemParams& params,
                            int samples, std::uint64_t seed);

}  // namespace faris
