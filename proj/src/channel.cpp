#include "faris/channel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "faris/rng.hpp"

namespace faris {

void SurfaceGeometry::validate() const {
  if (m_x < 1 || m_y < 0) throw ValidationError("geometry: m_x must be >= 1 and m_y >= 0");
  if (num_elements() < 4) {
    throw ValidationError("geometry: surface needs at least 4 elements, got " +
                          std::to_string(num_elements()));
  }
  if (!(w_x > 0.0)) throw ValidationError("geometry: w_x must be > 0");
  if (!(wavelength > 0.0)) throw ValidationError("geometry: wavelength must be > 0");
}

void SystemParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ValidationError(std::string("system: ") + name + " must be > 0");
  };
  positive(tx_power_w, "tx_power");
  positive(p_max_w, "p_max");
  positive(g_max, "g_max");
  positive(noise_mu_w, "noise_mu");
  if (!(noise_ris_w >= 0.0)) throw ValidationError("system: noise_ris must be >= 0");
  if (!(rician_k >= 0.0)) throw ValidationError("system: rician_k must be >= 0");
  positive(l_f_m, "l_f_m");
  positive(l_u_m, "l_u_m");
}

bool SystemParams::los_condition_holds(const SurfaceGeometry& geom) const {
  return l_f_m < geom.wavelength * geom.num_elements();
}

SystemParams SystemParamsDb::to_linear() const {
  SystemParams p;
  p.tx_power_w = dbm_to_watts(tx_power_dbm);
  p.p_max_w = std::isinf(p_max_dbm) && p_max_dbm > 0 ? std::numeric_limits<double>::infinity()
                                                      : dbm_to_watts(p_max_dbm);
  p.g_max = db_to_amplitude(g_max_db);
  p.noise_ris_w = dbm_to_watts(noise_ris_dbm);
  p.noise_mu_w = dbm_to_watts(noise_mu_dbm);
  p.rician_k = rician_k;
  p.l_f_m = l_f_m;
  p.l_u_m = l_u_m;
  p.pl_exp_f = pl_exp_f;
  p.pl_exp_u = pl_exp_u;
  p.mu_azimuth_rad = mu_azimuth_deg * kPi / 180.0;
  p.mu_elevation_rad = mu_elevation_deg * kPi / 180.0;
  return p;
}

double element_distance(int i, int j, const SurfaceGeometry& geom) {
  const int m = geom.num_elements();
  if (i < 0 || j < 0 || i >= m || j >= m) {
    std::ostringstream os;
    os << "element_distance: index out of range (i=" << i << ", j=" << j << ", M=" << m << ")";
    throw ValidationError(os.str());
  }
  const double dc = geom.col_of(i) - geom.col_of(j);
  const double dr = geom.row_of(i) - geom.row_of(j);
  return geom.spacing() * std::sqrt(dc * dc + dr * dr);
}

CorrelationModel build_correlation(const SurfaceGeometry& geom) {
  geom.validate();
  const int m = geom.num_elements();
  CorrelationModel corr;
  corr.j.resize(m, m);
  for (int i = 0; i < m; ++i) {
    corr.j(i, i) = 1.0;
    for (int k = i + 1; k < m; ++k) {
      const double x = 2.0 * kPi * element_distance(i, k, geom) / geom.wavelength;
      const double v = std::sin(x) / x;
      corr.j(i, k) = v;
      corr.j(k, i) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<RMat> eig(corr.j);
  if (eig.info() != Eigen::Success) {
    std::ostringstream os;
    os << "build_correlation: eigendecomposition failed (M=" << m
       << ", frobenius=" << corr.j.norm() << ", max_abs=" << corr.j.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(os.str());
  }
  RVec lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * lambda.maxCoeff();
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    lambda(k) = lambda(k) < cutoff ? 0.0 : std::sqrt(lambda(k));
  }
  const RMat& u = eig.eigenvectors();
  corr.j_sqrt = u * lambda.asDiagonal() * u.transpose();
  corr.j_sqrt = 0.5 * (corr.j_sqrt + corr.j_sqrt.transpose()).eval();
  return corr;
}

CVec los_bs_faris(const SurfaceGeometry& geom, double l_f) {
  if (!(l_f > 0.0)) throw ValidationError("los_bs_faris: l_f must be > 0");
  const int m = geom.num_elements();
  CVec h(m);
  for (int i = 0; i < m; ++i) {
    const double x = geom.x_of(i);
    const double y = geom.y_of(i);
    const double r = std::sqrt(x * x + y * y + l_f * l_f);
    h(i) = std::polar(1.0, -2.0 * kPi * r / geom.wavelength);
  }
  return h;
}

CVec los_mu_planar(const SurfaceGeometry& geom, double azimuth_rad, double elevation_rad) {
  const int m = geom.num_elements();
  const double kx = std::sin(elevation_rad) * std::cos(azimuth_rad);
  const double ky = std::sin(elevation_rad) * std::sin(azimuth_rad);
  CVec h(m);
  for (int i = 0; i < m; ++i) {
    const double path = geom.x_of(i) * kx + geom.y_of(i) * ky;
    h(i) = std::polar(1.0, -2.0 * kPi * path / geom.wavelength);
  }
  return h;
}

std::vector<CVec> sample_rician(const CVec& h_u_los, double rician_k, int count,
                                std::uint64_t seed) {
  if (!(rician_k >= 0.0)) throw ValidationError("sample_rician: K must be >= 0");
  if (count < 1) throw ValidationError("sample_rician: sample count must be >= 1");
  const double los = std::sqrt(rician_k / (rician_k + 1.0));
  const double nlos = std::sqrt(1.0 / (rician_k + 1.0));
  Rng rng(seed);
  std::vector<CVec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    out.push_back(los * h_u_los + nlos * rng.complex_normal_vector(h_u_los.size()));
  }
  return out;
}

double path_loss(double distance, double exponent, double wavelength) {
  if (!(distance >= 1.0)) {
    throw ValidationError("path_loss: distance must be >= 1 m (reference-distance model), got " +
                          std::to_string(distance));
  }
  const double ref = wavelength / (4.0 * kPi);
  return ref * ref * std::pow(distance, -exponent);
}

ChannelSet make_channel_set(const SurfaceGeometry& geom, const SystemParams& params,
                            int samples, std::uint64_t seed) {
  ChannelSet set;
  set.h_f_los = los_bs_faris(geom, params.l_f_m);
  set.h_u_los = los_mu_planar(geom, params.mu_azimuth_rad, params.mu_elevation_rad);
  set.samples = sample_rician(set.h_u_los, params.rician_k, samples, seed);
  return set;
}

}  // namespace faris
