#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace faris {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Invalid input: bad dimensions, out-of-range indices, inconsistent configs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
/// Amplitude ratio for a gain quoted in dB (20·log10 convention).
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

/// Rebuilds a Hermitian matrix from its upper triangle. The upper triangle is
/// authoritative; the diagonal is forced real.
inline CMat hermitian_from_upper(const CMat& m) {
  CMat h = m.triangularView<Eigen::Upper>();
  h.diagonal() = h.diagonal().real().cast<Complex>();
  h.triangularView<Eigen::StrictlyLower>() = h.adjoint().triangularView<Eigen::StrictlyLower>();
  return h;
}

/// Re tr(A B) for Hermitian A, B: the real inner product on Hermitian matrices.
inline double trace_product(const CMat& a, const CMat& b) {
  return (a.cwiseProduct(b.transpose())).sum().real();
}

}  // namespace faris
