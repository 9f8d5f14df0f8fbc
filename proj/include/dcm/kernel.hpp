#pragma once

#include "dcm/grid.hpp"
#include "dcm/spectra.hpp"

namespace dcm {

/// Correlation sampled at the lags of a time grid, Phi(k h), k = 0..N-1, with
/// the Toeplitz products used by the rate, the Z functional and the linearized
/// kernel.
///
/// Single-carrier correlations keep a real envelope and fold the carrier into the
/// phase (a = phi + Delta t); multi-carrier ones use the complex Hermitian Toeplitz
/// operator directly.
class LagKernel {
 public:
  LagKernel(const CorrelationFunction& c, const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  bool single_carrier() const { return single_carrier_; }
  double carrier() const { return carrier_; }
  /// Phi(0), real and >= 0.
  double zero_lag() const { return envelope_(0); }
  /// Real envelope samples (single-carrier path).
  const Vector& envelope() const { return envelope_; }
  /// Complex samples Phi(k h).
  const ComplexVector& samples() const { return samples_; }

  /// Phi(t_i - t_j).
  Complex at(Index i, Index j) const;

  /// (2/T) Re sum_i w_i eps*_i sum_{j<=i} v_ij Phi(t_i - t_j) eps_j, nested trapezoid.
  double rate(const Vector& phase) const;
  /// Z_i = (1/T) sum_j w_j Im[Phi(t_i - t_j) e^{i(phi_i - phi_j)}].
  Vector z(const Vector& phase) const;
  /// Q_ij = Re[Phi(t_i - t_j) e^{i(phi_i - phi_j)}].
  Matrix q(const Vector& phase) const;

 private:
  // Phase factors e^{-i a} with the carrier folded in on the single-carrier path.
  ComplexVector modulation(const Vector& phase) const;
  // y_i = sum_j Phi(t_i - t_j) x_j over all j.
  ComplexVector toeplitz(const ComplexVector& x) const;
  // y_i = sum_{j<=i} Phi(t_i - t_j) x_j.
  ComplexVector lower(const ComplexVector& x) const;

  TimeGrid grid_;
  bool single_carrier_;
  double carrier_;
  Vector envelope_;
  ComplexVector samples_;
  // Reversed samples: reversed_(m) = Phi((N-1-m) h); envelope_reversed_ likewise.
  ComplexVector reversed_;
  Vector envelope_reversed_;
};

}  // namespace dcm
