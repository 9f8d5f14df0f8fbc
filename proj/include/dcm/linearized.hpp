#pragma once

#include "dcm/control.hpp"
#include "dcm/error.hpp"
#include "dcm/kernel.hpp"

#include <vector>

namespace dcm {

/// Phase deviation nu around a base modulation phi0 and the multiplier used.
struct Deviation {
  Vector nu;
  double lambda;
  /// max |nu| > 0.3: the first-order expansion is outside its validity range.
  bool large;
};

struct LambdaSample {
  double lambda;
  double energy;
  double max_nu;
};

/// Bracket failure carrying the scanned (lambda, energy, max_nu) table.
class BracketFailure : public Error {
 public:
  BracketFailure(const std::string& what, std::vector<LambdaSample> scan)
      : Error(ErrorKind::BracketFailure, what), scan_(std::move(scan)) {}
  const std::vector<LambdaSample>& scan() const { return scan_; }

 private:
  std::vector<LambdaSample> scan_;
};

/// Q(t_i, t_j) = Re[Phi(t_i - t_j) e^{i(phi0_i - phi0_j)}]; Phi~ cos(phi0_i - phi0_j + Delta(t_i - t_j))
/// for a single carrier.
double kernel_q(const LagKernel& kernel, const Vector& phase, Index i, Index j);

/// C_i = lambda phi0''_i + Z_i[phi0]; second differences inside, 0 at both ends.
Vector source_c(const LagKernel& kernel, const Vector& phase, double lambda);

/// Discretized linearized equation around phi0:
///   lambda D2 nu + diag(qbar) nu - (1/T) Q W nu = rhs,  at t_1 .. t_{N-2},
/// with nu(0) = 0 and nu(t_1) = first_value. The unknowns are nu_2 .. nu_{N-1}.
///
/// The D2 block is lower triangular in this ordering, so G = D2^{-1} K is reduced to
/// Hessenberg form once and each lambda costs one O(N^2) shifted solve.
class LinearizedProblem {
 public:
  LinearizedProblem(const LagKernel& kernel, const Vector& base_phase);

  const Vector& base_phase() const { return phase_; }
  const Vector& z() const { return z_; }
  /// Second differences of phi0 (0 at the ends).
  const Vector& base_curvature() const { return curvature_; }

  /// Solves with source C (equations at i = 1..N-2 read -C_i) and boundary value
  /// nu(t_1) = first_value.
  Vector solve(double lambda, const Vector& source, double first_value = 0.0) const;
  /// Solves with the built-in source C(lambda) and nu(t_1) = -phi0(t_1).
  Vector solve_deviation(double lambda) const;

 private:
  TimeGrid grid_;
  Vector phase_;
  Vector z_;
  Vector curvature_;
  // Kernel operator K restricted to unknown columns, and the known-column parts.
  Matrix kernel_rows_;
  Vector column0_;
  Vector column1_;
  Matrix hessenberg_;
  Matrix basis_;
};

/// Production solve with nu(0) = nu(t_1) = 0 for a given source C.
Deviation solve_linearized(const LagKernel& kernel, const Vector& base_phase, double lambda, const Vector& source);

struct LinearizedResult {
  ControlField field;
  Deviation deviation;
  double rate;
  std::vector<LambdaSample> scan;
};

/// Scans lambda over [1e-6, 1e6] lambda0 (lambda0 = Phi(0) T^2), bisects every sign
/// change of energy(phi0 + nu(lambda)) - E and keeps the root with the lowest rate.
LinearizedResult solve_with_energy(const LagKernel& kernel, const ControlField& base, double energy,
                                   int scan_points = 49);

/// Omega <- max(Omega, 0), rescaled to energy E.
ControlField apply_positivity(const ControlField& field, double energy);

}  // namespace dcm
