#pragma once

#include "dcm/control.hpp"
#include "dcm/kernel.hpp"

#include <optional>

namespace dcm {

struct InitialGuess {
  enum class Kind { Chirp, DD, LinearPhase, Explicit };

  Kind kind = Kind::Chirp;
  /// Chirp a, DD pulse width or linear-phase slope; the guess is rescaled to E anyway.
  double parameter = 1.0;
  /// Amplitude samples for Kind::Explicit.
  Vector samples;

  static InitialGuess chirp(double a = 1.0) { return {Kind::Chirp, a, {}}; }
  static InitialGuess dd(double pulse_width) { return {Kind::DD, pulse_width, {}}; }
  static InitialGuess linear_phase(double slope = 1.0) { return {Kind::LinearPhase, slope, {}}; }
  static InitialGuess explicit_samples(Vector amplitude) { return {Kind::Explicit, 0.0, std::move(amplitude)}; }
};

struct SolverConfig {
  /// Mixing factor of the accelerated fixed-point step; a step that grows the
  /// update by more than 1.5x is rejected and the factor halved (down to 2^-40).
  double damping = 0.5;
  /// Stop when max |phi* - phi| < tol_phase.
  double tol_phase = 1e-9;
  /// Per stage (iteration, negated guess, descent, polish); ELSolution::iterations sums them.
  int max_iter = 500;
  InitialGuess initial_guess = InitialGuess::chirp();
  /// Smallest admissible D; default 1e-12 Phi(0) T^2.
  std::optional<double> denom_floor;
  /// Anderson history length; 0 gives plain damped iteration.
  int anderson_depth = 5;
  /// Default 1e-4 sqrt(E) Phi(0) T.
  std::optional<double> residual_tol;
};

struct ELSolution {
  ControlField field;
  int iterations = 0;
  double residual = 0.0;
  double energy_realized = 0.0;
  bool converged = false;
  /// Last max |phi* - phi|.
  double phase_step = 0.0;
  double rate = 0.0;
  double initial_rate = 0.0;
  /// True when the run from the negated guess was kept.
  bool negated_guess = false;
};

/// Z_i = (1/T) trapezoid_j Phi~(|t_i - t_j|) sin[phi_i - phi_j + Delta (t_i - t_j)]
/// (the complex form Im[Phi e^{i(phi_i - phi_j)}] on the multi-carrier path).
Vector z_functional(const CorrelationFunction& c, const Vector& phase, const TimeGrid& grid);

/// Amplitude of the guess on the grid, rescaled to energy E.
ControlField initial_field(const InitialGuess& guess, const TimeGrid& grid, double energy);

/// Fixed point of Omega = -sqrt(E) I / D, I = cumulative integral of Z[phi],
/// D = sqrt(int I^2), phi = cumulative integral of Omega.
/// If the iteration stalls or ends above the guess rate, BFGS descent on the
/// energy sphere takes over and its result is polished by the same iteration.
ELSolution solve_optimal(const CorrelationFunction& c, double energy, const TimeGrid& grid,
                         const SolverConfig& cfg = {});
ELSolution solve_optimal(const LagKernel& kernel, double energy, const SolverConfig& cfg = {});

/// max over interior samples of |phi'' + sqrt(E) Z / D|, phi'' by second differences.
double el_residual(const CorrelationFunction& c, const ControlField& field, double energy);
double el_residual(const LagKernel& kernel, const ControlField& field, double energy,
                   std::optional<double> denom_floor = std::nullopt);

double default_denom_floor(const LagKernel& kernel);
double default_residual_tol(const LagKernel& kernel, double energy);

}  // namespace dcm
