#pragma once

#include "dcm/grid.hpp"

#include <cstdint>

namespace dcm {

/// Modulation sampled on a time grid: amplitude Omega(t_i) and accumulated
/// phase phi(t_i) = cumulative trapezoid of Omega, phi(0) = 0.
class ControlField {
 public:
  /// Builds the phase from the amplitude samples.
  ControlField(TimeGrid grid, Vector amplitude);

  static ControlField zero(const TimeGrid& grid) { return {grid, Vector::Zero(grid.size())}; }

  const TimeGrid& grid() const { return grid_; }
  const Vector& amplitude() const { return amplitude_; }
  const Vector& phase() const { return phase_; }

 private:
  TimeGrid grid_;
  Vector amplitude_;
  Vector phase_;
};

ControlField phase_from_amplitude(const Vector& amplitude, const TimeGrid& grid);

/// e^{-i phi(t_i)}.
ComplexVector epsilon(const ControlField& field);

/// (2pi)^{-1/2} * trapezoid of eps(t) e^{i w t} over [0, T] at every grid frequency.
ComplexVector finite_time_ft(const ComplexVector& eps, const TimeGrid& grid, const FrequencyGrid& omegas);

/// |eps_T(w)|^2 / T.
Vector spectral_intensity(const ComplexVector& eps_t, double duration);

/// Trapezoid of Omega^2.
double energy(const ControlField& field);

struct DDParams {
  int pulses;
  double pulse_width;
  double interval;
  /// n pi^2 / pulse_width.
  double realized_energy;
};

struct DDSequence {
  ControlField field;
  DDParams params;
};

/// Rectangular pi-pulses of height pi/width starting at j*tau, j = 0..n-1, with
/// n = round(width * E / pi^2) and tau = (T - width) / n. Edges snap to samples.
DDSequence dd_sequence(double energy, const TimeGrid& grid, double pulse_width);

/// Omega(t) = a [1 + e^{-t/T}(t/T - 1)].
ControlField chirp_ansatz(double a, const TimeGrid& grid);

/// Omega(t) = slope (phi linear in t).
ControlField linear_phase(double slope, const TimeGrid& grid);

/// Multiplicative white noise Omega (1 + xi_i), xi ~ N(0, sigma_rel^2).
ControlField perturb(const ControlField& field, double sigma_rel, std::uint64_t seed);

/// Same shape scaled by one positive factor to the given energy.
ControlField rescale_to_energy(const ControlField& field, double energy);

}  // namespace dcm
