#pragma once

#include "dcm/control.hpp"
#include "dcm/kernel.hpp"
#include "dcm/spectra.hpp"

#include <optional>

namespace dcm {

struct Fidelity {
  double value;
  bool clamped;
};

struct RateReport {
  double rate_time;
  double rate_freq;
  double duration;
  double energy;
  double alpha;
  Fidelity fidelity;
  std::optional<double> normalized;
};

/// Nested trapezoid of (2/T) Re int_0^T dt int_0^t dt1 Phi(t - t1) eps*(t) eps(t1).
double rate_time_domain(const CorrelationFunction& c, const ControlField& field);
double rate_time_domain(const LagKernel& kernel, const ControlField& field);

/// 2 pi * trapezoid of G F_T. Jumps of G (cutoffs) are integrated with one-sided
/// limits; a jump inside a cell splits it. Throws Coverage if the grid misses
/// part of G's support.
double rate_freq_domain(const DephasingSpectrum& s, const Vector& intensity, const FrequencyGrid& omegas);

/// Throws Coverage unless the grid spans G's support (band-limited kinds) or G at
/// the grid edges is below 1e-3 of its maximum on the grid.
void check_coverage(const DephasingSpectrum& s, const FrequencyGrid& omegas);

/// 1 - alpha R T, clamped into [0, 1].
Fidelity fidelity(double rate, double duration, double alpha);

/// R_floor = 1e-12 Phi(0) T.
double rate_floor(double zero_lag, double duration);

/// R(field) / R(zero field) on the same grid.
double normalized_rate(const CorrelationFunction& c, const ControlField& field);
double normalized_rate(const LagKernel& kernel, const ControlField& field);

/// Both routes, fidelity and (when unmodulated_rate is given) the normalized rate.
RateReport evaluate_rate(const LagKernel& kernel, const DephasingSpectrum& s, const ControlField& field,
                         const FrequencyGrid& omegas, double alpha,
                         std::optional<double> unmodulated_rate = std::nullopt);

}  // namespace dcm
