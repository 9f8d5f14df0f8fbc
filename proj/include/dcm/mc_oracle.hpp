#pragma once

#include "dcm/control.hpp"
#include "dcm/spectra.hpp"

#include <cstdint>
#include <vector>

namespace dcm {

/// K realizations of a stationary Gaussian process on a grid, one per column.
struct NoiseBatch {
  TimeGrid grid;
  std::uint64_t seed;
  Matrix samples;
  /// Set when the correlation carried a phase and only Re Phi was sampled.
  bool real_part_only;

  Index count() const { return samples.cols(); }
  Vector realization(Index k) const { return samples.col(k); }
};

/// Symmetric square root S of Cov_ij = Re Phi(t_i - t_j), eigenvalues clamped at 0.
struct CovarianceFactor {
  Matrix covariance;
  Matrix root;
  bool real_part_only;

  /// max |S S^T - Cov|.
  double reconstruction_error() const;
};

CovarianceFactor factor_covariance(const CorrelationFunction& c, const TimeGrid& grid);

/// delta_k = S xi_k with xi from a counter-based generator keyed by (seed, k, i).
NoiseBatch sample_noise(const CorrelationFunction& c, const TimeGrid& grid, Index count, std::uint64_t seed);
NoiseBatch sample_noise(const CovarianceFactor& factor, const TimeGrid& grid, Index count, std::uint64_t seed);

struct MonteCarloRate {
  double rate;
  double standard_error;
  Index count;
  std::vector<double> per_realization;
};

/// r_k = (2/T) Re nested-trapezoid of delta_k(t) delta_k(t1) eps*(t) eps(t1), averaged.
MonteCarloRate mc_rate(const NoiseBatch& batch, const ControlField& field);

}  // namespace dcm
