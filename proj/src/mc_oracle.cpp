#include "dcm/mc_oracle.hpp"

#include "dcm/error.hpp"
#include "dcm/random.hpp"

#include <cmath>

namespace dcm {

double CovarianceFactor::reconstruction_error() const {
  return (root * root.transpose() - covariance).cwiseAbs().maxCoeff();
}

CovarianceFactor factor_covariance(const CorrelationFunction& c, const TimeGrid& grid) {
  const Index n = grid.size();
  const ComplexVector lags = c.lag_samples(grid.step(), n);
  const bool real_only = lags.imag().cwiseAbs().maxCoeff() > 0.0;
  Matrix cov(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cov(i, j) = lags(std::abs(i - j)).real();

  const double phi0 = lags(0).real();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Vector values = eig.eigenvalues();
  if (values.size() > 0 && values.minCoeff() < -1e-10 * phi0)
    throw Error(ErrorKind::InvalidCovariance, "covariance matrix is indefinite beyond the clamp tolerance");
  values = values.cwiseMax(0.0).cwiseSqrt();
  Matrix root = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return {std::move(cov), std::move(root), real_only};
}

NoiseBatch sample_noise(const CovarianceFactor& factor, const TimeGrid& grid, Index count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::InvalidParameter, "need at least one realization");
  if (factor.root.rows() != grid.size()) throw Error(ErrorKind::InvalidInput, "factor does not match the grid");
  const Index n = grid.size();
  const CounterNormal normal(seed);
  Matrix xi(n, count);
  for (Index k = 0; k < count; ++k)
    for (Index i = 0; i < n; ++i) xi(i, k) = normal(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
  return {grid, seed, factor.root * xi, factor.real_part_only};
}

NoiseBatch sample_noise(const CorrelationFunction& c, const TimeGrid& grid, Index count, std::uint64_t seed) {
  return sample_noise(factor_covariance(c, grid), grid, count, seed);
}

MonteCarloRate mc_rate(const NoiseBatch& batch, const ControlField& field) {
  if (!(batch.grid == field.grid())) throw Error(ErrorKind::InvalidInput, "batch and field grids differ");
  const TimeGrid& grid = field.grid();
  const Index n = grid.size();
  const double h = grid.step();
  const Vector w = grid.weights();
  const ComplexVector eps = epsilon(field);

  MonteCarloRate out{0.0, 0.0, batch.count(), {}};
  out.per_realization.reserve(static_cast<std::size_t>(batch.count()));
  for (Index k = 0; k < batch.count(); ++k) {
    const auto delta = batch.samples.col(k);
    // Prefix sum gives the inner trapezoid over [0, t_i] in O(N).
    Complex prefix(0.0);
    double acc = 0.0;
    const Complex first = delta(0) * eps(0);
    for (Index i = 0; i < n; ++i) {
      const Complex term = delta(i) * eps(i);
      prefix += term;
      if (i == 0) continue;
      const Complex inner = h * prefix - 0.5 * h * (first + term);
      acc += w(i) * (std::conj(term) * inner).real();
    }
    out.per_realization.push_back(2.0 / grid.duration() * acc);
  }
  double sum = 0.0;
  for (double r : out.per_realization) sum += r;
  out.rate = sum / static_cast<double>(out.count);
  if (out.count > 1) {
    double ss = 0.0;
    for (double r : out.per_realization) ss += (r - out.rate) * (r - out.rate);
    out.standard_error = std::sqrt(ss / static_cast<double>(out.count - 1) / static_cast<double>(out.count));
  }
  return out;
}

}  // namespace dcm
