#include "dcm/grid.hpp"

#include "dcm/error.hpp"

#include <cmath>

namespace dcm {

TimeGrid::TimeGrid(double duration, Index samples) : duration_(duration), samples_(samples) {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw Error(ErrorKind::InvalidParameter, "time grid duration must be positive");
  if (samples < kMinSamples)
    throw Error(ErrorKind::InvalidParameter, "time grid needs at least 16 samples");
}

Vector TimeGrid::times() const { return Vector::LinSpaced(samples_, 0.0, duration_); }

Vector TimeGrid::weights() const {
  Vector w = Vector::Constant(samples_, step());
  w(0) *= 0.5;
  w(samples_ - 1) *= 0.5;
  return w;
}

FrequencyGrid FrequencyGrid::symmetric(double omega_max, Index points) {
  if (!(omega_max > 0.0)) throw Error(ErrorKind::InvalidParameter, "omega_max must be positive");
  if (points < 3) throw Error(ErrorKind::InvalidParameter, "frequency grid needs >= 3 points");
  return FrequencyGrid(omega_max, points);
}

FrequencyGrid FrequencyGrid::with_spacing(double spacing, double omega_max) {
  if (!(spacing > 0.0) || !(omega_max > 0.0))
    throw Error(ErrorKind::InvalidParameter, "frequency spacing and range must be positive");
  const auto half = static_cast<Index>(std::ceil(omega_max / spacing - 1e-9));
  return FrequencyGrid(static_cast<double>(half) * spacing, 2 * half + 1);
}

Vector FrequencyGrid::omegas() const { return Vector::LinSpaced(points_, -omega_max_, omega_max_); }

Vector FrequencyGrid::weights() const {
  Vector w = Vector::Constant(points_, step());
  w(0) *= 0.5;
  w(points_ - 1) *= 0.5;
  return w;
}

GaussLegendre::GaussLegendre(int order) {
  // Jacobi matrix of the Legendre recurrence; eigenvalues are the nodes.
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  nodes = eig.eigenvalues();
  weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

}  // namespace dcm
