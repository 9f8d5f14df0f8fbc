#include "dcm/kernel.hpp"

#include "dcm/error.hpp"

#include <cmath>

namespace dcm {

LagKernel::LagKernel(const CorrelationFunction& c, const TimeGrid& grid)
    : grid_(grid), single_carrier_(c.single_carrier()), carrier_(c.spectral_center()) {
  const Index n = grid.size();
  const double h = grid.step();
  if (c.max_lag() < grid.duration() * (1.0 - 1e-12))
    throw Error(ErrorKind::InvalidInput, "correlation table shorter than the time window");
  if (single_carrier_) {
    envelope_ = c.envelope_samples(h, n);
    samples_.resize(n);
    for (Index k = 0; k < n; ++k) samples_(k) = envelope_(k) * std::polar(1.0, carrier_ * h * static_cast<double>(k));
  } else {
    carrier_ = 0.0;
    samples_ = c.lag_samples(h, n);
    envelope_ = samples_.cwiseAbs();
  }
  if (!(envelope_(0) >= 0.0)) throw Error(ErrorKind::InvalidInput, "Phi(0) must be >= 0");
  reversed_ = samples_.reverse();
  envelope_reversed_ = envelope_.reverse();
}

Complex LagKernel::at(Index i, Index j) const {
  return i >= j ? samples_(i - j) : std::conj(samples_(j - i));
}

ComplexVector LagKernel::modulation(const Vector& phase) const {
  if (phase.size() != grid_.size()) throw Error(ErrorKind::InvalidInput, "phase length does not match the grid");
  const double h = grid_.step();
  ComplexVector eps(phase.size());
  for (Index i = 0; i < phase.size(); ++i)
    eps(i) = std::polar(1.0, -(phase(i) + carrier_ * h * static_cast<double>(i)));
  return eps;
}

ComplexVector LagKernel::lower(const ComplexVector& x) const {
  const Index n = x.size();
  ComplexVector y(n);
  if (single_carrier_) {
    const Vector re = x.real();
    const Vector im = x.imag();
    for (Index i = 0; i < n; ++i) {
      const auto k = envelope_reversed_.segment(n - 1 - i, i + 1);
      y(i) = Complex(k.dot(re.head(i + 1)), k.dot(im.head(i + 1)));
    }
  } else {
    for (Index i = 0; i < n; ++i)
      y(i) = (reversed_.segment(n - 1 - i, i + 1).array() * x.head(i + 1).array()).sum();
  }
  return y;
}

ComplexVector LagKernel::toeplitz(const ComplexVector& x) const {
  const Index n = x.size();
  ComplexVector y = lower(x);
  if (single_carrier_) {
    const Vector re = x.real();
    const Vector im = x.imag();
    for (Index i = 0; i + 1 < n; ++i) {
      const auto k = envelope_.segment(1, n - 1 - i);
      y(i) += Complex(k.dot(re.tail(n - 1 - i)), k.dot(im.tail(n - 1 - i)));
    }
  } else {
    // Upper triangle: Phi(t_i - t_j) = conj(Phi(t_j - t_i)); dot() conjugates its left operand.
    for (Index i = 0; i + 1 < n; ++i) y(i) += samples_.segment(1, n - 1 - i).dot(x.tail(n - 1 - i));
  }
  return y;
}

double LagKernel::rate(const Vector& phase) const {
  const Index n = grid_.size();
  const double h = grid_.step();
  const ComplexVector eps = modulation(phase);
  const ComplexVector full = lower(eps);
  // Inner trapezoid over [0, t_i]: halve the j = 0 and j = i terms.
  const Complex phi0 = single_carrier_ ? Complex(envelope_(0)) : samples_(0);
  const Vector w = grid_.weights();
  double acc = 0.0;
  for (Index i = 1; i < n; ++i) {
    const Complex kernel_i = single_carrier_ ? Complex(envelope_(i)) : samples_(i);
    const Complex inner = h * full(i) - 0.5 * h * (kernel_i * eps(0) + phi0 * eps(i));
    acc += w(i) * (std::conj(eps(i)) * inner).real();
  }
  return 2.0 / grid_.duration() * acc;
}

Vector LagKernel::z(const Vector& phase) const {
  const ComplexVector eps = modulation(phase);
  const ComplexVector y = toeplitz(grid_.weights().cast<Complex>().cwiseProduct(eps));
  return (eps.conjugate().cwiseProduct(y)).imag() / grid_.duration();
}

Matrix LagKernel::q(const Vector& phase) const {
  const Index n = grid_.size();
  const ComplexVector eps = modulation(phase);
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const Complex k = single_carrier_ ? Complex(envelope_(i - j)) : samples_(i - j);
      const double v = (k * std::conj(eps(i)) * eps(j)).real();
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace dcm
