#pragma once

#include <Eigen/Dense>

#include <complex>
#include <utility>

namespace dcm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

/// Uniform sampling of [0, T] with N >= 16 points, t_i = i*h.
class TimeGrid {
 public:
  static constexpr Index kMinSamples = 16;

  TimeGrid(double duration, Index samples);

  double duration() const { return duration_; }
  Index size() const { return samples_; }
  double step() const { return duration_ / static_cast<double>(samples_ - 1); }
  double time(Index i) const { return static_cast<double>(i) * step(); }

  Vector times() const;
  /// Composite trapezoid weights: h/2 at both ends, h inside.
  Vector weights() const;

  /// Same duration, 2N-1 samples (h halved).
  TimeGrid refined() const { return TimeGrid(duration_, 2 * samples_ - 1); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.samples_ == b.samples_ && a.duration_ == b.duration_;
  }

 private:
  double duration_;
  Index samples_;
};

/// Uniform angular-frequency grid, symmetric about zero.
class FrequencyGrid {
 public:
  /// `points` samples spanning [-omega_max, omega_max].
  static FrequencyGrid symmetric(double omega_max, Index points);
  /// Grid containing 0 with the given spacing, reaching at least omega_max.
  static FrequencyGrid with_spacing(double spacing, double omega_max);

  Index size() const { return points_; }
  double omega_max() const { return omega_max_; }
  double step() const { return 2.0 * omega_max_ / static_cast<double>(points_ - 1); }
  double omega(Index k) const { return -omega_max_ + static_cast<double>(k) * step(); }
  Vector omegas() const;
  Vector weights() const;

 private:
  FrequencyGrid(double omega_max, Index points) : omega_max_(omega_max), points_(points) {}

  double omega_max_;
  Index points_;
};

/// Composite trapezoid of uniformly spaced samples.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& f, double h) {
  using Scalar = typename Derived::Scalar;
  const Index n = f.size();
  if (n < 2) return Scalar(0);
  return h * (f.sum() - Scalar(0.5) * (f(0) + f(n - 1)));
}

/// Running trapezoid integral, out(0) = 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> cumulative_trapezoid(
    const Eigen::MatrixBase<Derived>& f, double h) {
  using Scalar = typename Derived::Scalar;
  const Index n = f.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  if (n == 0) return out;
  out(0) = Scalar(0);
  Scalar acc(0);
  for (Index i = 1; i < n; ++i) {
    acc += Scalar(0.5 * h) * (f(i - 1) + f(i));
    out(i) = acc;
  }
  return out;
}

/// Central differences inside, second-order one-sided at the ends.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> derivative(
    const Eigen::MatrixBase<Derived>& f, double h) {
  using Scalar = typename Derived::Scalar;
  const Index n = f.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Index i = 1; i + 1 < n; ++i) out(i) = (f(i + 1) - f(i - 1)) / Scalar(2.0 * h);
  out(0) = (Scalar(-3) * f(0) + Scalar(4) * f(1) - f(2)) / Scalar(2.0 * h);
  out(n - 1) = (Scalar(3) * f(n - 1) - Scalar(4) * f(n - 2) + f(n - 3)) / Scalar(2.0 * h);
  return out;
}

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
struct GaussLegendre {
  explicit GaussLegendre(int order);

  template <typename F>
  auto integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    decltype(f(mid)) acc{};
    for (Index k = 0; k < nodes.size(); ++k) acc += weights(k) * f(mid + half * nodes(k));
    return acc * half;
  }

  Vector nodes;
  Vector weights;
};

}  // namespace dcm
