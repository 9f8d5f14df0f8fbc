#include "dcm/linearized.hpp"

#include "dcm/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcm {

namespace {

// Applies the inverse of the lower-triangular second-difference block
// (1/h^2 on the diagonal, -2/h^2 and 1/h^2 below) to every column of x.
void apply_d2_inverse(Eigen::Ref<Matrix> x, double h) {
  const double h2 = h * h;
  for (Index e = 0; e < x.rows(); ++e) {
    x.row(e) *= h2;
    if (e >= 1) x.row(e) += 2.0 * x.row(e - 1);
    if (e >= 2) x.row(e) -= x.row(e - 2);
  }
}

// Solves (H + shift I) y = b for upper Hessenberg H, partial pivoting.
Vector shifted_hessenberg_solve(const Matrix& hess, double shift, Vector b) {
  const Index n = hess.rows();
  Matrix a = hess;
  a.diagonal().array() += shift;
  for (Index k = 0; k + 1 < n; ++k) {
    if (std::abs(a(k + 1, k)) > std::abs(a(k, k))) {
      a.row(k).swap(a.row(k + 1));
      std::swap(b(k), b(k + 1));
    }
    if (a(k, k) == 0.0) continue;
    const double m = a(k + 1, k) / a(k, k);
    if (m != 0.0) {
      a.row(k + 1).tail(n - k) -= m * a.row(k).tail(n - k);
      b(k + 1) -= m * b(k);
    }
  }
  const double scale = a.cwiseAbs().maxCoeff();
  for (Index k = 0; k < n; ++k) {
    if (!(std::abs(a(k, k)) > 1e-14 * scale)) {
      const double smallest = a.diagonal().cwiseAbs().minCoeff();
      throw Error(ErrorKind::IllPosed, "singular linearized system (condition estimate " +
                                           std::to_string(scale / std::max(smallest, 1e-300)) + ")");
    }
  }
  return a.triangularView<Eigen::Upper>().solve(b);
}

}  // namespace

double kernel_q(const LagKernel& kernel, const Vector& phase, Index i, Index j) {
  // The lag samples already carry the carrier on the single-carrier path.
  return (kernel.at(i, j) * std::polar(1.0, phase(i) - phase(j))).real();
}

Vector source_c(const LagKernel& kernel, const Vector& phase, double lambda) {
  const Index n = phase.size();
  const double h = kernel.grid().step();
  Vector curvature = Vector::Zero(n);
  for (Index i = 1; i + 1 < n; ++i) curvature(i) = (phase(i + 1) - 2.0 * phase(i) + phase(i - 1)) / (h * h);
  return lambda * curvature + kernel.z(phase);
}

LinearizedProblem::LinearizedProblem(const LagKernel& kernel, const Vector& base_phase)
    : grid_(kernel.grid()), phase_(base_phase) {
  const Index N = grid_.size();
  if (base_phase.size() != N) throw Error(ErrorKind::InvalidInput, "base phase does not match the grid");
  const Index n = N - 2;
  const double T = grid_.duration();
  z_ = kernel.z(phase_);
  curvature_ = source_c(kernel, phase_, 1.0) - z_;

  const Matrix q = kernel.q(phase_);
  const Vector w = grid_.weights();
  const Vector qbar = q * w / T;
  // Rows i = 1..N-2 of diag(qbar) - (1/T) Q W.
  Matrix op = -(q.middleRows(1, n) * w.asDiagonal()) / T;
  for (Index e = 0; e < n; ++e) op(e, e + 1) += qbar(e + 1);
  column0_ = op.col(0);
  column1_ = op.col(1);
  kernel_rows_ = op.rightCols(n);

  Matrix g = kernel_rows_;
  apply_d2_inverse(g, grid_.step());
  Eigen::HessenbergDecomposition<Matrix> hd(g);
  hessenberg_ = hd.matrixH();
  basis_ = hd.matrixQ();
}

Vector LinearizedProblem::solve(double lambda, const Vector& source, double first_value) const {
  if (lambda == 0.0) throw Error(ErrorKind::InvalidParameter, "lambda must be non-zero");
  const Index N = grid_.size();
  if (source.size() != N) throw Error(ErrorKind::InvalidInput, "source does not match the grid");
  const Index n = N - 2;
  const double h2 = grid_.step() * grid_.step();

  // (lambda B + K) u = -C - (known boundary columns); divide by lambda after B^{-1}.
  Matrix rhs = -source.segment(1, n) - column1_ * first_value;
  rhs(0) -= lambda * (-2.0 / h2) * first_value;
  if (n > 1) rhs(1) -= lambda * (1.0 / h2) * first_value;
  apply_d2_inverse(rhs, grid_.step());
  const Vector y = shifted_hessenberg_solve(hessenberg_ / lambda, 1.0, basis_.transpose() * rhs.col(0) / lambda);

  Vector nu(N);
  nu(0) = 0.0;
  nu(1) = first_value;
  nu.tail(n) = basis_ * y;
  return nu;
}

Vector LinearizedProblem::solve_deviation(double lambda) const {
  return solve(lambda, lambda * curvature_ + z_, -phase_(1));
}

Deviation solve_linearized(const LagKernel& kernel, const Vector& base_phase, double lambda, const Vector& source) {
  const LinearizedProblem problem(kernel, base_phase);
  Vector nu = problem.solve(lambda, source, 0.0);
  const bool large = nu.cwiseAbs().maxCoeff() > 0.3;
  return {std::move(nu), lambda, large};
}

LinearizedResult solve_with_energy(const LagKernel& kernel, const ControlField& base, double target, int scan_points) {
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidParameter, "energy must be positive");
  const TimeGrid& grid = base.grid();
  const double h = grid.step();
  const LinearizedProblem problem(kernel, base.phase());

  struct Point {
    double lambda;
    double energy;
    double max_nu;
    Vector nu;
  };
  auto evaluate = [&](double lambda) {
    Vector nu = problem.solve_deviation(lambda);
    const Vector omega = derivative(base.phase() + nu, h);
    const double e = trapezoid(omega.array().square().matrix(), h);
    const double m = nu.cwiseAbs().maxCoeff();
    return Point{lambda, e, m, std::move(nu)};
  };

  const double T = grid.duration();
  const double lambda0 = kernel.zero_lag() * T * T;
  std::vector<Point> scan;
  std::vector<LambdaSample> table;
  for (int k = 0; k < scan_points; ++k) {
    const double exponent = -6.0 + 12.0 * k / (scan_points - 1);
    scan.push_back(evaluate(lambda0 * std::pow(10.0, exponent)));
    table.push_back({scan.back().lambda, scan.back().energy, scan.back().max_nu});
  }

  std::optional<LinearizedResult> best;
  auto consider = [&](Point p) {
    ControlField field(grid, derivative(base.phase() + p.nu, h));
    const double r = kernel.rate(field.phase());
    if (!best || r < best->rate) {
      const bool large = p.max_nu > 0.3;
      best = LinearizedResult{std::move(field), Deviation{std::move(p.nu), p.lambda, large}, r, {}};
    }
  };
  for (std::size_t k = 0; k + 1 < scan.size(); ++k) {
    Point lo = scan[k];
    Point hi = scan[k + 1];
    if (std::abs(lo.energy - target) <= 1e-6 * target) {
      consider(lo);
      continue;
    }
    if ((lo.energy - target) * (hi.energy - target) >= 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const Point mid = evaluate(std::sqrt(lo.lambda * hi.lambda));
      if (std::abs(mid.energy - target) <= 1e-6 * target) {
        lo = mid;
        break;
      }
      if ((lo.energy - target) * (mid.energy - target) < 0.0)
        hi = mid;
      else
        lo = mid;
    }
    if (std::abs(lo.energy - target) <= 1e-6 * target) consider(std::move(lo));
  }
  if (std::abs(scan.back().energy - target) <= 1e-6 * target) consider(scan.back());
  if (!best) throw BracketFailure("no lambda in the scan brackets the energy constraint", table);
  best->scan = std::move(table);
  return std::move(*best);
}

ControlField apply_positivity(const ControlField& field, double target) {
  Vector amp = field.amplitude().cwiseMax(0.0);
  if (amp.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::DegenerateField, "field vanishes after clipping");
  const double e = trapezoid(amp.array().square().matrix(), field.grid().step());
  amp *= std::sqrt(target / e);
  return {field.grid(), std::move(amp)};
}

}  // namespace dcm
