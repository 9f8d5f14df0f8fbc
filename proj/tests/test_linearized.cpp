#include <doctest.h>

#include "dcm/control.hpp"
#include "dcm/el_solver.hpp"
#include "dcm/error.hpp"
#include "dcm/kernel.hpp"
#include "dcm/linearized.hpp"
#include "dcm/spectra.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

using namespace dcm;
using std::numbers::pi;

namespace {

// Dense assembly straight from the quadrature of
//   lambda nu'' + (1/T) int Q(t, t1) (nu(t) - nu(t1)) dt1 = -C(t),
// with nu(0) = 0 and nu(t_1) = first.
Vector dense_oracle(const CorrelationFunction& c, const TimeGrid& g, const Vector& phi, double lambda,
                    const Vector& source, double first = 0.0) {
  const Index n = g.size();
  const double h = g.step();
  const double T = g.duration();
  Matrix a = Matrix::Zero(n, n);
  Vector b = Vector::Zero(n);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  b(1) = first;
  for (Index i = 1; i + 1 < n; ++i) {
    const Index row = i + 1;
    a(row, i - 1) += lambda / (h * h);
    a(row, i) += -2.0 * lambda / (h * h);
    a(row, i + 1) += lambda / (h * h);
    for (Index j = 0; j < n; ++j) {
      const double wj = (j == 0 || j == n - 1) ? 0.5 * h : h;
      const double qij = (c.value(g.time(i) - g.time(j)) * std::polar(1.0, phi(i) - phi(j))).real();
      a(row, i) += wj * qij / T;
      a(row, j) -= wj * qij / T;
    }
    b(row) = -source(i);
  }
  return a.fullPivLu().solve(b);
}

double rel_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("small instance matches a dense assembly") {
  const TimeGrid g(3.0, 16);
  const auto c = shift_center(lorentzian_correlation(1.0, 0.8), 1.5);
  const LagKernel k(c, g);
  const Vector phi = chirp_ansatz(2.0, g).phase();
  for (double lambda : {0.05, 1.0, 30.0}) {
    const Vector src = source_c(k, phi, lambda);
    const Deviation d = solve_linearized(k, phi, lambda, src);
    CHECK(d.lambda == lambda);
    CHECK(rel_diff(d.nu, dense_oracle(c, g, phi, lambda, src)) < 1e-8);
    const LinearizedProblem p(k, phi);
    CHECK(rel_diff(p.solve(lambda, src, 0.01), dense_oracle(c, g, phi, lambda, src, 0.01)) < 1e-8);
  }
}

TEST_CASE("general complex path against the dense assembly") {
  const TimeGrid g(2.0, 16);
  const auto c = CorrelationFunction::composite({{1.0, 1.0, 0.5}, {0.3, 0.4, -2.0}});
  const LagKernel k(c, g);
  const Vector phi = linear_phase(1.3, g).phase();
  const Vector src = source_c(k, phi, 2.0);
  CHECK(rel_diff(solve_linearized(k, phi, 2.0, src).nu, dense_oracle(c, g, phi, 2.0, src)) < 1e-8);
}

TEST_CASE("kernel Q and source C") {
  const TimeGrid g(3.0, 16);
  const auto c = shift_center(lorentzian_correlation(1.0, 0.8), 1.5);
  const LagKernel k(c, g);
  const Vector phi = chirp_ansatz(2.0, g).phase();
  const double expect = c.envelope(g.time(9) - g.time(4)) * std::cos(phi(9) - phi(4) + 1.5 * (g.time(9) - g.time(4)));
  CHECK(kernel_q(k, phi, 9, 4) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(kernel_q(k, phi, 4, 9) == doctest::Approx(expect).epsilon(1e-13));
  const Vector src = source_c(k, phi, 2.0);
  const double h = g.step();
  CHECK(src(5) == doctest::Approx(2.0 * (phi(6) - 2.0 * phi(5) + phi(4)) / (h * h) + k.z(phi)(5)));
}

TEST_CASE("homogeneous source and linearity") {
  const TimeGrid g(5.0, 128);
  const LagKernel k(lorentzian_correlation(1.0, 1.0), g);
  const Vector phi = chirp_ansatz(1.0, g).phase();
  CHECK(solve_linearized(k, phi, 3.0, Vector::Zero(g.size())).nu.cwiseAbs().maxCoeff() == 0.0);
  const Vector src = source_c(k, phi, 3.0);
  const Vector one = solve_linearized(k, phi, 3.0, src).nu;
  const Vector two = solve_linearized(k, phi, 3.0, Vector(2.0 * src)).nu;
  CHECK((two - 2.0 * one).cwiseAbs().maxCoeff() <= 1e-10 * one.cwiseAbs().maxCoeff());
  CHECK(one(0) == 0.0);
  CHECK(one(1) == 0.0);
}

TEST_CASE("validity flag and input errors") {
  const TimeGrid g(5.0, 64);
  const LagKernel k(lorentzian_correlation(1.0, 1.0), g);
  const Vector phi = chirp_ansatz(1.0, g).phase();
  const Vector src = source_c(k, phi, 1.0);
  const Deviation d = solve_linearized(k, phi, 1.0, Vector(1e3 * src));
  CHECK(d.large == (d.nu.cwiseAbs().maxCoeff() > 0.3));
  CHECK_THROWS_AS(solve_linearized(k, phi, 0.0, src), Error);
  CHECK_THROWS_AS(solve_linearized(k, Vector::Zero(5), 1.0, src), Error);
}

TEST_CASE("energy-constrained correction around DD") {
  const TimeGrid g(10.0, 256);
  const auto c = shift_center(lorentzian_correlation(1.0, 2.0), 3.0);
  const LagKernel k(c, g);
  const double nu_pulse = 0.4;
  const double E = 4.0 * pi * pi / nu_pulse;
  const auto dd = dd_sequence(E, g, nu_pulse);
  const auto res = solve_with_energy(k, dd.field, E);
  CHECK(energy(res.field) == doctest::Approx(E).epsilon(1e-6));
  CHECK(res.scan.size() == 49);
  CHECK(res.rate == doctest::Approx(k.rate(res.field.phase())));
  CHECK(res.deviation.large == (res.deviation.nu.cwiseAbs().maxCoeff() > 0.3));
  CHECK(res.scan.front().lambda == doctest::Approx(1e-6 * k.zero_lag() * 100.0));
  CHECK(res.scan.back().lambda == doctest::Approx(1e6 * k.zero_lag() * 100.0));
}

TEST_CASE("unreachable energy reports the scan") {
  const TimeGrid g(10.0, 128);
  const LagKernel k(lorentzian_correlation(1.0, 1.0), g);
  const auto base = rescale_to_energy(chirp_ansatz(1.0, g), 10.0);
  const LinearizedProblem p(k, base.phase());
  double top = 0.0;
  for (int s = 0; s < 49; ++s) {
    const double lambda = 100.0 * std::pow(10.0, -6.0 + 12.0 * s / 48.0);
    const Vector omega = derivative(Vector(base.phase() + p.solve_deviation(lambda)), g.step());
    top = std::max(top, trapezoid(Vector(omega.array().square()), g.step()));
  }
  try {
    solve_with_energy(k, base, 10.0 * top);
    FAIL("expected a bracket failure");
  } catch (const BracketFailure& e) {
    CHECK(e.kind() == ErrorKind::BracketFailure);
    REQUIRE(e.scan().size() == 49);
    for (const auto& row : e.scan()) CHECK(row.energy < 10.0 * top);
  }
}

TEST_CASE("positivity by clip and rescale") {
  const TimeGrid g(4.0, 200);
  const Vector amp = (g.times().array() * 3.0).sin().matrix();
  const ControlField f(g, amp);
  const auto p = apply_positivity(f, 5.0);
  CHECK(p.amplitude().minCoeff() >= 0.0);
  CHECK(energy(p) == doctest::Approx(5.0).epsilon(1e-13));
  const auto again = apply_positivity(p, 5.0);
  CHECK((again.amplitude() - p.amplitude()).cwiseAbs().maxCoeff() < 1e-12);
  for (Index i = 0; i < g.size(); ++i)
    if (amp(i) <= 0.0) CHECK(p.amplitude()(i) == 0.0);
  CHECK_THROWS_AS(apply_positivity(ControlField(g, Vector(-amp.cwiseAbs())), 1.0), Error);
}
