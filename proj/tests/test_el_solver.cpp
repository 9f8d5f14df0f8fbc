#include <doctest.h>

#include "dcm/control.hpp"
#include "dcm/el_solver.hpp"
#include "dcm/error.hpp"
#include "dcm/kernel.hpp"
#include "dcm/rate.hpp"
#include "dcm/spectra.hpp"

#include <cmath>
#include <numbers>

using namespace dcm;
using std::numbers::pi;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.tol_phase = 1e-10;
  return cfg;
}

// Distance between phases up to the global sign symmetry of an even spectrum.
double phase_distance(const Vector& a, const Vector& b) {
  return std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("Z functional matches the sine formula") {
  const TimeGrid g(4.0, 50);
  const double delta = 0.8;
  const auto c = shift_center(lorentzian_correlation(1.0, 0.7), delta);
  const Vector phi = chirp_ansatz(3.0, g).phase();
  const Vector z = z_functional(c, phi, g);
  const Vector w = g.weights();
  for (Index i = 0; i < g.size(); ++i) {
    double acc = 0.0;
    for (Index j = 0; j < g.size(); ++j) {
      const double s = g.time(i) - g.time(j);
      acc += w(j) * c.envelope(std::abs(s)) * std::sin(phi(i) - phi(j) + delta * s);
    }
    CHECK(z(i) == doctest::Approx(acc / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("initial guesses carry the requested energy") {
  const TimeGrid g(10.0, 1024);
  for (const auto& guess : {InitialGuess::chirp(2.0), InitialGuess::linear_phase(3.0), InitialGuess::dd(0.5)}) {
    CHECK(energy(initial_field(guess, g, 20.0)) == doctest::Approx(20.0).epsilon(1e-12));
  }
  CHECK(kind_of([&] { initial_field(InitialGuess::linear_phase(0.0), g, 20.0); }) == ErrorKind::DegenerateField);
  CHECK(kind_of([&] { initial_field(InitialGuess::explicit_samples(Vector::Ones(5)), g, 20.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("optimal modulation for a Lorentzian correlation") {
  const TimeGrid g(10.0, 1024);
  const auto c = lorentzian_correlation(1.0, 1.0);
  const LagKernel k(c, g);
  const double E = 20.0;
  const ELSolution sol = solve_optimal(k, E, tight());
  REQUIRE(sol.converged);
  CHECK(sol.energy_realized == doctest::Approx(E).epsilon(1e-6));
  CHECK(energy(sol.field) == doctest::Approx(E).epsilon(1e-6));
  CHECK(sol.residual <= default_residual_tol(k, E));
  CHECK(sol.rate == doctest::Approx(k.rate(sol.field.phase())).epsilon(1e-12));
  CHECK(sol.rate < sol.initial_rate);
  CHECK(el_residual(c, sol.field, E) == doctest::Approx(sol.residual).epsilon(1e-9));

  SUBCASE("beats DD and the free evolution at the same energy") {
    const auto dd = dd_sequence(E, g, 0.5);
    const double r0 = k.rate(ControlField::zero(g).phase());
    CHECK(sol.rate < k.rate(rescale_to_energy(dd.field, E).phase()));
    CHECK(sol.rate < r0);
  }

  SUBCASE("stationary under energy-preserving perturbations") {
    // Second-order change: halving the perturbation quarters the excess rate.
    const Vector& om = sol.field.amplitude();
    const Vector t = g.times();
    Vector d = (2.0 * pi * t / 10.0).array().sin().matrix();
    d -= (trapezoid(Vector(d.cwiseProduct(om)), g.step()) / E) * om;
    auto excess = [&](double eps) {
      const ControlField p = rescale_to_energy(ControlField(g, om + eps * d), E);
      return k.rate(p.phase()) - sol.rate;
    };
    const double e1 = excess(0.2), e2 = excess(0.1);
    CHECK(e1 > 0.0);
    CHECK(e2 > 0.0);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("different guesses reach the same optimum") {
  const TimeGrid g(10.0, 1024);
  const LagKernel k(lorentzian_correlation(1.0, 1.0), g);
  auto run = [&](InitialGuess guess) {
    SolverConfig cfg = tight();
    cfg.initial_guess = std::move(guess);
    return solve_optimal(k, 20.0, cfg);
  };
  const auto a = run(InitialGuess::chirp(1.0));
  const auto b = run(InitialGuess::linear_phase(1.0));
  const auto c = run(InitialGuess::dd(0.5));
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  REQUIRE(c.converged);
  CHECK(phase_distance(a.field.phase(), b.field.phase()) < 1e-6);
  CHECK(phase_distance(a.field.phase(), c.field.phase()) < 1e-6);
  CHECK(b.rate == doctest::Approx(a.rate).epsilon(1e-9));
}

TEST_CASE("residual of the optimum shrinks at second order") {
  const auto c = lorentzian_correlation(1.0, 1.0);
  const auto coarse = solve_optimal(c, 20.0, TimeGrid(10.0, 1024), tight());
  const auto fine = solve_optimal(c, 20.0, TimeGrid(10.0, 2047), tight());
  REQUIRE(coarse.converged);
  REQUIRE(fine.converged);
  const double ratio = coarse.residual / fine.residual;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("shifted spectrum: fixed point reached, residual is pure discretization error") {
  const auto c = shift_center(lorentzian_correlation(1.0, 2.0), 3.0);
  const TimeGrid g(10.0, 1024);
  const auto sol = solve_optimal(c, 40.0, g, tight());
  const auto fine = solve_optimal(c, 40.0, TimeGrid(10.0, 2047), tight());
  CHECK(sol.phase_step < 1e-10);
  CHECK(fine.phase_step < 1e-10);
  CHECK(sol.energy_realized == doctest::Approx(40.0).epsilon(1e-6));
  CHECK(sol.rate < LagKernel(c, g).rate(ControlField::zero(g).phase()));
  const double ratio = sol.residual / fine.residual;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
  // converged also demands residual <= 1e-4 sqrt(E) Phi(0) T, which this grid does not resolve.
  CHECK(sol.converged == (sol.residual <= default_residual_tol(LagKernel(c, g), 40.0)));
}

TEST_CASE("solver errors") {
  const TimeGrid g(5.0, 128);
  const auto c = lorentzian_correlation(1.0, 1.0);
  CHECK(kind_of([&] { solve_optimal(c, 0.0, g); }) == ErrorKind::InvalidParameter);
  SolverConfig bad;
  bad.damping = 1.5;
  CHECK(kind_of([&] { solve_optimal(c, 1.0, g, bad); }) == ErrorKind::InvalidParameter);
  bad = {};
  bad.tol_phase = 0.0;
  CHECK(kind_of([&] { solve_optimal(c, 1.0, g, bad); }) == ErrorKind::InvalidParameter);
  const auto silent = CorrelationFunction::tabulated(g.times(), Vector::Zero(g.size()));
  CHECK(kind_of([&] { solve_optimal(silent, 1.0, g); }) == ErrorKind::DegenerateStationaryPoint);
}

TEST_CASE("iteration cap reports non-convergence") {
  SolverConfig cfg = tight();
  cfg.max_iter = 2;
  const auto sol = solve_optimal(lorentzian_correlation(1.0, 1.0), 20.0, TimeGrid(10.0, 512), cfg);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations <= 4 * cfg.max_iter);
  CHECK(sol.energy_realized == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("descent fallback never ends above the guess") {
  // Broad 1/f noise over a long window: the plain iteration does not settle here.
  const TimeGrid g(40.0, 1024);
  const LagKernel k(companion_correlation(one_over_f_spectrum(1.0, 0.2, 5.0), g), g);
  SolverConfig cfg;
  cfg.max_iter = 200;
  for (const auto& guess : {InitialGuess::dd(1.0), InitialGuess::chirp(1.0)}) {
    cfg.initial_guess = guess;
    const auto sol = solve_optimal(k, 20.0, cfg);
    CHECK(sol.rate < sol.initial_rate);
    CHECK(sol.rate == doctest::Approx(k.rate(sol.field.phase())).epsilon(1e-12));
    CHECK(sol.energy_realized == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(sol.iterations <= 4 * cfg.max_iter);
  }
}
