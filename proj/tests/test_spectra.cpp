#include <doctest.h>

#include "dcm/error.hpp"
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

Index argmax(const Vector& v) {
  Index k = 0;
  v.maxCoeff(&k);
  return k;
}

}  // namespace

TEST_CASE("lorentzian correlation values") {
  const auto c = lorentzian_correlation(1.0, 1.0);
  CHECK(c.envelope(0.0) == doctest::Approx(1.0));
  CHECK(c.envelope(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(c.spectral_center() == 0.0);
  const auto c2 = lorentzian_correlation(2.0, 0.5);
  const GaussLegendre rule(20);
  double area = 0.0;
  for (int k = 0; k < 80; ++k) area += rule.integrate([&](double t) { return c2.envelope(t); }, 0.5 * k, 0.5 * (k + 1));
  CHECK(area == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(kind_of([] { lorentzian_correlation(0.0, 1.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { lorentzian_correlation(1.0, -1.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("value carries the carrier and conjugate symmetry") {
  const auto c = shift_center(lorentzian_correlation(1.0, 1.0), 2.0);
  const Complex v = c.value(0.7);
  CHECK(v.real() == doctest::Approx(std::exp(-0.7) * std::cos(1.4)));
  CHECK(v.imag() == doctest::Approx(std::exp(-0.7) * std::sin(1.4)));
  CHECK(std::abs(c.value(-0.7) - std::conj(v)) < 1e-15);
}

TEST_CASE("shift_center replaces the center") {
  const auto c = lorentzian_correlation(1.0, 1.0);
  CHECK(shift_center(c, 0.0).envelope(0.3) == c.envelope(0.3));
  CHECK(shift_center(c, 0.0).spectral_center() == 0.0);
  CHECK(shift_center(shift_center(c, 1.5), -4.0).spectral_center() == -4.0);
}

TEST_CASE("shifted lorentzian: G peaks at minus the carrier") {
  // Phi = Phi~ e^{i Delta t} and G = (2pi)^{-1} int Phi e^{i w t} put the peak at w = -Delta.
  const auto c = shift_center(lorentzian_correlation(1.0, 1.0), 5.0);
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.01, 20.0);
  const auto s = spectrum_from_correlation(c, grid);
  CHECK(grid.omega(argmax(s.sample(grid))) == doctest::Approx(-5.0).epsilon(1e-9));
}

TEST_CASE("spectrum of the lorentzian correlation matches the closed form") {
  const auto c = lorentzian_correlation(1.0, 1.0);
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.05, 30.0);
  const Vector g = spectrum_from_correlation(c, grid).sample(grid);
  double worst = 0.0;
  for (Index k = 0; k < grid.size(); ++k) {
    const double w = grid.omega(k);
    const double exact = (1.0 / pi) / (1.0 + w * w);
    worst = std::max(worst, std::abs(g(k) - exact));
  }
  CHECK(worst < 1e-7);
  CHECK(g(grid.size() / 2) == doctest::Approx(1.0 / pi).epsilon(1e-7));
}

TEST_CASE("gaussian envelope transforms to a gaussian spectrum") {
  const TimeGrid lags(8.0, 4001);
  const Vector t = lags.times();
  const Vector env = (-t.array().square()).exp();
  const auto c = CorrelationFunction::tabulated(t, env);
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.1, 10.0);
  const Vector g = spectrum_from_correlation(c, grid).sample(grid);
  double worst = 0.0;
  for (Index k = 0; k < grid.size(); ++k) {
    const double w = grid.omega(k);
    worst = std::max(worst, std::abs(g(k) - std::exp(-w * w / 4.0) / (2.0 * std::sqrt(pi))));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("zero envelope gives a zero spectrum") {
  const TimeGrid lags(5.0, 64);
  const auto c = CorrelationFunction::tabulated(lags.times(), Vector::Zero(64));
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.5, 5.0);
  CHECK(spectrum_from_correlation(c, grid).sample(grid).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transform errors") {
  const TimeGrid lags(5.0, 64);
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.5, 5.0);
  // Constant envelope never decays.
  CHECK(kind_of([&] { spectrum_from_correlation(CorrelationFunction::tabulated(lags.times(), Vector::Ones(64)), grid); }) ==
        ErrorKind::Truncation);
  // A box envelope has a sinc transform with large negative lobes.
  Vector box = Vector::Zero(64);
  box.head(20).setOnes();
  CHECK(kind_of([&] { spectrum_from_correlation(CorrelationFunction::tabulated(lags.times(), box), grid); }) ==
        ErrorKind::InconsistentInput);
  Vector bad = lags.times();
  bad(5) += 1e-3;
  CHECK(kind_of([&] { CorrelationFunction::tabulated(bad, Vector::Ones(64)); }) == ErrorKind::InvalidInput);
}

TEST_CASE("correlation from a gaussian spectrum") {
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.01, 14.0);
  Vector g(grid.size());
  for (Index k = 0; k < grid.size(); ++k) g(k) = std::exp(-grid.omega(k) * grid.omega(k) / 4.0) / (2.0 * std::sqrt(pi));
  const auto s = DephasingSpectrum::tabulated(grid.omegas(), g);
  const TimeGrid lags(4.0, 101);
  const auto c = correlation_from_spectrum(s, lags);
  CHECK(std::abs(c.spectral_center()) < 1e-12);
  for (Index k = 0; k < lags.size(); ++k) {
    const double t = lags.time(k);
    CHECK(std::abs(c.value(t) - Complex(std::exp(-t * t))) < 1e-10);
  }
}

TEST_CASE("correlation from a tabulated lorentzian spectrum") {
  const double W = 400.0;
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.01, W);
  Vector g(grid.size());
  for (Index k = 0; k < grid.size(); ++k) g(k) = (1.0 / pi) / (1.0 + grid.omega(k) * grid.omega(k));
  const auto c = correlation_from_spectrum(DephasingSpectrum::tabulated(grid.omegas(), g), TimeGrid(5.0, 51));
  // The table has no weight beyond W: the missing tail mass is 2/(pi W) to leading order.
  const double tail = 2.0 / (pi * W);
  for (int k = 0; k <= 50; ++k) {
    const double t = 0.1 * k;
    CHECK(std::abs(c.envelope(t) - std::exp(-t)) < 1.5 * tail);
  }
}

TEST_CASE("narrow peak: nearly constant envelope, carrier at minus the peak") {
  const double w0 = 2.0;
  const double width = 1e-3;
  const FrequencyGrid grid = FrequencyGrid::with_spacing(1e-4, 2.1);
  Vector g = Vector::Zero(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double x = (grid.omega(k) - w0) / width;
    g(k) = std::exp(-x * x);
  }
  const auto c = correlation_from_spectrum(DephasingSpectrum::tabulated(grid.omegas(), g), TimeGrid(10.0, 101));
  CHECK(c.spectral_center() == doctest::Approx(-w0).epsilon(1e-7));
  CHECK(c.envelope(10.0) / c.envelope(0.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("symmetric spectrum has zero centroid") {
  const auto s = multi_peak_spectrum({{1.0, -3.0, 1.0}, {1.0, 3.0, 1.0}});
  CHECK(std::abs(s.centroid()) < 1e-15);
  CHECK(s.value(1.7) == doctest::Approx(s.value(-1.7)));
  CHECK(kind_of([] { multi_peak_spectrum({}); }) == ErrorKind::InvalidInput);
}

TEST_CASE("single multi-peak equals the lorentzian") {
  const auto a = multi_peak_spectrum({{1.0, 0.0, 1.0}});
  const auto b = DephasingSpectrum::lorentzian(1.0, 1.0);
  for (double w : {-3.0, 0.0, 0.4, 7.0}) CHECK(a.value(w) == doctest::Approx(b.value(w)));
}

TEST_CASE("multi-peak G(3): analytic sum vs quadrature of the composite correlation") {
  const auto s = multi_peak_spectrum({{1.0, 0.0, 1.0}, {0.5, 3.0, 2.0}});
  const double analytic = (1.0 / pi) / (1.0 + 9.0) + (0.5 / pi);
  CHECK(s.value(3.0) == doctest::Approx(analytic).epsilon(1e-15));
  const auto c = companion_correlation(s, TimeGrid(10.0, 64));
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.05, 10.0);
  const Vector g = spectrum_from_correlation(c, grid).sample(grid);
  CHECK(g(grid.size() / 2 + 60) == doctest::Approx(analytic).epsilon(1e-6));
}

TEST_CASE("one-over-f spectrum") {
  const auto s = one_over_f_spectrum(2.0, 0.5, 8.0);
  CHECK(s.value(0.5) / s.value(8.0) == doctest::Approx(16.0));
  CHECK(s.value(0.0) == 0.0);
  CHECK(s.value(8.5) == 0.0);
  CHECK(s.value(-9.0) == 0.0);
  CHECK(s.value(-1.0) == doctest::Approx(2.0));
  CHECK(s.left_limit(0.5) == 0.0);
  CHECK(s.right_limit(0.5) == doctest::Approx(4.0));
  CHECK(s.left_limit(8.0) == doctest::Approx(0.25));
  CHECK(s.right_limit(8.0) == 0.0);
  CHECK(s.total_weight() == doctest::Approx(2.0 * 2.0 * std::log(16.0)));
  CHECK(kind_of([] { one_over_f_spectrum(1.0, 0.0, 1.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { one_over_f_spectrum(1.0, 2.0, 1.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("one-over-f correlation by quadrature") {
  const auto s = one_over_f_spectrum(1.0, 0.2, 5.0);
  const auto c = correlation_from_spectrum(s, TimeGrid(40.0, 401));
  // Phi(0) = 2A ln(5/0.2); Phi(t) = 2A [Ci(5t) - Ci(0.2t)], checked at t = 1 against a fine trapezoid.
  CHECK(c.value(0.0).real() == doctest::Approx(2.0 * std::log(25.0)).epsilon(1e-12));
  double ref = 0.0;
  const int n = 200000;
  const double dw = 4.8 / n;
  for (int k = 0; k <= n; ++k) {
    const double w = 0.2 + dw * k;
    ref += (k == 0 || k == n ? 0.5 : 1.0) * std::cos(w) / w;
  }
  ref *= 2.0 * dw;
  CHECK(c.value(1.0).real() == doctest::Approx(ref).epsilon(1e-8));
  CHECK(std::abs(c.value(1.0).imag()) < 1e-12);
}

TEST_CASE("thermal spectrum") {
  // Base with G0(w) = 1 on [0.5, 4] (tabulated, zero for w <= 0).
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.01, 5.0);
  Vector g0 = Vector::Zero(grid.size());
  for (Index k = 0; k < grid.size(); ++k)
    if (grid.omega(k) >= 0.5 - 1e-12 && grid.omega(k) <= 4.0 + 1e-12) g0(k) = 1.0;
  const auto base = DephasingSpectrum::tabulated(grid.omegas(), g0);

  const double w = 1.0;
  const double beta = std::log(2.0) / w;
  const auto th = thermal_spectrum(base, beta);
  CHECK(th.value(w) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(th.value(-w) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(th.value(0.0) == 0.0);

  const auto cold = thermal_spectrum(base, 200.0);
  CHECK(cold.value(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cold.value(-1.0) < 1e-80);

  const auto warm = thermal_spectrum(base, 0.7);
  for (Index k = 0; k < grid.size(); ++k) {
    const double x = grid.omega(k);
    if (x <= 0.0 || base.value(x) == 0.0) continue;
    CHECK(warm.value(-x) / warm.value(x) == doctest::Approx(std::exp(-0.7 * x)).epsilon(1e-12));
  }

  CHECK(kind_of([&] { thermal_spectrum(base, 0.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { thermal_spectrum(DephasingSpectrum::lorentzian(1.0, 1.0), 1.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("Fourier round trip") {
  const TimeGrid lags(80.0, 16001);
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.05, 12.0);
  SUBCASE("lorentzian") {
    const auto s = DephasingSpectrum::lorentzian(1.0, 1.0);
    const Vector back = spectrum_from_correlation(correlation_from_spectrum(s, lags), grid).sample(grid);
    CHECK((back - s.sample(grid)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("shifted lorentzian") {
    const auto s = DephasingSpectrum::lorentzian(1.0, 2.0, 3.0);
    const Vector back = spectrum_from_correlation(correlation_from_spectrum(s, lags), grid).sample(grid);
    CHECK((back - s.sample(grid)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("multi-peak") {
    const auto s = multi_peak_spectrum({{1.0, 0.0, 1.0}, {0.5, 3.0, 2.0}, {0.3, -4.0, 0.5}});
    const Vector back = spectrum_from_correlation(correlation_from_spectrum(s, lags), grid).sample(grid);
    CHECK((back - s.sample(grid)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("one-over-f: Phi decays only like 1/t and the window check reports it") {
    const auto s = one_over_f_spectrum(1.0, 0.2, 5.0);
    CHECK(kind_of([&] { spectrum_from_correlation(correlation_from_spectrum(s, TimeGrid(80.0, 2001)), grid); }) ==
          ErrorKind::Truncation);
  }
}
