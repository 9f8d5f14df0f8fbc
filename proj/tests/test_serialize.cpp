#include <doctest.h>

#include "dcm/control.hpp"
#include "dcm/error.hpp"
#include "dcm/serialize.hpp"
#include "dcm/spectra.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace dcm;
namespace fs = std::filesystem;

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

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dcm_serialize_test";
  fs::create_directories(dir);
  return dir / name;
}

void same_values(const DephasingSpectrum& a, const DephasingSpectrum& b) {
  CHECK(a.kind() == b.kind());
  for (double w : {-7.3, -1.0, -0.2, 0.0, 0.3, 1.0, 2.9, 4.99, 12.0}) CHECK(a.value(w) == b.value(w));
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("spectrum JSON round trip") {
  same_values(DephasingSpectrum::lorentzian(1.0, 2.0, 3.0), spectrum_from_json(spectrum_to_json(DephasingSpectrum::lorentzian(1.0, 2.0, 3.0))));
  const auto f = one_over_f_spectrum(1.0, 0.2, 5.0);
  same_values(f, spectrum_from_json(spectrum_to_json(f)));
  const auto m = multi_peak_spectrum({{1.0, 0.0, 1.0}, {0.5, 3.0, 2.0}});
  same_values(m, spectrum_from_json(spectrum_to_json(m)));
  const FrequencyGrid grid = FrequencyGrid::with_spacing(0.1, 8.0);
  Vector one_sided = Vector::Zero(grid.size());
  for (Index k = 0; k < grid.size(); ++k)
    if (grid.omega(k) > 0.5) one_sided(k) = 1.0 / grid.omega(k);
  const auto t = thermal_spectrum(DephasingSpectrum::tabulated(grid.omegas(), one_sided), 0.8);
  same_values(t, spectrum_from_json(spectrum_to_json(t)));
  const auto tab = DephasingSpectrum::tabulated(grid.omegas(), m.sample(grid));
  same_values(tab, spectrum_from_json(spectrum_to_json(tab)));

  const auto j = nlohmann::json::parse(spectrum_to_json(f));
  CHECK(j.at("kind") == "one_over_f");
  CHECK(j.at("params").at("omega_min") == 0.2);
}

TEST_CASE("correlation JSON round trip") {
  const auto a = shift_center(lorentzian_correlation(1.0, 2.0), -1.5);
  const auto b = CorrelationFunction::composite({{1.0, 1.0, 0.5}, {0.3, 0.4, -2.0}});
  const TimeGrid lags(5.0, 51);
  const auto c = correlation_from_spectrum(one_over_f_spectrum(1.0, 0.2, 5.0), lags);
  const auto d = CorrelationFunction::tabulated(lags.times(), Vector((-lags.times().array()).exp()), 0.7);
  for (const auto& x : {a, b, c, d}) {
    const auto y = correlation_from_json(correlation_to_json(x));
    CHECK(y.kind() == x.kind());
    CHECK(y.spectral_center() == x.spectral_center());
    for (double t : {0.0, 0.1, 1.0, 2.3, 4.9}) CHECK(std::abs(y.value(t) - x.value(t)) < 1e-15);
  }
}

TEST_CASE("strict spectrum parsing") {
  CHECK(kind_of([] { spectrum_from_json(R"({"kind":"lorentzian","params":{"gamma":1,"correlation_time":1,"colour":2}})"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { spectrum_from_json(R"({"kind":"pink","params":{}})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { spectrum_from_json(R"({"kind":"lorentzian","params":{"gamma":"1","correlation_time":1}})"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { spectrum_from_json("{not json"); }) == ErrorKind::Config);
  CHECK_THROWS_AS(spectrum_from_json(R"({"kind":"lorentzian","params":{"gamma":-1,"correlation_time":1}})"), Error);
}

TEST_CASE("field CSV round trip") {
  const TimeGrid g(3.0, 101);
  const auto f = chirp_ansatz(1.7, g);
  const auto path = scratch("field.csv").string();
  write_field_csv(path, f);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,omega,phi");
  const auto back = read_field_csv(path);
  CHECK(back.grid().size() == g.size());
  CHECK(back.grid().duration() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(back.amplitude() == f.amplitude());
  CHECK((back.phase() - f.phase()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CSV errors") {
  CHECK(kind_of([] { write_csv("/nonexistent-dir/x.csv", {"a"}, {Vector::Ones(2)}); }) == ErrorKind::Io);
  CHECK(kind_of([] { read_field_csv("/nonexistent-dir/x.csv"); }) == ErrorKind::Io);
  const auto path = scratch("bad.csv").string();
  CHECK_THROWS_AS(write_csv(path, {"a", "b"}, {Vector::Ones(2), Vector::Ones(3)}), Error);
}

TEST_CASE("lambda scan CSV") {
  const auto path = scratch("scan.csv").string();
  write_lambda_scan_csv(path, {{1e-3, 2.0, 0.1}, {1.0, 3.5, 0.01}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "lambda,energy,max_nu");
  std::getline(in, line);
  CHECK(line == "0.001,2,0.1");
}

TEST_CASE("report JSON documents") {
  const RateReport r{0.5, 0.50001, 10.0, 20.0, 1.0, {0.0, true}, 0.25};
  const auto j = nlohmann::json::parse(rate_report_to_json(r));
  CHECK(j.at("R_time") == 0.5);
  CHECK(j.at("R_freq") == 0.50001);
  CHECK(j.at("normalized") == 0.25);
  CHECK(j.at("fidelity_clamped") == true);
  const auto d = nlohmann::json::parse(dd_params_to_json({4, 0.1, 2.475, 394.78}));
  CHECK(d.at("n") == 4);
  CHECK(d.at("tau") == 2.475);
}
