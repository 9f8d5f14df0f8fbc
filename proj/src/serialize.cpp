#include "dcm/serialize.hpp"

#include "json_io.hpp"

#include "dcm/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dcm {

namespace io {

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw Error(ErrorKind::Config, "unknown key '" + item.key() + "' in " + where);
  }
}

double number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::Config, std::string("missing '") + key + "' in " + where);
  if (!j.at(key).is_number()) throw Error(ErrorKind::Config, std::string("'") + key + "' in " + where + " must be a number");
  return j.at(key).get<double>();
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

namespace {

Vector vector_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorKind::Config, where + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::Config, where + " must hold numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json peak_json(const SpectralPeak& p) {
  return Json{{"gamma", p.gamma}, {"center", p.center}, {"correlation_time", p.correlation_time}};
}

SpectralPeak peak_from(const Json& j, const std::string& where) {
  require_keys(j, {"gamma", "center", "correlation_time"}, where);
  return {number(j, "gamma", where), j.contains("center") ? number(j, "center", where) : 0.0,
          number(j, "correlation_time", where)};
}

}  // namespace

Json to_json(const DephasingSpectrum& s) {
  Json out;
  out["kind"] = s.kind_name();
  switch (s.kind()) {
    case DephasingSpectrum::Kind::Lorentzian:
      out["params"] = peak_json(std::get<SpectralPeak>(s.descriptor()));
      break;
    case DephasingSpectrum::Kind::OneOverF: {
      const auto& f = std::get<DephasingSpectrum::OneOverF>(s.descriptor());
      out["params"] = {{"amplitude", f.amplitude}, {"omega_min", f.omega_min}, {"omega_max", f.omega_max}};
      break;
    }
    case DephasingSpectrum::Kind::MultiPeak: {
      Json peaks = Json::array();
      for (const auto& p : std::get<std::vector<SpectralPeak>>(s.descriptor())) peaks.push_back(peak_json(p));
      out["params"] = {{"peaks", peaks}};
      break;
    }
    case DephasingSpectrum::Kind::Thermal: {
      const auto& th = std::get<DephasingSpectrum::Thermal>(s.descriptor());
      out["params"] = {{"beta", th.beta}, {"base", to_json(*th.base)}};
      break;
    }
    case DephasingSpectrum::Kind::Tabulated: {
      const auto& t = std::get<DephasingSpectrum::Table>(s.descriptor());
      Json grid = Json::array();
      for (Index k = 0; k < t.values.size(); ++k) grid.push_back(t.omega0 + t.step * static_cast<double>(k));
      out["grid"] = grid;
      out["values"] = to_json(t.values);
      break;
    }
  }
  return out;
}

DephasingSpectrum spectrum_from(const Json& j) {
  const std::string where = "spectrum";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorKind::Config, "spectrum needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "tabulated") {
    require_keys(j, {"kind", "grid", "values"}, where);
    if (!j.contains("grid") || !j.contains("values")) throw Error(ErrorKind::Config, "tabulated spectrum needs grid and values");
    return DephasingSpectrum::tabulated(vector_from(j.at("grid"), "spectrum grid"), vector_from(j.at("values"), "spectrum values"));
  }
  require_keys(j, {"kind", "params"}, where);
  if (!j.contains("params")) throw Error(ErrorKind::Config, "spectrum needs 'params'");
  const Json& p = j.at("params");
  if (kind == "lorentzian") {
    const SpectralPeak peak = peak_from(p, "lorentzian params");
    return DephasingSpectrum::lorentzian(peak.gamma, peak.correlation_time, peak.center);
  }
  if (kind == "one_over_f") {
    require_keys(p, {"amplitude", "omega_min", "omega_max"}, "one_over_f params");
    return DephasingSpectrum::one_over_f(number(p, "amplitude", where), number(p, "omega_min", where),
                                         number(p, "omega_max", where));
  }
  if (kind == "multi_peak") {
    require_keys(p, {"peaks"}, "multi_peak params");
    if (!p.contains("peaks") || !p.at("peaks").is_array()) throw Error(ErrorKind::Config, "multi_peak needs a peaks array");
    std::vector<SpectralPeak> peaks;
    for (const auto& item : p.at("peaks")) peaks.push_back(peak_from(item, "peak"));
    return DephasingSpectrum::multi_peak(std::move(peaks));
  }
  if (kind == "thermal") {
    require_keys(p, {"beta", "base"}, "thermal params");
    if (!p.contains("base")) throw Error(ErrorKind::Config, "thermal needs a base spectrum");
    return DephasingSpectrum::thermal(spectrum_from(p.at("base")), number(p, "beta", where));
  }
  throw Error(ErrorKind::Config, "unknown spectrum kind '" + kind + "'");
}

Json to_json(const CorrelationFunction& c) {
  Json out;
  out["kind"] = c.kind_name();
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, CorrelationFunction::Lorentzian>) {
          out["params"] = {{"gamma", d.gamma}, {"correlation_time", d.correlation_time}, {"center", c.spectral_center()}};
        } else if constexpr (std::is_same_v<D, CorrelationFunction::Table>) {
          out["grid"] = to_json(Vector(Vector::LinSpaced(d.values.size(), 0.0, d.step * static_cast<double>(d.values.size() - 1))));
          out["values"] = to_json(d.values);
          out["center"] = c.spectral_center();
        } else if constexpr (std::is_same_v<D, CorrelationFunction::ComplexTable>) {
          out["grid"] = to_json(Vector(Vector::LinSpaced(d.values.size(), 0.0, d.step * static_cast<double>(d.values.size() - 1))));
          out["real"] = to_json(Vector(d.values.real()));
          out["imag"] = to_json(Vector(d.values.imag()));
          out["center"] = c.spectral_center();
        } else {
          Json terms = Json::array();
          for (const auto& t : d)
            terms.push_back({{"gamma", t.gamma}, {"correlation_time", t.correlation_time}, {"carrier", t.carrier}});
          out["params"] = {{"terms", terms}};
        }
      },
      c.descriptor());
  return out;
}

CorrelationFunction correlation_from(const Json& j) {
  const std::string where = "correlation";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorKind::Config, "correlation needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "lorentzian") {
    require_keys(j, {"kind", "params"}, where);
    const Json& p = j.at("params");
    require_keys(p, {"gamma", "correlation_time", "center"}, "lorentzian params");
    const double center = p.contains("center") ? number(p, "center", where) : 0.0;
    return CorrelationFunction::lorentzian(number(p, "gamma", where), number(p, "correlation_time", where))
        .with_center(center);
  }
  if (kind == "tabulated") {
    require_keys(j, {"kind", "grid", "values", "center"}, where);
    const double center = j.contains("center") ? number(j, "center", where) : 0.0;
    return CorrelationFunction::tabulated(vector_from(j.at("grid"), "grid"), vector_from(j.at("values"), "values"), center);
  }
  if (kind == "tabulated_complex") {
    require_keys(j, {"kind", "grid", "real", "imag", "center"}, where);
    const Vector re = vector_from(j.at("real"), "real");
    const Vector im = vector_from(j.at("imag"), "imag");
    if (re.size() != im.size()) throw Error(ErrorKind::Config, "real and imag differ in length");
    ComplexVector v(re.size());
    v.real() = re;
    v.imag() = im;
    return CorrelationFunction::tabulated_complex(vector_from(j.at("grid"), "grid"), v, number(j, "center", where));
  }
  if (kind == "composite") {
    require_keys(j, {"kind", "params"}, where);
    const Json& p = j.at("params");
    require_keys(p, {"terms"}, "composite params");
    std::vector<CorrelationTerm> terms;
    for (const auto& t : p.at("terms")) {
      require_keys(t, {"gamma", "correlation_time", "carrier"}, "term");
      terms.push_back({number(t, "gamma", where), number(t, "correlation_time", where),
                       t.contains("carrier") ? number(t, "carrier", where) : 0.0});
    }
    return CorrelationFunction::composite(std::move(terms));
  }
  throw Error(ErrorKind::Config, "unknown correlation kind '" + kind + "'");
}

Json to_json(const RateReport& r) {
  Json out{{"R_time", r.rate_time}, {"R_freq", r.rate_freq}, {"T", r.duration}, {"energy", r.energy},
           {"alpha", r.alpha},      {"fidelity", r.fidelity.value}, {"fidelity_clamped", r.fidelity.clamped}};
  out["normalized"] = r.normalized ? Json(*r.normalized) : Json(nullptr);
  return out;
}

Json to_json(const ELSolution& s) {
  return Json{{"converged", s.converged},   {"iterations", s.iterations},     {"residual", s.residual},
              {"energy", s.energy_realized}, {"phase_step", s.phase_step},     {"rate", s.rate},
              {"initial_rate", s.initial_rate}, {"negated_guess", s.negated_guess}};
}

Json to_json(const DDParams& p) {
  return Json{{"n", p.pulses}, {"pulse_width", p.pulse_width}, {"tau", p.interval}, {"realized_energy", p.realized_energy}};
}

}  // namespace io

namespace {

io::Json parse(const std::string& text) {
  try {
    return io::Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  return out;
}

}  // namespace

std::string spectrum_to_json(const DephasingSpectrum& s) { return io::to_json(s).dump(2); }
DephasingSpectrum spectrum_from_json(const std::string& text) { return io::spectrum_from(parse(text)); }
std::string correlation_to_json(const CorrelationFunction& c) { return io::to_json(c).dump(2); }
CorrelationFunction correlation_from_json(const std::string& text) { return io::correlation_from(parse(text)); }
std::string rate_report_to_json(const RateReport& r) { return io::to_json(r).dump(2); }
std::string el_solution_to_json(const ELSolution& s) { return io::to_json(s).dump(2); }
std::string dd_params_to_json(const DDParams& p) { return io::to_json(p).dump(2); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const std::vector<Vector>& columns) {
  if (header.size() != columns.size()) throw Error(ErrorKind::InvalidInput, "header and columns differ");
  const Index rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw Error(ErrorKind::InvalidInput, "CSV columns differ in length");
  auto out = open_out(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (Index i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_double(columns[k](i));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

void write_field_csv(const std::string& path, const ControlField& field) {
  write_csv(path, {"t", "omega", "phi"}, {field.grid().times(), field.amplitude(), field.phase()});
}

ControlField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "t,omega,phi") throw Error(ErrorKind::InvalidInput, "unexpected field CSV header");
  std::vector<double> t;
  std::vector<double> omega;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a;
    std::string b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    t.push_back(std::stod(a));
    omega.push_back(std::stod(b));
  }
  if (t.size() < 2) throw Error(ErrorKind::InvalidInput, "field CSV has too few rows");
  const TimeGrid grid(t.back(), static_cast<Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - grid.time(static_cast<Index>(i))) > 1e-9 * grid.step())
      throw Error(ErrorKind::InvalidInput, "field CSV time column is not uniform");
  }
  return {grid, Eigen::Map<const Vector>(omega.data(), static_cast<Index>(omega.size()))};
}

void write_lambda_scan_csv(const std::string& path, const std::vector<LambdaSample>& scan) {
  Vector l(static_cast<Index>(scan.size()));
  Vector e(l.size());
  Vector m(l.size());
  for (std::size_t k = 0; k < scan.size(); ++k) {
    l(static_cast<Index>(k)) = scan[k].lambda;
    e(static_cast<Index>(k)) = scan[k].energy;
    m(static_cast<Index>(k)) = scan[k].max_nu;
  }
  write_csv(path, {"lambda", "energy", "max_nu"}, {l, e, m});
}

}  // namespace dcm
