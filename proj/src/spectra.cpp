#include "dcm/spectra.hpp"

#include "dcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dcm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Validates a lag grid (uniform, starting at 0) and returns its step.
double lag_step(const Vector& lags) {
  if (lags.size() < 2) throw Error(ErrorKind::InvalidInput, "lag grid needs at least 2 points");
  if (lags(0) != 0.0) throw Error(ErrorKind::InvalidInput, "lag grid must start at 0");
  const double step = (lags(lags.size() - 1) - lags(0)) / static_cast<double>(lags.size() - 1);
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidInput, "lag grid must be increasing");
  for (Index k = 1; k < lags.size(); ++k) {
    if (std::abs((lags(k) - lags(k - 1)) - step) > 1e-9 * step)
      throw Error(ErrorKind::InvalidInput, "lag grid is not uniform");
  }
  return step;
}

template <typename V>
auto interpolate(const V& values, double step, double x) -> typename V::Scalar {
  const double pos = x / step;
  const Index last = values.size() - 1;
  if (pos > static_cast<double>(last) * (1.0 + 1e-12) + 1e-12)
    throw Error(ErrorKind::InvalidInput, "lag beyond the tabulated range");
  const Index k = std::min<Index>(static_cast<Index>(std::floor(pos)), last);
  if (k >= last) return values(last);
  const double frac = pos - static_cast<double>(k);
  return values(k) + (values(k + 1) - values(k)) * frac;
}

double lorentz_line(double omega, const SpectralPeak& p) {
  const double x = (omega - p.center) * p.correlation_time;
  return p.gamma / kPi / (1.0 + x * x);
}

// Bose occupation n(w) = 1 / (e^{beta w} - 1).
double occupation(double beta, double omega) { return 1.0 / std::expm1(beta * omega); }

}  // namespace

// ---------------------------------------------------------------------------
// CorrelationFunction

CorrelationFunction CorrelationFunction::lorentzian(double gamma, double correlation_time) {
  if (!(gamma > 0.0) || !(correlation_time > 0.0))
    throw Error(ErrorKind::InvalidParameter, "lorentzian correlation needs gamma > 0 and t_c > 0");
  return {std::make_shared<const Descriptor>(Lorentzian{gamma, correlation_time}), 0.0};
}

CorrelationFunction CorrelationFunction::tabulated(const Vector& lags, const Vector& envelope,
                                                   double spectral_center) {
  if (lags.size() != envelope.size())
    throw Error(ErrorKind::InvalidInput, "lag grid and envelope differ in length");
  const double step = lag_step(lags);
  if (envelope(0) < 0.0) throw Error(ErrorKind::InvalidInput, "envelope at zero lag must be >= 0");
  if (!envelope.allFinite()) throw Error(ErrorKind::InvalidInput, "envelope is not finite");
  return {std::make_shared<const Descriptor>(Table{step, envelope}), spectral_center};
}

CorrelationFunction CorrelationFunction::composite(std::vector<CorrelationTerm> terms) {
  if (terms.empty()) throw Error(ErrorKind::InvalidInput, "composite correlation needs a term");
  double weight = 0.0;
  double moment = 0.0;
  for (const auto& t : terms) {
    if (!(t.gamma > 0.0) || !(t.correlation_time > 0.0))
      throw Error(ErrorKind::InvalidParameter, "composite term needs gamma > 0 and t_c > 0");
    const double w = t.gamma / t.correlation_time;
    weight += w;
    moment += w * t.carrier;
  }
  return {std::make_shared<const Descriptor>(std::move(terms)), moment / weight};
}

CorrelationFunction CorrelationFunction::tabulated_complex(const Vector& lags,
                                                           const ComplexVector& values,
                                                           double spectral_center) {
  if (lags.size() != values.size())
    throw Error(ErrorKind::InvalidInput, "lag grid and values differ in length");
  const double step = lag_step(lags);
  if (!values.allFinite()) throw Error(ErrorKind::InvalidInput, "values are not finite");
  ComplexVector v = values;
  // Phi(0) = conj(Phi(0)) is real.
  v(0) = Complex(v(0).real(), 0.0);
  if (v(0).real() < 0.0) throw Error(ErrorKind::InvalidInput, "Phi(0) must be >= 0");
  return {std::make_shared<const Descriptor>(ComplexTable{step, std::move(v)}), spectral_center};
}

CorrelationFunction::Kind CorrelationFunction::kind() const {
  return static_cast<Kind>(descriptor_->index());
}

std::string CorrelationFunction::kind_name() const {
  switch (kind()) {
    case Kind::Lorentzian: return "lorentzian";
    case Kind::Tabulated: return "tabulated";
    case Kind::Composite: return "composite";
    case Kind::TabulatedComplex: return "tabulated_complex";
  }
  return "unknown";
}

bool CorrelationFunction::single_carrier() const {
  if (kind() == Kind::Composite) return std::get<2>(*descriptor_).size() == 1;
  return kind() != Kind::TabulatedComplex;
}

double CorrelationFunction::envelope(double lag) const {
  const double t = std::abs(lag);
  return std::visit(
      overloaded{
          [&](const Lorentzian& l) { return l.gamma / l.correlation_time * std::exp(-t / l.correlation_time); },
          [&](const Table& tab) { return interpolate(tab.values, tab.step, t); },
          [&](const std::vector<CorrelationTerm>&) { return std::abs(value(t)); },
          [&](const ComplexTable&) { return std::abs(value(t)); },
      },
      *descriptor_);
}

Complex CorrelationFunction::value(double lag) const {
  const double t = std::abs(lag);
  Complex v = std::visit(
      overloaded{
          [&](const Lorentzian&) { return envelope(t) * std::polar(1.0, center_ * t); },
          [&](const Table&) { return envelope(t) * std::polar(1.0, center_ * t); },
          [&](const std::vector<CorrelationTerm>& terms) {
            Complex acc(0.0);
            for (const auto& term : terms)
              acc += term.gamma / term.correlation_time * std::exp(-t / term.correlation_time) *
                     std::polar(1.0, term.carrier * t);
            return acc;
          },
          [&](const ComplexTable& tab) { return interpolate(tab.values, tab.step, t); },
      },
      *descriptor_);
  return lag < 0.0 ? std::conj(v) : v;
}

ComplexVector CorrelationFunction::lag_samples(double step, Index count) const {
  ComplexVector out(count);
  for (Index k = 0; k < count; ++k) out(k) = value(static_cast<double>(k) * step);
  return out;
}

Vector CorrelationFunction::envelope_samples(double step, Index count) const {
  Vector out(count);
  for (Index k = 0; k < count; ++k) out(k) = envelope(static_cast<double>(k) * step);
  return out;
}

double CorrelationFunction::max_lag() const {
  return std::visit(overloaded{
                        [](const Lorentzian&) { return kInf; },
                        [](const Table& t) { return t.step * static_cast<double>(t.values.size() - 1); },
                        [](const std::vector<CorrelationTerm>&) { return kInf; },
                        [](const ComplexTable& t) { return t.step * static_cast<double>(t.values.size() - 1); },
                    },
                    *descriptor_);
}

std::optional<double> CorrelationFunction::decay_lag(double rel, double limit) const {
  const double floor = rel * envelope(0.0);
  const double end = std::min(limit, max_lag());
  if (envelope(0.0) == 0.0) return 0.0;
  return std::visit(
      overloaded{
          [&](const Lorentzian& l) -> std::optional<double> {
            const double t = -l.correlation_time * std::log(rel);
            if (t <= end) return t;
            return std::nullopt;
          },
          [&](const std::vector<CorrelationTerm>& terms) -> std::optional<double> {
            // Sum of |terms| bounds |Phi|; use the bound so the window is safe.
            double tmax = 0.0;
            double total = 0.0;
            for (const auto& t : terms) total += t.gamma / t.correlation_time;
            for (const auto& t : terms) {
              const double w = t.gamma / t.correlation_time;
              tmax = std::max(tmax, t.correlation_time * std::log(w * static_cast<double>(terms.size()) /
                                                                  (rel * total)));
            }
            tmax = std::max(tmax, 0.0);
            if (tmax <= end) return tmax;
            return std::nullopt;
          },
          [&](const auto& table) -> std::optional<double> {
            const auto& values = table.values;
            // Last sample above the floor; the window ends one step later.
            Index last_above = -1;
            for (Index k = 0; k < values.size(); ++k) {
              if (static_cast<double>(k) * table.step > end) break;
              if (std::abs(values(k)) >= floor) last_above = k;
            }
            const double t = static_cast<double>(last_above + 1) * table.step;
            if (last_above + 1 < values.size() && t <= end) return t;
            return std::nullopt;
          },
      },
      *descriptor_);
}

CorrelationFunction CorrelationFunction::with_center(double center) const {
  const double shift = center - center_;
  return std::visit(
      overloaded{
          [&](const Lorentzian&) { return CorrelationFunction(descriptor_, center); },
          [&](const Table&) { return CorrelationFunction(descriptor_, center); },
          [&](const std::vector<CorrelationTerm>& terms) {
            auto moved = terms;
            for (auto& t : moved) t.carrier += shift;
            return CorrelationFunction(std::make_shared<const Descriptor>(std::move(moved)), center);
          },
          [&](const ComplexTable& tab) {
            ComplexTable moved = tab;
            for (Index k = 0; k < moved.values.size(); ++k)
              moved.values(k) *= std::polar(1.0, shift * tab.step * static_cast<double>(k));
            return CorrelationFunction(std::make_shared<const Descriptor>(std::move(moved)), center);
          },
      },
      *descriptor_);
}

CorrelationFunction lorentzian_correlation(double gamma, double correlation_time) {
  return CorrelationFunction::lorentzian(gamma, correlation_time);
}

CorrelationFunction shift_center(const CorrelationFunction& c, double center) {
  return c.with_center(center);
}

// ---------------------------------------------------------------------------
// DephasingSpectrum

DephasingSpectrum DephasingSpectrum::lorentzian(double gamma, double correlation_time, double center) {
  if (!(gamma > 0.0) || !(correlation_time > 0.0))
    throw Error(ErrorKind::InvalidParameter, "lorentzian spectrum needs gamma > 0 and t_c > 0");
  return DephasingSpectrum(std::make_shared<const Descriptor>(SpectralPeak{gamma, center, correlation_time}));
}

DephasingSpectrum DephasingSpectrum::one_over_f(double amplitude, double omega_min, double omega_max) {
  if (!(omega_min > 0.0) || !(omega_min < omega_max))
    throw Error(ErrorKind::InvalidParameter, "1/f spectrum needs 0 < omega_min < omega_max");
  if (!(amplitude >= 0.0)) throw Error(ErrorKind::InvalidParameter, "1/f amplitude must be >= 0");
  return DephasingSpectrum(std::make_shared<const Descriptor>(OneOverF{amplitude, omega_min, omega_max}));
}

DephasingSpectrum DephasingSpectrum::multi_peak(std::vector<SpectralPeak> peaks) {
  if (peaks.empty()) throw Error(ErrorKind::InvalidInput, "multi-peak spectrum needs a peak");
  for (const auto& p : peaks) {
    if (!(p.gamma > 0.0) || !(p.correlation_time > 0.0))
      throw Error(ErrorKind::InvalidParameter, "peak needs gamma > 0 and t_c > 0");
  }
  return DephasingSpectrum(std::make_shared<const Descriptor>(std::move(peaks)));
}

DephasingSpectrum DephasingSpectrum::tabulated(const Vector& omegas, const Vector& values) {
  if (omegas.size() != values.size() || omegas.size() < 3)
    throw Error(ErrorKind::InvalidInput, "tabulated spectrum needs matching grids of >= 3 points");
  const Index n = omegas.size();
  const double step = (omegas(n - 1) - omegas(0)) / static_cast<double>(n - 1);
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidInput, "frequency grid must be increasing");
  for (Index k = 1; k < n; ++k) {
    if (std::abs((omegas(k) - omegas(k - 1)) - step) > 1e-9 * step)
      throw Error(ErrorKind::InvalidInput, "frequency grid is not uniform");
  }
  if (std::abs(omegas(0) + omegas(n - 1)) > 1e-9 * step * static_cast<double>(n))
    throw Error(ErrorKind::InvalidInput, "frequency grid is not symmetric about 0");
  if (!values.allFinite()) throw Error(ErrorKind::InvalidInput, "spectrum values are not finite");
  return DephasingSpectrum(std::make_shared<const Descriptor>(Table{omegas(0), step, values}));
}

DephasingSpectrum DephasingSpectrum::thermal(const DephasingSpectrum& zero_temperature, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidParameter, "inverse temperature must be positive");
  const auto [lo, hi] = zero_temperature.support();
  bool positive_only = lo >= 0.0;
  if (zero_temperature.kind() == Kind::Tabulated) {
    const auto& tab = std::get<Table>(zero_temperature.descriptor());
    positive_only = true;
    for (Index k = 0; k < tab.values.size(); ++k) {
      if (tab.omega0 + tab.step * static_cast<double>(k) <= 0.0 && tab.values(k) != 0.0) positive_only = false;
    }
  }
  (void)hi;
  if (!positive_only)
    throw Error(ErrorKind::InvalidInput, "zero-temperature spectrum must vanish for omega <= 0");
  return DephasingSpectrum(std::make_shared<const Descriptor>(
      Thermal{beta, std::make_shared<const DephasingSpectrum>(zero_temperature)}));
}

DephasingSpectrum::Kind DephasingSpectrum::kind() const { return static_cast<Kind>(descriptor_->index()); }

std::string DephasingSpectrum::kind_name() const {
  switch (kind()) {
    case Kind::Lorentzian: return "lorentzian";
    case Kind::OneOverF: return "one_over_f";
    case Kind::MultiPeak: return "multi_peak";
    case Kind::Thermal: return "thermal";
    case Kind::Tabulated: return "tabulated";
  }
  return "unknown";
}

// side: 0 value at the point, -1 left limit, +1 right limit.
double DephasingSpectrum::evaluate(double omega, int side) const {
  return std::visit(
      overloaded{
          [&](const SpectralPeak& p) { return lorentz_line(omega, p); },
          [&](const OneOverF& f) {
            const double a = std::abs(omega);
            // Approaching |w| from the side that matters for the jump.
            const int outward = (omega >= 0.0 ? side : -side);
            const bool inside_min = outward == 0 ? a >= f.omega_min : (outward > 0 ? a >= f.omega_min : a > f.omega_min);
            const bool inside_max = outward == 0 ? a <= f.omega_max : (outward > 0 ? a < f.omega_max : a <= f.omega_max);
            return (inside_min && inside_max) ? f.amplitude / a : 0.0;
          },
          [&](const std::vector<SpectralPeak>& peaks) {
            double acc = 0.0;
            for (const auto& p : peaks) acc += lorentz_line(omega, p);
            return acc;
          },
          [&](const Thermal& th) {
            if (omega == 0.0) return 0.0;
            // (n(w) + 1) G0(w) + n(-w) G0(-w); only one term is non-zero.
            if (omega > 0.0) {
              const double g0 = th.base->evaluate(omega, side);
              return g0 == 0.0 ? 0.0 : (occupation(th.beta, omega) + 1.0) * g0;
            }
            const double g0 = th.base->evaluate(-omega, -side);
            return g0 == 0.0 ? 0.0 : occupation(th.beta, -omega) * g0;
          },
          [&](const Table& tab) {
            const double pos = (omega - tab.omega0) / tab.step;
            const Index last = tab.values.size() - 1;
            if (pos < -1e-9 || pos > static_cast<double>(last) + 1e-9) return 0.0;
            const Index k = std::clamp<Index>(static_cast<Index>(std::floor(pos)), 0, last);
            if (k == last) return tab.values(last);
            const double frac = pos - static_cast<double>(k);
            return tab.values(k) + (tab.values(k + 1) - tab.values(k)) * frac;
          },
      },
      *descriptor_);
}

double DephasingSpectrum::value(double omega) const { return evaluate(omega, 0); }
double DephasingSpectrum::left_limit(double omega) const { return evaluate(omega, -1); }
double DephasingSpectrum::right_limit(double omega) const { return evaluate(omega, +1); }

Vector DephasingSpectrum::sample(const FrequencyGrid& grid) const {
  Vector out(grid.size());
  for (Index k = 0; k < grid.size(); ++k) out(k) = value(grid.omega(k));
  return out;
}

std::optional<std::pair<double, double>> DephasingSpectrum::cutoffs() const {
  if (kind() == Kind::OneOverF) {
    const auto& f = std::get<OneOverF>(*descriptor_);
    return std::make_pair(f.omega_min, f.omega_max);
  }
  if (kind() == Kind::Thermal) return std::get<Thermal>(*descriptor_).base->cutoffs();
  return std::nullopt;
}

std::pair<double, double> DephasingSpectrum::support() const {
  return std::visit(
      overloaded{
          [](const SpectralPeak&) { return std::make_pair(-kInf, kInf); },
          [](const OneOverF& f) { return std::make_pair(-f.omega_max, f.omega_max); },
          [](const std::vector<SpectralPeak>&) { return std::make_pair(-kInf, kInf); },
          [](const Thermal& th) {
            const auto [lo, hi] = th.base->support();
            const double m = std::max(std::abs(lo), std::abs(hi));
            return std::make_pair(-m, m);
          },
          [](const Table& t) {
            return std::make_pair(t.omega0, t.omega0 + t.step * static_cast<double>(t.values.size() - 1));
          },
      },
      *descriptor_);
}

std::vector<double> DephasingSpectrum::breakpoints() const {
  std::vector<double> out;
  if (const auto cut = cutoffs()) {
    out = {-cut->second, -cut->first, cut->first, cut->second};
  }
  return out;
}

namespace {

// Integral of g over the spectrum's support: closed form where available,
// otherwise composite Gauss-Legendre between breakpoints.
template <typename G>
double integrate_spectrum(const DephasingSpectrum& s, G&& g) {
  const auto [lo, hi] = s.support();
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorKind::InvalidInput, "numeric integral over infinite support");
  std::vector<double> cuts = {lo, hi};
  for (double b : s.breakpoints())
    if (b > lo && b < hi) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  static const GaussLegendre rule(16);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    const int panels = 256;
    for (int p = 0; p < panels; ++p) {
      const double x0 = a + (b - a) * p / panels;
      const double x1 = a + (b - a) * (p + 1) / panels;
      acc += rule.integrate([&](double w) { return g(w); }, x0, x1);
    }
  }
  return acc;
}

}  // namespace

double DephasingSpectrum::total_weight() const {
  switch (kind()) {
    case Kind::Lorentzian: {
      const auto& p = std::get<SpectralPeak>(*descriptor_);
      return p.gamma / p.correlation_time;
    }
    case Kind::MultiPeak: {
      double acc = 0.0;
      for (const auto& p : std::get<std::vector<SpectralPeak>>(*descriptor_)) acc += p.gamma / p.correlation_time;
      return acc;
    }
    case Kind::OneOverF: {
      const auto& f = std::get<OneOverF>(*descriptor_);
      return 2.0 * f.amplitude * std::log(f.omega_max / f.omega_min);
    }
    default:
      return integrate_spectrum(*this, [&](double w) { return value(w); });
  }
}

double DephasingSpectrum::centroid() const {
  switch (kind()) {
    case Kind::Lorentzian: return std::get<SpectralPeak>(*descriptor_).center;
    case Kind::MultiPeak: {
      double weight = 0.0;
      double moment = 0.0;
      for (const auto& p : std::get<std::vector<SpectralPeak>>(*descriptor_)) {
        weight += p.gamma / p.correlation_time;
        moment += p.gamma / p.correlation_time * p.center;
      }
      return moment / weight;
    }
    case Kind::OneOverF: return 0.0;
    default: {
      const double w = total_weight();
      if (!(w > 0.0)) throw Error(ErrorKind::InvalidInput, "spectrum has no weight");
      return integrate_spectrum(*this, [&](double x) { return x * value(x); }) / w;
    }
  }
}

DephasingSpectrum thermal_spectrum(const DephasingSpectrum& zero_temperature, double beta) {
  return DephasingSpectrum::thermal(zero_temperature, beta);
}

DephasingSpectrum one_over_f_spectrum(double amplitude, double omega_min, double omega_max) {
  return DephasingSpectrum::one_over_f(amplitude, omega_min, omega_max);
}

DephasingSpectrum multi_peak_spectrum(std::vector<SpectralPeak> peaks) {
  return DephasingSpectrum::multi_peak(std::move(peaks));
}

// ---------------------------------------------------------------------------
// Transforms

DephasingSpectrum spectrum_from_correlation(const CorrelationFunction& c, const FrequencyGrid& grid,
                                            const TransformOptions& options) {
  const double phi0 = c.envelope(0.0);
  const Vector omegas = grid.omegas();
  if (phi0 == 0.0) return DephasingSpectrum::tabulated(omegas, Vector::Zero(grid.size()));

  const auto window = c.decay_lag(options.decay_floor, options.window_max);
  if (!window)
    throw Error(ErrorKind::Truncation, "correlation envelope has not decayed within the lag window");

  // Lag sampling: tables keep their own step, analytic kinds resolve both the
  // highest frequency and the window.
  double step;
  Index count;
  if (c.kind() == CorrelationFunction::Kind::Tabulated || c.kind() == CorrelationFunction::Kind::TabulatedComplex) {
    step = std::visit([](const auto& d) {
      if constexpr (requires { d.step; }) return d.step;
      return 0.0;
    }, c.descriptor());
    count = static_cast<Index>(std::ceil(*window / step - 1e-9)) + 1;
  } else {
    Index n = options.lag_points;
    if (n <= 0) {
      const auto needed = static_cast<Index>(std::ceil(*window * 4.0 * grid.omega_max() / kPi));
      n = std::clamp<Index>(needed, 4096, Index{1} << 18);
    }
    step = *window / static_cast<double>(n - 1);
    count = n;
  }
  const ComplexVector phi = c.lag_samples(step, count);

  // One-sided derivative of Phi at 0+ for the trapezoid end correction
  // (the integrand has a kink at t = 0 when mirrored).
  const Complex dphi0 = (-3.0 * phi(0) + 4.0 * phi(1) - phi(2)) / (2.0 * step);

  Vector g(grid.size());
  double scale = 0.0;
  for (Index k = 0; k < grid.size(); ++k) {
    const double w = omegas(k);
    const Complex rot = std::polar(1.0, w * step);
    Complex z(1.0, 0.0);
    Complex acc(0.0);
    for (Index j = 0; j < count; ++j) {
      const double wt = (j == 0 || j == count - 1) ? 0.5 : 1.0;
      acc += wt * phi(j) * z;
      z *= rot;
    }
    acc *= step;
    // Euler-Maclaurin: integral ~ trapezoid - h^2/12 (f'(end) - f'(0)), f'(end) ~ 0.
    const Complex fprime0 = dphi0 + Complex(0.0, w) * phi(0);
    acc += step * step / 12.0 * fprime0;
    g(k) = acc.real() / kPi;
    scale = std::max(scale, std::abs(g(k)));
  }

  const double tol = 1e-6 * scale + 1e-12 * phi0;
  for (Index k = 0; k < g.size(); ++k) {
    if (g(k) < 0.0) {
      if (-g(k) <= tol) {
        g(k) = 0.0;
      } else {
        throw Error(ErrorKind::InconsistentInput, "transform is significantly negative; Phi is not a valid covariance");
      }
    }
  }
  return DephasingSpectrum::tabulated(omegas, g);
}

namespace {

ComplexVector transform_samples(const DephasingSpectrum& s, const TimeGrid& lags) {
  const Index n = lags.size();
  const double h = lags.step();
  ComplexVector phi(n);
  switch (s.kind()) {
    case DephasingSpectrum::Kind::Lorentzian:
    case DephasingSpectrum::Kind::MultiPeak: {
      std::vector<SpectralPeak> peaks;
      if (s.kind() == DephasingSpectrum::Kind::Lorentzian)
        peaks.push_back(std::get<SpectralPeak>(s.descriptor()));
      else
        peaks = std::get<std::vector<SpectralPeak>>(s.descriptor());
      for (Index k = 0; k < n; ++k) {
        const double t = h * static_cast<double>(k);
        Complex acc(0.0);
        for (const auto& p : peaks)
          acc += p.gamma / p.correlation_time * std::exp(-t / p.correlation_time) * std::polar(1.0, -p.center * t);
        phi(k) = acc;
      }
      return phi;
    }
    case DephasingSpectrum::Kind::OneOverF: {
      const auto& f = std::get<DephasingSpectrum::OneOverF>(s.descriptor());
      static const GaussLegendre rule(16);
      const double span = f.omega_max - f.omega_min;
      for (Index k = 0; k < n; ++k) {
        const double t = h * static_cast<double>(k);
        const int panels = std::max(64, static_cast<int>(std::ceil(span * t / kPi)) + 1);
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
          const double a = f.omega_min + span * p / panels;
          const double b = f.omega_min + span * (p + 1) / panels;
          acc += rule.integrate([&](double w) { return std::cos(w * t) / w; }, a, b);
        }
        phi(k) = 2.0 * f.amplitude * acc;
      }
      return phi;
    }
    case DephasingSpectrum::Kind::Tabulated:
    case DephasingSpectrum::Kind::Thermal: {
      // Trapezoid on the tabulation grid (mirrored base grid for thermal).
      double w0;
      double dw;
      Index m;
      if (s.kind() == DephasingSpectrum::Kind::Tabulated) {
        const auto& tab = std::get<DephasingSpectrum::Table>(s.descriptor());
        w0 = tab.omega0;
        dw = tab.step;
        m = tab.values.size();
      } else {
        const auto [lo, hi] = s.support();
        if (!std::isfinite(hi)) throw Error(ErrorKind::InvalidInput, "thermal base must be band-limited");
        const auto& base = *std::get<DephasingSpectrum::Thermal>(s.descriptor()).base;
        dw = base.kind() == DephasingSpectrum::Kind::Tabulated
                 ? std::get<DephasingSpectrum::Table>(base.descriptor()).step
                 : (hi - lo) / 4096.0;
        const auto half = static_cast<Index>(std::ceil(hi / dw));
        w0 = -dw * static_cast<double>(half);
        m = 2 * half + 1;
      }
      Vector g(m);
      for (Index j = 0; j < m; ++j) g(j) = s.value(w0 + dw * static_cast<double>(j));
      if (g.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::InvalidInput, "spectrum has empty support");
      for (Index k = 0; k < n; ++k) {
        const double t = h * static_cast<double>(k);
        const Complex rot = std::polar(1.0, -dw * t);
        Complex z = std::polar(1.0, -w0 * t);
        Complex acc(0.0);
        for (Index j = 0; j < m; ++j) {
          const double wt = (j == 0 || j == m - 1) ? 0.5 : 1.0;
          acc += wt * g(j) * z;
          z *= rot;
        }
        phi(k) = acc * dw;
      }
      return phi;
    }
  }
  return phi;
}

}  // namespace

CorrelationFunction correlation_from_spectrum(const DephasingSpectrum& s, const TimeGrid& lags) {
  const ComplexVector phi = transform_samples(s, lags);
  if (phi(0).real() <= 0.0) throw Error(ErrorKind::InvalidInput, "spectrum has empty support");
  return CorrelationFunction::tabulated_complex(lags.times(), phi, -s.centroid());
}

CorrelationFunction companion_correlation(const DephasingSpectrum& s, const TimeGrid& lags) {
  if (s.kind() == DephasingSpectrum::Kind::Lorentzian) {
    const auto& p = std::get<SpectralPeak>(s.descriptor());
    return CorrelationFunction::lorentzian(p.gamma, p.correlation_time).with_center(-p.center);
  }
  if (s.kind() == DephasingSpectrum::Kind::MultiPeak) {
    std::vector<CorrelationTerm> terms;
    for (const auto& p : std::get<std::vector<SpectralPeak>>(s.descriptor()))
      terms.push_back({p.gamma, p.correlation_time, -p.center});
    return CorrelationFunction::composite(std::move(terms));
  }
  return correlation_from_spectrum(s, lags);
}

}  // namespace dcm
