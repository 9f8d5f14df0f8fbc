#pragma once

#include "dcm/grid.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dcm {

/// One term (gamma/tc) e^{-t/tc} e^{i*carrier*t} of a composite correlation.
struct CorrelationTerm {
  double gamma;
  double correlation_time;
  double carrier;
};

/// Second moment of the stationary noise, Phi(t) = envelope(t) e^{i*Delta*t},
/// with Phi(-t) = conj(Phi(t)).
///
/// Single-carrier kinds (Lorentzian, Tabulated) store a real envelope and a
/// spectral center Delta. Multi-carrier kinds (Composite, TabulatedComplex)
/// store the full complex Phi; for those envelope() is |Phi| and
/// spectral_center() is the weight centroid of the carriers.
class CorrelationFunction {
 public:
  enum class Kind { Lorentzian, Tabulated, Composite, TabulatedComplex };

  struct Lorentzian {
    double gamma;
    double correlation_time;
  };
  struct Table {
    double step;
    Vector values;
  };
  struct ComplexTable {
    double step;
    ComplexVector values;
  };
  using Descriptor = std::variant<Lorentzian, Table, std::vector<CorrelationTerm>, ComplexTable>;

  static CorrelationFunction lorentzian(double gamma, double correlation_time);
  /// Real envelope tabulated on a uniform lag grid starting at 0.
  static CorrelationFunction tabulated(const Vector& lags, const Vector& envelope,
                                       double spectral_center = 0.0);
  static CorrelationFunction composite(std::vector<CorrelationTerm> terms);
  /// Full complex Phi(t) on a uniform lag grid starting at 0.
  static CorrelationFunction tabulated_complex(const Vector& lags, const ComplexVector& values,
                                               double spectral_center);

  Kind kind() const;
  std::string kind_name() const;
  const Descriptor& descriptor() const { return *descriptor_; }

  /// Envelope at |lag|.
  double envelope(double lag) const;
  double spectral_center() const { return center_; }
  /// Full Phi(lag), any sign of lag.
  Complex value(double lag) const;
  bool single_carrier() const;

  /// Phi(k*step), k = 0..count-1.
  ComplexVector lag_samples(double step, Index count) const;
  /// Envelope at k*step, k = 0..count-1.
  Vector envelope_samples(double step, Index count) const;

  /// Largest lag at which the correlation is defined (infinity for analytic kinds).
  double max_lag() const;
  /// First lag where the envelope drops below rel * envelope(0), searched up to
  /// `limit`; nullopt if it never does.
  std::optional<double> decay_lag(double rel, double limit) const;

  /// Same envelope, spectral center replaced by `center`. Multi-carrier kinds are
  /// multiplied by e^{i(center - old)t}, which leaves |Phi| unchanged.
  CorrelationFunction with_center(double center) const;

 private:
  CorrelationFunction(std::shared_ptr<const Descriptor> d, double center)
      : descriptor_(std::move(d)), center_(center) {}

  std::shared_ptr<const Descriptor> descriptor_;
  double center_;
};

/// Lorentzian spectral line (gamma/pi) / (1 + (w - center)^2 tc^2).
struct SpectralPeak {
  double gamma;
  double center;
  double correlation_time;
};

/// Dephasing spectrum G(w) >= 0.
class DephasingSpectrum {
 public:
  enum class Kind { Lorentzian, OneOverF, MultiPeak, Thermal, Tabulated };

  struct OneOverF {
    double amplitude;
    double omega_min;
    double omega_max;
  };
  struct Thermal {
    double beta;
    std::shared_ptr<const DephasingSpectrum> base;
  };
  struct Table {
    double omega0;
    double step;
    Vector values;
  };
  using Descriptor = std::variant<SpectralPeak, OneOverF, std::vector<SpectralPeak>, Thermal, Table>;

  static DephasingSpectrum lorentzian(double gamma, double correlation_time, double center = 0.0);
  static DephasingSpectrum one_over_f(double amplitude, double omega_min, double omega_max);
  static DephasingSpectrum multi_peak(std::vector<SpectralPeak> peaks);
  /// Values on a uniform grid symmetric about 0; zero outside it.
  static DephasingSpectrum tabulated(const Vector& omegas, const Vector& values);
  static DephasingSpectrum thermal(const DephasingSpectrum& zero_temperature, double beta);

  Kind kind() const;
  std::string kind_name() const;
  const Descriptor& descriptor() const { return *descriptor_; }

  double value(double omega) const;
  /// One-sided limits; differ from value() only at cutoff discontinuities.
  double left_limit(double omega) const;
  double right_limit(double omega) const;

  Vector sample(const FrequencyGrid& grid) const;

  /// Hard cutoffs (omega_min, omega_max) for band-limited kinds.
  std::optional<std::pair<double, double>> cutoffs() const;
  /// Interval outside which G vanishes identically (may be infinite).
  std::pair<double, double> support() const;
  /// Jump locations of G (cutoffs on both sides of zero).
  std::vector<double> breakpoints() const;
  /// Integral of G over all frequencies, equal to Phi(0).
  double total_weight() const;
  /// Weight centroid of G.
  double centroid() const;

 private:
  explicit DephasingSpectrum(std::shared_ptr<const Descriptor> d) : descriptor_(std::move(d)) {}
  double evaluate(double omega, int side) const;

  std::shared_ptr<const Descriptor> descriptor_;
};

CorrelationFunction lorentzian_correlation(double gamma, double correlation_time);
CorrelationFunction shift_center(const CorrelationFunction& c, double center);

struct TransformOptions {
  /// Upper bound on the lag window (in addition to the decay criterion).
  double window_max = 1e6;
  /// Relative envelope floor that defines the end of the lag window.
  double decay_floor = 1e-8;
  /// Lag samples in the window; 0 picks from the frequency range.
  Index lag_points = 0;
};

/// G(w) = (2pi)^{-1} * integral of Phi(t) e^{iwt} dt, trapezoid on [0, window]
/// folded with Phi(-t) = conj(Phi(t)). Returns a tabulated spectrum on `grid`.
DephasingSpectrum spectrum_from_correlation(const CorrelationFunction& c, const FrequencyGrid& grid,
                                            const TransformOptions& options = {});

/// Phi(t) = integral of G(w) e^{-iwt} dw on the lag grid. The result is a
/// complex table whose spectral center is minus the spectral centroid (the
/// carrier e^{i Delta t} puts the peak of G at w = -Delta).
CorrelationFunction correlation_from_spectrum(const DephasingSpectrum& s, const TimeGrid& lags);

/// Exact analytic correlation where one exists (Lorentzian, multi-peak),
/// otherwise correlation_from_spectrum on `lags`.
CorrelationFunction companion_correlation(const DephasingSpectrum& s, const TimeGrid& lags);

DephasingSpectrum thermal_spectrum(const DephasingSpectrum& zero_temperature, double beta);
DephasingSpectrum one_over_f_spectrum(double amplitude, double omega_min, double omega_max);
DephasingSpectrum multi_peak_spectrum(std::vector<SpectralPeak> peaks);

}  // namespace dcm
