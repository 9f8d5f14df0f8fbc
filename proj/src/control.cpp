#include "dcm/control.hpp"

#include "dcm/error.hpp"
#include "dcm/random.hpp"

#include <cmath>
#include <numbers>

namespace dcm {

ControlField::ControlField(TimeGrid grid, Vector amplitude) : grid_(grid), amplitude_(std::move(amplitude)) {
  if (amplitude_.size() != grid_.size())
    throw Error(ErrorKind::InvalidInput, "amplitude length does not match the grid");
  phase_ = cumulative_trapezoid(amplitude_, grid_.step());
}

ControlField phase_from_amplitude(const Vector& amplitude, const TimeGrid& grid) { return {grid, amplitude}; }

ComplexVector epsilon(const ControlField& field) {
  const Vector& phi = field.phase();
  ComplexVector eps(phi.size());
  for (Index i = 0; i < phi.size(); ++i) eps(i) = std::polar(1.0, -phi(i));
  return eps;
}

ComplexVector finite_time_ft(const ComplexVector& eps, const TimeGrid& grid, const FrequencyGrid& omegas) {
  if (eps.size() != grid.size()) throw Error(ErrorKind::InvalidInput, "samples do not match the grid");
  const Index n = grid.size();
  const double h = grid.step();
  ComplexVector weighted = eps * h;
  weighted(0) *= 0.5;
  weighted(n - 1) *= 0.5;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  ComplexVector out(omegas.size());
  // Phase rotation is re-seeded every block to bound recurrence drift.
  constexpr Index block = 64;
  for (Index k = 0; k < omegas.size(); ++k) {
    const double w = omegas.omega(k);
    const Complex rot = std::polar(1.0, w * h);
    Complex acc(0.0);
    for (Index start = 0; start < n; start += block) {
      Complex z = std::polar(1.0, w * h * static_cast<double>(start));
      const Index stop = std::min(n, start + block);
      for (Index i = start; i < stop; ++i) {
        acc += weighted(i) * z;
        z *= rot;
      }
    }
    out(k) = acc * norm;
  }
  return out;
}

Vector spectral_intensity(const ComplexVector& eps_t, double duration) {
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidParameter, "duration must be positive");
  return eps_t.cwiseAbs2() / duration;
}

double energy(const ControlField& field) {
  return trapezoid(field.amplitude().array().square().matrix(), field.grid().step());
}

DDSequence dd_sequence(double energy_budget, const TimeGrid& grid, double pulse_width) {
  constexpr double pi = std::numbers::pi;
  if (!(energy_budget > 0.0) || !(pulse_width > 0.0))
    throw Error(ErrorKind::InvalidParameter, "DD energy and pulse width must be positive");
  const double h = grid.step();
  if (h > pulse_width / 8.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidParameter, "grid too coarse for the pulse width (need h <= width/8)");
  const auto n = static_cast<int>(std::lround(pulse_width * energy_budget / (pi * pi)));
  if (n < 1) throw Error(ErrorKind::EnergyTooSmall, "energy buys less than one pi-pulse");
  const double tau = (grid.duration() - pulse_width) / n;
  if (tau <= pulse_width) throw Error(ErrorKind::InfeasibleParameters, "pulses overlap (tau <= width)");

  Vector amp = Vector::Zero(grid.size());
  const double height = pi / pulse_width;
  for (int j = 0; j < n; ++j) {
    const auto first = static_cast<Index>(std::lround(j * tau / h));
    const auto last = std::min<Index>(static_cast<Index>(std::lround((j * tau + pulse_width) / h)), grid.size());
    amp.segment(first, last - first).setConstant(height);
  }
  return {ControlField(grid, std::move(amp)), DDParams{n, pulse_width, tau, n * pi * pi / pulse_width}};
}

ControlField chirp_ansatz(double a, const TimeGrid& grid) {
  const double T = grid.duration();
  const Vector x = grid.times() / T;
  Vector amp = a * (1.0 + (-x.array()).exp() * (x.array() - 1.0)).matrix();
  return {grid, std::move(amp)};
}

ControlField linear_phase(double slope, const TimeGrid& grid) {
  return {grid, Vector::Constant(grid.size(), slope)};
}

ControlField perturb(const ControlField& field, double sigma_rel, std::uint64_t seed) {
  if (!(sigma_rel >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_rel must be >= 0");
  if (sigma_rel == 0.0) return field;
  const CounterNormal normal(seed);
  Vector amp = field.amplitude();
  for (Index i = 0; i < amp.size(); ++i) amp(i) *= 1.0 + sigma_rel * normal(0, static_cast<std::uint64_t>(i));
  return {field.grid(), std::move(amp)};
}

ControlField rescale_to_energy(const ControlField& field, double target) {
  const double e = energy(field);
  if (!(e > 0.0)) throw Error(ErrorKind::DegenerateField, "field has zero energy");
  return {field.grid(), field.amplitude() * std::sqrt(target / e)};
}

}  // namespace dcm
