#include "dcm/rate.hpp"

#include "dcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dcm {

double rate_time_domain(const LagKernel& kernel, const ControlField& field) {
  if (!(kernel.grid() == field.grid())) throw Error(ErrorKind::InvalidInput, "field and kernel grids differ");
  return kernel.rate(field.phase());
}

double rate_time_domain(const CorrelationFunction& c, const ControlField& field) {
  return rate_time_domain(LagKernel(c, field.grid()), field);
}

void check_coverage(const DephasingSpectrum& s, const FrequencyGrid& omegas) {
  const auto [lo, hi] = s.support();
  const double edge = omegas.omega_max();
  if (std::isfinite(lo) && std::isfinite(hi)) {
    if (lo < -edge * (1.0 + 1e-12) || hi > edge * (1.0 + 1e-12))
      throw Error(ErrorKind::Coverage, "frequency grid does not span the spectrum's support");
    return;
  }
  const Vector g = s.sample(omegas);
  const double peak = g.maxCoeff();
  if (std::max(g(0), g(g.size() - 1)) > 1e-3 * peak)
    throw Error(ErrorKind::Coverage, "spectrum has not decayed at the frequency grid edges");
}

double rate_freq_domain(const DephasingSpectrum& s, const Vector& intensity, const FrequencyGrid& omegas) {
  if (intensity.size() != omegas.size()) throw Error(ErrorKind::InvalidInput, "intensity does not match the grid");
  check_coverage(s, omegas);
  const double dw = omegas.step();
  std::vector<double> jumps = s.breakpoints();
  std::sort(jumps.begin(), jumps.end());

  // One-sided values at every node; a jump within rounding of a node is taken at the node.
  const Index m = omegas.size();
  Vector g_left(m);
  Vector g_right(m);
  for (Index k = 0; k < m; ++k) {
    double at = omegas.omega(k);
    for (double j : jumps)
      if (std::abs(j - at) <= 1e-9 * dw) at = j;
    g_left(k) = s.left_limit(at);
    g_right(k) = s.right_limit(at);
  }

  double acc = 0.0;
  for (Index k = 0; k + 1 < m; ++k) {
    const double a = omegas.omega(k);
    const double b = omegas.omega(k + 1);
    double left = a;
    double f_left = intensity(k);
    double g_start = g_right(k);
    for (double j : jumps) {
      if (j <= a + 1e-9 * dw || j >= b - 1e-9 * dw) continue;
      const double f_j = intensity(k) + (intensity(k + 1) - intensity(k)) * (j - a) / dw;
      acc += 0.5 * (j - left) * (g_start * f_left + s.left_limit(j) * f_j);
      left = j;
      f_left = f_j;
      g_start = s.right_limit(j);
    }
    acc += 0.5 * (b - left) * (g_start * f_left + g_left(k + 1) * intensity(k + 1));
  }
  return 2.0 * std::numbers::pi * acc;
}

Fidelity fidelity(double rate, double duration, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1]");
  const double f = 1.0 - alpha * rate * duration;
  if (f < 0.0) return {0.0, true};
  if (f > 1.0) return {1.0, true};
  return {f, false};
}

double rate_floor(double zero_lag, double duration) { return 1e-12 * zero_lag * duration; }

double normalized_rate(const LagKernel& kernel, const ControlField& field) {
  const double base = kernel.rate(Vector::Zero(kernel.grid().size()));
  if (!(base > rate_floor(kernel.zero_lag(), kernel.grid().duration())))
    throw Error(ErrorKind::DegenerateNormalization, "unmodulated rate is below the floor");
  return rate_time_domain(kernel, field) / base;
}

double normalized_rate(const CorrelationFunction& c, const ControlField& field) {
  return normalized_rate(LagKernel(c, field.grid()), field);
}

RateReport evaluate_rate(const LagKernel& kernel, const DephasingSpectrum& s, const ControlField& field,
                         const FrequencyGrid& omegas, double alpha, std::optional<double> unmodulated_rate) {
  RateReport r{};
  r.duration = field.grid().duration();
  r.rate_time = rate_time_domain(kernel, field);
  const ComplexVector eps_t = finite_time_ft(epsilon(field), field.grid(), omegas);
  r.rate_freq = rate_freq_domain(s, spectral_intensity(eps_t, r.duration), omegas);
  r.energy = energy(field);
  r.alpha = alpha;
  r.fidelity = fidelity(std::max(r.rate_time, 0.0), r.duration, alpha);
  if (unmodulated_rate) {
    if (!(*unmodulated_rate > rate_floor(kernel.zero_lag(), r.duration)))
      throw Error(ErrorKind::DegenerateNormalization, "unmodulated rate is below the floor");
    r.normalized = r.rate_time / *unmodulated_rate;
  }
  return r;
}

}  // namespace dcm
