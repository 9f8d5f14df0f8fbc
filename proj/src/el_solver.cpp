#include "dcm/el_solver.hpp"

#include "dcm/error.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <algorithm>
#include <deque>
#include <limits>
#include <memory>

namespace dcm {

namespace {

struct MapResult {
  Vector amplitude;
  double denominator;
};

// One application of the energy-normalized fixed-point map.
MapResult apply_map(const LagKernel& kernel, const Vector& phase, double energy, double floor) {
  const double h = kernel.grid().step();
  const Vector z = kernel.z(phase);
  const Vector integral = cumulative_trapezoid(z, h);
  const double d = std::sqrt(trapezoid(integral.array().square().matrix(), h));
  if (!(d >= floor))
    throw Error(ErrorKind::DegenerateStationaryPoint,
                "Z vanishes on this phase (a critical point of the rate); choose another initial guess");
  return {-std::sqrt(energy) / d * integral, d};
}

struct Run {
  Vector amplitude;
  int iterations;
  double step;
  bool stepped;
};

Run iterate(const LagKernel& kernel, Vector x, double energy, const SolverConfig& cfg, double floor) {
  const TimeGrid& grid = kernel.grid();
  const double h = grid.step();
  auto normalize = [&](Vector& v) {
    const double e = trapezoid(v.array().square().matrix(), h);
    if (e > 0.0) v *= std::sqrt(energy / e);
  };
  // Near a minimum the damped map is a projected gradient step of length theta / (2|mu|);
  // at large E only a very small theta is stable.
  constexpr double kMinTheta = 0x1.0p-40;

  Vector g = apply_map(kernel, cumulative_trapezoid(x, h), energy, floor).amplitude;
  Vector f = g - x;
  std::deque<Vector> dx;
  std::deque<Vector> df;
  double theta = cfg.damping;
  double step = cumulative_trapezoid(f, h).cwiseAbs().maxCoeff();
  int k = 0;
  for (; k < cfg.max_iter; ++k) {
    if (step < cfg.tol_phase) return {g, k, step, true};

    Vector next = x + theta * f;
    if (!df.empty()) {
      Matrix mf(x.size(), static_cast<Index>(df.size()));
      Matrix mx(x.size(), static_cast<Index>(dx.size()));
      for (std::size_t j = 0; j < df.size(); ++j) {
        mf.col(static_cast<Index>(j)) = df[j];
        mx.col(static_cast<Index>(j)) = dx[j];
      }
      const Vector gamma = mf.completeOrthogonalDecomposition().solve(f);
      next -= (mx + theta * mf) * gamma;
    }
    normalize(next);

    const Vector g_next = apply_map(kernel, cumulative_trapezoid(next, h), energy, floor).amplitude;
    const Vector f_next = g_next - next;
    const double step_next = cumulative_trapezoid(f_next, h).cwiseAbs().maxCoeff();
    if (step_next > 1.5 * step && theta > kMinTheta) {
      // Reject: restart the history with half the mixing.
      dx.clear();
      df.clear();
      theta = std::max(theta * 0.5, kMinTheta);
      continue;
    }
    if (cfg.anderson_depth > 0) {
      dx.push_back(next - x);
      df.push_back(f_next - f);
      while (static_cast<int>(dx.size()) > cfg.anderson_depth) {
        dx.pop_front();
        df.pop_front();
      }
    }
    x = next;
    g = g_next;
    f = f_next;
    step = step_next;
  }
  return {g, k, step, step < cfg.tol_phase};
}

// Quasi-Newton descent of R over Omega = sqrt(E) u / |u|; dR/dOmega = 2 h I on the grid.
struct Descent {
  const LagKernel* kernel;
  double energy;
};

Vector to_vector(const gsl_vector* v) {
  Vector x(static_cast<Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) x(static_cast<Index>(i)) = gsl_vector_get(v, i);
  return x;
}

double descent_fdf(const gsl_vector* v, void* params, gsl_vector* grad) {
  const Descent& p = *static_cast<const Descent*>(params);
  const double h = p.kernel->grid().step();
  const Vector u = to_vector(v);
  const double norm = std::sqrt(trapezoid(u.array().square().matrix(), h));
  const double scale = std::sqrt(p.energy) / norm;
  const Vector phi = cumulative_trapezoid(Vector(scale * u), h);
  if (grad) {
    const Vector g = 2.0 * h * cumulative_trapezoid(p.kernel->z(phi), h);
    const Index n = u.size();
    const double ug = (u.dot(g) - 0.5 * (u(0) * g(0) + u(n - 1) * g(n - 1))) * h / (norm * norm);
    for (Index i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      gsl_vector_set(grad, static_cast<std::size_t>(i), scale * (g(i) - w * u(i) * ug));
    }
  }
  return p.kernel->rate(phi);
}

double descent_f(const gsl_vector* v, void* params) { return descent_fdf(v, params, nullptr); }
void descent_df(const gsl_vector* v, void* params, gsl_vector* g) { descent_fdf(v, params, g); }
void descent_both(const gsl_vector* v, void* params, double* f, gsl_vector* g) { *f = descent_fdf(v, params, g); }

Run descend(const LagKernel& kernel, const Vector& x0, double energy, const SolverConfig& cfg, double floor) {
  const double h = kernel.grid().step();
  const auto n = static_cast<std::size_t>(x0.size());
  Descent params{&kernel, energy};
  gsl_multimin_function_fdf fn{descent_f, descent_df, descent_both, n, &params};
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> v(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(v.get(), i, x0(static_cast<Index>(i)));
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> m(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n), gsl_multimin_fdfminimizer_free);
  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  gsl_multimin_fdfminimizer_set(m.get(), &fn, v.get(), 0.1 * std::sqrt(energy * kernel.grid().duration()), 0.1);

  auto amplitude = [&] {
    const Vector u = to_vector(gsl_multimin_fdfminimizer_x(m.get()));
    return Vector(std::sqrt(energy / trapezoid(u.array().square().matrix(), h)) * u);
  };
  auto fixed_point_step = [&](const Vector& x) {
    const Vector f = apply_map(kernel, cumulative_trapezoid(x, h), energy, floor).amplitude - x;
    return cumulative_trapezoid(f, h).cwiseAbs().maxCoeff();
  };
  int k = 0;
  double step = std::numeric_limits<double>::infinity();
  for (; k < cfg.max_iter; ++k) {
    if (gsl_multimin_fdfminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (k % 10 == 9) {
      step = fixed_point_step(amplitude());
      if (step < cfg.tol_phase) break;
    }
  }
  gsl_set_error_handler(previous);
  const Vector x = amplitude();
  step = fixed_point_step(x);
  return {x, k, step, step < cfg.tol_phase};
}

void validate(const SolverConfig& cfg, double energy) {
  if (!(energy > 0.0)) throw Error(ErrorKind::InvalidParameter, "energy must be positive");
  if (!(cfg.damping > 0.0) || cfg.damping > 1.0) throw Error(ErrorKind::InvalidParameter, "damping must lie in (0, 1]");
  if (!(cfg.tol_phase > 0.0)) throw Error(ErrorKind::InvalidParameter, "tol_phase must be positive");
  if (cfg.max_iter < 1) throw Error(ErrorKind::InvalidParameter, "max_iter must be >= 1");
  if (cfg.denom_floor && !(*cfg.denom_floor > 0.0))
    throw Error(ErrorKind::InvalidParameter, "denom_floor must be positive");
  if (cfg.anderson_depth < 0) throw Error(ErrorKind::InvalidParameter, "anderson_depth must be >= 0");
}

}  // namespace

double default_denom_floor(const LagKernel& kernel) {
  const double T = kernel.grid().duration();
  return 1e-12 * kernel.zero_lag() * T * T;
}

double default_residual_tol(const LagKernel& kernel, double energy) {
  return 1e-4 * std::sqrt(energy) * kernel.zero_lag() * kernel.grid().duration();
}

Vector z_functional(const CorrelationFunction& c, const Vector& phase, const TimeGrid& grid) {
  return LagKernel(c, grid).z(phase);
}

ControlField initial_field(const InitialGuess& guess, const TimeGrid& grid, double energy) {
  switch (guess.kind) {
    case InitialGuess::Kind::Chirp: return rescale_to_energy(chirp_ansatz(guess.parameter, grid), energy);
    case InitialGuess::Kind::DD: return rescale_to_energy(dd_sequence(energy, grid, guess.parameter).field, energy);
    case InitialGuess::Kind::LinearPhase:
      return rescale_to_energy(linear_phase(guess.parameter, grid), energy);
    case InitialGuess::Kind::Explicit: return rescale_to_energy(ControlField(grid, guess.samples), energy);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown initial guess");
}

ELSolution solve_optimal(const LagKernel& kernel, double energy, const SolverConfig& cfg) {
  validate(cfg, energy);
  const TimeGrid& grid = kernel.grid();
  const double floor = cfg.denom_floor.value_or(default_denom_floor(kernel));
  const double residual_tol = cfg.residual_tol.value_or(default_residual_tol(kernel, energy));

  const ControlField start = initial_field(cfg.initial_guess, grid, energy);
  const double start_rate = kernel.rate(start.phase());

  auto finish = [&](const Run& run, bool negated) {
    ELSolution s{ControlField(grid, run.amplitude)};
    s.iterations = run.iterations;
    s.phase_step = run.step;
    s.energy_realized = dcm::energy(s.field);
    s.residual = el_residual(kernel, s.field, energy, floor);
    s.rate = kernel.rate(s.field.phase());
    s.initial_rate = start_rate;
    s.negated_guess = negated;
    s.converged = run.stepped && s.residual <= residual_tol &&
                  std::abs(s.energy_realized - energy) <= 1e-6 * energy;
    return s;
  };

  Run run = iterate(kernel, start.amplitude(), energy, cfg, floor);
  bool stepped = run.stepped;
  ELSolution best = finish(run, false);
  if (best.rate > start_rate) {
    // The fixed point can be a maximum on this branch; the opposite sign of the guess is tried.
    Run neg = iterate(kernel, -start.amplitude(), energy, cfg, floor);
    ELSolution other = finish(neg, true);
    if (other.rate < best.rate) {
      best = std::move(other);
      stepped = neg.stepped;
    }
  }
  if (stepped && best.rate <= start_rate) return best;

  // Fixed-point iteration wandered: descend monotonically, then polish.
  const bool from_best = best.rate < start_rate;
  const Vector seed = from_best ? best.field.amplitude() : start.amplitude();
  const Run down = descend(kernel, seed, energy, cfg, floor);
  ELSolution descended = finish(down, from_best && best.negated_guess);
  descended.iterations += best.iterations;
  if (!down.stepped) {
    ELSolution polished = finish(iterate(kernel, down.amplitude, energy, cfg, floor), descended.negated_guess);
    polished.iterations += descended.iterations;
    if (polished.rate <= descended.rate) descended = std::move(polished);
  }
  if (descended.rate < best.rate) best = std::move(descended);
  return best;
}

ELSolution solve_optimal(const CorrelationFunction& c, double energy, const TimeGrid& grid,
                         const SolverConfig& cfg) {
  return solve_optimal(LagKernel(c, grid), energy, cfg);
}

double el_residual(const LagKernel& kernel, const ControlField& field, double energy,
                   std::optional<double> denom_floor) {
  const double floor = denom_floor.value_or(default_denom_floor(kernel));
  const double h = kernel.grid().step();
  const Vector& phi = field.phase();
  const Vector z = kernel.z(phi);
  const double d = std::sqrt(trapezoid(cumulative_trapezoid(z, h).array().square().matrix(), h));
  if (!(d >= floor)) throw Error(ErrorKind::DegenerateStationaryPoint, "Z vanishes on this field");
  const Index n = phi.size();
  const double scale = std::sqrt(energy) / d;
  double worst = 0.0;
  for (Index i = 1; i + 1 < n; ++i) {
    const double second = (phi(i + 1) - 2.0 * phi(i) + phi(i - 1)) / (h * h);
    worst = std::max(worst, std::abs(second + scale * z(i)));
  }
  return worst;
}

double el_residual(const CorrelationFunction& c, const ControlField& field, double energy) {
  return el_residual(LagKernel(c, field.grid()), field, energy);
}

}  // namespace dcm
