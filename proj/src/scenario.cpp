#include "dcm/scenario.hpp"

#include "json_io.hpp"

#include "dcm/error.hpp"
#include "dcm/mc_oracle.hpp"
#include "dcm/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

namespace dcm {

using io::Json;

namespace {

constexpr double kPi = std::numbers::pi;

// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

InitialGuess guess_from(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorKind::Config, "initial guess needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "chirp") {
    io::require_keys(j, {"kind", "a"}, "chirp guess");
    return InitialGuess::chirp(j.contains("a") ? io::number(j, "a", "chirp guess") : 1.0);
  }
  if (kind == "linear_phase") {
    io::require_keys(j, {"kind", "slope"}, "linear_phase guess");
    return InitialGuess::linear_phase(j.contains("slope") ? io::number(j, "slope", "linear_phase guess") : 1.0);
  }
  if (kind == "dd") {
    io::require_keys(j, {"kind", "pulse_width"}, "dd guess");
    return InitialGuess::dd(io::number(j, "pulse_width", "dd guess"));
  }
  if (kind == "explicit") {
    io::require_keys(j, {"kind", "samples"}, "explicit guess");
    const Json& s = j.at("samples");
    Vector v(static_cast<Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Index>(i)) = s[i].get<double>();
    return InitialGuess::explicit_samples(v);
  }
  throw Error(ErrorKind::Config, "unknown initial guess kind '" + kind + "'");
}

Json guess_json(const InitialGuess& g) {
  switch (g.kind) {
    case InitialGuess::Kind::Chirp: return {{"kind", "chirp"}, {"a", g.parameter}};
    case InitialGuess::Kind::LinearPhase: return {{"kind", "linear_phase"}, {"slope", g.parameter}};
    case InitialGuess::Kind::DD: return {{"kind", "dd"}, {"pulse_width", g.parameter}};
    case InitialGuess::Kind::Explicit: return {{"kind", "explicit"}, {"samples", io::to_json(g.samples)}};
  }
  return {};
}

int integer(const Json& j, const char* key, const std::string& where) {
  const double v = io::number(j, key, where);
  if (v != std::floor(v)) throw Error(ErrorKind::Config, std::string("'") + key + "' in " + where + " must be an integer");
  return static_cast<int>(v);
}

std::uint64_t seed_value(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw Error(ErrorKind::Config, where + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

Json resolved_json(const Scenario& s) {
  Json out;
  out["version"] = 1;
  out["name"] = s.name;
  out["spectrum"] = io::to_json(s.spectrum);
  out["duration"] = s.duration;
  out["samples"] = s.samples;
  out["energies"] = s.energies;
  Json guesses = Json::array();
  for (const auto& g : s.guesses) guesses.push_back(guess_json(g));
  Json solver{{"damping", s.solver.damping},
              {"tol_phase", s.solver.tol_phase},
              {"max_iter", s.solver.max_iter},
              {"anderson_depth", s.solver.anderson_depth},
              {"initial_guesses", guesses}};
  if (s.solver.denom_floor) solver["denom_floor"] = *s.solver.denom_floor;
  if (s.solver.residual_tol) solver["residual_tol"] = *s.solver.residual_tol;
  out["solver"] = solver;
  Json compare{{"linearized_from_dd", s.compare.linearized_from_dd}, {"positivity", s.compare.positivity}};
  if (s.compare.dd_pulse_width) compare["dd"] = {{"pulse_width", *s.compare.dd_pulse_width}};
  out["compare"] = compare;
  if (s.robustness) {
    Json r{{"sigma_rel", s.robustness->sigma_rel}, {"seeds", s.robustness->seeds}};
    if (s.robustness->energy) r["energy"] = *s.robustness->energy;
    out["robustness"] = r;
  }
  if (s.mc)
    out["mc"] = {{"count", s.mc->count}, {"seed", s.mc->seed}, {"samples", s.mc->samples}, {"sweep_seeds", s.mc->sweep_seeds}};
  const FrequencyGrid fg = s.frequency_grid();
  out["frequency_grid"] = {{"omega_max", fg.omega_max()}, {"spacing", fg.step()}};
  out["alpha"] = s.alpha;
  return out;
}

}  // namespace

FrequencyGrid Scenario::frequency_grid() const {
  double spacing = omega_spacing.value_or(kPi / (4.0 * duration));
  const auto cut = spectrum.cutoffs();
  if (!omega_spacing && cut) spacing = cut->first / std::ceil(cut->first / spacing - 1e-9);
  double range = 0.0;
  if (omega_max) {
    range = *omega_max;
  } else {
    const auto [lo, hi] = spectrum.support();
    if (std::isfinite(lo) && std::isfinite(hi)) {
      range = std::max(std::abs(lo), std::abs(hi));
    } else {
      double center = 0.0;
      double tc = std::numeric_limits<double>::infinity();
      if (spectrum.kind() == DephasingSpectrum::Kind::Lorentzian) {
        const auto& p = std::get<SpectralPeak>(spectrum.descriptor());
        center = std::abs(p.center);
        tc = p.correlation_time;
      } else if (spectrum.kind() == DephasingSpectrum::Kind::MultiPeak) {
        for (const auto& p : std::get<std::vector<SpectralPeak>>(spectrum.descriptor())) {
          center = std::max(center, std::abs(p.center));
          tc = std::min(tc, p.correlation_time);
        }
      } else {
        tc = 1.0;
      }
      range = center + 200.0 / tc;
    }
  }
  return FrequencyGrid::with_spacing(spacing, range);
}

Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
  io::require_keys(j,
                   {"version", "name", "spectrum", "duration", "samples", "energies", "dd_pulse_counts", "solver",
                    "compare", "robustness", "mc", "frequency_grid", "alpha"},
                   "scenario");
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
    throw Error(ErrorKind::Config, "scenario needs \"version\": 1");
  if (!j.contains("spectrum")) throw Error(ErrorKind::Config, "scenario needs a spectrum");

  try {
    Scenario s{.name = j.value("name", std::string("scenario")),
               .spectrum = io::spectrum_from(j.at("spectrum")),
               .duration = io::number(j, "duration", "scenario"),
               .samples = integer(j, "samples", "scenario")};
    if (!(s.duration > 0.0)) throw Error(ErrorKind::Config, "duration must be positive");
    if (s.samples < TimeGrid::kMinSamples) throw Error(ErrorKind::Config, "samples must be >= 16");

    if (j.contains("compare")) {
      const Json& c = j.at("compare");
      io::require_keys(c, {"dd", "linearized_from_dd", "positivity"}, "compare");
      if (c.contains("dd")) {
        io::require_keys(c.at("dd"), {"pulse_width"}, "compare.dd");
        s.compare.dd_pulse_width = io::number(c.at("dd"), "pulse_width", "compare.dd");
        if (!(*s.compare.dd_pulse_width > 0.0)) throw Error(ErrorKind::Config, "DD pulse width must be positive");
      }
      s.compare.linearized_from_dd = c.value("linearized_from_dd", false);
      s.compare.positivity = c.value("positivity", false);
      if (s.compare.linearized_from_dd && !s.compare.dd_pulse_width)
        throw Error(ErrorKind::Config, "linearized_from_dd needs compare.dd");
    }

    if (j.contains("energies") == j.contains("dd_pulse_counts"))
      throw Error(ErrorKind::Config, "give exactly one of 'energies' or 'dd_pulse_counts'");
    if (j.contains("energies")) {
      if (!j.at("energies").is_array()) throw Error(ErrorKind::Config, "energies must be an array");
      for (const auto& e : j.at("energies")) {
        if (!e.is_number()) throw Error(ErrorKind::Config, "energies must be numbers");
        s.energies.push_back(e.get<double>());
      }
    } else {
      if (!s.compare.dd_pulse_width) throw Error(ErrorKind::Config, "dd_pulse_counts needs compare.dd");
      for (const auto& n : j.at("dd_pulse_counts")) {
        if (!n.is_number_integer() || n.get<int>() < 1) throw Error(ErrorKind::Config, "pulse counts must be integers >= 1");
        s.energies.push_back(n.get<int>() * kPi * kPi / *s.compare.dd_pulse_width);
      }
    }
    if (s.energies.empty()) throw Error(ErrorKind::Config, "energy list is empty");
    for (std::size_t k = 0; k < s.energies.size(); ++k) {
      if (!(s.energies[k] > 0.0)) throw Error(ErrorKind::Config, "energies must be positive");
      if (k > 0 && !(s.energies[k] > s.energies[k - 1]))
        throw Error(ErrorKind::Config, "energies must be strictly increasing");
    }

    if (j.contains("solver")) {
      const Json& c = j.at("solver");
      io::require_keys(c, {"damping", "tol_phase", "max_iter", "anderson_depth", "denom_floor", "residual_tol", "initial_guesses"},
                       "solver");
      if (c.contains("damping")) s.solver.damping = io::number(c, "damping", "solver");
      if (c.contains("tol_phase")) s.solver.tol_phase = io::number(c, "tol_phase", "solver");
      if (c.contains("max_iter")) s.solver.max_iter = integer(c, "max_iter", "solver");
      if (c.contains("anderson_depth")) s.solver.anderson_depth = integer(c, "anderson_depth", "solver");
      if (c.contains("denom_floor")) s.solver.denom_floor = io::number(c, "denom_floor", "solver");
      if (c.contains("residual_tol")) s.solver.residual_tol = io::number(c, "residual_tol", "solver");
      if (c.contains("initial_guesses")) {
        if (!c.at("initial_guesses").is_array()) throw Error(ErrorKind::Config, "initial_guesses must be an array");
        for (const auto& g : c.at("initial_guesses")) s.guesses.push_back(guess_from(g));
      }
      if (!(s.solver.damping > 0.0) || s.solver.damping > 1.0) throw Error(ErrorKind::Config, "damping must lie in (0, 1]");
      if (!(s.solver.tol_phase > 0.0)) throw Error(ErrorKind::Config, "tol_phase must be positive");
      if (s.solver.max_iter < 1) throw Error(ErrorKind::Config, "max_iter must be >= 1");
      if (s.solver.anderson_depth < 0) throw Error(ErrorKind::Config, "anderson_depth must be >= 0");
      if (s.solver.denom_floor && !(*s.solver.denom_floor > 0.0)) throw Error(ErrorKind::Config, "denom_floor must be positive");
    }
    if (s.guesses.empty()) s.guesses.push_back(InitialGuess::chirp());

    if (j.contains("robustness")) {
      const Json& c = j.at("robustness");
      io::require_keys(c, {"sigma_rel", "seeds", "n_seeds", "seed", "energy"}, "robustness");
      RobustnessConfig r;
      if (c.contains("sigma_rel")) r.sigma_rel = io::number(c, "sigma_rel", "robustness");
      if (!(r.sigma_rel >= 0.0)) throw Error(ErrorKind::Config, "sigma_rel must be >= 0");
      if (c.contains("seeds")) {
        for (const auto& v : c.at("seeds")) r.seeds.push_back(seed_value(v, "robustness seed"));
      } else {
        const int n = c.contains("n_seeds") ? integer(c, "n_seeds", "robustness") : 32;
        const std::uint64_t base = c.contains("seed") ? seed_value(c.at("seed"), "robustness seed") : 1;
        for (int k = 0; k < n; ++k) r.seeds.push_back(base + static_cast<std::uint64_t>(k));
      }
      if (c.contains("energy")) r.energy = io::number(c, "energy", "robustness");
      s.robustness = r;
    }
    if (j.contains("mc")) {
      const Json& c = j.at("mc");
      io::require_keys(c, {"count", "seed", "samples", "sweep_seeds"}, "mc");
      MonteCarloConfig m;
      if (c.contains("count")) m.count = integer(c, "count", "mc");
      if (c.contains("seed")) m.seed = seed_value(c.at("seed"), "mc seed");
      if (c.contains("samples")) m.samples = integer(c, "samples", "mc");
      if (c.contains("sweep_seeds")) m.sweep_seeds = integer(c, "sweep_seeds", "mc");
      if (m.count < 1 || m.samples < TimeGrid::kMinSamples) throw Error(ErrorKind::Config, "mc count >= 1 and samples >= 16");
      s.mc = m;
    }
    if (j.contains("frequency_grid")) {
      const Json& c = j.at("frequency_grid");
      io::require_keys(c, {"omega_max", "spacing"}, "frequency_grid");
      if (c.contains("omega_max")) s.omega_max = io::number(c, "omega_max", "frequency_grid");
      if (c.contains("spacing")) s.omega_spacing = io::number(c, "spacing", "frequency_grid");
    }
    if (j.contains("alpha")) s.alpha = io::number(j, "alpha", "scenario");
    if (!(s.alpha > 0.0) || s.alpha > 1.0) throw Error(ErrorKind::Config, "alpha must lie in (0, 1]");

    s.resolved = resolved_json(s).dump(2);
    return s;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Scenario with_seed(Scenario s, std::uint64_t seed) {
  if (s.robustness) {
    for (std::size_t k = 0; k < s.robustness->seeds.size(); ++k) s.robustness->seeds[k] = seed + k;
  }
  if (s.mc) s.mc->seed = seed;
  s.resolved = resolved_json(s).dump(2);
  return s;
}

bool SweepReport::all_failed() const {
  return std::none_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.ok; });
}

SweepPoint run_point(const Scenario& s, const LagKernel& kernel, double energy_requested, double unmodulated_rate) {
  const TimeGrid grid = kernel.grid();
  const FrequencyGrid omegas = s.frequency_grid();
  SweepPoint p;
  p.energy_requested = energy_requested;
  p.energy_realized = energy_requested;
  auto intensity = [&](const ControlField& f) {
    return spectral_intensity(finite_time_ft(epsilon(f), grid, omegas), grid.duration());
  };

  if (s.compare.dd_pulse_width) {
    try {
      p.dd = dd_sequence(energy_requested, grid, *s.compare.dd_pulse_width);
      p.energy_realized = p.dd->params.realized_energy;
      p.dd_rate = evaluate_rate(kernel, s.spectrum, p.dd->field, omegas, s.alpha, unmodulated_rate);
      p.overlay_dd = intensity(p.dd->field);
    } catch (const Error& e) {
      p.dd_error = e.what();
      p.dd.reset();
    }
  }

  std::string last_error;
  for (const auto& guess : s.guesses) {
    SolverConfig cfg = s.solver;
    cfg.initial_guess = guess;
    try {
      ELSolution sol = solve_optimal(kernel, p.energy_realized, cfg);
      const bool better = !p.optimal || (sol.converged && !p.optimal->converged) ||
                          (sol.converged == p.optimal->converged && sol.rate < p.optimal->rate);
      if (better) p.optimal = std::move(sol);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (p.optimal) {
    p.optimal_rate = evaluate_rate(kernel, s.spectrum, p.optimal->field, omegas, s.alpha, unmodulated_rate);
    p.overlay_opt = intensity(p.optimal->field);
    p.ok = true;
  } else {
    p.error = last_error.empty() ? "no initial guess produced a solution" : last_error;
  }

  if (s.compare.linearized_from_dd && p.dd) {
    try {
      LinearizedResult lin = solve_with_energy(kernel, p.dd->field, p.energy_realized);
      p.lambda_scan = lin.scan;
      p.refined_lambda = lin.deviation.lambda;
      ControlField refined = s.compare.positivity ? apply_positivity(lin.field, p.energy_realized) : lin.field;
      p.refined_rate = evaluate_rate(kernel, s.spectrum, refined, omegas, s.alpha, unmodulated_rate);
      p.refined = std::move(refined);
    } catch (const BracketFailure& e) {
      p.refined_error = e.what();
      p.lambda_scan = e.scan();
    } catch (const Error& e) {
      p.refined_error = e.what();
    }
  }
  p.overlay_g = s.spectrum.sample(omegas);
  return p;
}

SweepReport run_scenario(const Scenario& s, int threads) {
  const TimeGrid grid = s.grid();
  const LagKernel kernel(s.correlation(), grid);
  const FrequencyGrid omegas = s.frequency_grid();
  SweepReport report;
  report.omegas = omegas.omegas();
  report.unmodulated = evaluate_rate(kernel, s.spectrum, ControlField::zero(grid), omegas, s.alpha);
  const double base = report.unmodulated.rate_time;
  report.unmodulated.normalized = 1.0;
  report.points.resize(s.energies.size());
  parallel_for(s.energies.size(), threads, [&](std::size_t k) {
    try {
      report.points[k] = run_point(s, kernel, s.energies[k], base);
    } catch (const Error& e) {
      report.points[k].energy_requested = s.energies[k];
      report.points[k].energy_realized = s.energies[k];
      report.points[k].error = e.what();
    }
  });
  return report;
}

RobustnessTable robustness_study(const LagKernel& kernel, const ControlField& field, double sigma_rel,
                                 const std::vector<std::uint64_t>& seeds, int threads) {
  RobustnessTable t;
  t.base_rate = kernel.rate(field.phase());
  t.rows.resize(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t k) {
    const double r = kernel.rate(perturb(field, sigma_rel, seeds[k]).phase());
    t.rows[k] = {seeds[k], r, (r - t.base_rate) / t.base_rate};
  });
  std::vector<double> inc;
  for (const auto& row : t.rows) inc.push_back(row.relative_increase);
  t.median = 0.0;
  t.max = 0.0;
  if (!inc.empty()) {
    std::sort(inc.begin(), inc.end());
    const std::size_t m = inc.size();
    t.median = m % 2 ? inc[m / 2] : 0.5 * (inc[m / 2 - 1] + inc[m / 2]);
    t.max = inc.back();
  }
  return t;
}

McValidation validate_mc(const Scenario& s, int threads) {
  const MonteCarloConfig cfg = s.mc.value_or(MonteCarloConfig{});
  const TimeGrid grid(s.duration, cfg.samples);
  const CorrelationFunction c = companion_correlation(s.spectrum, grid);
  const LagKernel kernel(c, grid);
  const CovarianceFactor factor = factor_covariance(c, grid);
  const NoiseBatch batch = sample_noise(factor, grid, cfg.count, cfg.seed);
  const double energy_target = s.robustness && s.robustness->energy ? *s.robustness->energy : s.energies.front();

  std::vector<std::pair<std::string, ControlField>> fields;
  fields.emplace_back("zero", ControlField::zero(grid));
  std::optional<ControlField> dd;
  double energy = energy_target;
  if (s.compare.dd_pulse_width) {
    const DDSequence seq = dd_sequence(energy_target, grid, *s.compare.dd_pulse_width);
    energy = seq.params.realized_energy;
    dd = seq.field;
    fields.emplace_back("dd", seq.field);
  }
  SolverConfig solver = s.solver;
  solver.initial_guess = s.guesses.front();
  fields.emplace_back("optimal", solve_optimal(kernel, energy, solver).field);

  McValidation out;
  out.real_part_only = batch.real_part_only;
  for (const auto& [name, f] : fields) {
    const double analytic = kernel.rate(f.phase());
    const MonteCarloRate mc = mc_rate(batch, f);
    const double z = mc.standard_error > 0.0 ? (mc.rate - analytic) / mc.standard_error : 0.0;
    out.checks.push_back({name, analytic, mc.rate, mc.standard_error, z});
  }
  if (cfg.sweep_seeds > 0) {
    const ControlField& pair_field = dd ? *dd : fields.back().second;
    const double analytic = kernel.rate(pair_field.phase());
    out.sweep_z.resize(static_cast<std::size_t>(cfg.sweep_seeds));
    parallel_for(out.sweep_z.size(), threads, [&](std::size_t k) {
      const std::uint64_t seed = mix64(cfg.seed + 1 + k);
      const MonteCarloRate mc = mc_rate(sample_noise(factor, grid, cfg.count, seed), pair_field);
      out.sweep_z[k] = (mc.rate - analytic) / mc.standard_error;
    });
    const auto within = std::count_if(out.sweep_z.begin(), out.sweep_z.end(), [](double z) { return std::abs(z) <= 3.0; });
    out.sweep_within_3 = static_cast<double>(within) / static_cast<double>(out.sweep_z.size());
  } else {
    out.sweep_within_3 = 1.0;
  }
  return out;
}

std::string sweep_report_json(const Scenario& s, const SweepReport& r) {
  Json out;
  out["config"] = Json::parse(s.resolved);
  out["unmodulated"] = io::to_json(r.unmodulated);
  Json points = Json::array();
  for (const auto& p : r.points) {
    Json j{{"E_requested", p.energy_requested}, {"E_realized", p.energy_realized}, {"ok", p.ok}};
    if (!p.error.empty()) j["error"] = p.error;
    if (p.optimal) j["optimal"] = {{"solution", io::to_json(*p.optimal)}, {"rate", io::to_json(*p.optimal_rate)}};
    if (p.dd) j["dd"] = {{"params", io::to_json(p.dd->params)}, {"rate", io::to_json(*p.dd_rate)}};
    if (!p.dd_error.empty()) j["dd_error"] = p.dd_error;
    if (p.refined) j["dd_refined"] = {{"lambda", *p.refined_lambda}, {"positivity", s.compare.positivity}, {"rate", io::to_json(*p.refined_rate)}};
    if (!p.refined_error.empty()) j["dd_refined_error"] = p.refined_error;
    points.push_back(j);
  }
  out["points"] = points;
  return out.dump(2);
}

}  // namespace dcm
