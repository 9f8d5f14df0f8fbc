#include "dcm/error.hpp"
#include "dcm/plots.hpp"
#include "dcm/scenario.hpp"
#include "dcm/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace dcm;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kConfigError = 2;
constexpr int kAllFailed = 3;
constexpr int kIoError = 4;

struct Options {
  std::string config;
  std::string out = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

std::string energy_tag(double e) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", e);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

Scenario prepare(const Options& o) {
  Scenario s = load_scenario(o.config);
  if (o.seed) s = with_seed(std::move(s), *o.seed);
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + o.out + ": " + ec.message());
  return s;
}

void write_point_files(const fs::path& dir, const SweepReport& r, const SweepPoint& p) {
  const std::string tag = energy_tag(p.energy_realized);
  if (p.optimal) write_field_csv((dir / ("field_E" + tag + ".csv")).string(), p.optimal->field);
  if (p.dd) write_field_csv((dir / ("field_E" + tag + "_dd.csv")).string(), p.dd->field);
  if (p.refined) write_field_csv((dir / ("field_E" + tag + "_dd_refined.csv")).string(), *p.refined);
  if (!p.lambda_scan.empty()) write_lambda_scan_csv((dir / ("lambda_scan_E" + tag + ".csv")).string(), p.lambda_scan);

  const Index m = r.omegas.size();
  const Vector nan = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
  const Vector& f_opt = p.overlay_opt.size() == m ? p.overlay_opt : nan;
  const Vector& f_dd = p.overlay_dd.size() == m ? p.overlay_dd : nan;
  write_csv((dir / ("overlay_E" + tag + ".csv")).string(), {"omega", "G", "F_opt", "F_dd"},
            {r.omegas, p.overlay_g.size() == m ? p.overlay_g : nan, f_opt, f_dd});

  std::vector<Series> series{{"G", r.omegas, p.overlay_g, false}};
  if (p.overlay_opt.size() == m) series.push_back({"F_T opt", r.omegas, p.overlay_opt, false});
  if (p.overlay_dd.size() == m) series.push_back({"F_T DD", r.omegas, p.overlay_dd, false});
  write_svg((dir / ("overlay_E" + tag + ".svg")).string(),
            svg_chart("Spectrum and modulation intensity, E = " + tag, "omega", "G, F_T", series));
}

void write_sweep(const fs::path& dir, const Scenario& s, const SweepReport& r) {
  write_text(dir / "report.json", sweep_report_json(s, r));
  const auto n = static_cast<Index>(r.points.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Vector e_req(n), e_real(n), r_opt(n), r_dd(n), r_ref(n), r_unmod(n), n_opt(n), n_dd(n), conv(n), res(n), n_ref(n);
  for (Index k = 0; k < n; ++k) {
    const auto& p = r.points[static_cast<std::size_t>(k)];
    e_req(k) = p.energy_requested;
    e_real(k) = p.energy_realized;
    r_opt(k) = p.optimal_rate ? p.optimal_rate->rate_time : nan;
    r_dd(k) = p.dd_rate ? p.dd_rate->rate_time : nan;
    r_ref(k) = p.refined_rate ? p.refined_rate->rate_time : nan;
    r_unmod(k) = r.unmodulated.rate_time;
    n_opt(k) = p.optimal_rate ? *p.optimal_rate->normalized : nan;
    n_dd(k) = p.dd_rate ? *p.dd_rate->normalized : nan;
    n_ref(k) = p.refined_rate ? *p.refined_rate->normalized : nan;
    conv(k) = p.optimal && p.optimal->converged ? 1.0 : 0.0;
    res(k) = p.optimal ? p.optimal->residual : nan;
  }
  write_csv((dir / "sweep.csv").string(),
            {"E_requested", "E_realized", "R_opt", "R_dd", "R_dd_refined", "R_unmod", "normalized_opt", "normalized_dd",
             "converged", "residual"},
            {e_req, e_real, r_opt, r_dd, r_ref, r_unmod, n_opt, n_dd, conv, res});
  std::vector<Series> curves{{"optimal", e_real, n_opt, true}};
  if (s.compare.dd_pulse_width) curves.push_back({"DD", e_real, n_dd, true});
  if (s.compare.linearized_from_dd) curves.push_back({"DD refined", e_real, n_ref, true});
  write_svg((dir / "rate_vs_energy.svg").string(),
            svg_chart(s.name + ": normalized rate vs energy", "realized energy E", "R / R_unmodulated", curves));
  for (const auto& p : r.points) write_point_files(dir, r, p);
}

int cmd_sweep(const Options& o, bool single) {
  Scenario s = prepare(o);
  if (single) s.energies.resize(1);
  const SweepReport r = run_scenario(s, o.threads);
  write_sweep(o.out, s, r);
  for (const auto& p : r.points) {
    std::cout << "E=" << format_double(p.energy_realized);
    if (p.optimal_rate) std::cout << " R_opt/R0=" << format_double(*p.optimal_rate->normalized);
    if (p.dd_rate) std::cout << " R_dd/R0=" << format_double(*p.dd_rate->normalized);
    if (!p.error.empty()) std::cout << " error: " << p.error;
    std::cout << '\n';
  }
  return r.all_failed() ? kAllFailed : 0;
}

int cmd_spectra(const Options& o) {
  const Scenario s = prepare(o);
  const SweepReport r = run_scenario(s, o.threads);
  const fs::path dir(o.out);
  write_text(dir / "report.json", sweep_report_json(s, r));
  write_csv((dir / "spectrum.csv").string(), {"omega", "G"}, {r.omegas, s.spectrum.sample(s.frequency_grid())});
  const TimeGrid grid = s.grid();
  const ComplexVector phi = s.correlation().lag_samples(grid.step(), grid.size());
  write_csv((dir / "correlation.csv").string(), {"t", "re", "im"}, {grid.times(), Vector(phi.real()), Vector(phi.imag())});
  for (const auto& p : r.points) write_point_files(dir, r, p);
  return r.all_failed() ? kAllFailed : 0;
}

int cmd_robustness(const Options& o) {
  const Scenario s = prepare(o);
  if (!s.robustness) throw Error(ErrorKind::Config, "robustness verb needs a 'robustness' section");
  const double energy = s.robustness->energy.value_or(s.energies.front());
  const TimeGrid grid = s.grid();
  const LagKernel kernel(s.correlation(), grid);
  std::optional<ELSolution> best;
  for (const auto& g : s.guesses) {
    SolverConfig cfg = s.solver;
    cfg.initial_guess = g;
    try {
      ELSolution sol = solve_optimal(kernel, energy, cfg);
      if (!best || sol.rate < best->rate) best = std::move(sol);
    } catch (const Error& e) {
      std::cerr << "guess failed: " << e.what() << '\n';
    }
  }
  if (!best) return kAllFailed;
  const RobustnessTable t = robustness_study(kernel, best->field, s.robustness->sigma_rel, s.robustness->seeds, o.threads);
  const fs::path dir(o.out);
  const auto n = static_cast<Index>(t.rows.size());
  Vector seed(n), rate(n), inc(n);
  for (Index k = 0; k < n; ++k) {
    seed(k) = static_cast<double>(t.rows[static_cast<std::size_t>(k)].seed);
    rate(k) = t.rows[static_cast<std::size_t>(k)].rate;
    inc(k) = t.rows[static_cast<std::size_t>(k)].relative_increase;
  }
  write_csv((dir / "robustness.csv").string(), {"seed", "R", "relative_increase"}, {seed, rate, inc});
  write_field_csv((dir / ("field_E" + energy_tag(energy) + ".csv")).string(), best->field);
  Json report{{"config", Json::parse(s.resolved)},
              {"energy", energy},
              {"solution", Json::parse(el_solution_to_json(*best))},
              {"sigma_rel", s.robustness->sigma_rel},
              {"base_rate", t.base_rate},
              {"median_relative_increase", t.median},
              {"max_relative_increase", t.max}};
  write_text(dir / "report.json", report.dump(2));
  std::cout << "median relative increase " << format_double(t.median) << ", max " << format_double(t.max) << '\n';
  return 0;
}

int cmd_validate_mc(const Options& o) {
  const Scenario s = prepare(o);
  const McValidation v = validate_mc(s, o.threads);
  const fs::path dir(o.out);
  Json checks = Json::array();
  for (const auto& c : v.checks) {
    checks.push_back({{"field", c.field}, {"R_time", c.analytic}, {"R_mc", c.estimate}, {"stderr", c.standard_error},
                      {"z", c.z_score}, {"K", s.mc.value_or(MonteCarloConfig{}).count}});
    std::cout << c.field << ": R_time=" << format_double(c.analytic) << " R_mc=" << format_double(c.estimate)
              << " z=" << format_double(c.z_score) << '\n';
  }
  Json report{{"config", Json::parse(s.resolved)}, {"checks", checks}, {"real_part_only", v.real_part_only},
              {"sweep_z", v.sweep_z}, {"sweep_within_3", v.sweep_within_3}};
  write_text(dir / "report.json", report.dump(2));
  if (!v.sweep_z.empty()) {
    Vector k(static_cast<Index>(v.sweep_z.size()));
    Vector z(k.size());
    for (Index i = 0; i < k.size(); ++i) {
      k(i) = static_cast<double>(i);
      z(i) = v.sweep_z[static_cast<std::size_t>(i)];
    }
    write_csv((dir / "mc_sweep.csv").string(), {"k", "z"}, {k, z});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-constrained optimal dephasing control: solve, sweep and validate"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario JSON file")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override robustness and Monte-Carlo seeds");
  };
  auto* solve = app.add_subcommand("solve", "optimal field at the first configured energy");
  auto* sweep = app.add_subcommand("sweep", "rate vs energy: optimal, DD and refined DD");
  auto* spectra = app.add_subcommand("spectra", "G and F_T overlay data per energy");
  auto* robust = app.add_subcommand("robustness", "rate increase under random field fluctuations");
  auto* mc = app.add_subcommand("validate-mc", "Monte-Carlo check of the time-domain rate");
  for (auto* sub : {solve, sweep, spectra, robust, mc}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  for (auto* sub : {solve, sweep, spectra, robust, mc})
    if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed;

  try {
    if (solve->parsed()) return cmd_sweep(o, true);
    if (sweep->parsed()) return cmd_sweep(o, false);
    if (spectra->parsed()) return cmd_spectra(o);
    if (robust->parsed()) return cmd_robustness(o);
    if (mc->parsed()) return cmd_validate_mc(o);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    if (e.kind() == ErrorKind::Io) return kIoError;
    if (e.kind() == ErrorKind::Config) return kConfigError;
    return kAllFailed;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
