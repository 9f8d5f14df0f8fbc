#pragma once

#include "dcm/control.hpp"
#include "dcm/el_solver.hpp"
#include "dcm/kernel.hpp"
#include "dcm/linearized.hpp"
#include "dcm/rate.hpp"
#include "dcm/spectra.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcm {

struct CompareConfig {
  std::optional<double> dd_pulse_width;
  bool linearized_from_dd = false;
  bool positivity = false;
};

struct RobustnessConfig {
  double sigma_rel = 0.1;
  std::vector<std::uint64_t> seeds;
  /// Energy of the solved field; defaults to the first sweep energy.
  std::optional<double> energy;
};

struct MonteCarloConfig {
  Index count = 10000;
  std::uint64_t seed = 1;
  Index samples = 256;
  /// Seeds of the standardized-error sweep (empty: none).
  Index sweep_seeds = 0;
};

struct Scenario {
  std::string name;
  DephasingSpectrum spectrum;
  double duration;
  Index samples;
  /// Requested energies, strictly increasing.
  std::vector<double> energies{};
  SolverConfig solver{};
  /// Each guess is solved and the lowest-rate converged result is kept.
  std::vector<InitialGuess> guesses{};
  CompareConfig compare{};
  std::optional<RobustnessConfig> robustness{};
  std::optional<MonteCarloConfig> mc{};
  std::optional<double> omega_max{};
  std::optional<double> omega_spacing{};
  double alpha = 1.0;
  /// Canonical JSON of the resolved configuration.
  std::string resolved{};

  TimeGrid grid() const { return {duration, samples}; }
  /// Spacing <= pi/(4T) (cutoffs on grid nodes where possible), range covering G.
  FrequencyGrid frequency_grid() const;
  CorrelationFunction correlation() const { return companion_correlation(spectrum, grid()); }
};

/// Strict parser: unknown keys, a missing version or an invalid sub-config throw Config.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// Re-seeds robustness (seed, seed+1, ...) and Monte-Carlo runs; the resolved
/// configuration is updated.
Scenario with_seed(Scenario s, std::uint64_t seed);

struct SweepPoint {
  double energy_requested = 0.0;
  double energy_realized = 0.0;
  bool ok = false;
  std::string error;

  std::optional<ELSolution> optimal;
  std::optional<RateReport> optimal_rate;
  std::optional<DDSequence> dd;
  std::optional<RateReport> dd_rate;
  std::string dd_error;
  std::optional<ControlField> refined;
  std::optional<RateReport> refined_rate;
  std::optional<double> refined_lambda;
  std::string refined_error;
  std::vector<LambdaSample> lambda_scan;

  /// Overlay on the scenario frequency grid: G, F_opt, F_dd (empty if absent).
  Vector overlay_g;
  Vector overlay_opt;
  Vector overlay_dd;
};

struct SweepReport {
  RateReport unmodulated;
  std::vector<SweepPoint> points;
  Vector omegas;

  bool all_failed() const;
};

/// Per energy: optimal solve, energy-matched DD, optional linearized refinement
/// from DD (with optional positivity), rates on both routes and overlays.
/// Points run on `threads` workers; failures are recorded per point.
SweepReport run_scenario(const Scenario& s, int threads = 1);

/// One energy through the same pipeline.
SweepPoint run_point(const Scenario& s, const LagKernel& kernel, double energy, double unmodulated_rate);

struct RobustnessRow {
  std::uint64_t seed;
  double rate;
  double relative_increase;
};

struct RobustnessTable {
  double base_rate;
  std::vector<RobustnessRow> rows;
  double median;
  double max;
};

/// Relative increase of R under perturb(field, sigma_rel, seed), against the
/// unperturbed R.
RobustnessTable robustness_study(const LagKernel& kernel, const ControlField& field, double sigma_rel,
                                 const std::vector<std::uint64_t>& seeds, int threads = 1);

struct McCheck {
  std::string field;
  double analytic;
  double estimate;
  double standard_error;
  double z_score;
};

struct McValidation {
  std::vector<McCheck> checks;
  /// Standardized errors of the seed sweep on the DD field.
  std::vector<double> sweep_z;
  double sweep_within_3;
  bool real_part_only;
};

/// Zero, DD and optimal fields on the mc grid: MC estimate vs the time route.
McValidation validate_mc(const Scenario& s, int threads = 1);

/// report.json text for a sweep.
std::string sweep_report_json(const Scenario& s, const SweepReport& r);

}  // namespace dcm
