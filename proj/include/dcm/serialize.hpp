#pragma once

#include "dcm/control.hpp"
#include "dcm/el_solver.hpp"
#include "dcm/linearized.hpp"
#include "dcm/rate.hpp"
#include "dcm/spectra.hpp"

#include <string>
#include <vector>

namespace dcm {

/// {"kind": ..., "params": {...}} for analytic kinds, {"kind": "tabulated",
/// "grid": [...], "values": [...]} for tables.
std::string spectrum_to_json(const DephasingSpectrum& s);
DephasingSpectrum spectrum_from_json(const std::string& text);

std::string correlation_to_json(const CorrelationFunction& c);
CorrelationFunction correlation_from_json(const std::string& text);

std::string rate_report_to_json(const RateReport& r);
std::string el_solution_to_json(const ELSolution& s);
std::string dd_params_to_json(const DDParams& p);

/// Shortest round-tripping decimal form.
std::string format_double(double v);

/// Header line plus one row per sample; all columns must have equal length.
void write_csv(const std::string& path, const std::vector<std::string>& header, const std::vector<Vector>& columns);

/// t,omega,phi
void write_field_csv(const std::string& path, const ControlField& field);
ControlField read_field_csv(const std::string& path);

/// lambda,energy,max_nu
void write_lambda_scan_csv(const std::string& path, const std::vector<LambdaSample>& scan);

}  // namespace dcm
