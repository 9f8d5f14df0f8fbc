#pragma once

#include "dcm/control.hpp"
#include "dcm/el_solver.hpp"
#include "dcm/rate.hpp"
#include "dcm/spectra.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace dcm::io {

using Json = nlohmann::ordered_json;

Json to_json(const DephasingSpectrum& s);
DephasingSpectrum spectrum_from(const Json& j);
Json to_json(const CorrelationFunction& c);
CorrelationFunction correlation_from(const Json& j);
Json to_json(const RateReport& r);
Json to_json(const ELSolution& s);
Json to_json(const DDParams& p);
Json to_json(const Vector& v);

/// Throws Config on keys outside `allowed`.
void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);
double number(const Json& j, const char* key, const std::string& where);

}  // namespace dcm::io
