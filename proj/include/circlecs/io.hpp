#pragma once

// Serialization of states, representations, zero sets, Husimi fields and
// propagator tables. Floats in CSV carry 17 significant digits; JSON uses the
// shortest representation that reads back to the same double.

#include <json.hpp>
#include <string>

#include "circlecs/errors.hpp"
#include "circlecs/husimi.hpp"
#include "circlecs/semiclassics.hpp"

namespace circlecs {

using json = nlohmann::json;

/// "1.5", "pi", "-pi", "0.5pi", "0.5*pi", "pi/2".
double parse_real(const std::string& text);
/// "re,im" with each part as in parse_real.
cplx parse_complex(const std::string& text);

/// [re, im]; numbers or parse_real strings are accepted on input.
json complex_to_json(cplx c);
cplx complex_from_json(const json& j);

json to_json(const Representation& rep);
Representation representation_from_json(const json& j);

json to_json(const StateVector& psi);
StateVector state_from_json(const json& j);

/// {"m", "l" (or null), "C" (or null), "zeros"}.
json to_json(const StripZeros& zeros);

json to_json(const NumericalError& e);

/// Header phi,p,value; rows follow the field layout (phi-major).
std::string husimi_csv(const std::vector<double>& field, const CylinderGrid& grid);

/// Header n,nu,re_contrib,im_contrib,re_S,im_S,prefactor_abs,prefactor_arg,
/// the prefactor being sqrt(dv(0)/dv(tau)) on the tracked branch.
std::string propagator_csv(const PropagatorResult& result);

/// Value, truncation report and solver statistics.
json propagator_summary(const PropagatorResult& result);

std::string format_double(double x);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace circlecs
