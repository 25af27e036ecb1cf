#include "circlecs/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace circlecs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

}  // namespace

double parse_real(const std::string& text) {
  std::string s = trim(text);
  const auto at = s.find("pi");
  if (at == std::string::npos) return parse_plain(s);

  std::string factor = trim(s.substr(0, at));
  std::string rest = trim(s.substr(at + 2));
  if (!factor.empty() && factor.back() == '*') factor = trim(factor.substr(0, factor.size() - 1));
  double scale = 1.0;
  if (factor == "-")
    scale = -1.0;
  else if (factor == "+" || factor.empty())
    scale = 1.0;
  else
    scale = parse_plain(factor);
  double divisor = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw std::invalid_argument("not a number: '" + text + "'");
    divisor = parse_plain(trim(rest.substr(1)));
    if (divisor == 0.0) throw std::invalid_argument("division by zero in '" + text + "'");
  }
  return scale * pi / divisor;
}

cplx parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {parse_real(text), 0.0};
  if (text.find(',', comma + 1) != std::string::npos)
    throw std::invalid_argument("complex value needs the form re,im: '" + text + "'");
  return {parse_real(text.substr(0, comma)), parse_real(text.substr(comma + 1))};
}

json complex_to_json(cplx c) { return json::array({c.real(), c.imag()}); }

cplx complex_from_json(const json& j) {
  auto part = [](const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_real(v.get<std::string>());
    throw std::invalid_argument("complex parts must be numbers or strings");
  };
  if (j.is_string()) return parse_complex(j.get<std::string>());
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex value must be [re, im]");
  return {part(j[0]), part(j[1])};
}

json to_json(const Representation& rep) { return {{"delta", rep.delta}, {"s", rep.s}, {"hbar", rep.hbar}}; }

Representation representation_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("representation must be an object");
  Representation rep;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw std::invalid_argument("representation." + key + " must be a number");
    if (key == "delta")
      rep.delta = value.get<double>();
    else if (key == "s")
      rep.s = value.get<double>();
    else if (key == "hbar")
      rep.hbar = value.get<double>();
    else
      throw std::invalid_argument("unknown key representation." + key);
  }
  rep.validate();
  return rep;
}

json to_json(const StateVector& psi) {
  json coeffs = json::array();
  for (const cplx& c : psi.coeffs) coeffs.push_back(complex_to_json(c));
  return {{"n_min", psi.n_min}, {"coeffs", coeffs}};
}

StateVector state_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("state must be an object");
  StateVector psi;
  bool have_coeffs = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_min") {
      if (!value.is_number_integer()) throw std::invalid_argument("state.n_min must be an integer");
      psi.n_min = value.get<long>();
    } else if (key == "coeffs") {
      if (!value.is_array()) throw std::invalid_argument("state.coeffs must be an array");
      for (const auto& c : value) psi.coeffs.push_back(complex_from_json(c));
      have_coeffs = true;
    } else {
      throw std::invalid_argument("unknown key state." + key);
    }
  }
  if (!have_coeffs || psi.coeffs.empty()) throw std::invalid_argument("state.coeffs must be a non-empty array");
  return psi;
}

json to_json(const StripZeros& zeros) {
  json list = json::array();
  for (const cplx& a : zeros.a_list) list.push_back(complex_to_json(a));
  return {{"m", zeros.m},
          {"l", zeros.l ? json(*zeros.l) : json(nullptr)},
          {"C", zeros.C ? complex_to_json(*zeros.C) : json(nullptr)},
          {"zeros", list}};
}

json to_json(const NumericalError& e) {
  return {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}, {"detail", e.detail()}}}};
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string husimi_csv(const std::vector<double>& field, const CylinderGrid& grid) {
  grid.validate();
  if (field.size() != static_cast<std::size_t>(grid.phi_count) * grid.p_count)
    throw std::invalid_argument("husimi_csv: field does not match the grid");
  std::string out = "phi,p,value\n";
  out.reserve(field.size() * 64);
  for (int i = 0; i < grid.phi_count; ++i)
    for (int j = 0; j < grid.p_count; ++j) {
      out += format_double(grid.phi(i));
      out += ',';
      out += format_double(grid.p(j));
      out += ',';
      out += format_double(field[static_cast<std::size_t>(i) * grid.p_count + j]);
      out += '\n';
    }
  return out;
}

std::string propagator_csv(const PropagatorResult& result) {
  std::ostringstream os;
  os << "n,nu,re_contrib,im_contrib,re_S,im_S,prefactor_abs,prefactor_arg\n";
  for (const auto& b : result.branches) {
    const auto& t = b.trajectory;
    os << b.winding_n << ',' << b.nu << ',' << format_double(b.contribution.real()) << ','
       << format_double(b.contribution.imag()) << ',' << format_double(t.S.real()) << ','
       << format_double(t.S.imag()) << ',' << format_double(std::abs(t.prefactor_ratio)) << ','
       << format_double(std::arg(t.prefactor_ratio)) << '\n';
  }
  return os.str();
}

json propagator_summary(const PropagatorResult& result) {
  const auto& r = result.truncation_report;
  json failures = json::array();
  for (const auto& [n, why] : r.failures) failures.push_back({{"n", n}, {"reason", why}});
  int max_steps = 0;
  for (const auto& b : result.branches) max_steps = std::max(max_steps, b.trajectory.steps);
  return {{"value", complex_to_json(result.value)},
          {"truncation_report",
           {{"included", r.included},
            {"first_dropped", r.first_dropped ? json(*r.first_dropped) : json(nullptr)},
            {"dropped_bound", r.dropped_bound},
            {"failures", failures}}},
          {"solver",
           {{"branches", result.branches.size()},
            {"newton_iterations", result.newton_iterations},
            {"max_steps", max_steps}}}};
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into '" + path + "'");
  }
}

}  // namespace circlecs
