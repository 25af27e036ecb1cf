#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "circlecs/io.hpp"
#include "doctest.h"

using namespace circlecs;

TEST_CASE("real and complex parsing with the pi token") {
  CHECK(parse_real("1.5") == 1.5);
  CHECK(parse_real("pi") == pi);
  CHECK(parse_real("-pi") == -pi);
  CHECK(parse_real("0.5pi") == 0.5 * pi);
  CHECK(parse_real("2*pi") == 2.0 * pi);
  CHECK(parse_real(" pi/2 ") == pi / 2.0);
  CHECK(parse_real("-0.25*pi/2") == -0.25 * pi / 2.0);
  CHECK(parse_complex("pi,0") == cplx(pi, 0.0));
  CHECK(parse_complex("0.3,-1e-2") == cplx(0.3, -0.01));
  CHECK(parse_complex("2") == cplx(2.0, 0.0));
  for (const char* bad : {"", "abc", "1.5x", "pi*2", "1,2,3", "pi/0", "2pipi"})
    CHECK_THROWS_AS(parse_complex(bad), std::invalid_argument);
}

TEST_CASE("json round trips are exact") {
  const cplx c(0.1 + 0.2, -1.0 / 3.0);
  CHECK(complex_from_json(json::parse(complex_to_json(c).dump())) == c);
  CHECK(complex_from_json(json("0.5pi,1")) == cplx(0.5 * pi, 1.0));
  CHECK(complex_from_json(json::array({"pi", 2})) == cplx(pi, 2.0));

  const Representation rep{0.3, std::sqrt(2.0), 0.7};
  const Representation back = representation_from_json(json::parse(to_json(rep).dump()));
  CHECK(back.delta == rep.delta);
  CHECK(back.s == rep.s);
  CHECK(back.hbar == rep.hbar);
  CHECK_THROWS_AS(representation_from_json({{"s", 1.0}, {"sigma", 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(representation_from_json({{"s", -1.0}}), std::invalid_argument);

  const StateVector psi{-2, {cplx(1.0 / 7.0, 0.0), cplx(0.0, -1e-300), cplx(3.0, 4.0)}};
  const StateVector q = state_from_json(json::parse(to_json(psi).dump()));
  CHECK(q.n_min == psi.n_min);
  CHECK(q.coeffs == psi.coeffs);
  CHECK_THROWS_AS(state_from_json({{"n_min", 0}}), std::invalid_argument);
  CHECK_THROWS_AS(state_from_json({{"n_min", 0.5}, {"coeffs", {{1, 0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(state_from_json({{"coeffs", {{1, 0}}}, {"x", 1}}), std::invalid_argument);
}

TEST_CASE("zero set and error serialization") {
  StripZeros z;
  z.a_list = {cplx(pi, 0.125)};
  z.nu_list = {1};
  const json j = to_json(z);
  CHECK(j["m"] == 0);
  CHECK(j["l"].is_null());
  CHECK(j["C"].is_null());
  CHECK(complex_from_json(j["zeros"][0]) == cplx(pi, 0.125));
  z.l = -1;
  z.C = cplx(0.5, 0.0);
  CHECK(to_json(z)["l"] == -1);

  const json e = to_json(NumericalError(ErrorKind::riccati_blowup, "caustic", 0.25));
  CHECK(e["error"]["kind"] == "riccati_blowup");
  CHECK(e["error"]["detail"] == 0.25);
}

TEST_CASE("csv formats") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

  const CylinderGrid grid{2, -1.0, 1.0, 3};
  const std::vector<double> field{1, 2, 3, 4, 5, 6};
  std::istringstream in(husimi_csv(field, grid));
  std::string line;
  std::getline(in, line);
  CHECK(line == "phi,p,value");
  int rows = 0;
  double phi = 0, p = 0, v = 0;
  char c1, c2;
  while (in >> phi >> c1 >> p >> c2 >> v) {
    CHECK(phi == grid.phi(rows / 3));
    CHECK(p == grid.p(rows % 3));
    CHECK(v == field[rows]);
    ++rows;
  }
  CHECK(rows == 6);
  CHECK_THROWS_AS(husimi_csv({1.0}, grid), std::invalid_argument);

  PropagatorResult r;
  r.value = cplx(1.0, 2.0);
  r.truncation_report.included = {0};
  const std::string csv = propagator_csv(r);
  CHECK(csv == "n,nu,re_contrib,im_contrib,re_S,im_S,prefactor_abs,prefactor_arg\n");
  const json s = propagator_summary(r);
  CHECK(complex_from_json(s["value"]) == cplx(1.0, 2.0));
  CHECK(s["truncation_report"]["first_dropped"].is_null());
}

TEST_CASE("atomic write replaces the target in one step") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "circlecs_io_test";
  fs::create_directories(dir);
  const fs::path target = dir / "out.txt";
  write_file_atomic(target.string(), "first\n");
  write_file_atomic(target.string(), "second\n");
  std::ifstream f(target);
  std::string text((std::istreambuf_iterator<char>(f)), {});
  CHECK(text == "second\n");
  CHECK(!fs::exists(dir / "out.txt.tmp"));
  CHECK_THROWS(write_file_atomic((dir / "missing" / "x.txt").string(), "x"));
  fs::remove_all(dir);
}
