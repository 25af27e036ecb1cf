// circlecs: command-line front end.
//
//   circlecs overlap   --s 1 --zI 0,0 --zF pi,0
//   circlecs husimi    --coherent 1.5,0.5 --out field.csv
//   circlecs zeros     --config two_term.json
//   circlecs propagate --hamiltonian pendulum --k-pend 0.1 --zI 0,0 --zF 0.5,0 --tau 0.5 --out branches.csv
//
// Options given on the command line override the --config file. Exit status:
// 0 success, 2 invalid input, 3 numerical failure (reported as JSON on stdout),
// 1 anything else. Output files are written atomically.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "circlecs/husimi.hpp"
#include "circlecs/io.hpp"
#include "circlecs/parallel.hpp"
#include "circlecs/semiclassics.hpp"
#include "validation.hpp"

using namespace circlecs;

namespace {

constexpr int exit_invalid = 2;
constexpr int exit_numerical = 3;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// How the state for expect/husimi/zeros/reconstruct is given.
struct StateSource {
  std::optional<StateVector> explicit_state;
  std::optional<cplx> coherent;
  std::optional<long> basis;
  double tol = 1e-16;
};

struct RunConfig {
  Representation rep;
  HolomorphicHamiltonian H;
  StateSource state;
  CylinderGrid grid;
  std::optional<cplx> z_I, z_F;
  std::optional<double> im_cutoff;
  double zero_tol = 1e-10;
  int points = 100;
  unsigned long seed = 1;
  double im_max = 2.0;
  std::optional<double> tau;
  PropagatorOptions prop;
  std::vector<int> checks;
};

// Command-line values kept as strings until merged with the config file.
struct Flags {
  std::string config, out, summary;
  std::optional<unsigned> threads;
  std::optional<double> delta, s, hbar;
  std::optional<std::string> zI, zF, coherent;
  std::optional<long> basis;
  std::optional<std::string> state_file;
  std::optional<int> phi_count, p_count;
  std::optional<double> p_min, p_max;
  std::optional<double> im_cutoff, zero_tol, im_max;
  std::optional<int> points;
  std::optional<unsigned long> seed;
  std::optional<std::string> hamiltonian;
  std::optional<double> k_pend, tau, truncation;
  std::optional<int> max_winding;
  std::optional<std::string> seeds;
  bool skip_failed = false;
  std::vector<int> checks;
};

void reject_unknown(const json& block, const std::string& where, std::initializer_list<const char*> keys) {
  if (!block.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : block.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ConfigError("unknown key " + where + "." + key);
  }
}

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_real(j.get<std::string>());
  throw ConfigError(where + " must be a number");
}

long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<long>();
}

HolomorphicHamiltonian hamiltonian_of(const std::string& kind, double k) {
  if (kind == "free" || kind == "free_rotor") return HolomorphicHamiltonian::free_rotor();
  if (kind == "pendulum") return HolomorphicHamiltonian::pendulum(k);
  throw ConfigError("hamiltonian kind must be free_rotor or pendulum, got '" + kind + "'");
}

SeedStrategy seeds_of(const std::string& name) {
  if (name == "ring") return SeedStrategy::ring;
  if (name == "linearized") return SeedStrategy::linearized;
  throw ConfigError("seeds must be ring or linearized, got '" + name + "'");
}

StateSource state_source_from_json(const json& j) {
  reject_unknown(j, "state", {"n_min", "coeffs", "coherent", "basis", "tol"});
  StateSource src;
  const int kinds = j.contains("coeffs") + j.contains("coherent") + j.contains("basis");
  if (kinds != 1) throw ConfigError("state needs exactly one of coeffs, coherent, basis");
  if (j.contains("coeffs")) {
    if (j.contains("tol")) throw ConfigError("state.tol applies to coherent states only");
    src.explicit_state = state_from_json(j);
  } else {
    if (j.contains("n_min")) throw ConfigError("state.n_min applies to explicit coefficients only");
    if (j.contains("coherent")) src.coherent = complex_from_json(j["coherent"]);
    if (j.contains("basis")) src.basis = integer(j["basis"], "state.basis");
    if (j.contains("tol")) src.tol = number(j["tol"], "state.tol");
  }
  return src;
}

void apply_config(RunConfig& cfg, const json& root) {
  reject_unknown(root, "config",
                 {"representation", "hamiltonian", "state", "grid", "endpoints", "zeros", "reconstruct",
                  "propagator", "validate"});
  if (root.contains("representation")) cfg.rep = representation_from_json(root["representation"]);
  if (root.contains("hamiltonian")) {
    const json& h = root["hamiltonian"];
    reject_unknown(h, "hamiltonian", {"kind", "k_pend"});
    const std::string kind = h.value("kind", std::string("free_rotor"));
    cfg.H = hamiltonian_of(kind, h.contains("k_pend") ? number(h["k_pend"], "hamiltonian.k_pend") : 0.0);
  }
  if (root.contains("state")) cfg.state = state_source_from_json(root["state"]);
  if (root.contains("grid")) {
    const json& g = root["grid"];
    reject_unknown(g, "grid", {"phi_count", "p_min", "p_max", "p_count"});
    if (g.contains("phi_count")) cfg.grid.phi_count = static_cast<int>(integer(g["phi_count"], "grid.phi_count"));
    if (g.contains("p_count")) cfg.grid.p_count = static_cast<int>(integer(g["p_count"], "grid.p_count"));
    if (g.contains("p_min")) cfg.grid.p_min = number(g["p_min"], "grid.p_min");
    if (g.contains("p_max")) cfg.grid.p_max = number(g["p_max"], "grid.p_max");
  }
  if (root.contains("endpoints")) {
    const json& e = root["endpoints"];
    reject_unknown(e, "endpoints", {"z_I", "z_F"});
    if (e.contains("z_I")) cfg.z_I = complex_from_json(e["z_I"]);
    if (e.contains("z_F")) cfg.z_F = complex_from_json(e["z_F"]);
  }
  if (root.contains("zeros")) {
    const json& z = root["zeros"];
    reject_unknown(z, "zeros", {"im_cutoff", "tol"});
    if (z.contains("im_cutoff")) cfg.im_cutoff = number(z["im_cutoff"], "zeros.im_cutoff");
    if (z.contains("tol")) cfg.zero_tol = number(z["tol"], "zeros.tol");
  }
  if (root.contains("reconstruct")) {
    const json& r = root["reconstruct"];
    reject_unknown(r, "reconstruct", {"points", "seed", "im_max"});
    if (r.contains("points")) cfg.points = static_cast<int>(integer(r["points"], "reconstruct.points"));
    if (r.contains("seed")) cfg.seed = static_cast<unsigned long>(integer(r["seed"], "reconstruct.seed"));
    if (r.contains("im_max")) cfg.im_max = number(r["im_max"], "reconstruct.im_max");
  }
  if (root.contains("propagator")) {
    const json& p = root["propagator"];
    reject_unknown(p, "propagator", {"tau", "max_winding", "truncation", "seeds", "skip_failed"});
    if (p.contains("tau")) cfg.tau = number(p["tau"], "propagator.tau");
    if (p.contains("max_winding"))
      cfg.prop.max_winding = static_cast<int>(integer(p["max_winding"], "propagator.max_winding"));
    if (p.contains("truncation")) cfg.prop.truncation = number(p["truncation"], "propagator.truncation");
    if (p.contains("seeds")) {
      if (!p["seeds"].is_string()) throw ConfigError("propagator.seeds must be a string");
      cfg.prop.seeds = seeds_of(p["seeds"].get<std::string>());
    }
    if (p.contains("skip_failed")) {
      if (!p["skip_failed"].is_boolean()) throw ConfigError("propagator.skip_failed must be a boolean");
      cfg.prop.skip_failed_branches = p["skip_failed"].get<bool>();
    }
  }
  if (root.contains("validate")) {
    const json& v = root["validate"];
    reject_unknown(v, "validate", {"checks"});
    if (v.contains("checks")) {
      if (!v["checks"].is_array()) throw ConfigError("validate.checks must be an array");
      for (const auto& c : v["checks"]) cfg.checks.push_back(static_cast<int>(integer(c, "validate.checks[]")));
    }
  }
}

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + what + " '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " '" + path + "': " + e.what());
  }
}

RunConfig build_config(const Flags& fl) {
  RunConfig cfg;
  if (!fl.config.empty()) {
    try {
      apply_config(cfg, read_json_file(fl.config, "config"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (fl.delta) cfg.rep.delta = *fl.delta;
  if (fl.s) cfg.rep.s = *fl.s;
  if (fl.hbar) cfg.rep.hbar = *fl.hbar;
  cfg.rep.validate();

  const int state_flags = !!fl.coherent + !!fl.basis + !!fl.state_file;
  if (state_flags > 1) throw ConfigError("give at most one of --coherent, --basis, --state-file");
  if (fl.coherent) cfg.state = StateSource{std::nullopt, parse_complex(*fl.coherent), std::nullopt, cfg.state.tol};
  if (fl.basis) cfg.state = StateSource{std::nullopt, std::nullopt, *fl.basis, cfg.state.tol};
  if (fl.state_file) cfg.state = StateSource{state_from_json(read_json_file(*fl.state_file, "state file")), {}, {}};

  if (fl.phi_count) cfg.grid.phi_count = *fl.phi_count;
  if (fl.p_count) cfg.grid.p_count = *fl.p_count;
  if (fl.p_min) cfg.grid.p_min = *fl.p_min;
  if (fl.p_max) cfg.grid.p_max = *fl.p_max;
  if (fl.zI) cfg.z_I = parse_complex(*fl.zI);
  if (fl.zF) cfg.z_F = parse_complex(*fl.zF);
  if (fl.im_cutoff) cfg.im_cutoff = *fl.im_cutoff;
  if (fl.zero_tol) cfg.zero_tol = *fl.zero_tol;
  if (fl.points) cfg.points = *fl.points;
  if (fl.seed) cfg.seed = *fl.seed;
  if (fl.im_max) cfg.im_max = *fl.im_max;
  if (fl.hamiltonian || fl.k_pend)
    cfg.H = hamiltonian_of(fl.hamiltonian.value_or(fl.k_pend ? "pendulum" : "free_rotor"),
                           fl.k_pend.value_or(cfg.H.k_pend));
  if (fl.tau) cfg.tau = *fl.tau;
  if (fl.max_winding) cfg.prop.max_winding = *fl.max_winding;
  if (fl.truncation) cfg.prop.truncation = *fl.truncation;
  if (fl.seeds) cfg.prop.seeds = seeds_of(*fl.seeds);
  if (fl.skip_failed) cfg.prop.skip_failed_branches = true;
  if (!fl.checks.empty()) cfg.checks = fl.checks;
  cfg.H.validate();
  return cfg;
}

cplx require(const std::optional<cplx>& z, const char* name) {
  if (!z) throw ConfigError(std::string("missing endpoint ") + name);
  return *z;
}

// The state and whether it is a window of an infinite sequence.
std::pair<StateVector, bool> load_state(const RunConfig& cfg) {
  const StateSource& s = cfg.state;
  if (s.explicit_state) return {*s.explicit_state, false};
  if (s.coherent) return {coherent_state(cfg.rep, *s.coherent, s.tol), true};
  if (s.basis) return {StateVector::basis(*s.basis), false};
  throw ConfigError("no state given (state block, --coherent, --basis or --state-file)");
}

// Bargmann function whose safe band covers [y_lo, y_hi]. Coherent states are
// re-truncated with smaller tolerances until it does.
BargmannFunction bargmann_covering(const RunConfig& cfg, double y_lo, double y_hi) {
  const auto [psi, truncated] = load_state(cfg);
  BargmannFunction f(cfg.rep, psi, truncated);
  for (double tol = cfg.state.tol * 1e-16; cfg.state.coherent && tol > 1e-300; tol *= 1e-16) {
    if (f.safe_band().contains(y_lo) && f.safe_band().contains(y_hi)) break;
    f = BargmannFunction(cfg.rep, coherent_state(cfg.rep, *cfg.state.coherent, tol), true);
  }
  return f;
}

// Default zero-search band: the Cauchy band for finite support, otherwise the
// inner part of the safe band.
double zero_cutoff(const RunConfig& cfg, const BargmannFunction& f) {
  if (cfg.im_cutoff) return *cfg.im_cutoff;
  if (!f.truncated()) {
    const Band zb = finite_support_zero_band(f);
    return std::max(-zb.lo, zb.hi) + 0.5;
  }
  const Band sb = f.safe_band();
  return 0.9 * std::min(-sb.lo, sb.hi);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    write_file_atomic(out, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json zero_set(const BargmannFunction& f, double cutoff, double tol) {
  StripZeros zeros = find_strip_zeros(f, cutoff, tol);
  try {
    zeros.l = determine_l(f, zeros);
    fit_constant(zeros, f);
  } catch (const NumericalError& e) {
    if (e.kind() != ErrorKind::undetermined) throw;
  }
  json j = to_json(zeros);
  j["im_cutoff"] = cutoff;
  return j;
}

void cmd_overlap(const RunConfig& cfg, const Flags& fl) {
  const cplx zI = require(cfg.z_I, "z_I"), zF = require(cfg.z_F, "z_F");
  const cplx ov = overlap(cfg.rep, zF, zI);
  const cplx normalized = ov / std::sqrt(norm_squared(cfg.rep, zI) * norm_squared(cfg.rep, zF));
  emit(fl.out, dump({{"overlap", complex_to_json(ov)},
                     {"normalized", complex_to_json(normalized)},
                     {"normalized_abs", std::abs(normalized)}}));
}

void cmd_expect(const RunConfig& cfg, const Flags& fl) {
  const auto [psi, truncated] = load_state(cfg);
  json j = {{"norm_squared", psi.norm_squared()},
            {"exp_iphi", complex_to_json(expect_exp_iphi(cfg.rep, psi))},
            {"p", expect_p(cfg.rep, psi)}};
  if (cfg.state.coherent) {
    const auto [product, bound] = uncertainty_product(cfg.rep, *cfg.state.coherent);
    j["uncertainty"] = {{"product", product}, {"bound", bound}};
  }
  emit(fl.out, dump(j));
}

void cmd_husimi(const RunConfig& cfg, const Flags& fl) {
  const BargmannFunction f = bargmann_covering(cfg, cfg.grid.p_min / cfg.rep.hbar, cfg.grid.p_max / cfg.rep.hbar);
  emit(fl.out, husimi_csv(husimi_field(f, cfg.grid), cfg.grid));
}

// With an explicit cutoff the band must lie inside the safe band.
BargmannFunction bargmann_for_zeros(const RunConfig& cfg) {
  if (cfg.im_cutoff) return bargmann_covering(cfg, -*cfg.im_cutoff, *cfg.im_cutoff);
  const auto [psi, truncated] = load_state(cfg);
  return BargmannFunction(cfg.rep, psi, truncated);
}

void cmd_zeros(const RunConfig& cfg, const Flags& fl) {
  const BargmannFunction f = bargmann_for_zeros(cfg);
  emit(fl.out, dump(zero_set(f, zero_cutoff(cfg, f), cfg.zero_tol)));
}

void cmd_reconstruct(const RunConfig& cfg, const Flags& fl) {
  if (cfg.points <= 0) throw ConfigError("reconstruct.points must be positive");
  const BargmannFunction f = bargmann_for_zeros(cfg);
  const double cutoff = zero_cutoff(cfg, f);
  const StripZeros data = reconstruction_data(f, cutoff, cfg.zero_tol);
  const HadamardEvaluator q = hadamard_reconstruct(data, cfg.rep);
  const Band sb = f.safe_band();
  const double y_lo = std::max(-cfg.im_max, sb.lo), y_hi = std::min(cfg.im_max, sb.hi);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * pi), uy(y_lo, y_hi);
  double worst = 0.0;
  for (int i = 0; i < cfg.points; ++i) {
    const cplx z(ux(rng), uy(rng));
    const cplx expect = f.value(z);
    worst = std::max(worst, std::abs(q.value(z) - expect) / std::abs(expect));
  }
  json zeros = to_json(data);
  zeros["im_cutoff"] = cutoff;
  emit(fl.out, dump({{"zeros", zeros},
                     {"points", cfg.points},
                     {"im_range", {y_lo, y_hi}},
                     {"max_relative_error", worst}}));
}

void cmd_propagate(const RunConfig& cfg, const Flags& fl) {
  const cplx zI = require(cfg.z_I, "z_I"), zF = require(cfg.z_F, "z_F");
  if (!cfg.tau) throw ConfigError("missing tau");
  const PropagatorResult res = semiclassical_propagator(cfg.H, cfg.rep, zI, zF, *cfg.tau, cfg.prop);
  json summary = propagator_summary(res);
  summary["overlap"] = complex_to_json(overlap(cfg.rep, zF, zI));
  const std::string csv = propagator_csv(res);
  if (!fl.out.empty()) write_file_atomic(fl.out, csv);
  if (!fl.summary.empty()) write_file_atomic(fl.summary, dump(summary));
  std::cout << dump(summary);
}

void cmd_validate(const RunConfig& cfg, const Flags& fl) {
  const std::set<int> wanted(cfg.checks.begin(), cfg.checks.end());
  for (int id : wanted)
    if (id < 1 || id > static_cast<int>(validation::catalog().size()))
      throw ConfigError("no check with id " + std::to_string(id));
  json checks = json::array();
  bool all = true;
  for (const auto& c : validation::catalog()) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto r = validation::run(c);
    std::cerr << validation::summary_line(r) << std::endl;
    checks.push_back(validation::to_json(r));
    all = all && r.passed();
  }
  emit(fl.out, dump({{"passed", all}, {"checks", checks}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent states on the circle: overlaps, Husimi fields, zeros and semiclassical propagators"};
  app.require_subcommand(1);
  Flags fl;
  app.add_option("--config", fl.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", fl.out, "output file (stdout when omitted)");
  app.add_option("--threads", fl.threads, "worker threads (0: hardware concurrency)");
  app.add_option("--delta", fl.delta, "representation label in [0, 1)");
  app.add_option("--s", fl.s, "squeezing s > 0");
  app.add_option("--hbar", fl.hbar, "hbar > 0");

  auto add_state = [&](CLI::App* sub) {
    sub->add_option("--coherent", fl.coherent, "coherent state label re,im");
    sub->add_option("--basis", fl.basis, "momentum basis state n");
    sub->add_option("--state-file", fl.state_file, "JSON state {n_min, coeffs}");
  };
  auto add_zero_band = [&](CLI::App* sub) {
    sub->add_option("--im-cutoff", fl.im_cutoff, "zero search band |Im z| < cutoff");
    sub->add_option("--tol", fl.zero_tol, "zero tolerance");
  };

  auto* overlap_cmd = app.add_subcommand("overlap", "<z_F|z_I> and its normalized value");
  overlap_cmd->add_option("--zI", fl.zI, "initial label re,im");
  overlap_cmd->add_option("--zF", fl.zF, "final label re,im");

  auto* expect_cmd = app.add_subcommand("expect", "norm, <exp(i phi)> and <p> of a state");
  add_state(expect_cmd);

  auto* husimi_cmd = app.add_subcommand("husimi", "Husimi field on a cylinder grid as CSV");
  add_state(husimi_cmd);
  husimi_cmd->add_option("--phi-count", fl.phi_count);
  husimi_cmd->add_option("--p-min", fl.p_min);
  husimi_cmd->add_option("--p-max", fl.p_max);
  husimi_cmd->add_option("--p-count", fl.p_count);

  auto* zeros_cmd = app.add_subcommand("zeros", "zeros of the Bargmann function in the strip");
  add_state(zeros_cmd);
  add_zero_band(zeros_cmd);

  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "product-formula round trip report");
  add_state(reconstruct_cmd);
  add_zero_band(reconstruct_cmd);
  reconstruct_cmd->add_option("--points", fl.points, "number of random test points");
  reconstruct_cmd->add_option("--seed", fl.seed, "random seed");
  reconstruct_cmd->add_option("--im-max", fl.im_max, "test points satisfy |Im z| <= im_max");

  auto* propagate_cmd = app.add_subcommand("propagate", "semiclassical propagator <z_F|exp(-iH tau/hbar)|z_I>");
  propagate_cmd->add_option("--zI", fl.zI, "initial label re,im");
  propagate_cmd->add_option("--zF", fl.zF, "final label re,im");
  propagate_cmd->add_option("--tau", fl.tau, "propagation time");
  propagate_cmd->add_option("--hamiltonian", fl.hamiltonian, "free_rotor or pendulum");
  propagate_cmd->add_option("--k-pend", fl.k_pend, "pendulum coupling");
  propagate_cmd->add_option("--max-winding", fl.max_winding);
  propagate_cmd->add_option("--truncation", fl.truncation, "relative cut for dropped windings");
  propagate_cmd->add_option("--seeds", fl.seeds, "ring or linearized");
  propagate_cmd->add_flag("--skip-failed", fl.skip_failed, "drop windings whose solve fails");
  propagate_cmd->add_option("--summary", fl.summary, "also write the JSON summary here");

  auto* validate_cmd = app.add_subcommand("validate", "run the invariant suites");
  validate_cmd->add_option("--checks", fl.checks, "check ids (all when omitted)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_invalid;
  }

  try {
    if (fl.threads) set_thread_count(*fl.threads);
    const RunConfig cfg = build_config(fl);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "overlap") cmd_overlap(cfg, fl);
    else if (name == "expect") cmd_expect(cfg, fl);
    else if (name == "husimi") cmd_husimi(cfg, fl);
    else if (name == "zeros") cmd_zeros(cfg, fl);
    else if (name == "reconstruct") cmd_reconstruct(cfg, fl);
    else if (name == "propagate") cmd_propagate(cfg, fl);
    else cmd_validate(cfg, fl);
  } catch (const NumericalError& e) {
    std::cout << dump(to_json(e));
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
