#include "aim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "aim/error.hpp"
#include "aim/oracle.hpp"
#include "aim/tables.hpp"
#include "aim/wavefn.hpp"

namespace aim::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Thrown for bad user input discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structured output: one JSON object per line, RFC 4180 CSV, or an aligned
// text table. Records of one stream share their keys.
class Sink {
 public:
  explicit Sink(Format f) : format_(f) {}

  void add(json record) { records_.push_back(std::move(record)); }
  void comment(std::string line) { comments_.push_back(std::move(line)); }

  void write(std::ostream& os) const {
    switch (format_) {
      case Format::Json:
        for (const auto& r : records_) os << r.dump() << '\n';
        break;
      case Format::Csv:
        write_csv(os);
        break;
      case Format::Text:
        write_text(os);
        break;
    }
  }

 private:
  static std::string cell(const json& v) {
    if (v.is_null()) return {};
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  void write_csv(std::ostream& os) const {
    if (records_.empty()) return;
    bool first = true;
    for (const auto& [k, v] : records_.front().items()) {
      os << (first ? "" : ",") << csv_quote(k);
      first = false;
    }
    os << "\r\n";
    for (const auto& r : records_) {
      first = true;
      for (const auto& [k, v] : r.items()) {
        os << (first ? "" : ",") << csv_quote(cell(v));
        first = false;
      }
      os << "\r\n";
    }
  }

  void write_text(std::ostream& os) const {
    for (const auto& c : comments_) os << "# " << c << '\n';
    if (records_.empty()) return;
    std::vector<std::string> keys;
    for (const auto& [k, v] : records_.front().items()) keys.push_back(k);
    std::vector<std::size_t> width(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) width[i] = keys[i].size();
    for (const auto& r : records_) {
      for (std::size_t i = 0; i < keys.size(); ++i) width[i] = std::max(width[i], cell(r[keys[i]]).size());
    }
    auto line = [&](auto get) {
      std::string s;
      for (std::size_t i = 0; i < keys.size(); ++i) {
        std::string v = get(i);
        if (i + 1 < keys.size()) v.resize(width[i] + 2, ' ');
        s += v;
      }
      os << s << '\n';
    };
    line([&](std::size_t i) { return keys[i]; });
    for (const auto& r : records_) line([&](std::size_t i) { return cell(r[keys[i]]); });
  }

  Format format_;
  std::vector<json> records_;
  std::vector<std::string> comments_;
};

json number_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json spec_fields(const ProblemSpec& spec) {
  json j;
  j["alpha"] = rational_str(spec.alpha);
  j["lambda"] = rational_str(spec.lambda);
  j["gamma"] = rational_str(spec.gamma);
  j["state"] = spec.state_index;
  return j;
}

json solve_record(const ProblemSpec& spec, const ConvergenceReport& r, int decimals, json wall_ms) {
  json j = spec_fields(spec);
  j["energy"] = fixed(r.energy, decimals);
  j["iterations"] = r.iterations_used;
  j["digits_used"] = r.digits_used;
  j["r0"] = compact(r.r0_used);
  j["termination"] = std::string(termination_name(r.termination));
  j["backend"] = r.closed_form ? std::string("closed-form") : std::string(backend_name(r.backend));
  j["wall_ms"] = std::move(wall_ms);
  return j;
}

double elapsed_ms(Clock::time_point t0) {
  return std::round(std::chrono::duration<double, std::milli>(Clock::now() - t0).count() * 1000) / 1000;
}

BigReal choose_r0(const RunConfig& cfg, const ProblemSpec& spec) {
  if (cfg.r0) {
    const Rational q = parse_rational(*cfg.r0);
    if (q <= 0) throw ConfigurationError("--r0 must be positive");
    return to_big(q);
  }
  return r0_heuristic(spec);
}

struct Prepared {
  ProblemSpec spec;
  PrecisionPolicy policy;
};

// All input validation happens here so that failures map to the usage code.
Prepared prepare(const RunConfig& cfg) {
  try {
    Prepared p{cfg.problem(), cfg.policy()};
    if (cfg.n_max() < 5) throw ConfigurationError("--max-n must be at least 5");
    if (cfg.k_confirm < 2) throw ConfigurationError("--confirm must be at least 2");
    if (cfg.r0) {
      PrecisionContext ctx(p.policy.start_digits);
      choose_r0(cfg, p.spec);
    }
    return p;
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

ConvergenceReport run_solve(const RunConfig& cfg, const Prepared& p, Backend backend) {
  PrecisionContext ctx(p.policy.start_digits);
  SolveOptions opt;
  opt.backend = backend;
  if (cfg.r0) return solve(p.spec, choose_r0(cfg, p.spec), p.policy, cfg.n_max(), cfg.k_confirm, opt);
  // no --r0: fall back to the other candidate point, keep the first report on failure
  std::optional<ConvergenceReport> first;
  for (const BigReal& r0 : r0_candidates(p.spec)) {
    ConvergenceReport r = solve(p.spec, r0, p.policy, cfg.n_max(), cfg.k_confirm, opt);
    if (r.termination == Termination::Converged) return r;
    if (!first) first = std::move(r);
  }
  return *first;
}

int cmd_solve(const RunConfig& cfg, Sink& sink) {
  const Prepared p = prepare(cfg);
  std::vector<Backend> backends;
  if (cfg.backend != BackendChoice::Symbolic) backends.push_back(Backend::Jet);
  if (cfg.backend != BackendChoice::Jet) backends.push_back(Backend::Symbolic);

  std::vector<ConvergenceReport> reports;
  for (Backend b : backends) {
    const auto t0 = Clock::now();
    reports.push_back(run_solve(cfg, p, b));
    json wall = nullptr;
    if (cfg.timing) wall = elapsed_ms(t0);
    sink.add(solve_record(p.spec, reports.back(), p.policy.target_digits, wall));
  }
  for (const auto& r : reports) {
    if (r.termination != Termination::Converged) return exit_code::numeric;
  }
  if (reports.size() == 2) {
    PrecisionContext ctx(p.policy.start_digits);
    if (abs(reports[0].energy - reports[1].energy) > pow10_neg(p.policy.target_digits)) {
      return exit_code::mismatch;
    }
  }
  return exit_code::ok;
}

int cmd_sweep(const RunConfig& cfg, const std::string& lambdas, Sink& sink) {
  int code = exit_code::ok;
  std::istringstream in(lambdas);
  for (std::string item; std::getline(in, item, ',');) {
    RunConfig one = cfg;
    one.lambda = item;
    const Prepared p = prepare(one);
    const auto t0 = Clock::now();
    const ConvergenceReport r =
        run_solve(one, p, cfg.backend == BackendChoice::Symbolic ? Backend::Symbolic : Backend::Jet);
    json wall = nullptr;
    if (cfg.timing) wall = elapsed_ms(t0);
    sink.add(solve_record(p.spec, r, p.policy.target_digits, wall));
    if (r.termination != Termination::Converged) code = exit_code::numeric;
  }
  return code;
}

int cmd_table(const RunConfig& cfg, int which, const std::string& rows, Sink& sink) {
  TableOptions o;
  o.data_dir = cfg.data_dir;
  o.rows = rows;
  o.max_n = cfg.max_n;
  o.start_digits = cfg.start_digits;
  o.max_digits = cfg.max_digits;
  o.target_digits = cfg.target_digits;
  o.backend = cfg.backend == BackendChoice::Symbolic ? Backend::Symbolic : Backend::Jet;

  std::vector<CellResult> cells;
  try {
    cells = run_table(which, o);
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }
  for (const auto& c : cells) {
    json j;
    j["table"] = which;
    j["cell"] = c.cell;
    j["reference"] = c.reference;
    j["energy"] = c.energy;
    j["abs_diff"] = number_or_null(c.abs_diff);
    j["tolerance"] = number_or_null(c.tolerance);
    j["iterations"] = c.iterations;
    j["reference_n"] = c.reference_n;
    j["digits_used"] = c.digits_used;
    j["r0"] = c.r0;
    j["termination"] = c.termination;
    j["status"] = std::string(status_name(c.status));
    j["note"] = c.note;
    sink.add(std::move(j));
  }
  return table_passed(cells) ? exit_code::ok : exit_code::mismatch;
}

// reference energy for the ground state when a table lists this problem
std::optional<std::string> table_reference(const RunConfig& cfg, const ProblemSpec& spec) {
  if (spec.state_index != 0) return std::nullopt;
  for (int which : {3, 4}) {
    try {
      const RefTable t = load_reference(cfg.data_dir / ("table" + std::to_string(which) + ".txt"));
      if (parse_rational(t.get("alpha")) != spec.alpha) continue;
      const std::size_t c_lam = t.column("lambda");
      const std::size_t c_e = t.column("energy");
      for (const auto& row : t.rows) {
        const Rational g = which == 3 ? parse_rational(t.get("gamma")) : parse_rational(row[t.column("gamma")]);
        if (parse_rational(row[c_lam]) == spec.lambda && g == spec.gamma) return row[c_e];
      }
    } catch (const ConfigurationError&) {
    }
  }
  return std::nullopt;
}

std::string ld_str(long double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

int cmd_check(const RunConfig& cfg, Sink& sink) {
  const Prepared p = prepare(cfg);
  const auto t0 = Clock::now();
  const ConvergenceReport r = run_solve(cfg, p, Backend::Jet);
  PrecisionContext ctx(p.policy.start_digits);
  const double aim_e = static_cast<double>(r.energy);
  const int which = p.spec.state_index;

  const GridSpec grid = default_grid(p.spec, (is_finite(r.energy) ? aim_e : 2 * which + 3.0) + 4 * which + 8);
  const OracleValue fd = fd_eigenvalue(p.spec, grid, which);
  // shooting bracket halfway to the neighbouring finite-difference levels
  const OracleValue above = fd_eigenvalue(p.spec, grid, which + 1);
  double lo = static_cast<double>(fd.value - (above.value - fd.value) / 2);
  if (which > 0) lo = static_cast<double>((fd.value + fd_eigenvalue(p.spec, grid, which - 1).value) / 2);
  const double hi = static_cast<double>((fd.value + above.value) / 2);
  const OracleValue shoot = shoot_eigenvalue(p.spec, grid, lo, hi);

  const long double aim_ld = static_cast<long double>(r.energy);
  const long double slack = std::pow(10.0L, 1 - p.policy.target_digits);
  const bool fd_ok = std::abs(aim_ld - fd.value) <= fd.error_bar + slack;
  const bool shoot_ok = std::abs(aim_ld - shoot.value) <= shoot.error_bar + slack;

  json j = spec_fields(p.spec);
  j["aim"] = fixed(r.energy, p.policy.target_digits);
  j["termination"] = std::string(termination_name(r.termination));
  j["fd"] = ld_str(fd.value, 12);
  j["fd_error"] = static_cast<double>(fd.error_bar);
  j["shoot"] = ld_str(shoot.value, 12);
  j["shoot_error"] = static_cast<double>(shoot.error_bar);
  j["aim_minus_fd"] = static_cast<double>(aim_ld - fd.value);
  j["aim_minus_shoot"] = static_cast<double>(aim_ld - shoot.value);
  j["fd_minus_shoot"] = static_cast<double>(fd.value - shoot.value);
  json pert = nullptr;
  if (p.spec.state_index == 0 && p.spec.alpha < 2 * p.spec.gamma + 3 && p.spec.lambda <= Rational(1, 100)) {
    pert = fixed(perturbation_first_order(p.spec), 12);
  }
  j["perturbation"] = pert;
  const auto ref = table_reference(cfg, p.spec);
  j["reference"] = ref ? json(*ref) : json(nullptr);
  j["reference_minus_fd"] =
      ref ? json(static_cast<double>(static_cast<long double>(make_real(*ref)) - fd.value)) : json(nullptr);
  j["status"] = fd_ok && shoot_ok ? "agree" : "DISAGREE";
  j["wall_ms"] = cfg.timing ? json(elapsed_ms(t0)) : json(nullptr);
  sink.add(std::move(j));

  if (r.termination != Termination::Converged) return exit_code::numeric;
  return fd_ok && shoot_ok ? exit_code::ok : exit_code::mismatch;
}

struct RadiiOptions {
  std::optional<double> r_min;
  std::optional<double> r_max;
  int points = 400;
};

int cmd_wavefn(const RunConfig& cfg, const RadiiOptions& ro, Sink& sink, Format format) {
  const Prepared p = prepare(cfg);
  if (ro.points < 10) throw UsageError("--points must be at least 10");
  const ConvergenceReport r = run_solve(cfg, p, Backend::Jet);
  if (r.termination != Termination::Converged) {
    sink.add(solve_record(p.spec, r, p.policy.target_digits, nullptr));
    return exit_code::numeric;
  }
  std::vector<double> radii = default_radii(p.spec, static_cast<double>(r.energy), ro.points);
  if (ro.r_min || ro.r_max) {
    const double a = ro.r_min.value_or(radii.front());
    const double b = ro.r_max.value_or(radii.back());
    if (!(a > 0 && b > a)) throw UsageError("need 0 < --r-min < --r-max");
    for (int i = 0; i < ro.points; ++i) radii[static_cast<std::size_t>(i)] = a + (b - a) * i / (ro.points - 1);
  }
  const WavefnSamples w = reconstruct(p.spec, r, radii);
  const std::vector<double> psi = w.normalized();
  const int nodes = node_count(w);

  if (format == Format::Json) {
    json j = spec_fields(p.spec);
    j["energy"] = fixed(r.energy, p.policy.target_digits);
    j["iterations"] = r.iterations_used;
    j["nodes"] = nodes;
    j["normalization"] = w.normalization;
    json samples = json::array();
    for (std::size_t i = 0; i < psi.size(); ++i) samples.push_back(json::array({w.radii[i], psi[i]}));
    j["samples"] = std::move(samples);
    sink.add(std::move(j));
  } else {
    sink.comment("energy " + fixed(r.energy, p.policy.target_digits) + ", nodes " + std::to_string(nodes));
    for (std::size_t i = 0; i < psi.size(); ++i) {
      json j;
      j["r"] = w.radii[i];
      j["psi"] = psi[i];
      sink.add(std::move(j));
    }
  }
  return exit_code::ok;
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "text") return Format::Text;
  throw UsageError("--format must be json, csv or text");
}

BackendChoice parse_backend(const std::string& s) {
  if (s == "jet") return BackendChoice::Jet;
  if (s == "symbolic") return BackendChoice::Symbolic;
  if (s == "both") return BackendChoice::Both;
  throw UsageError("--backend must be symbolic, jet or both");
}

}  // namespace

ProblemSpec RunConfig::problem() const {
  ProblemSpec s;
  s.alpha = parse_rational(alpha);
  s.lambda = parse_rational(lambda);
  if (l || dim) {
    if (gamma) throw ConfigurationError("give either --gamma or --l/--dim, not both");
    s.gamma = gamma_from_angular(l.value_or(0), dim.value_or(3));
  } else {
    s.gamma = parse_rational(gamma.value_or("0"));
  }
  s.state_index = state;
  s.validate();
  return s;
}

PrecisionPolicy RunConfig::policy() const {
  PrecisionPolicy p;
  p.target_digits = target();
  p.start_digits = start_digits.value_or(std::max(30, p.target_digits + 8));
  p.max_digits = max_digits.value_or(std::max(120, p.start_digits));
  p.validate();
  return p;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bound states of -psi'' + (r^2 + gamma(gamma+1)/r^2 + lambda/r^alpha) psi = E psi"};
  app.name("aim");
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value settings file; flags given on the command line win");

  RunConfig cfg;
  cfg.data_dir = default_data_dir();
  std::string format = "text";
  std::string backend = "jet";
  std::string data_dir = cfg.data_dir.string();
  app.add_option("--alpha", cfg.alpha, "power of the singular term");
  app.add_option("--lambda", cfg.lambda, "coupling of the singular term");
  auto* g = app.add_option("--gamma", cfg.gamma, "centrifugal parameter");
  auto* l = app.add_option("--l", cfg.l, "angular momentum (with --dim)");
  auto* d = app.add_option("--dim", cfg.dim, "space dimension (with --l, default 3)");
  g->excludes(l)->excludes(d);
  app.add_option("--state", cfg.state, "radial excitation index, 0 = ground state");
  app.add_option("--r0", cfg.r0, "evaluation radius for the termination condition");
  app.add_option("--target-digits", cfg.target_digits, "decimal places the estimates must settle to");
  app.add_option("--start-digits", cfg.start_digits, "initial working precision");
  app.add_option("--max-digits", cfg.max_digits, "precision ceiling for escalation");
  app.add_option("--max-n", cfg.max_n, "iteration limit");
  app.add_option("--confirm", cfg.k_confirm, "consecutive settled iterations required");
  app.add_option("--format", format, "json, csv or text");
  app.add_option("--out", cfg.out, "write output here instead of stdout");
  app.add_option("--backend", backend, "symbolic, jet or both");
  app.add_option("--data-dir", data_dir, "directory with the reference tables");
  app.add_flag("--timing", cfg.timing, "fill wall_ms (otherwise null, keeping output reproducible)");

  auto* solve_cmd = app.add_subcommand("solve", "one eigenvalue");
  auto* sweep_cmd = app.add_subcommand("sweep", "one eigenvalue per coupling");
  std::string lambdas;
  sweep_cmd->add_option("--lambdas", lambdas, "comma-separated couplings")->required();
  auto* table_cmd = app.add_subcommand("table", "re-run a reference table");
  int which = 0;
  std::string rows;
  table_cmd->add_option("which", which, "table number 1-4")->required()->check(CLI::Range(1, 4));
  table_cmd->add_option("--rows", rows,
                        "cells to run: r0 list (1), digit list (2), lambda list (3), "
                        "'lambda,gamma;...' or 'all' (4)");
  auto* check_cmd = app.add_subcommand("check", "compare against finite differences and shooting");
  auto* wavefn_cmd = app.add_subcommand("wavefn", "sample the eigenfunction");
  RadiiOptions ro;
  wavefn_cmd->add_option("--r-min", ro.r_min, "first radius");
  wavefn_cmd->add_option("--r-max", ro.r_max, "last radius");
  wavefn_cmd->add_option("--points", ro.points, "number of radii");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  try {
    cfg.format = parse_format(format);
    cfg.backend = parse_backend(backend);
    cfg.data_dir = data_dir;
    Sink sink(cfg.format);
    int code = exit_code::ok;
    try {
      if (*solve_cmd) code = cmd_solve(cfg, sink);
      if (*sweep_cmd) code = cmd_sweep(cfg, lambdas, sink);
      if (*table_cmd) code = cmd_table(cfg, which, rows, sink);
      if (*check_cmd) code = cmd_check(cfg, sink);
      if (*wavefn_cmd) code = cmd_wavefn(cfg, ro, sink, cfg.format);
    } catch (const PoleError& e) {
      err << "aim: " << e.what() << " (r = " << e.location() << ")\n";
      code = exit_code::numeric;
    } catch (const UsageError&) {
      throw;
    } catch (const Error& e) {
      err << "aim: " << e.what() << '\n';
      code = exit_code::numeric;
    }
    if (cfg.out.empty()) {
      sink.write(out);
    } else {
      std::ofstream f(cfg.out);
      if (!f) throw UsageError("cannot write " + cfg.out);
      sink.write(f);
    }
    if (code == exit_code::mismatch) err << "aim: verification mismatch\n";
    return code;
  } catch (const UsageError& e) {
    err << "aim: " << e.what() << '\n';
    return exit_code::usage;
  }
}

}  // namespace aim::cli
