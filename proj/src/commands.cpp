#include "gelfand/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "gelfand/branch.hpp"
#include "gelfand/error.hpp"
#include "gelfand/identity.hpp"
#include "gelfand/lemma.hpp"
#include "gelfand/uniqueness.hpp"

namespace gelfand {

using nlohmann::json;

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "problem", "nl",    "nl-g",  "dim",  "grid",  "lambda", "lambdas", "sigma",  "sigmas",
      "lambda-init", "ds", "steps", "tol", "seed", "starts", "output", "format", "plot"};
  return keys;
}

const char* to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::Q: return "q";
    case ProblemKind::Navier: return "navier";
    case ProblemKind::Dirichlet: return "dirichlet";
    case ProblemKind::System: return "system";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

long long parse_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::RejectedInput, key + ": not an integer: '" + v + "'");
  }
}

double parse_key_real(const std::string& key, const std::string& v) {
  try {
    return parse_real(trim(v));
  } catch (const Error&) {
    throw Error(ErrorKind::RejectedInput, key + ": not a number: '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = v.find(',', start);
    out.push_back(parse_key_real(key, v.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_real(xs[i]);
  return out;
}

}  // namespace

ConfigEntries parse_config_text(std::string_view text) {
  ConfigEntries out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::RejectedInput, std::string("config JSON: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      const json& v = it.value();
      std::string s;
      if (v.is_string()) {
        s = v.get<std::string>();
      } else if (v.is_number_integer()) {
        s = std::to_string(v.get<long long>());
      } else if (v.is_number()) {
        s = format_real(v.get<double>());
      } else if (v.is_array()) {
        std::vector<double> xs;
        for (const json& x : v) {
          if (!x.is_number()) throw Error(ErrorKind::RejectedInput, it.key() + ": list entries must be numbers");
          xs.push_back(x.get<double>());
        }
        s = join(xs);
      } else {
        throw Error(ErrorKind::RejectedInput, it.key() + ": unsupported JSON value");
      }
      out.emplace_back(it.key(), s);
    }
    return out;
  }
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::RejectedInput, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

void apply_config(RunConfig& cfg, const ConfigEntries& entries) {
  for (const auto& [key, v] : entries) {
    if (key == "problem") {
      if (v == "q") cfg.problem = ProblemKind::Q;
      else if (v == "navier") cfg.problem = ProblemKind::Navier;
      else if (v == "dirichlet") cfg.problem = ProblemKind::Dirichlet;
      else if (v == "system") cfg.problem = ProblemKind::System;
      else throw Error(ErrorKind::RejectedInput, "problem: expected q, navier, dirichlet or system");
    } else if (key == "nl") {
      cfg.nl = v;
    } else if (key == "nl-g") {
      cfg.nl_g = v;
    } else if (key == "dim") {
      cfg.dim = static_cast<int>(parse_integer(key, v));
    } else if (key == "grid") {
      const long long m = parse_integer(key, v);
      if (m < 0) throw Error(ErrorKind::RejectedInput, "grid must be positive");
      cfg.grid = static_cast<std::size_t>(m);
    } else if (key == "lambda") {
      if (v.empty()) cfg.lambda.reset();
      else cfg.lambda = parse_key_real(key, v);
    } else if (key == "lambdas") {
      cfg.lambdas = parse_list(key, v);
    } else if (key == "sigma") {
      cfg.sigma = parse_key_real(key, v);
    } else if (key == "sigmas") {
      cfg.sigmas = parse_list(key, v);
    } else if (key == "lambda-init") {
      cfg.lambda_init = parse_key_real(key, v);
    } else if (key == "ds") {
      cfg.ds = parse_key_real(key, v);
    } else if (key == "steps") {
      cfg.steps = static_cast<int>(parse_integer(key, v));
    } else if (key == "tol") {
      cfg.tol = parse_key_real(key, v);
    } else if (key == "seed") {
      const long long s = parse_integer(key, v);
      if (s < 0) throw Error(ErrorKind::RejectedInput, "seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "starts") {
      const long long k = parse_integer(key, v);
      if (k < 1) throw Error(ErrorKind::RejectedInput, "starts must be >= 1");
      cfg.starts = static_cast<std::size_t>(k);
    } else if (key == "output") {
      cfg.output = v;
    } else if (key == "format") {
      if (v == "csv") cfg.format = OutputFormat::Csv;
      else if (v == "json") cfg.format = OutputFormat::Json;
      else throw Error(ErrorKind::RejectedInput, "format: expected csv or json");
    } else if (key == "plot") {
      cfg.plot = v;
    } else {
      throw Error(ErrorKind::RejectedInput, "unknown config key '" + key + "'");
    }
  }
}

void validate(const RunConfig& cfg) {
  auto reject = [](const std::string& m) { throw Error(ErrorKind::RejectedInput, m); };
  if (cfg.dim < 1) reject("dim must be >= 1");
  if (cfg.grid < 8) reject("grid must be >= 8");
  if (cfg.steps < 0) reject("steps must be >= 0");
  if (!(cfg.tol > 0.0)) reject("tol must be > 0");
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) reject("sigma must be > 0");
  if (!std::isfinite(cfg.lambda_init) || !std::isfinite(cfg.ds)) reject("lambda-init and ds must be finite");
  if (cfg.lambda && !(*cfg.lambda >= 0.0 && std::isfinite(*cfg.lambda))) reject("lambda must be >= 0");
  for (double l : cfg.lambdas) {
    if (!(l >= 0.0 && std::isfinite(l))) reject("lambdas must be >= 0");
  }
  for (double s : cfg.sigmas) {
    if (!(s > 0.0 && std::isfinite(s))) reject("sigmas must be > 0");
  }
  const Nonlinearity f = Nonlinearity::parse(cfg.nl);
  if (!cfg.nl_g.empty()) {
    if (cfg.problem != ProblemKind::System) reject("nl-g only applies to the system");
    Nonlinearity::parse(cfg.nl_g);
  }
  if (cfg.problem == ProblemKind::System) {
    make_system(cfg.dim, f, f, cfg.grid);
  } else {
    make_problem(cfg.problem == ProblemKind::Q        ? Order::Second
                 : cfg.problem == ProblemKind::Navier ? Order::FourthNavier
                                                      : Order::FourthDirichlet,
                 cfg.dim, f, cfg.grid);
  }
}

ConfigEntries echo(const RunConfig& cfg) {
  return {{"problem", to_string(cfg.problem)},
          {"nl", cfg.nl},
          {"nl-g", cfg.nl_g},
          {"dim", std::to_string(cfg.dim)},
          {"grid", std::to_string(cfg.grid)},
          {"lambda", cfg.lambda ? format_real(*cfg.lambda) : std::string()},
          {"lambdas", join(cfg.lambdas)},
          {"sigma", format_real(cfg.sigma)},
          {"sigmas", join(cfg.sigmas)},
          {"lambda-init", format_real(cfg.lambda_init)},
          {"ds", format_real(cfg.ds)},
          {"steps", std::to_string(cfg.steps)},
          {"tol", format_real(cfg.tol)},
          {"seed", std::to_string(cfg.seed)},
          {"starts", std::to_string(cfg.starts)},
          {"output", cfg.output},
          {"format", cfg.format == OutputFormat::Csv ? "csv" : "json"},
          {"plot", cfg.plot}};
}

namespace {

bool is_system(const RunConfig& c) { return c.problem == ProblemKind::System; }

ProblemSpec scalar_spec(const RunConfig& c) {
  if (is_system(c)) throw Error(ErrorKind::RejectedInput, "this command needs a scalar problem");
  const Order o = c.problem == ProblemKind::Q        ? Order::Second
                  : c.problem == ProblemKind::Navier ? Order::FourthNavier
                                                     : Order::FourthDirichlet;
  return make_problem(o, c.dim, Nonlinearity::parse(c.nl), c.grid);
}

SystemSpec system_spec(const RunConfig& c) {
  if (!is_system(c)) throw Error(ErrorKind::RejectedInput, "this command needs problem=system");
  const Nonlinearity f = Nonlinearity::parse(c.nl);
  return make_system(c.dim, f, c.nl_g.empty() ? f : Nonlinearity::parse(c.nl_g), c.grid);
}

double start_lambda(const RunConfig& c) {
  if (c.lambda_init > 0.0) return c.lambda_init;
  return is_system(c) ? 0.05 / std::max(1.0, c.sigma) : 0.05;
}

ContinuationOptions continuation_options(const RunConfig& c) {
  ContinuationOptions o;
  o.newton.tol = c.tol;
  return o;
}

json config_json(const RunConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : echo(c)) j[k] = v;
  return j;
}

json opt_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json row_json(const BranchRow& r) {
  return {{"index", r.index},       {"lambda", r.lambda},     {"gamma", opt_number(r.gamma)},
          {"sigma", opt_number(r.sigma)}, {"arclength", r.arclength}, {"sup_u", r.sup_u},
          {"sup_v", opt_number(r.sup_v)}, {"eta1", opt_number(r.eta1)}, {"newton_iters", r.newton_iters},
          {"residual", r.residual}};
}

json report_json(const IdentityReport& r) {
  return {{"kind", "identity"},        {"name", r.name},           {"inequality", r.inequality},
          {"lhs", r.lhs},              {"rhs", r.rhs},             {"residual", r.residual},
          {"relative", r.relative},    {"grid_h", r.grid_h},       {"tolerance", r.tolerance},
          {"verdict", to_string(r.verdict)}};
}

json axis_json(const ScanAxis& a) {
  return {{"name", a.name}, {"lo", a.lo}, {"hi", a.hi}, {"samples", a.samples}};
}

json scan_json(const ScanReport& r) {
  return {{"kind", "scan"},           {"name", r.name},           {"min_value", r.min_value},
          {"argmin", {r.argmin_x, r.argmin_t}}, {"samples", r.samples},
          {"x_axis", axis_json(r.x_axis)}, {"t_axis", axis_json(r.t_axis)}, {"warnings", r.warnings}};
}

BranchTable run_branch(const RunConfig& c) {
  BranchTable t;
  if (c.steps > 0) {
    if (is_system(c)) {
      t = table_from_ray(trace_ray(system_spec(c), c.sigma, start_lambda(c), c.ds, c.steps, continuation_options(c)));
    } else {
      t = table_from_branch(continue_branch(scalar_spec(c), start_lambda(c), c.ds, c.steps, continuation_options(c)));
    }
  }
  t.meta = echo(c);
  return t;
}

std::string plot_title(const RunConfig& c) {
  std::string s = std::string(to_string(c.problem)) + ", " + c.nl + ", N = " + std::to_string(c.dim) +
                  ", M = " + std::to_string(c.grid);
  if (is_system(c)) s += ", sigma = " + format_real(c.sigma);
  return s;
}

json solution_set_json(const SolutionSet& s) {
  json sols = json::array();
  for (const FoundSolution& f : s.solutions) {
    sols.push_back({{"sup_norm", f.sup_u},
                    {"sup_v", f.v ? json(f.sup_v) : json(nullptr)},
                    {"center", f.center},
                    {"eta1", opt_number(f.eta1)},
                    {"residual", f.residual},
                    {"weak_residual", f.weak_residual},
                    {"verified", f.verified},
                    {"start", f.start}});
  }
  return {{"lambda", s.lambda},      {"gamma", opt_number(s.gamma)}, {"count", s.count()},
          {"summary", s.summary()},  {"solutions", sols},           {"starts", s.starts},
          {"failed_runs", s.failed_runs}, {"distinct", s.distinct},  {"seed", s.seed},
          {"notes", s.notes}};
}

// Evenly spaced picks from [first, last).
std::vector<std::size_t> spread(std::size_t first, std::size_t last, std::size_t count) {
  std::vector<std::size_t> out;
  if (last <= first) return out;
  const std::size_t n = last - first;
  if (n <= count) {
    for (std::size_t i = first; i < last; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) out.push_back(first + k * (n - 1) / (count - 1));
  return out;
}

}  // namespace

std::string cmd_branch(const RunConfig& cfg, std::string* svg) {
  validate(cfg);
  const BranchTable t = run_branch(cfg);
  if (svg && !cfg.plot.empty()) *svg = bifurcation_svg(t, plot_title(cfg));
  if (cfg.format == OutputFormat::Csv) return to_csv(t);
  json rows = json::array();
  for (const BranchRow& r : t.rows) rows.push_back(row_json(r));
  json j = {{"config", config_json(cfg)}, {"fold_index", t.fold ? json(*t.fold) : json(nullptr)}, {"rows", rows}};
  return j.dump(2) + "\n";
}

nlohmann::json cmd_lambda_star(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.steps == 0) throw Error(ErrorKind::RejectedInput, "lambda-star needs steps > 0");
  json j = {{"config", config_json(cfg)}};
  if (is_system(cfg)) {
    const Ray ray = trace_ray(system_spec(cfg), cfg.sigma, start_lambda(cfg), cfg.ds, cfg.steps,
                              continuation_options(cfg));
    if (!ray.fold) throw Error(ErrorKind::NonConvergence, "the ray reached no fold");
    const SystemPoint& f = ray.points[*ray.fold];
    j["lambda_star"] = ray.lambda_star;
    j["gamma_star"] = cfg.sigma * ray.lambda_star;
    j["fold_index"] = *ray.fold;
    j["sup_u"] = f.u.sup();
    j["sup_v"] = f.v.sup();
    j["diagnostics"] = ray.diagnostics;
    return j;
  }
  const ProblemSpec spec = scalar_spec(cfg);
  const Branch b = continue_branch(spec, start_lambda(cfg), cfg.ds, cfg.steps, continuation_options(cfg));
  if (!b.fold) throw Error(ErrorKind::NonConvergence, "the branch reached no fold");
  const LambdaStarEstimate est = lambda_star_crosscheck(spec, b);
  const BranchPoint& f = b.points[b.fold->index];
  j["lambda_star"] = b.fold->lambda_star;
  j["fold_index"] = b.fold->index;
  j["sup_u"] = f.sup_norm;
  j["eta1"] = f.eta1;
  j["bisection"] = est.from_bisection;
  j["discrepancy"] = est.discrepancy;
  std::vector<std::string> diag = b.diagnostics;
  diag.insert(diag.end(), est.diagnostics.begin(), est.diagnostics.end());
  j["diagnostics"] = diag;
  return j;
}

nlohmann::json cmd_probe(const RunConfig& cfg) {
  validate(cfg);
  SearchOptions opt;
  opt.starts = cfg.starts;
  opt.seed = cfg.seed;
  opt.newton.tol = cfg.tol;
  json j = {{"config", config_json(cfg)}};
  if (!cfg.lambdas.empty()) {
    const UniquenessRegion reg = is_system(cfg) ? uniqueness_region(system_spec(cfg), cfg.sigma, cfg.lambdas, opt)
                                                : uniqueness_region(scalar_spec(cfg), cfg.lambdas, opt);
    json entries = json::array();
    for (const RegionEntry& e : reg.entries) {
      entries.push_back({{"lambda", e.lambda}, {"count", e.count}, {"summary", e.summary}});
    }
    j["region"] = entries;
    j["unique_up_to"] = opt_number(reg.unique_up_to);
    j["first_multiple"] = opt_number(reg.first_multiple);
    j["starts"] = cfg.starts;
    j["seed"] = cfg.seed;
    return j;
  }
  if (!cfg.lambda) throw Error(ErrorKind::RejectedInput, "probe needs lambda or lambdas");
  const SolutionSet s = is_system(cfg) ? deflated_search(system_spec(cfg), *cfg.lambda, cfg.sigma * *cfg.lambda, opt)
                                       : deflated_search(scalar_spec(cfg), *cfg.lambda, opt);
  j["parameters"] = {{"lambda", s.lambda}, {"gamma", opt_number(s.gamma)}};
  const json body = solution_set_json(s);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

nlohmann::json cmd_identities(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.steps == 0) throw Error(ErrorKind::RejectedInput, "identities needs steps > 0");
  json reports = json::array();
  std::vector<std::string> notes;
  if (is_system(cfg)) {
    const SystemSpec spec = system_spec(cfg);
    for (const auto& r : manufactured_energy(cfg.dim, cfg.grid)) reports.push_back(report_json(r));
    const Ray ray = trace_ray(spec, cfg.sigma, start_lambda(cfg), cfg.ds, cfg.steps, continuation_options(cfg));
    if (cfg.sigma <= 1.0) {
      const auto pairs = upper_branch_pairs(spec, ray);
      for (std::size_t k : spread(0, pairs.size(), 8)) {
        for (const auto& r : system_energy(spec, pairs[k].second, pairs[k].minimal)) {
          json jr = report_json(r);
          jr["lambda"] = pairs[k].second.lambda;
          reports.push_back(jr);
        }
      }
    } else {
      notes.push_back("energy identities need sigma <= 1; swap f and g for sigma > 1");
    }
    const EnergyBound eb = extremal_energy_bound(spec, ray);
    reports.push_back({{"kind", "energy-bound"},
                       {"holds", eb.holds},
                       {"worst_margin", eb.worst_margin},
                       {"increasing", eb.increasing},
                       {"bounded", eb.bounded},
                       {"sup_fv_v", eb.sup_fv_v},
                       {"points", eb.entries.size()}});
    const double s = std::min(cfg.sigma, 1.0);
    reports.push_back(scan_json(quadrant_scan(default_quadrant_c(cfg.dim), cfg.lambda.value_or(0.01), s)));
    reports.push_back({{"kind", "threshold"}, {"name", "exp-scaling"}, {"t0", exp_scaling_threshold()}});
  } else {
    const ProblemSpec spec = scalar_spec(cfg);
    if (spec.order == Order::Second) {
      throw Error(ErrorKind::RejectedInput, "identities need problem navier, dirichlet or system");
    }
    for (const auto& r : manufactured_pohozaev(cfg.dim, spec.bc(), cfg.grid)) reports.push_back(report_json(r));
    const Branch b = continue_branch(spec, start_lambda(cfg), cfg.ds, cfg.steps, continuation_options(cfg));
    if (!b.fold) throw Error(ErrorKind::NonConvergence, "the branch reached no fold");
    MonotoneOptions mo;
    mo.eigenvalue = false;
    for (std::size_t k : spread(b.fold->index + 1, b.points.size(), 8)) {
      const BranchPoint& up = b.points[k];
      const MinimalOutcome m = minimal_solution(spec, up.lambda, mo);
      const auto* low = std::get_if<BranchPoint>(&m);
      if (!low) {
        notes.push_back("no minimal solution at lambda = " + format_real(up.lambda));
        continue;
      }
      for (const auto& r : pohozaev_fourth(spec, up, *low)) {
        json jr = report_json(r);
        jr["lambda"] = up.lambda;
        reports.push_back(jr);
      }
    }
    if (cfg.dim >= 5) {
      const double lam = cfg.lambda.value_or(b.fold->lambda_star / 100.0);
      const MinimalOutcome m = minimal_solution(spec, lam, mo);
      if (const auto* low = std::get_if<BranchPoint>(&m)) {
        const TScanResult ts = t_scan(spec, *low);
        json jt = scan_json(ts.t);
        jt["lambda"] = lam;
        jt["epsilon"] = ts.epsilon;
        jt["c_sigma"] = ts.c_sigma;
        reports.push_back(jt);
        json js = scan_json(ts.s);
        js["lambda"] = lam;
        js["domination_gap"] = ts.domination_gap;
        js["domination_violations"] = ts.domination_violations;
        reports.push_back(js);
      } else {
        notes.push_back("no minimal solution for the T scan");
      }
    } else {
      notes.push_back("T scan needs N >= 5");
    }
  }
  return {{"config", config_json(cfg)}, {"reports", reports}, {"notes", notes}};
}

nlohmann::json cmd_system_curve(const RunConfig& cfg) {
  validate(cfg);
  const SystemSpec spec = system_spec(cfg);
  const std::vector<double> sigmas = cfg.sigmas.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0} : cfg.sigmas;
  const UpsilonCurve curve = upsilon_curve(spec, sigmas, cfg.steps);
  json entries = json::array();
  for (const UpsilonEntry& e : curve.entries) {
    entries.push_back({{"sigma", e.sigma},
                       {"lambda_star", e.lambda_star},
                       {"gamma_star", e.gamma_star},
                       {"traced", e.traced},
                       {"diagnostic", e.diagnostic}});
  }
  return {{"config", config_json(cfg)},
          {"curve", entries},
          {"probes", curve.probes},
          {"inconsistent", curve.inconsistent},
          {"diagnostics", curve.diagnostics}};
}

nlohmann::json cmd_lemma(const RunConfig& cfg) {
  validate(cfg);
  const Nonlinearity nl = Nonlinearity::parse(cfg.nl);
  const bool class_s = nl.class_tag() == NonlinearityClass::S;
  json j = {{"config", config_json(cfg)}, {"nonlinearity", nl.spec()}};

  std::vector<double> samples;
  for (int i = 0; i <= 200; ++i) {
    samples.push_back(class_s ? 0.999 * i / 200.0 : 50.0 * i / 200.0);
  }
  j["classification"] = to_string(classify(nl, samples));
  j["f0"] = nl.f(0.0);
  j["f0_is_one"] = nl.f(0.0) == 1.0;
  j["strictly_convex"] = strict_convexity_check(nl, samples);
  json ratios = json::array();
  for (double t : class_s ? std::vector<double>{0.5, 0.9, 0.99} : std::vector<double>{1.0, 10.0, 100.0}) {
    ratios.push_back({{"t", t}, {"ratio", superlinearity_ratio(nl, t)}});
  }
  j["superlinearity_ratio"] = ratios;
  if (class_s) {
    j["mu"] = find_mu_s(nl, 1.0);
  } else {
    if (nl.log_convex()) {
      const auto grid = hybrid_grid(1000.0);
      const double mu = find_mu_r(nl, 1.0, grid);
      j["mu"] = mu;
      j["k"] = find_k(nl, mu, cfg.dim);
    } else {
      j["mu"] = nullptr;
      j["k"] = nullptr;
      j["note"] = "the scaling search needs a log-convex nonlinearity";
    }
    if (cfg.dim > 4) {
      std::vector<double> tail;
      for (int i = 1; i <= 10; ++i) tail.push_back(1000.0 * i);
      const SupercriticalCheck sc = supercritical_check(nl, cfg.dim, tail);
      j["supercritical"] = {{"threshold", sc.threshold},
                            {"supercritical", sc.supercritical},
                            {"min_ratio", sc.min_ratio},
                            {"margin", sc.margin}};
    } else {
      j["supercritical"] = nullptr;
    }
  }
  return j;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RejectedInput:
    case ErrorKind::WrongClass:
      return kExitConfig;
    case ErrorKind::Io:
      return kExitIo;
    default:
      return kExitSolver;
  }
}

namespace {

std::string key_help(const std::string& key) {
  static const std::map<std::string, std::string> help = {
      {"problem", "q, navier, dirichlet or system"},
      {"nl", "nonlinearity: exp, power:p=P, mems:p=P"},
      {"nl-g", "second nonlinearity of the system (default: nl)"},
      {"dim", "space dimension N"},
      {"grid", "interior grid nodes M"},
      {"lambda", "parameter for probe and identities"},
      {"lambdas", "comma-separated lambda grid for probe"},
      {"sigma", "ray slope gamma / lambda for the system"},
      {"sigmas", "comma-separated slopes for system-curve"},
      {"lambda-init", "first continuation lambda (0: automatic)"},
      {"ds", "initial arclength step (0: lambda-init / 4)"},
      {"steps", "continuation steps"},
      {"tol", "Newton tolerance"},
      {"seed", "seed of the search starts"},
      {"starts", "search starts K"},
      {"output", "output file (default: stdout)"},
      {"format", "branch: csv or json; other verbs write json"},
      {"plot", "SVG diagram path (branch only)"}};
  const auto it = help.find(key);
  return it == help.end() ? std::string() : it->second;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Radial Gelfand-type problems: branches, extremal parameters, uniqueness probes"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string config_path;
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"branch", "continuation branch as CSV (or JSON), optional SVG diagram"},
      {"lambda-star", "the fold of the branch"},
      {"probe", "deflated multi-start search at lambda, or over lambdas"},
      {"identities", "integral identities and scans on computed solutions"},
      {"system-curve", "extremal curve of the system over sigmas"},
      {"lemma-check", "scaling constants and class checks for a nonlinearity"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key=value or JSON config file");
    for (const std::string& key : config_keys()) sub->add_option("--" + key, flags[key], key_help(key));
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  CLI::App* sub = *std::find_if(subs.begin(), subs.end(), [](CLI::App* s) { return s->parsed(); });
  const std::string verb = sub->get_name();

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::string text;
      try {
        text = read_file(config_path);
      } catch (const Error& e) {
        throw Error(ErrorKind::RejectedInput, e.what());
      }
      apply_config(cfg, parse_config_text(text));
    }
    ConfigEntries cli;
    for (const std::string& key : config_keys()) {
      if (sub->count("--" + key) > 0) cli.emplace_back(key, flags[key]);
    }
    apply_config(cfg, cli);
    validate(cfg);
    if (verb != "branch" && cfg.format == OutputFormat::Csv && sub->count("--format") > 0) {
      throw Error(ErrorKind::RejectedInput, verb + " writes JSON only");
    }
    if (!cfg.plot.empty() && verb != "branch") throw Error(ErrorKind::RejectedInput, "plot applies to branch only");

    std::string out;
    std::string svg;
    if (verb == "branch") {
      out = cmd_branch(cfg, &svg);
    } else {
      json j;
      if (verb == "lambda-star") j = cmd_lambda_star(cfg);
      else if (verb == "probe") j = cmd_probe(cfg);
      else if (verb == "identities") j = cmd_identities(cfg);
      else if (verb == "system-curve") j = cmd_system_curve(cfg);
      else j = cmd_lemma(cfg);
      out = j.dump(2) + "\n";
    }
    if (cfg.output.empty()) {
      std::cout << out;
    } else {
      write_atomic(cfg.output, out);
    }
    if (!svg.empty()) write_atomic(cfg.plot, svg);
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "gelfand " << verb << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gelfand " << verb << ": " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace gelfand
