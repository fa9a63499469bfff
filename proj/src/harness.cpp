#include "ofo/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ofo {

namespace {

using nlohmann::json;

Vector to_vector(const json & j, const char * what)
{
  if (!j.is_array()) { throw ConfigError(std::string(what) + ": expected an array"); }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) { v(static_cast<Index>(i)) = j[i].get<double>(); }
  return v;
}

Matrix to_matrix(const json & j, const char * what)
{
  if (!j.is_array() || j.empty()) { throw ConfigError(std::string(what) + ": expected an array of rows"); }
  const auto rows = j.size();
  const auto cols = j[0].size();
  Matrix M(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) { throw ConfigError(std::string(what) + ": ragged matrix"); }
    for (std::size_t c = 0; c < cols; ++c) { M(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>(); }
  }
  return M;
}

// Applies the keys present in j onto p.
void apply_params(const json & j, OfoParams & p)
{
  if (!j.is_object()) { throw ConfigError("params: expected an object"); }
  auto num = [&](const char * key, Scalar & dst) {
    if (j.contains(key)) { dst = j.at(key).get<double>(); }
  };
  num("alpha_min", p.alpha_min);
  num("alpha_max", p.alpha_max);
  num("alpha0", p.alpha0);
  num("p_max", p.p_max);
  num("t_min", p.t_min);
  num("t_max", p.t_max);
  num("beta1", p.beta1);
  num("beta2", p.beta2);
  if (j.contains("S0")) {
    const json & s = j.at("S0");
    // A flat array is read as a diagonal.
    p.S0 = (s.is_array() && !s.empty() && s[0].is_number()) ? Matrix(to_vector(s, "S0").asDiagonal())
                                                            : to_matrix(s, "S0");
  }
  if (j.contains("mode")) { p.mode = adaptation_mode_from_string(j.at("mode").get<std::string>()); }
  if (j.contains("step_adaptation")) { p.step_adaptation = j.at("step_adaptation").get<bool>(); }
}

Reference parse_reference(const json & j)
{
  Reference r;
  if (!j.is_array() || j.empty()) { throw ConfigError("reference: expected a nonempty list of [time, value]"); }
  for (const auto & bp : j) {
    if (!bp.is_array() || bp.size() != 2) { throw ConfigError("reference: breakpoints are [time, value] pairs"); }
    r.points.push_back({bp[0].get<double>(), bp[1].get<double>()});
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    if (r.points[i].time <= r.points[i - 1].time) { throw ConfigError("reference: breakpoint times must increase"); }
  }
  return r;
}

void parse_gaslift(const json & j, GasLiftSurrogate & g)
{
  if (j.contains("a")) { g.a = to_vector(j.at("a"), "a"); }
  if (j.contains("b")) { g.b = to_vector(j.at("b"), "b"); }
  if (j.contains("u_min")) { g.u_min = to_vector(j.at("u_min"), "u_min"); }
  if (j.contains("u_max")) { g.u_max = to_vector(j.at("u_max"), "u_max"); }
  if (j.contains("y_min")) { g.y_min = to_vector(j.at("y_min"), "y_min"); }
  if (j.contains("y_max")) { g.y_max = to_vector(j.at("y_max"), "y_max"); }
  if (j.contains("wells_platform_0")) { g.wells_platform_0 = j.at("wells_platform_0").get<Index>(); }
  if (j.contains("gas_budget")) { g.gas_budget = j.at("gas_budget").get<double>(); }
}

void parse_cstr(const json & j, CstrParams & c)
{
  const std::pair<const char *, Scalar *> fields[] = {
    {"V", &c.V},         {"k1", &c.k1},         {"k2", &c.k2},         {"k3", &c.k3},
    {"F_min", &c.F_min}, {"F_max", &c.F_max},   {"cAi_min", &c.cAi_min}, {"cAi_max", &c.cAi_max},
    {"cA_min", &c.cA_min}, {"cA_max", &c.cA_max}, {"cB_min", &c.cB_min}, {"cB_max", &c.cB_max},
    {"F0", &c.F0},       {"cAi0", &c.cAi0},     {"cA0", &c.cA0},       {"cB0", &c.cB0},
    {"dT", &c.dT},       {"substep", &c.substep},
  };
  for (const auto & [key, dst] : fields) {
    if (j.contains(key)) { *dst = j.at(key).get<double>(); }
  }
}

Index plant_inputs(const ScenarioConfig & cfg)
{
  if (cfg.plant == "gaslift") { return cfg.gaslift.a.size(); }
  return 2;
}

void write_summary(const std::string & path, const ErrorReport & report)
{
  json j;
  j["baseline"]  = report.baseline;
  j["best_phi"]  = report.best_phi;
  j["tolerance"] = report.tolerance;
  if (report.baseline_epsilon) { j["baseline_epsilon"] = *report.baseline_epsilon; }
  j["runs"] = json::array();
  for (const auto & r : report.runs) {
    json e;
    e["label"]                   = r.label;
    e["csv"]                     = r.csv;
    e["final_phi"]               = r.final_phi;
    e["best_phi"]                = r.best_phi;
    e["records"]                 = r.records;
    e["iterations_to_tolerance"] = r.iters_to_tol;
    e["monotonicity_violations"] = r.violations;
    e["termination"]             = r.termination;
    if (r.epsilon) {
      e["epsilon"] = *r.epsilon;
      if (report.baseline_epsilon && *report.baseline_epsilon > 0) {
        e["ratio_to_baseline"] = *r.epsilon / *report.baseline_epsilon;
      }
    }
    j["runs"].push_back(e);
  }
  std::ofstream os(path);
  if (!os) { throw ConfigError("cannot write " + path); }
  os << j.dump(2) << '\n';
}

std::string safe_name(std::string s)
{
  for (char & c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') { c = '_'; }
  }
  return s;
}

// Runs each (label, params) pair, writes CSVs and summary.json.
ErrorReport execute(const ScenarioConfig & cfg, const std::vector<std::pair<std::string, OfoParams>> & runs,
                    const std::string & baseline)
{
  std::filesystem::create_directories(cfg.output_dir);
  ErrorReport report;
  report.baseline = baseline;
  std::vector<RunTrace> traces;
  for (const auto & [label, params] : runs) {
    traces.push_back(run_config(cfg, params));
    const RunTrace & tr = traces.back();
    if (tr.termination == Termination::error) { throw Error("run '" + label + "' failed: " + tr.error); }
  }

  report.best_phi = traces.front().records.front().phi;
  for (const auto & tr : traces) {
    for (const auto & r : tr.records) { report.best_phi = std::min(report.best_phi, r.phi); }
  }
  report.tolerance = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(report.best_phi));

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunTrace & tr = traces[i];
    RunSummary s;
    s.label       = runs[i].first;
    s.csv         = safe_name(cfg.name + "_" + s.label) + ".csv";
    s.final_phi   = tr.records.back().phi;
    s.best_phi    = s.final_phi;
    for (const auto & r : tr.records) { s.best_phi = std::min(s.best_phi, r.phi); }
    s.records      = static_cast<Index>(tr.records.size());
    s.iters_to_tol = iterations_to_tolerance(tr, report.best_phi, report.tolerance);
    s.violations   = monotonicity_violations(tr);
    s.termination  = std::string(to_string(tr.termination));
    if (cfg.plant == "cstr" && cfg.reference) {
      s.epsilon = compute_error(tr, *cfg.reference, cfg.error_horizon, cfg.cstr.dT, 1);
    }
    write_csv((std::filesystem::path(cfg.output_dir) / s.csv).string(), tr);
    if (s.label == baseline) { report.baseline_epsilon = s.epsilon; }
    report.runs.push_back(std::move(s));
  }
  write_summary((std::filesystem::path(cfg.output_dir) / (safe_name(cfg.name) + "_summary.json")).string(), report);
  return report;
}

}  // namespace

std::string format_double(Scalar v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScenarioConfig parse_scenario(const std::string & text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  try {
    if (!j.is_object()) { throw ConfigError("scenario: top level must be an object"); }
    cfg.name = j.value("name", cfg.name);

    const json & plant = j.at("plant");
    cfg.plant          = plant.is_string() ? plant.get<std::string>() : plant.at("kind").get<std::string>();
    if (cfg.plant != "toy" && cfg.plant != "rosenbrock" && cfg.plant != "gaslift" && cfg.plant != "cstr") {
      throw ConfigError("unknown plant '" + cfg.plant + "'");
    }
    if (plant.is_object()) {
      if (cfg.plant == "gaslift") { parse_gaslift(plant, cfg.gaslift); }
      if (cfg.plant == "cstr") { parse_cstr(plant, cfg.cstr); }
    }

    if (j.contains("params")) { apply_params(j.at("params"), cfg.params); }
    const Index n_u = plant_inputs(cfg);
    if (cfg.params.S0.size() == 0) { cfg.params.S0 = Matrix::Identity(n_u, n_u); }
    if (j.contains("u0")) { cfg.u0 = to_vector(j.at("u0"), "u0"); }
    cfg.n_iters             = j.value("n_iters", cfg.n_iters);
    cfg.stop_on_convergence = j.value("stop_on_convergence", cfg.stop_on_convergence);
    cfg.error_horizon       = j.value("error_horizon", cfg.error_horizon);
    cfg.abs_tol             = j.value("abs_tol", cfg.abs_tol);
    cfg.rel_tol             = j.value("rel_tol", cfg.rel_tol);
    cfg.output_dir          = j.value("output_dir", cfg.output_dir);
    cfg.baseline            = j.value("baseline", cfg.baseline);
    if (j.contains("reference")) { cfg.reference = parse_reference(j.at("reference")); }
    if (cfg.n_iters < 0) { throw ConfigError("n_iters must be nonnegative"); }

    if (j.contains("sweep")) {
      for (const auto & c : j.at("sweep")) {
        SweepCase sc;
        sc.label = c.value("label", "case_" + std::to_string(cfg.sweep.size() + 1));
        sc.alpha = c.at("alpha").get<double>();
        const json & s = c.at("S");
        sc.S = (s.is_array() && !s.empty() && s[0].is_number()) ? Matrix(to_vector(s, "S").asDiagonal()) : to_matrix(s, "S");
        if (sc.S.rows() != n_u || sc.S.cols() != n_u) { throw ConfigError("sweep '" + sc.label + "': S has the wrong size"); }
        if (!spd_project_check(sc.S, 0.0) || symmetric_eigenvalues(sc.S)(0) <= 0) {
          throw ConfigError("sweep '" + sc.label + "': S must be symmetric positive definite");
        }
        if (!(sc.alpha > 0)) { throw ConfigError("sweep '" + sc.label + "': alpha must be positive"); }
        cfg.sweep.push_back(std::move(sc));
      }
    }
    if (j.contains("variants")) {
      for (const auto & [name, v] : j.at("variants").items()) {
        Variant var{name, cfg.params};
        apply_params(v, var.params);
        var.params.validate(n_u);
        cfg.variants.push_back(std::move(var));
      }
    }

    cfg.params.validate(n_u);
    if (cfg.u0.size() != 0 && cfg.u0.size() != n_u) { throw ConfigError("u0 has the wrong dimension"); }
    if (cfg.plant == "cstr") {
      cfg.cstr.validate();
      if (!cfg.reference) { throw ConfigError("cstr scenario needs a reference trajectory"); }
    }
  } catch (const json::exception & e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string & path)
{
  std::ifstream is(path);
  if (!is) { throw ConfigError("cannot open scenario " + path); }
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str());
}

PlantWithConstraints make_plant(const ScenarioConfig & cfg)
{
  if (cfg.plant == "toy") { return toy_plant(); }
  if (cfg.plant == "rosenbrock") { return rosenbrock_plant(); }
  if (cfg.plant == "gaslift") { return gaslift_plant(cfg.gaslift); }
  if (cfg.plant == "cstr") { return cstr_plant(cfg.cstr, *cfg.reference); }
  throw ConfigError("unknown plant '" + cfg.plant + "'");
}

Vector initial_input(const ScenarioConfig & cfg)
{
  if (cfg.u0.size() > 0) { return cfg.u0; }
  Vector u0(2);
  if (cfg.plant == "toy") {
    u0 << -0.8, -0.5;
  } else if (cfg.plant == "rosenbrock") {
    u0 << 0.5, 0.5;
  } else if (cfg.plant == "gaslift") {
    return GasLiftSurrogate::default_u0();
  } else {
    u0 << cfg.cstr.F0, cfg.cstr.cAi0;
  }
  return u0;
}

OfoParams variant_params(const ScenarioConfig & cfg, const std::string & name)
{
  for (const auto & v : cfg.variants) {
    if (v.name == name) { return v.params; }
  }
  OfoParams p = cfg.params;
  p.mode      = adaptation_mode_from_string(name);
  p.validate(plant_inputs(cfg));
  return p;
}

OfoParams sweep_params(const ScenarioConfig & cfg, const SweepCase & c)
{
  OfoParams p       = cfg.params;
  p.mode            = AdaptationMode::fixed;
  p.step_adaptation = false;
  p.S0              = c.S;
  p.alpha0          = c.alpha;
  p.alpha_max       = c.alpha;
  p.alpha_min       = std::min(p.alpha_min, c.alpha);
  const Vector lam  = symmetric_eigenvalues(c.S);
  p.t_min           = std::min(p.t_min, lam(0));
  p.t_max           = std::max(p.t_max, lam(lam.size() - 1));
  return p;
}

RunTrace run_config(const ScenarioConfig & cfg, const OfoParams & params)
{
  auto [plant, cons] = make_plant(cfg);
  RunOptions opt;
  opt.stop_on_convergence = cfg.stop_on_convergence;
  return run(plant, cons, params, initial_input(cfg), cfg.n_iters, opt);
}

Scalar compute_error(const RunTrace & trace, const Reference & reference, Index N, Scalar dT, Index channel)
{
  if (N <= 0) { throw ConfigError("compute_error: horizon must be positive"); }
  if (static_cast<Index>(trace.records.size()) < N + 1) {
    throw ConfigError("compute_error: trace is shorter than the error horizon");
  }
  Scalar sum = 0;
  for (Index i = 1; i <= N; ++i) {
    const auto & rec = trace.records[static_cast<std::size_t>(i)];
    const Scalar e   = rec.y(channel) - reference(static_cast<Scalar>(rec.k) * dT);
    sum += e * e;
  }
  return sum / static_cast<Scalar>(N);
}

Index iterations_to_tolerance(const RunTrace & trace, Scalar target, Scalar tol)
{
  for (const auto & r : trace.records) {
    if (std::abs(r.phi - target) <= tol) { return r.k; }
  }
  return -1;
}

Index monotonicity_violations(const RunTrace & trace, Scalar threshold)
{
  Index n = 0;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].phi - trace.records[i - 1].phi > threshold) { ++n; }
  }
  return n;
}

void write_csv(std::ostream & os, const RunTrace & trace)
{
  if (trace.records.empty()) { return; }
  const Index nu = trace.records.front().u.size();
  const Index ny = trace.records.front().y.size();
  os << "k";
  for (Index i = 1; i <= nu; ++i) { os << ",u_" << i; }
  for (Index i = 1; i <= ny; ++i) { os << ",y_" << i; }
  os << ",phi,alpha";
  for (Index i = 1; i <= nu; ++i) { os << ",w_" << i; }
  for (Index i = 1; i <= nu; ++i) { os << ",S_eig_" << i; }
  os << ",D_fro,active,adapted\n";
  for (const auto & r : trace.records) {
    os << r.k;
    for (Index i = 0; i < nu; ++i) { os << ',' << format_double(r.u(i)); }
    for (Index i = 0; i < ny; ++i) { os << ',' << format_double(r.y(i)); }
    os << ',' << format_double(r.phi) << ',' << format_double(r.alpha);
    for (Index i = 0; i < nu; ++i) { os << ',' << format_double(r.w(i)); }
    for (Index i = 0; i < nu; ++i) { os << ',' << format_double(r.S_eigs(i)); }
    os << ',' << format_double(r.D_norm) << ',';
    for (std::size_t a = 0; a < r.active_constraints.size(); ++a) {
      if (a) { os << ';'; }
      os << r.active_constraints[a];
    }
    os << ',' << (r.adapted ? 1 : 0) << '\n';
  }
}

void write_csv(const std::string & path, const RunTrace & trace)
{
  std::ofstream os(path);
  if (!os) { throw ConfigError("cannot write " + path); }
  write_csv(os, trace);
}

ErrorReport run_scenario(const ScenarioConfig & cfg)
{
  return execute(cfg, {{std::string(to_string(cfg.params.mode)), cfg.params}}, "");
}

ErrorReport run_sweep(const ScenarioConfig & cfg)
{
  if (cfg.sweep.empty()) { return run_scenario(cfg); }
  std::vector<std::pair<std::string, OfoParams>> runs;
  for (const auto & c : cfg.sweep) { runs.emplace_back(c.label, sweep_params(cfg, c)); }
  return execute(cfg, runs, cfg.baseline.empty() ? cfg.sweep.front().label : cfg.baseline);
}

ErrorReport compare_modes(const ScenarioConfig & cfg, const std::vector<std::string> & modes)
{
  if (modes.empty()) { throw ConfigError("compare: no modes given"); }
  std::vector<std::pair<std::string, OfoParams>> runs;
  for (const auto & m : modes) {
    // Sweep labels are accepted too, so manual cases can sit next to adaptive runs.
    auto it = std::find_if(cfg.sweep.begin(), cfg.sweep.end(), [&](const SweepCase & c) { return c.label == m; });
    runs.emplace_back(m, it != cfg.sweep.end() ? sweep_params(cfg, *it) : variant_params(cfg, m));
  }
  return execute(cfg, runs, cfg.baseline.empty() ? modes.front() : cfg.baseline);
}

void print_report(std::ostream & os, const ErrorReport & report)
{
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %14s %14s %8s %8s %6s %14s\n", "run", "final_phi", "best_phi", "records",
                "to_tol", "viol", "epsilon");
  os << line;
  for (const auto & r : report.runs) {
    const std::string eps = r.epsilon ? format_double(*r.epsilon).substr(0, 12) : "-";
    std::snprintf(line, sizeof line, "%-22s %14.6g %14.6g %8lld %8lld %6lld %14s\n", r.label.c_str(), r.final_phi,
                  r.best_phi, static_cast<long long>(r.records), static_cast<long long>(r.iters_to_tol),
                  static_cast<long long>(r.violations), eps.c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "best phi %.10g, tolerance %.3g\n", report.best_phi, report.tolerance);
  os << line;
}

}  // namespace ofo
