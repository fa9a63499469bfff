#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ofo/controller.hpp"
#include "ofo/plants.hpp"

namespace ofo {

/// One manually tuned case: fixed metric S and fixed step alpha.
struct SweepCase
{
  std::string label;
  Scalar alpha = 1;
  Matrix S;
};

/// Named set of parameter overrides used by compare.
struct Variant
{
  std::string name;
  OfoParams params;
};

struct ScenarioConfig
{
  std::string name = "scenario";
  /// toy | rosenbrock | gaslift | cstr
  std::string plant = "toy";
  GasLiftSurrogate gaslift = GasLiftSurrogate::defaults();
  CstrParams cstr;
  std::optional<Reference> reference;
  OfoParams params;
  Vector u0;
  Index n_iters = 100;
  bool stop_on_convergence = true;
  /// Records used by the tracking error (CSTR only).
  Index error_horizon = 60;
  std::vector<SweepCase> sweep;
  /// Label of the sweep case the ratios refer to; the first case when empty.
  std::string baseline;
  std::vector<Variant> variants;
  /// Band around the best objective used for iterations-to-tolerance.
  Scalar abs_tol = 1e-3;
  Scalar rel_tol = 0;
  std::string output_dir = "out";
};

/// Parses a JSON scenario. Matrices are arrays of rows. Throws ConfigError.
ScenarioConfig parse_scenario(const std::string & text);
ScenarioConfig load_scenario(const std::string & path);

/// Fresh plant instance for one run (the CSTR simulator is never shared).
PlantWithConstraints make_plant(const ScenarioConfig & cfg);

/// Scenario u0, or the plant's documented starting point when none was given.
Vector initial_input(const ScenarioConfig & cfg);

/// Parameters of a variant by name; plain mode names apply to the base params.
OfoParams variant_params(const ScenarioConfig & cfg, const std::string & name);

/// Fixed-mode parameters for a sweep case; the eigenvalue band is widened to contain S.
OfoParams sweep_params(const ScenarioConfig & cfg, const SweepCase & c);

RunTrace run_config(const ScenarioConfig & cfg, const OfoParams & params);

/**
 * @brief Mean squared tracking error over records 1..N of the given output channel.
 *
 * Record k is compared with r(k * dT). Throws ConfigError when the trace has
 * fewer than N + 1 records.
 */
Scalar compute_error(const RunTrace & trace, const Reference & reference, Index N, Scalar dT, Index channel);

/// First record index with |phi - target| <= tol, or -1.
Index iterations_to_tolerance(const RunTrace & trace, Scalar target, Scalar tol);

/// Number of steps with phi_k - phi_{k-1} > threshold.
Index monotonicity_violations(const RunTrace & trace, Scalar threshold = 1e-6);

void write_csv(std::ostream & os, const RunTrace & trace);
void write_csv(const std::string & path, const RunTrace & trace);

struct RunSummary
{
  std::string label;
  std::string csv;
  Scalar final_phi = 0;
  Scalar best_phi = 0;
  Index records = 0;
  Index iters_to_tol = -1;
  Index violations = 0;
  std::optional<Scalar> epsilon;
  std::string termination;
};

struct ErrorReport
{
  std::vector<RunSummary> runs;
  /// Best objective over all runs, used for iterations-to-tolerance.
  Scalar best_phi = 0;
  Scalar tolerance = 0;
  std::string baseline;
  std::optional<Scalar> baseline_epsilon;
};

/// Single run with cfg.params. CSV and summary.json go to cfg.output_dir.
ErrorReport run_scenario(const ScenarioConfig & cfg);

/// One fixed-mode run per sweep case (or a single run when the sweep is empty).
ErrorReport run_sweep(const ScenarioConfig & cfg);

/// One run per named variant or mode with identical initial conditions.
ErrorReport compare_modes(const ScenarioConfig & cfg, const std::vector<std::string> & modes);

void print_report(std::ostream & os, const ErrorReport & report);

/// "%.17g"
std::string format_double(Scalar v);

}  // namespace ofo
