#pragma once

#include "sch/config.hpp"
#include "sch/experiments.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sch {

enum ExitCode : int {
    exit_pass = 0,
    exit_assertion_failed = 1,
    exit_usage_error = 2,
    exit_divergence = 3,
};

struct RunOptions {
    std::string out_dir;          // empty: config.output.dir
    bool quiet = false;
    std::ostream* log = nullptr;  // progress lines unless quiet
};

struct RunOutcome {
    int exit_code = exit_pass;
    std::vector<Check> checks;
    std::string error;  // solver failure message, if any
    std::string csv;
    std::string summary_json;
};

/// Scenario described by a validated configuration.
Scenario build_scenario(const RunConfig& config);

/// Initial datum of the second path of a continuous-dependence study:
/// u0 + c cos(k pi x / L_x) with ||difference||_* = config.initial.perturbation.
SpectralField perturbed_initial(const RunConfig& config, const Scenario& scenario);

/// Executes the configured mode and returns the artifacts without touching the
/// filesystem. Solver divergence is reported through exit_divergence.
RunOutcome execute(const RunConfig& config, const RunOptions& options = {});

/// execute() plus writing <dir>/<mode>.csv, <dir>/summary.json and
/// <dir>/config.ini. Returns the exit code.
int run(const RunConfig& config, const RunOptions& options = {});

}  // namespace sch
