#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sch {

inline constexpr const char* artifact_version = "0.1.0";

/// Run configuration. Text form: `[section]` headers followed by `key = value`
/// lines; `#` and `;` start comments; lists are comma separated. Every key is
/// optional and defaults to a deterministic quartic-well run.
struct RunConfig {
    struct Run {
        std::string mode = "simulate";  // simulate | continuous_dependence | vanishing_viscosity
                                        // | yosida_sweep | ensemble | regularity
        std::uint64_t seed = 0;
        int threads = 1;
        bool operator==(const Run&) const = default;
    } run;
    struct DomainSettings {
        int dimension = 1;
        double length_x = 10.0;
        double length_y = 10.0;
        int modes_x = 64;
        int modes_y = 16;  // used only in 2D
        bool operator==(const DomainSettings&) const = default;
    } domain;
    struct PotentialSettings {
        std::string name = "quartic";
        double scale = 1.0;           // beta = scale * beta_unit
        double pi_coefficient = 1.0;  // pi(r) = -pi_coefficient * r
        bool operator==(const PotentialSettings&) const = default;
    } potential;
    struct NoiseSettings {
        std::string kind = "none";  // none | additive | multiplicative
        int modes = 16;
        double sigma = 0.1;
        double rho = 1.0;
        bool mean_zero = true;
        double clamp = 1.0;
        std::string map = "clamp";  // clamp | constant
        int smoothing = 0;
        double base_dt = 0.0;
        bool operator==(const NoiseSettings&) const = default;
    } noise;
    struct SolverSettings {
        double epsilon = 0.0;
        double lambda = 1e-3;
        double dt = 1e-4;
        double horizon = 0.1;
        double newton_tol = 1e-10;
        int newton_max_iter = 50;
        int cg_max_iter = 500;
        std::string splitting = "convex_splitting";  // convex_splitting | fully_implicit
        int max_rejections = 5;
        double source_constant = 0.0;
        double source_amplitude = 0.0;
        int source_mode = 1;
        bool operator==(const SolverSettings&) const = default;
    } solver;
    struct InitialSettings {
        std::string kind = "cosine";  // cosine | constant | random
        double mean = 0.0;
        double amplitude = 0.1;
        int mode_x = 1;
        int mode_y = 0;
        double decay = 1.0;
        double perturbation = 1e-3;  // ||u0^1 - u0^2||_* for continuous dependence
        int perturbation_mode = 1;
        bool operator==(const InitialSettings&) const = default;
    } initial;
    struct SweepSettings {
        std::vector<double> epsilon{0.1, 0.01, 0.001, 0.0};
        std::vector<double> lambda{0.1, 0.01, 0.001};
        std::vector<int> smoothing{1, 4, 16, 64};
        int members = 16;
        double k_cap = 0.0;  // <= 0: derived from a deterministic reference run
        std::vector<double> ensemble_epsilon;  // empty: solver value
        std::vector<double> ensemble_lambda;   // empty: solver value
        bool operator==(const SweepSettings&) const = default;
    } sweep;
    struct OutputSettings {
        std::string dir = "out";
        std::string format = "csv";
        bool operator==(const OutputSettings&) const = default;
    } output;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. ParseError carries the 1-based line; ValidationError
/// names the violated hypothesis proxy.
RunConfig parse_config(const std::string& text);

/// Parses without validation (for callers that apply overrides first).
RunConfig parse_config_unvalidated(const std::string& text);

/// Canonical text with every key, doubles in shortest round-trip form.
std::string emit_config(const RunConfig& config);

/// Applies SCH_<SECTION>_<KEY> overrides from `getenv` (defaults to std::getenv).
void apply_env_overrides(RunConfig& config,
                         const std::function<const char*(const char*)>& getenv = nullptr);

/// Structural checks: registry names, lambda > 0, eps >= 0, finite C_pi,
/// finite Hilbert-Schmidt ledger, multiplicative noise mean-zero.
void validate_config(const RunConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace sch
