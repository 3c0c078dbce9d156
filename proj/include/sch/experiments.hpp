#pragma once

#include "sch/monotone.hpp"
#include "sch/noise.hpp"
#include "sch/spectral.hpp"
#include "sch/stepper.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sch {

// ---------------------------------------------------------------------------
// Diagnostics

struct DiagnosticRecord {
    double t = 0.0;
    double mean_u = 0.0;
    double norm_star = 0.0;  // ||u - m||_*
    double norm_h = 0.0;
    double norm_v1 = 0.0;
    double norm_v2 = 0.0;
    double norm_v3 = 0.0;  // H^3 surrogate
    double energy = 0.0;   // full E_lambda(u), pi_hat part included
    double energy_concave = 0.0;  // int pi_hat(u), the only part that can be negative
    double w_l1 = 0.0;
    double xi_l1 = 0.0;
    double beta_hat_mass = 0.0;   // int beta_hat_lambda(u)
    double conjugate_mass = 0.0;  // int conj(beta_hat)(beta_lambda(u))
    double residual = 0.0;  // variational residual of the step ending here (0 at t = 0)
    int newton_iters = 0;
};

/// Running suprema and trapezoid path integrals over a trajectory.
struct DiagnosticSummary {
    double sup_star_sq = 0.0;   // sup_t ||u - m||_*^2
    double sup_h_sq = 0.0;      // sup_t ||u||_H^2
    double sup_v1 = 0.0;        // sup_t ||u||_V1
    double sup_v3 = 0.0;
    double grad_l2_sq = 0.0;    // int_0^T ||grad u||^2
    double v2_l2_sq = 0.0;      // int_0^T ||u||_V2^2
    double max_w_l1 = 0.0;
    double max_xi_l1 = 0.0;
    double max_beta_hat_mass = 0.0;
    double max_conjugate_mass = 0.0;
    double max_energy_increase = 0.0;  // max_n E(u^{n+1}) - E(u^n), may be negative
    double max_residual = 0.0;
    double max_mean_defect = 0.0;  // max_n |(u^n)_D - (u_0)_D - (noise ledger)_D|
};

struct Diagnostics {
    std::vector<DiagnosticRecord> records;
    DiagnosticSummary summary;
};

/// One record per state. Throws NonFinite with the step index of the first
/// non-finite entry.
Diagnostics run_diagnostics(const Trajectory& trajectory, const Potential& potential,
                            const SolverConfig& config);

// ---------------------------------------------------------------------------
// Path norms

/// Trapezoid rule for int f dt over the sample times.
double trapezoid(std::span<const double> times, std::span<const double> values);

/// sqrt(int_0^T ||a(t) - b(t)||^2 dt) in the chosen norm; both trajectories
/// must share their sample times.
double path_distance(const Trajectory& a, const Trajectory& b, Norm kind);

/// sup_t ||a(t) - b(t)|| in the chosen norm.
double sup_distance(const Trajectory& a, const Trajectory& b, Norm kind);

/// Field with coefficients amplitude * z_k / (1 + mu_k)^decay, z_k standard
/// normal keyed by (seed, index). Mean zero when requested.
SpectralField random_field(const BasisPtr& basis, std::uint64_t seed, std::uint64_t index, double amplitude,
                           double decay, bool mean_zero = false);

// ---------------------------------------------------------------------------
// Scenarios and reports

/// Everything one pathwise run needs besides the stream index.
struct Scenario {
    BasisPtr basis;
    Potential potential;
    SolverConfig solver;
    DiffusionOperator diffusion;
    SpectralField u0;
    std::uint64_t seed = 0;
    double noise_base_dt = 0.0;  // > 0 gives nested increments

    NoiseModel noise(std::uint64_t stream = 0) const;
    Trajectory run(std::uint64_t stream = 0) const;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SweepReport {
    std::string variable;              // lambda | epsilon | dt | smoothing | member
    std::vector<std::string> columns;  // columns[0] is the sweep variable
    std::vector<std::vector<double>> rows;
    std::vector<Check> checks;

    std::vector<double> column(const std::string& name) const;
    bool passed() const;
    /// First failed check, or nullptr.
    const Check* first_failure() const;
};

/// max/min over positive finite entries; 1 when every entry is zero, inf when
/// zeros mix with positive values.
double spread(std::span<const double> values);

// ---------------------------------------------------------------------------
// Studies (each a pure function of its inputs)

struct PathData {
    SpectralField u0;
    SourceTerm source;
};

/// Two paths with shared noise for every eps in the grid; rows report
/// sup ||du||_*^2, eps sup ||du||_H^2, int ||grad du||^2, their sum, the data
/// norm ||du0||_*^2 + int ||dg||_*^2 and the ratio. Checks: finiteness, the
/// ratio cap and eps-uniformity (spread <= 10). A nonpositive k_cap is replaced
/// by 100x the ratio of a deterministic run at half the step.
/// Throws PreconditionViolated if the initial means differ beyond 1e-12.
SweepReport continuous_dependence_study(const Scenario& base, const PathData& first, const PathData& second,
                                        const std::vector<double>& eps_grid, double k_cap = 0.0);

/// eps runs against the eps = 0 run with shared noise. Rows: eps, the
/// L2(0,T;V1) distance d, v = eps sup ||u_eps||_V1, the L1 bounds on w and xi
/// and the time-integrated pairings of w - w_0, xi - xi_0 with the four lowest
/// basis functions (reported only). Checks over the positive entries: d and v
/// strictly decreasing, final <= 0.1 x initial.
SweepReport vanishing_viscosity_study(const Scenario& base, const std::vector<double>& eps_sequence);

/// Consecutive L2(0,T;V1) distances along a decreasing lambda sequence plus
/// the running L1 bounds on w and xi and the conjugate mass. Checks:
/// distances strictly decreasing, lambda-uniform bounds (spread <= 100).
SweepReport yosida_convergence_study(const Scenario& base, const std::vector<double>& lambdas);

/// H distance at T between runs driven by B_n and by B for each n; checks a
/// monotone decrease.
SweepReport smoothing_study(const Scenario& base, const std::vector<int>& levels);

/// Distance at T to the finest step in the list (nested noise); reports
/// observed rates without asserting them.
SweepReport dt_refinement_study(const Scenario& base, const std::vector<double>& dts);

/// Per-member pathwise quantities of an ensemble.
struct EnsembleResult {
    std::vector<std::string> quantities;
    std::vector<std::vector<double>> samples;  // samples[member][quantity]
    std::vector<double> mean;
    std::vector<double> standard_error;
};

/// M members on streams 0..M-1, executed in `order` (default identity) over
/// `threads` workers; reduction is in member order, so the result does not
/// depend on the schedule. Quantities: sup ||u - m||_*^2, int ||grad u||^2,
/// sup int beta_hat_lambda(u), sup conjugate mass. M >= 8.
EnsembleResult ensemble_expectations(const Scenario& base, int members,
                                     const std::vector<int>& order = {}, int threads = 1);

/// Ensemble estimates over a small (eps, lambda) grid. Checks finiteness and
/// uniformity of every estimate (spread <= 100).
SweepReport ensemble_sweep(const Scenario& base, int members, const std::vector<double>& eps_grid,
                           const std::vector<double>& lambda_grid, int threads = 1);

// ---------------------------------------------------------------------------
// Regularity

enum class GrowthBranch { Cubic, General };

struct RegularityReport {
    double sup_grad_rinv_w = 0.0;   // sup_t ||grad R_eps^{-1} w||_H
    double eps_lap_rinv_w = 0.0;    // eps ||Delta R_eps^{-1} w||_{L2(0,T;H)}
    double xi_l2 = 0.0;             // ||xi||_{L2(0,T;H)}
    double grad_xi_l2 = 0.0;        // ||grad xi||_{L2(0,T;H)}
    double sup_v3 = 0.0;
    double sup_v1 = 0.0;
    double embedding_constant = 0.0;  // measured V1 -> L6 constant (cubic branch)
    double bound = 0.0;               // C (1 + sup ||u||_V1^3), C = 2 sqrt(T) a C_emb^3
    bool bound_holds = true;
};

/// Throws GrowthMismatch for the cubic branch with a non-cubic graph.
RegularityReport regularity_monitor(const Trajectory& trajectory, const Potential& potential,
                                    const SolverConfig& config, GrowthBranch branch);

/// Regularity monitor along an eps grid with shared noise. Checks finiteness,
/// eps-uniformity (spread <= 10) of sup ||grad R^{-1} w|| and ||xi||_{L2 H},
/// and the cubic bound.
SweepReport regularity_study(const Scenario& base, const std::vector<double>& eps_grid);

/// max ||v||_{L6} / ||v||_V1 over `samples` random fields and the extra fields,
/// L6 taken by collocation-grid quadrature.
double embedding_constant_l6(const BasisPtr& basis, std::span<const SpectralField> extra, int samples,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Properties of A_lambda

struct MonotonicityCheck {
    double c = 0.0;           // (1/lambda + C_pi)^2 / 4
    double worst_margin = 0.0;  // min over pairs of <A v1 - A v2, d> + c ||d||^2
    bool passed = false;
};

/// <A(v1) - A(v2), v1 - v2> >= -c ||v1 - v2||_H^2 on random pairs.
MonotonicityCheck weak_monotonicity_check(const Stepper& stepper, const BasisPtr& basis, int pairs,
                                          std::uint64_t seed, const SpectralField* source = nullptr);

struct CoercivityCheck {
    double c1 = 0.5;
    double c1_prime = 0.0;  // (1/lambda + C_pi)^2 + 1/2
    double f1 = 0.0;        // ||g||_H^2
    double worst_margin = 0.0;
    bool passed = false;
};

/// <A(v), v> >= c1 ||v||_V2^2 - c1' ||v||_H^2 - f1 on random fields.
CoercivityCheck weak_coercivity_check(const Stepper& stepper, const BasisPtr& basis, int samples,
                                      std::uint64_t seed, const SpectralField* source = nullptr);

/// max over t and alpha in {1, 2, 4} of beta_hat(alpha (noise ledger)_D).
double noise_mean_moment(const Trajectory& trajectory, const MonotoneGraph& graph);

}  // namespace sch
