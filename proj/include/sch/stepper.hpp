#pragma once

#include "sch/monotone.hpp"
#include "sch/noise.hpp"
#include "sch/spectral.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sch {

enum class Splitting {
    ConvexSplitting,  // pi evaluated at the previous step
    FullyImplicit,
};

/// Source g(t): zero, constant, or piecewise linear between tabulated times
/// (held constant outside the table).
class SourceTerm {
public:
    SourceTerm() = default;

    static SourceTerm constant(SpectralField g);
    static SourceTerm tabulated(std::vector<double> times, std::vector<SpectralField> values);

    bool is_zero() const noexcept { return values_.empty(); }
    SpectralField at(const BasisPtr& basis, double t) const;

private:
    std::vector<double> times_;
    std::vector<SpectralField> values_;
};

struct SolverConfig {
    double epsilon = 0.0;
    double lambda = 1e-3;
    double dt = 1e-4;
    double horizon = 0.1;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    int cg_max_iter = 500;
    Splitting splitting = Splitting::ConvexSplitting;
    SourceTerm source;
    int max_rejections = 5;

    /// Throws ValidationError: eps >= 0, lambda > 0, 0 < dt <= T, newton_tol >= 1e-14.
    void validate() const;
    /// ceil(T / dt), ignoring a trailing sliver below 1e-9 dt.
    std::int64_t step_count() const;
};

struct SolverState {
    SpectralField u;
    SpectralField w;   // discrete chemical potential of the last step
    SpectralField xi;  // beta_lambda(u)
    SpectralField noise_ledger;  // sum of applied noise fields
    double t = 0.0;
    std::int64_t step_index = 0;
    int newton_iters_last = 0;
    std::vector<double> residual_history;  // Newton residuals of the last step
};

struct Trajectory {
    std::vector<SolverState> states;  // states[0] is the initial state
    double dt = 0.0;
    int rejections = 0;  // halvings performed over the run
};

/// Backward Euler on R_eps u with explicit noise:
///   (R_eps + dt Delta^2) u+ - dt Delta [beta_lambda(u+) + pi_split] = R_eps u + B dW - dt Delta g(t+)
/// solved by Newton with matrix-free conjugate gradients. The constant mode is
/// advanced exactly, so the mean follows the noise alone.
class Stepper {
public:
    Stepper(Potential potential, SolverConfig config);

    const Potential& potential() const noexcept { return potential_; }
    const SolverConfig& config() const noexcept { return config_; }

    /// State at t = 0 with w and xi evaluated at u0 (pi implicit).
    SolverState initial_state(const SpectralField& u0) const;

    /// One step of length config().dt driven by the noise field B dW.
    SolverState step(const SolverState& state, const SpectralField& noise_field) const;
    /// One step of length dt.
    SolverState step(const SolverState& state, const SpectralField& noise_field, double dt) const;
    /// Additive or multiplicative: B is evaluated at the pre-step state.
    SolverState step(const SolverState& state, const DiffusionOperator& diffusion,
                     std::span<const double> increment, double dt) const;
    /// As above, but requires the multiplicative kind (KindMismatch otherwise).
    SolverState step_multiplicative(const SolverState& state, const DiffusionOperator& diffusion,
                                    std::span<const double> increment, double dt) const;

    /// E(u) = 1/2 ||grad u||^2 + int (beta_hat_lambda(u) + pi_hat(u)) with grid quadrature.
    double energy(const SpectralField& u) const;
    /// int pi_hat(u) on the grid: the part of E that may be negative.
    double concave_energy(const SpectralField& u) const;

    /// <A_lambda(v), phi> = int Delta v Delta phi - int (beta_lambda(v) + pi(v) - g) Delta phi.
    double a_lambda_pairing(const SpectralField& v, const SpectralField& phi, const SpectralField& g) const;

    /// Residual of the variational identity for the step state -> next, one
    /// entry per basis function (constant mode included), measured in H.
    double variational_residual(const SolverState& prev, const SolverState& next,
                                const SpectralField& noise_field) const;

private:
    SpectralField explicit_pi(const SpectralField& u) const;
    SpectralField source_at(const BasisPtr& basis, double t) const;

    Potential potential_;
    SolverConfig config_;
};

/// Advances ceil(T/dt) steps. Noise increments come from the Wiener process
/// keyed by step index (or nested on its base grid). A step whose Newton solve
/// diverges is retried as two half steps with a Brownian-bridge split, up to
/// config.max_rejections nested halvings.
Trajectory simulate(const SpectralField& u0, const Potential& potential, const SolverConfig& config,
                    const NoiseModel& noise);

}  // namespace sch
