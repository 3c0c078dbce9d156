#include "sch/stepper.hpp"

#include "sch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sch {

// ---------------------------------------------------------------------------
// SourceTerm

SourceTerm SourceTerm::constant(SpectralField g)
{
    SourceTerm s;
    s.times_ = {0.0};
    s.values_.push_back(std::move(g));
    return s;
}

SourceTerm SourceTerm::tabulated(std::vector<double> times, std::vector<SpectralField> values)
{
    if (times.empty() || times.size() != values.size()) {
        throw DimensionMismatch("tabulated source needs one field per time");
    }
    if (!std::is_sorted(times.begin(), times.end()) ||
        std::adjacent_find(times.begin(), times.end()) != times.end()) {
        throw ValidationError("tabulated source times must be strictly increasing");
    }
    SourceTerm s;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
}

SpectralField SourceTerm::at(const BasisPtr& basis, double t) const
{
    if (values_.empty()) {
        return SpectralField(basis);
    }
    if (t <= times_.front()) {
        return values_.front();
    }
    if (t >= times_.back()) {
        return values_.back();
    }
    const auto hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
    const std::size_t lo = hi - 1;
    const double theta = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return (1.0 - theta) * values_[lo] + theta * values_[hi];
}

// ---------------------------------------------------------------------------
// SolverConfig

void SolverConfig::validate() const
{
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw ValidationError("viscosity eps must be >= 0");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("Yosida parameter lambda must be > 0");
    }
    if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon * (1.0 + 1e-12)) {
        throw ValidationError("time step must satisfy 0 < dt <= T");
    }
    if (!(newton_tol >= 1e-14)) {
        throw ValidationError("newton_tol must be >= 1e-14");
    }
    if (newton_max_iter < 1 || cg_max_iter < 1 || max_rejections < 0) {
        throw ValidationError("iteration caps must be positive");
    }
}

std::int64_t SolverConfig::step_count() const
{
    const double n = horizon / dt;
    const auto whole = static_cast<std::int64_t>(std::floor(n));
    return n - static_cast<double>(whole) > 1e-9 ? whole + 1 : std::max<std::int64_t>(whole, 1);
}

// ---------------------------------------------------------------------------
// Stepper

namespace {

// |D|-free weighted inner product over the nonconstant modes
double dot_modes(std::span<const double> w, std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        s += w[k] * a[k] * b[k];
    }
    return s;
}

void check_finite(const SpectralField& v, const char* name, std::int64_t step)
{
    for (double c : v.coefficients()) {
        if (!std::isfinite(c)) {
            throw NonFinite(name, step);
        }
    }
}

}  // namespace

Stepper::Stepper(Potential potential, SolverConfig config)
    : potential_(std::move(potential)), config_(std::move(config))
{
    config_.validate();
}

SpectralField Stepper::source_at(const BasisPtr& basis, double t) const
{
    return config_.source.at(basis, t);
}

SpectralField Stepper::explicit_pi(const SpectralField& u) const
{
    const auto& p = potential_.perturbation;
    if (p.linear_slope) {
        return *p.linear_slope * u;
    }
    return apply_pointwise(u, p.pi);
}

SolverState Stepper::initial_state(const SpectralField& u0) const
{
    const auto& g = potential_.graph;
    const double lambda = config_.lambda;
    SolverState s;
    s.u = u0;
    s.xi = apply_pointwise(u0, [&](double r) { return yosida(g, lambda, r); });
    s.w = apply_laplacian(u0) * -1.0 + s.xi + explicit_pi(u0) - source_at(u0.basis(), 0.0);
    s.noise_ledger = SpectralField(u0.basis());
    return s;
}

SolverState Stepper::step(const SolverState& state, const SpectralField& noise_field) const
{
    return step(state, noise_field, config_.dt);
}

SolverState Stepper::step(const SolverState& state, const DiffusionOperator& diffusion,
                          std::span<const double> increment, double dt) const
{
    if (diffusion.is_zero()) {
        return step(state, SpectralField(state.u.basis()), dt);
    }
    return step(state, diffusion.apply(state.u, increment), dt);
}

SolverState Stepper::step_multiplicative(const SolverState& state, const DiffusionOperator& diffusion,
                                         std::span<const double> increment, double dt) const
{
    if (diffusion.kind() != NoiseKind::Multiplicative) {
        throw KindMismatch("step_multiplicative needs multiplicative noise");
    }
    return step(state, diffusion, increment, dt);
}

SolverState Stepper::step(const SolverState& state, const SpectralField& noise_field, double dt) const
{
    const BasisPtr& basis = state.u.basis();
    if (noise_field.size() != state.u.size()) {
        throw DimensionMismatch("noise field and state live on different bases");
    }
    const auto mu = basis->eigenvalues();
    const auto wt = basis->weights();
    const auto& transform = basis->transform();
    const std::size_t n = state.u.size();
    const auto grid_n = static_cast<std::size_t>(basis->grid_size());
    const double eps = config_.epsilon;
    const double lambda = config_.lambda;
    const double tol = config_.newton_tol;
    const auto& graph = potential_.graph;
    const auto& pert = potential_.perturbation;
    const bool implicit_pi = config_.splitting == Splitting::FullyImplicit;
    const bool pi_in_grid = implicit_pi && !pert.linear_slope;
    const std::int64_t step_no = state.step_index + 1;
    const double t_next = state.t + dt;

    // linear diagonal and right-hand side
    std::vector<double> lin(n), rhs(n);
    const SpectralField g = source_at(basis, t_next);
    SpectralField pi_expl(basis);
    if (!implicit_pi) {
        pi_expl = explicit_pi(state.u);
    }
    for (std::size_t k = 0; k < n; ++k) {
        lin[k] = 1.0 + eps * mu[k] + dt * mu[k] * mu[k];
        if (implicit_pi && pert.linear_slope) {
            lin[k] += dt * mu[k] * *pert.linear_slope;
        }
        rhs[k] = (1.0 + eps * mu[k]) * state.u[k] + noise_field[k] + dt * mu[k] * (g[k] - pi_expl[k]);
    }

    std::vector<double> grid(grid_n), fval(grid_n), fder(grid_n), pf(n);
    auto nonlinear = [&](std::span<const double> coeffs, bool with_derivative) {
        transform.synthesize(coeffs, grid);
        for (std::size_t j = 0; j < grid_n; ++j) {
            const auto y = yosida_with_derivative(graph, lambda, grid[j]);
            fval[j] = y.value;
            fder[j] = y.derivative;
            if (pi_in_grid) {
                fval[j] += pert.pi(grid[j]);
                if (with_derivative) {
                    fder[j] += pert.pi_prime(grid[j]);
                }
            }
        }
        transform.analyze(fval, pf);
    };
    std::vector<double> F(n);
    auto residual = [&](std::span<const double> u) {
        nonlinear(u, true);
        F[0] = 0.0;
        double s = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            F[k] = lin[k] * u[k] + dt * mu[k] * pf[k] - rhs[k];
            s += wt[k] * F[k] * F[k];
        }
        return std::sqrt(basis->measure() * s);
    };

    SolverState next;
    std::vector<double> u(state.u.coefficients().begin(), state.u.coefficients().end());
    for (std::size_t k = 0; k < n; ++k) {
        u[k] += noise_field[k];
    }
    u[0] = state.u[0] + noise_field[0];  // exact mean update

    double r = residual(u);
    next.residual_history.push_back(r);
    std::vector<double> delta(n), res(n), z(n), p(n), ap(n), dgrid(grid_n), trial(n), fder_saved(grid_n);
    int iter = 0;
    while (!(r <= tol)) {  // NaN residuals enter the loop and are reported
        if (!std::isfinite(r)) {
            throw NewtonDiverged("Newton residual is not finite", 0.5 * dt, step_no);
        }
        if (iter == config_.newton_max_iter) {
            throw NewtonDiverged("Newton residual " + std::to_string(r) + " above tolerance after " +
                                     std::to_string(iter) + " iterations",
                                 0.5 * dt, step_no);
        }
        ++iter;

        // CG on the 1/mu-scaled symmetric system S d = -F/mu over modes k >= 1
        fder_saved = fder;
        double mean_fd = 0.0;
        for (double d : fder_saved) {
            mean_fd += d;
        }
        mean_fd /= static_cast<double>(grid_n);
        auto apply_s = [&](std::span<const double> d, std::span<double> out) {
            transform.synthesize(d, dgrid);
            for (std::size_t j = 0; j < grid_n; ++j) {
                dgrid[j] *= fder_saved[j];
            }
            transform.analyze(dgrid, out);
            out[0] = 0.0;
            for (std::size_t k = 1; k < n; ++k) {
                out[k] = lin[k] / mu[k] * d[k] + dt * out[k];
            }
        };
        auto unscaled_norm = [&](std::span<const double> v) {
            double s = 0.0;
            for (std::size_t k = 1; k < n; ++k) {
                s += wt[k] * mu[k] * mu[k] * v[k] * v[k];
            }
            return std::sqrt(basis->measure() * s);
        };
        const double cg_tol = 0.1 * tol;
        std::fill(delta.begin(), delta.end(), 0.0);
        res[0] = z[0] = p[0] = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            res[k] = -F[k] / mu[k];
            z[k] = res[k] / (lin[k] / mu[k] + dt * std::max(mean_fd, 0.0));
            p[k] = z[k];
        }
        double rz = dot_modes(wt, res, z);
        for (int cg = 0; cg < config_.cg_max_iter && unscaled_norm(res) > cg_tol; ++cg) {
            apply_s(p, ap);
            const double pap = dot_modes(wt, p, ap);
            if (!(pap > 0.0)) {
                throw NewtonDiverged("Newton system lost positive definiteness", 0.5 * dt, step_no);
            }
            const double alpha = rz / pap;
            for (std::size_t k = 1; k < n; ++k) {
                delta[k] += alpha * p[k];
                res[k] -= alpha * ap[k];
                z[k] = res[k] / (lin[k] / mu[k] + dt * std::max(mean_fd, 0.0));
            }
            const double rz_next = dot_modes(wt, res, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t k = 1; k < n; ++k) {
                p[k] = z[k] + beta * p[k];
            }
        }

        // backtracking on ||F||_H
        double step_len = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            for (std::size_t k = 0; k < n; ++k) {
                trial[k] = u[k] + step_len * delta[k];
            }
            const double r_trial = residual(trial);
            if (r_trial <= (1.0 - 1e-4 * step_len) * r || r_trial <= tol) {
                u.swap(trial);
                r = r_trial;
                accepted = true;
                break;
            }
            step_len *= 0.5;
        }
        if (!accepted) {
            throw NewtonDiverged("Newton line search stalled at residual " + std::to_string(r), 0.5 * dt,
                                 step_no);
        }
        next.residual_history.push_back(r);
    }

    next.u = SpectralField(basis, u);
    check_finite(next.u, "u", step_no);
    next.xi = apply_pointwise(next.u, [&](double x) { return yosida(graph, lambda, x); });
    SpectralField pi_split = implicit_pi ? explicit_pi(next.u) : std::move(pi_expl);
    next.w = apply_laplacian(next.u) * -1.0 + next.xi + pi_split - g;
    next.noise_ledger = state.noise_ledger + noise_field;
    next.t = t_next;
    next.step_index = step_no;
    next.newton_iters_last = iter;
    return next;
}

double Stepper::energy(const SpectralField& u) const
{
    const auto& g = potential_.graph;
    const auto& pi_hat = potential_.perturbation.pi_hat;
    const double lambda = config_.lambda;
    return 0.5 * grad_norm_sq(u) +
           integrate_pointwise(u, [&](double r) { return moreau_envelope(g, lambda, r) + pi_hat(r); });
}

double Stepper::concave_energy(const SpectralField& u) const
{
    return integrate_pointwise(u, potential_.perturbation.pi_hat);
}

double Stepper::a_lambda_pairing(const SpectralField& v, const SpectralField& phi, const SpectralField& g) const
{
    const auto& graph = potential_.graph;
    const auto& pi = potential_.perturbation.pi;
    const double lambda = config_.lambda;
    const SpectralField h = apply_pointwise(v, [&](double r) { return yosida(graph, lambda, r) + pi(r); }) - g;
    const auto mu = v.basis()->eigenvalues();
    const auto wt = v.basis()->weights();
    double s = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        s += wt[k] * mu[k] * (mu[k] * v[k] + h[k]) * phi[k];
    }
    return v.basis()->measure() * s;
}

double Stepper::variational_residual(const SolverState& prev, const SolverState& next,
                                     const SpectralField& noise_field) const
{
    const double dt = next.t - prev.t;
    const double eps = config_.epsilon;
    const auto mu = prev.u.basis()->eigenvalues();
    SpectralField r(prev.u.basis());
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = (1.0 + eps * mu[k]) * (next.u[k] - prev.u[k]) + dt * mu[k] * next.w[k] - noise_field[k];
    }
    return norm(r, norm_h);
}

// ---------------------------------------------------------------------------
// simulate

Trajectory simulate(const SpectralField& u0, const Potential& potential, const SolverConfig& config,
                    const NoiseModel& noise)
{
    const Stepper stepper(potential, config);
    const auto& diffusion = noise.diffusion;
    const auto& wiener = noise.wiener;
    const bool noisy = !diffusion.is_zero();
    if (noisy && wiener.mode_count() != diffusion.mode_count()) {
        throw DimensionMismatch("Wiener process and diffusion operator disagree on the mode count");
    }

    Trajectory traj;
    traj.dt = config.dt;
    const std::int64_t steps = config.step_count();
    traj.states.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.push_back(stepper.initial_state(u0));

    // advance over [state.t, state.t + dt] with the given increment, halving on divergence
    std::function<SolverState(const SolverState&, double, const std::vector<double>&, int, std::uint64_t,
                              std::int64_t)>
        advance = [&](const SolverState& s, double dt, const std::vector<double>& inc, int depth,
                      std::uint64_t node, std::int64_t outer) -> SolverState {
        try {
            return stepper.step(s, diffusion, inc, dt);
        } catch (const NewtonDiverged& e) {
            if (depth >= config.max_rejections) {
                throw NewtonDiverged(std::string(e.what()) + " (after " + std::to_string(depth) +
                                         " halvings)",
                                     0.5 * dt, outer + 1);
            }
        }
        ++traj.rejections;
        std::vector<double> first, second;
        if (noisy) {
            std::tie(first, second) = wiener.bridge_split(inc, dt, outer, node);
        }
        SolverState mid = advance(s, 0.5 * dt, first, depth + 1, 2 * node + 1, outer);
        mid.step_index = s.step_index;
        return advance(mid, 0.5 * dt, second, depth + 1, 2 * node + 2, outer);
    };

    for (std::int64_t i = 0; i < steps; ++i) {
        const SolverState& prev = traj.states.back();
        const double t0 = static_cast<double>(i) * config.dt;
        const double t1 = std::min(static_cast<double>(i + 1) * config.dt, config.horizon);
        const double dt = i + 1 == steps ? config.horizon - t0 : config.dt;
        std::vector<double> inc;
        if (noisy) {
            inc = wiener.increment_for(i, t0, dt);
        }
        SolverState next = advance(prev, dt, inc, 0, 0, i);
        next.t = i + 1 == steps ? config.horizon : t1;
        next.step_index = i + 1;
        traj.states.push_back(std::move(next));
    }
    return traj;
}

}  // namespace sch
