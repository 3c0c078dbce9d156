#include "sch/experiments.hpp"

#include "sch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sch {

namespace {

void require_finite(const DiagnosticRecord& r, std::int64_t step)
{
    const double values[] = {r.t,      r.mean_u,  r.norm_star,     r.norm_h,         r.norm_v1,
                             r.norm_v2, r.norm_v3, r.energy,        r.energy_concave, r.w_l1,
                             r.xi_l1,   r.beta_hat_mass, r.conjugate_mass, r.residual};
    static const char* names[] = {"t",     "mean_u", "norm_star",     "norm_h",         "norm_v1",
                                  "norm_v2", "norm_v3", "energy",      "energy_concave", "w_l1",
                                  "xi_l1",   "beta_hat_mass", "conjugate_mass", "residual"};
    for (std::size_t i = 0; i < std::size(values); ++i) {
        if (!std::isfinite(values[i])) {
            throw NonFinite(names[i], step);
        }
    }
}

std::vector<double> state_times(const Trajectory& t)
{
    std::vector<double> times;
    times.reserve(t.states.size());
    for (const auto& s : t.states) {
        times.push_back(s.t);
    }
    return times;
}

}  // namespace

Diagnostics run_diagnostics(const Trajectory& trajectory, const Potential& potential, const SolverConfig& config)
{
    if (trajectory.states.empty()) {
        throw PreconditionViolated("diagnostics need a nonempty trajectory");
    }
    const Stepper stepper(potential, config);
    const auto& graph = potential.graph;
    const auto& pi_hat = potential.perturbation.pi_hat;
    const double lambda = config.lambda;
    const auto& u0 = trajectory.states.front().u;
    const double cell = u0.basis()->measure() / static_cast<double>(u0.basis()->grid_size());

    Diagnostics out;
    out.records.reserve(trajectory.states.size());
    for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
        const auto& s = trajectory.states[i];
        DiagnosticRecord r;
        r.t = s.t;
        r.mean_u = s.u.mean();
        r.norm_star = norm(s.u.without_mean(), norm_star);
        r.norm_h = norm(s.u, norm_h);
        r.norm_v1 = norm(s.u, norm_v1);
        r.norm_v2 = norm(s.u, norm_v2);
        r.norm_v3 = norm(s.u, norm_v3);
        double mass = 0.0, conj = 0.0, concave = 0.0;
        for (double x : s.u.grid_values()) {
            const double j = resolvent(graph, lambda, x);
            const double b = graph.beta(j);
            const double bh = graph.beta_hat(j);
            mass += bh + 0.5 * lambda * b * b;
            conj += j * b - bh;  // Fenchel equality at s = beta(j)
            concave += pi_hat(x);
        }
        r.beta_hat_mass = cell * mass;
        r.conjugate_mass = cell * conj;
        r.energy_concave = cell * concave;
        r.energy = 0.5 * grad_norm_sq(s.u) + r.beta_hat_mass + r.energy_concave;
        r.w_l1 = lp_norm(s.w, 1.0);
        r.xi_l1 = lp_norm(s.xi, 1.0);
        if (i > 0) {
            const auto& prev = trajectory.states[i - 1];
            r.residual = stepper.variational_residual(prev, s, s.noise_ledger - prev.noise_ledger);
        }
        r.newton_iters = s.newton_iters_last;
        require_finite(r, s.step_index);
        out.records.push_back(r);
    }

    auto& sum = out.summary;
    std::vector<double> grad_sq, v2_sq;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        const auto& r = out.records[i];
        const auto& s = trajectory.states[i];
        sum.sup_star_sq = std::max(sum.sup_star_sq, r.norm_star * r.norm_star);
        sum.sup_h_sq = std::max(sum.sup_h_sq, r.norm_h * r.norm_h);
        sum.sup_v1 = std::max(sum.sup_v1, r.norm_v1);
        sum.sup_v3 = std::max(sum.sup_v3, r.norm_v3);
        sum.max_w_l1 = std::max(sum.max_w_l1, r.w_l1);
        sum.max_xi_l1 = std::max(sum.max_xi_l1, r.xi_l1);
        sum.max_beta_hat_mass = std::max(sum.max_beta_hat_mass, r.beta_hat_mass);
        sum.max_conjugate_mass = std::max(sum.max_conjugate_mass, r.conjugate_mass);
        sum.max_residual = std::max(sum.max_residual, r.residual);
        sum.max_mean_defect =
            std::max(sum.max_mean_defect, std::abs(s.u.mean() - u0.mean() - s.noise_ledger.mean()));
        grad_sq.push_back(grad_norm_sq(s.u));
        v2_sq.push_back(r.norm_v2 * r.norm_v2);
    }
    sum.max_energy_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < out.records.size(); ++i) {
        sum.max_energy_increase =
            std::max(sum.max_energy_increase, out.records[i].energy - out.records[i - 1].energy);
    }
    if (out.records.size() < 2) {
        sum.max_energy_increase = 0.0;
    }
    const auto times = state_times(trajectory);
    sum.grad_l2_sq = trapezoid(times, grad_sq);
    sum.v2_l2_sq = trapezoid(times, v2_sq);
    return out;
}

// ---------------------------------------------------------------------------
// Path norms

double trapezoid(std::span<const double> times, std::span<const double> values)
{
    if (times.size() != values.size()) {
        throw DimensionMismatch("trapezoid: times and values differ in length");
    }
    double s = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        s += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
    }
    return s;
}

namespace {

void check_aligned(const Trajectory& a, const Trajectory& b)
{
    if (a.states.size() != b.states.size()) {
        throw DimensionMismatch("trajectories have different lengths");
    }
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        if (std::abs(a.states[i].t - b.states[i].t) > 1e-12 * std::max(1.0, a.states[i].t)) {
            throw DimensionMismatch("trajectories are sampled at different times");
        }
    }
}

}  // namespace

double path_distance(const Trajectory& a, const Trajectory& b, Norm kind)
{
    check_aligned(a, b);
    std::vector<double> sq;
    sq.reserve(a.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const double d = norm(a.states[i].u - b.states[i].u, kind);
        sq.push_back(d * d);
    }
    return std::sqrt(trapezoid(state_times(a), sq));
}

double sup_distance(const Trajectory& a, const Trajectory& b, Norm kind)
{
    check_aligned(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        m = std::max(m, norm(a.states[i].u - b.states[i].u, kind));
    }
    return m;
}

SpectralField random_field(const BasisPtr& basis, std::uint64_t seed, std::uint64_t index, double amplitude,
                           double decay, bool mean_zero)
{
    const auto mu = basis->eigenvalues();
    const std::uint64_t key = splitmix64(seed ^ 0x5EEDF1E1Dull);
    SpectralField f(basis);
    for (std::size_t k = mean_zero ? 1 : 0; k < f.size(); ++k) {
        f[k] = amplitude * keyed_normal(key, index, k) * std::pow(1.0 + mu[k], -decay);
    }
    return f;
}

double spread(std::span<const double> values)
{
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) {
            return std::numeric_limits<double>::infinity();
        }
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
    }
    if (hi == 0.0) {
        return 1.0;
    }
    return lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
}

// ---------------------------------------------------------------------------
// Regularity

double embedding_constant_l6(const BasisPtr& basis, std::span<const SpectralField> extra, int samples,
                             std::uint64_t seed)
{
    const double cell = basis->measure() / static_cast<double>(basis->grid_size());
    auto ratio = [&](const SpectralField& v) {
        const double v1 = norm(v, norm_v1);
        if (v1 == 0.0) {
            return 0.0;
        }
        double s = 0.0;
        for (double x : v.grid_values()) {
            const double x2 = x * x;
            s += x2 * x2 * x2;
        }
        return std::pow(cell * s, 1.0 / 6.0) / v1;
    };
    static constexpr double decays[] = {0.5, 0.75, 1.0, 1.5};
    double c = 0.0;
    for (int i = 0; i < samples; ++i) {
        c = std::max(c, ratio(random_field(basis, seed, static_cast<std::uint64_t>(i), 1.0, decays[i % 4])));
    }
    for (const auto& v : extra) {
        c = std::max(c, ratio(v));
    }
    return c;
}

RegularityReport regularity_monitor(const Trajectory& trajectory, const Potential& potential,
                                    const SolverConfig& config, GrowthBranch branch)
{
    if (trajectory.states.empty()) {
        throw PreconditionViolated("regularity monitor needs a nonempty trajectory");
    }
    const auto& graph = potential.graph;
    if (branch == GrowthBranch::Cubic && !graph.growth.is_cubic()) {
        throw GrowthMismatch("cubic regularity branch requested for graph '" + graph.name + "'");
    }
    const double eps = config.epsilon;
    RegularityReport rep;
    std::vector<double> lap_sq, xi_sq, grad_xi_sq;
    std::vector<SpectralField> states;
    for (const auto& s : trajectory.states) {
        const SpectralField rw = apply_resolvent(s.w, eps);
        rep.sup_grad_rinv_w = std::max(rep.sup_grad_rinv_w, std::sqrt(grad_norm_sq(rw)));
        const double lap = norm(apply_laplacian(rw), norm_h);
        lap_sq.push_back(lap * lap);
        const double xh = norm(s.xi, norm_h);
        xi_sq.push_back(xh * xh);
        grad_xi_sq.push_back(grad_norm_sq(s.xi));
        rep.sup_v3 = std::max(rep.sup_v3, norm(s.u, norm_v3));
        rep.sup_v1 = std::max(rep.sup_v1, norm(s.u, norm_v1));
        states.push_back(s.u);
    }
    std::vector<double> times;
    for (const auto& s : trajectory.states) {
        times.push_back(s.t);
    }
    rep.eps_lap_rinv_w = eps * std::sqrt(trapezoid(times, lap_sq));
    rep.xi_l2 = std::sqrt(trapezoid(times, xi_sq));
    rep.grad_xi_l2 = std::sqrt(trapezoid(times, grad_xi_sq));
    if (branch == GrowthBranch::Cubic) {
        // |xi| <= |beta(u)| = a |u|^3 pointwise, and the projection onto the
        // retained modes does not increase the grid L2 norm
        const double a = graph.beta(1.0);
        rep.embedding_constant = embedding_constant_l6(trajectory.states.front().u.basis(), states, 200, 7);
        const double horizon = times.back() - times.front();
        const double c = rep.embedding_constant;
        rep.bound = 2.0 * std::sqrt(horizon) * a * c * c * c * (1.0 + rep.sup_v1 * rep.sup_v1 * rep.sup_v1);
        rep.bound_holds = rep.xi_l2 <= rep.bound;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Properties of A_lambda

namespace {

double drift_lipschitz(const Stepper& stepper)
{
    return 1.0 / stepper.config().lambda + stepper.potential().perturbation.lipschitz_constant;
}

}  // namespace

MonotonicityCheck weak_monotonicity_check(const Stepper& stepper, const BasisPtr& basis, int pairs,
                                          std::uint64_t seed, const SpectralField* source)
{
    const SpectralField g = source ? *source : SpectralField(basis);
    MonotonicityCheck out;
    const double k = drift_lipschitz(stepper);
    out.c = 0.25 * k * k;
    out.worst_margin = std::numeric_limits<double>::infinity();
    out.passed = true;
    for (int i = 0; i < pairs; ++i) {
        const double amp = 0.5 + 0.5 * (i % 5);
        const auto v1 = random_field(basis, seed, 2 * static_cast<std::uint64_t>(i), amp, 0.75);
        const auto v2 = random_field(basis, seed, 2 * static_cast<std::uint64_t>(i) + 1, amp, 0.75);
        const SpectralField d = v1 - v2;
        const double lhs = stepper.a_lambda_pairing(v1, d, g) - stepper.a_lambda_pairing(v2, d, g);
        const double hd = norm(d, norm_h);
        const double margin = lhs + out.c * hd * hd;
        const double scale = std::abs(stepper.a_lambda_pairing(v1, d, g)) +
                             std::abs(stepper.a_lambda_pairing(v2, d, g)) + out.c * hd * hd;
        out.worst_margin = std::min(out.worst_margin, margin);
        if (margin < -1e-12 * scale) {
            out.passed = false;
        }
    }
    return out;
}

CoercivityCheck weak_coercivity_check(const Stepper& stepper, const BasisPtr& basis, int samples,
                                      std::uint64_t seed, const SpectralField* source)
{
    const SpectralField g = source ? *source : SpectralField(basis);
    CoercivityCheck out;
    const double k = drift_lipschitz(stepper);
    out.c1_prime = k * k + 0.5;
    const double gh = norm(g, norm_h);
    out.f1 = gh * gh;
    out.worst_margin = std::numeric_limits<double>::infinity();
    out.passed = true;
    for (int i = 0; i < samples; ++i) {
        const double amp = 0.5 + 0.5 * (i % 5);
        const auto v = random_field(basis, seed ^ 0xC0E2C1Full, static_cast<std::uint64_t>(i), amp, 0.75);
        const double pairing = stepper.a_lambda_pairing(v, v, g);
        const double v2 = norm(v, norm_v2), h = norm(v, norm_h);
        const double rhs = out.c1 * v2 * v2 - out.c1_prime * h * h - out.f1;
        const double margin = pairing - rhs;
        out.worst_margin = std::min(out.worst_margin, margin);
        if (margin < -1e-12 * (std::abs(pairing) + std::abs(rhs))) {
            out.passed = false;
        }
    }
    return out;
}

double noise_mean_moment(const Trajectory& trajectory, const MonotoneGraph& graph)
{
    double m = 0.0;
    for (const auto& s : trajectory.states) {
        for (double alpha : {1.0, 2.0, 4.0}) {
            m = std::max(m, graph.beta_hat(alpha * s.noise_ledger.mean()));
        }
    }
    return m;
}

}  // namespace sch
