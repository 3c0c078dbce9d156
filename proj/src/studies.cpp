#include "sch/experiments.hpp"

#include "sch/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace sch {

// ---------------------------------------------------------------------------
// Scenario and report plumbing

NoiseModel Scenario::noise(std::uint64_t stream) const
{
    return {diffusion, WienerProcess(diffusion.mode_count(), seed, stream, noise_base_dt)};
}

Trajectory Scenario::run(std::uint64_t stream) const
{
    return simulate(u0, potential, solver, noise(stream));
}

std::vector<double> SweepReport::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw DimensionMismatch("no column '" + name + "' in report");
    }
    const auto j = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.at(j));
    }
    return out;
}

bool SweepReport::passed() const
{
    return first_failure() == nullptr;
}

const Check* SweepReport::first_failure() const
{
    for (const auto& c : checks) {
        if (!c.passed) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Runs a scenario, appending the sweep point to solver errors.
Trajectory run_labelled(const Scenario& s, const std::string& label, std::uint64_t stream = 0)
{
    try {
        return s.run(stream);
    } catch (const NewtonDiverged& e) {
        throw NewtonDiverged(std::string(e.what()) + " [" + label + "]", e.suggested_dt(), e.step_index());
    } catch (const NonFinite& e) {
        throw NonFinite(std::string(e.what()) + " [" + label + "]", e.step_index());
    }
}

bool strictly_decreasing(std::span<const double> v)
{
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) {
            return false;
        }
    }
    return true;
}

bool all_finite(const SweepReport& r)
{
    for (const auto& row : r.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!std::isfinite(row[j]) && !std::isnan(row[j])) {
                return false;
            }
        }
    }
    return true;
}

double max_of(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, x);
    }
    return m;
}

void require_decreasing(const std::vector<double>& seq, const char* what, bool allow_zero)
{
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] < 0.0 || (!allow_zero && seq[i] == 0.0) || !std::isfinite(seq[i])) {
            throw PreconditionViolated(std::string(what) + " values must be finite and positive");
        }
        if (i > 0 && !(seq[i] < seq[i - 1])) {
            throw PreconditionViolated(std::string(what) + " sequence must be strictly decreasing");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Continuous dependence

namespace {

struct DependenceRow {
    double sup_star_sq, eps_h_sq, grad_l2_sq, numerator, data, ratio;
};

DependenceRow dependence_row(const Scenario& base, const PathData& first, const PathData& second, double eps,
                             const std::string& label)
{
    Scenario s1 = base, s2 = base;
    s1.solver.epsilon = s2.solver.epsilon = eps;
    s1.u0 = first.u0;
    s1.solver.source = first.source;
    s2.u0 = second.u0;
    s2.solver.source = second.source;
    const Trajectory a = run_labelled(s1, label);
    const Trajectory b = run_labelled(s2, label);

    DependenceRow r{};
    std::vector<double> times, grad_sq, g_sq;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const SpectralField d = a.states[i].u - b.states[i].u;
        const double st = norm(d, norm_star), h = norm(d, norm_h);
        r.sup_star_sq = std::max(r.sup_star_sq, st * st);
        r.eps_h_sq = std::max(r.eps_h_sq, eps * h * h);
        times.push_back(a.states[i].t);
        grad_sq.push_back(grad_norm_sq(d));
        const double gd = norm(first.source.at(base.basis, a.states[i].t) -
                                   second.source.at(base.basis, a.states[i].t),
                               norm_star);
        g_sq.push_back(gd * gd);
    }
    r.grad_l2_sq = trapezoid(times, grad_sq);
    r.numerator = r.sup_star_sq + r.eps_h_sq + r.grad_l2_sq;
    const double u0d = norm(first.u0 - second.u0, norm_star);
    r.data = u0d * u0d + trapezoid(times, g_sq);
    if (r.data > 0.0) {
        r.ratio = r.numerator / r.data;
    } else {
        r.ratio = r.numerator == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return r;
}

}  // namespace

SweepReport continuous_dependence_study(const Scenario& base, const PathData& first, const PathData& second,
                                        const std::vector<double>& eps_grid, double k_cap)
{
    const double mean_gap = std::abs(first.u0.mean() - second.u0.mean());
    if (mean_gap > 1e-12) {
        throw PreconditionViolated("continuous dependence needs equal initial means (gap " + fmt(mean_gap) + ")");
    }
    if (eps_grid.empty()) {
        throw PreconditionViolated("continuous dependence needs a nonempty eps grid");
    }
    SweepReport rep;
    rep.variable = "epsilon";
    rep.columns = {"epsilon", "sup_star_sq", "eps_sup_h_sq", "grad_l2_sq", "numerator", "data_norm", "ratio"};
    for (double eps : eps_grid) {
        const auto r = dependence_row(base, first, second, eps, "eps=" + fmt(eps));
        rep.rows.push_back({eps, r.sup_star_sq, r.eps_h_sq, r.grad_l2_sq, r.numerator, r.data, r.ratio});
    }
    if (!(k_cap > 0.0)) {
        Scenario fine = base;
        fine.diffusion = DiffusionOperator::zero(base.basis);
        fine.solver.dt = 0.5 * base.solver.dt;
        k_cap = 100.0 * dependence_row(fine, first, second, eps_grid.front(), "reference").ratio;
        if (k_cap == 0.0) {
            k_cap = std::numeric_limits<double>::infinity();
        }
    }
    const auto ratios = rep.column("ratio");
    bool finite = std::all_of(ratios.begin(), ratios.end(), [](double x) { return std::isfinite(x); });
    rep.checks.push_back({"ratio_finite", finite, ""});
    const double worst = max_of(ratios);
    rep.checks.push_back({"ratio_below_cap", worst <= k_cap, "max ratio " + fmt(worst) + ", cap " + fmt(k_cap)});
    const double s = spread(ratios);
    rep.checks.push_back({"ratio_eps_uniform", s <= 10.0, "max/min " + fmt(s) + " (limit 10)"});
    return rep;
}

// ---------------------------------------------------------------------------
// Vanishing viscosity

// max over the lowest four basis functions phi of |int_0^T <a(t) - b(t), phi> dt|, for the
// field selected by `field`. Weak convergence is only observable through such a finite test set.
template <typename Field>
double test_set_gap(const Trajectory& a, const Trajectory& b, Field field)
{
    const BasisPtr& basis = a.states.front().u.basis();
    const std::size_t count = std::min<std::size_t>(4, a.states.front().u.size());
    std::vector<double> times;
    for (const auto& st : a.states) {
        times.push_back(st.t);
    }
    double gap = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        SpectralField phi(basis);
        phi[k] = 1.0;
        std::vector<double> pairing;
        for (std::size_t n = 0; n < a.states.size(); ++n) {
            pairing.push_back(inner(field(a.states[n]) - field(b.states[n]), phi));
        }
        gap = std::max(gap, std::abs(trapezoid(times, pairing)));
    }
    return gap;
}

SweepReport vanishing_viscosity_study(const Scenario& base, const std::vector<double>& eps_sequence)
{
    require_decreasing(eps_sequence, "eps", true);
    Scenario ref_s = base;
    ref_s.solver.epsilon = 0.0;
    const Trajectory ref = run_labelled(ref_s, "eps=0");

    SweepReport rep;
    rep.variable = "epsilon";
    rep.columns = {"epsilon", "distance_l2_v1", "eps_sup_v1", "max_w_l1", "max_xi_l1", "w_test_gap", "xi_test_gap"};
    std::vector<double> d_pos, v_pos;
    for (double eps : eps_sequence) {
        Scenario s = base;
        s.solver.epsilon = eps;
        const Trajectory tr = eps == 0.0 ? ref : run_labelled(s, "eps=" + fmt(eps));
        double sup_v1 = 0.0, w1 = 0.0, x1 = 0.0;
        for (const auto& st : tr.states) {
            sup_v1 = std::max(sup_v1, norm(st.u, norm_v1));
            w1 = std::max(w1, lp_norm(st.w, 1.0));
            x1 = std::max(x1, lp_norm(st.xi, 1.0));
        }
        const double d = path_distance(tr, ref, norm_v1);
        const double wg = test_set_gap(tr, ref, [](const SolverState& st) -> const SpectralField& { return st.w; });
        const double xg = test_set_gap(tr, ref, [](const SolverState& st) -> const SpectralField& { return st.xi; });
        rep.rows.push_back({eps, d, eps * sup_v1, w1, x1, wg, xg});
        if (eps > 0.0) {
            d_pos.push_back(d);
            v_pos.push_back(eps * sup_v1);
        }
    }
    rep.checks.push_back({"finite", all_finite(rep), ""});
    rep.checks.push_back({"distance_strictly_decreasing", strictly_decreasing(d_pos), ""});
    const bool d_ratio = d_pos.size() < 2 || d_pos.back() <= 0.1 * d_pos.front();
    rep.checks.push_back({"distance_final_below_tenth", d_ratio,
                          d_pos.empty() ? "" : "final/initial " + fmt(d_pos.back() / d_pos.front())});
    rep.checks.push_back({"eps_sup_v1_strictly_decreasing", strictly_decreasing(v_pos), ""});
    const bool v_ratio = v_pos.size() < 2 || v_pos.back() <= 0.1 * v_pos.front();
    rep.checks.push_back({"eps_sup_v1_final_below_tenth", v_ratio,
                          v_pos.empty() ? "" : "final/initial " + fmt(v_pos.back() / v_pos.front())});
    return rep;
}

// ---------------------------------------------------------------------------
// Yosida sweep

SweepReport yosida_convergence_study(const Scenario& base, const std::vector<double>& lambdas)
{
    require_decreasing(lambdas, "lambda", false);
    SweepReport rep;
    rep.variable = "lambda";
    rep.columns = {"lambda", "distance_prev_l2_v1", "max_w_l1", "max_xi_l1", "max_conjugate_mass",
                   "max_beta_hat_mass"};
    std::optional<Trajectory> prev;
    std::vector<double> dists;
    for (double lambda : lambdas) {
        Scenario s = base;
        s.solver.lambda = lambda;
        Trajectory tr = run_labelled(s, "lambda=" + fmt(lambda));
        const auto diag = run_diagnostics(tr, s.potential, s.solver);
        const double d = prev ? path_distance(tr, *prev, norm_v1) : nan;
        if (prev) {
            dists.push_back(d);
        }
        rep.rows.push_back({lambda, d, diag.summary.max_w_l1, diag.summary.max_xi_l1,
                            diag.summary.max_conjugate_mass, diag.summary.max_beta_hat_mass});
        prev = std::move(tr);
    }
    rep.checks.push_back({"finite", all_finite(rep), ""});
    rep.checks.push_back({"distance_strictly_decreasing", strictly_decreasing(dists), ""});
    const double sw = spread(rep.column("max_w_l1"));
    rep.checks.push_back({"w_l1_lambda_uniform", sw <= 100.0, "max/min " + fmt(sw) + " (limit 100)"});
    const double sc = spread(rep.column("max_conjugate_mass"));
    rep.checks.push_back({"conjugate_mass_lambda_uniform", sc <= 100.0, "max/min " + fmt(sc) + " (limit 100)"});
    return rep;
}

// ---------------------------------------------------------------------------
// Smoothing and step refinement

SweepReport smoothing_study(const Scenario& base, const std::vector<int>& levels)
{
    const Trajectory ref = run_labelled(base, "unsmoothed");
    SweepReport rep;
    rep.variable = "smoothing";
    rep.columns = {"smoothing", "hs_distance", "distance_at_T"};
    std::vector<double> dists;
    for (int n : levels) {
        Scenario s = base;
        s.diffusion = base.diffusion.smooth(n);
        const Trajectory tr = run_labelled(s, "n=" + std::to_string(n));
        double hs = 0.0;
        for (int k = 0; k < base.diffusion.mode_count(); ++k) {
            const double d = norm(s.diffusion.columns()[static_cast<std::size_t>(k)] -
                                      base.diffusion.columns()[static_cast<std::size_t>(k)],
                                  norm_h);
            hs += d * d;
        }
        const double d = norm(tr.states.back().u - ref.states.back().u, norm_h);
        dists.push_back(d);
        rep.rows.push_back({static_cast<double>(n), std::sqrt(hs), d});
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dists.size(); ++i) {
        monotone = monotone && dists[i] <= dists[i - 1];
    }
    rep.checks.push_back({"finite", all_finite(rep), ""});
    rep.checks.push_back({"distance_decreasing_in_n", monotone, ""});
    return rep;
}

SweepReport dt_refinement_study(const Scenario& base, const std::vector<double>& dts)
{
    if (dts.empty()) {
        throw PreconditionViolated("step refinement needs at least one step size");
    }
    const double finest = *std::min_element(dts.begin(), dts.end());
    Scenario fine = base;
    fine.solver.dt = finest;
    if (!(fine.noise_base_dt > 0.0)) {
        fine.noise_base_dt = finest;
    }
    const Trajectory ref = run_labelled(fine, "dt=" + fmt(finest));
    SweepReport rep;
    rep.variable = "dt";
    rep.columns = {"dt", "distance_at_T", "observed_rate"};
    double prev_d = nan, prev_dt = nan;
    for (double dt : dts) {
        Scenario s = fine;
        s.solver.dt = dt;
        const Trajectory tr = run_labelled(s, "dt=" + fmt(dt));
        const double d = norm(tr.states.back().u - ref.states.back().u, norm_h);
        const double rate = (std::isnan(prev_d) || d <= 0.0 || prev_d <= 0.0)
                                ? nan
                                : std::log(prev_d / d) / std::log(prev_dt / dt);
        rep.rows.push_back({dt, d, rate});
        prev_d = d;
        prev_dt = dt;
    }
    rep.checks.push_back({"finite", all_finite(rep), ""});
    return rep;
}

// ---------------------------------------------------------------------------
// Ensembles

EnsembleResult ensemble_expectations(const Scenario& base, int members, const std::vector<int>& order,
                                     int threads)
{
    if (members < 8) {
        throw PreconditionViolated("ensembles need at least 8 members for standard errors");
    }
    std::vector<int> schedule = order;
    if (schedule.empty()) {
        schedule.resize(static_cast<std::size_t>(members));
        std::iota(schedule.begin(), schedule.end(), 0);
    }
    {
        std::vector<int> sorted = schedule;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> ident(static_cast<std::size_t>(members));
        std::iota(ident.begin(), ident.end(), 0);
        if (sorted != ident) {
            throw PreconditionViolated("execution order must be a permutation of the members");
        }
    }

    EnsembleResult out;
    out.quantities = {"sup_star_sq", "grad_l2_sq", "max_beta_hat_mass", "max_conjugate_mass"};
    out.samples.assign(static_cast<std::size_t>(members), {});
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(members));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < schedule.size(); i = next++) {
            const auto m = static_cast<std::size_t>(schedule[i]);
            try {
                const Trajectory tr = run_labelled(base, "member=" + std::to_string(m), m);
                const auto d = run_diagnostics(tr, base.potential, base.solver).summary;
                out.samples[m] = {d.sup_star_sq, d.grad_l2_sq, d.max_beta_hat_mass, d.max_conjugate_mass};
            } catch (...) {
                errors[m] = std::current_exception();
            }
        }
    };
    const int n_threads = std::clamp(threads, 1, members);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    const std::size_t q = out.quantities.size();
    out.mean.assign(q, 0.0);
    out.standard_error.assign(q, 0.0);
    for (std::size_t j = 0; j < q; ++j) {
        // Shifted by the first member so identical samples reduce exactly.
        const double shift = out.samples.front()[j];
        double s = 0.0;
        for (const auto& row : out.samples) {
            s += row[j] - shift;
        }
        const double offset = s / members;
        double v = 0.0;
        for (const auto& row : out.samples) {
            const double d = row[j] - shift - offset;
            v += d * d;
        }
        out.mean[j] = shift + offset;
        out.standard_error[j] = std::sqrt(v / (members - 1) / members);
    }
    return out;
}

SweepReport ensemble_sweep(const Scenario& base, int members, const std::vector<double>& eps_grid,
                           const std::vector<double>& lambda_grid, int threads)
{
    SweepReport rep;
    rep.variable = "epsilon_lambda";
    rep.columns = {"epsilon", "lambda"};
    std::vector<std::string> names;
    for (double eps : eps_grid) {
        for (double lambda : lambda_grid) {
            Scenario s = base;
            s.solver.epsilon = eps;
            s.solver.lambda = lambda;
            const auto e = ensemble_expectations(s, members, {}, threads);
            if (names.empty()) {
                names = e.quantities;
                for (const auto& n : names) {
                    rep.columns.push_back("mean_" + n);
                    rep.columns.push_back("se_" + n);
                }
            }
            std::vector<double> row{eps, lambda};
            for (std::size_t j = 0; j < names.size(); ++j) {
                row.push_back(e.mean[j]);
                row.push_back(e.standard_error[j]);
            }
            rep.rows.push_back(std::move(row));
        }
    }
    rep.checks.push_back({"finite", all_finite(rep), ""});
    for (const auto& n : names) {
        const double s = spread(rep.column("mean_" + n));
        rep.checks.push_back({n + "_uniform", s <= 100.0, "max/min " + fmt(s) + " (limit 100)"});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Regularity along eps

SweepReport regularity_study(const Scenario& base, const std::vector<double>& eps_grid)
{
    const GrowthBranch branch =
        base.potential.graph.growth.is_cubic() ? GrowthBranch::Cubic : GrowthBranch::General;
    SweepReport rep;
    rep.variable = "epsilon";
    rep.columns = {"epsilon",    "sup_grad_rinv_w", "eps_lap_rinv_w_l2", "xi_l2_h", "grad_xi_l2_h",
                   "sup_v3",     "sup_v1",          "embedding_constant", "cubic_bound", "bound_holds"};
    bool bounds = true;
    for (double eps : eps_grid) {
        Scenario s = base;
        s.solver.epsilon = eps;
        const Trajectory tr = run_labelled(s, "eps=" + fmt(eps));
        const auto r = regularity_monitor(tr, s.potential, s.solver, branch);
        bounds = bounds && r.bound_holds;
        rep.rows.push_back({eps, r.sup_grad_rinv_w, r.eps_lap_rinv_w, r.xi_l2, r.grad_xi_l2, r.sup_v3, r.sup_v1,
                            r.embedding_constant, r.bound, r.bound_holds ? 1.0 : 0.0});
    }
    rep.checks.push_back({"finite", all_finite(rep), ""});
    const double sg = spread(rep.column("sup_grad_rinv_w"));
    rep.checks.push_back({"grad_rinv_w_eps_uniform", sg <= 10.0, "max/min " + fmt(sg) + " (limit 10)"});
    const double sx = spread(rep.column("xi_l2_h"));
    rep.checks.push_back({"xi_l2_eps_uniform", sx <= 10.0, "max/min " + fmt(sx) + " (limit 10)"});
    if (branch == GrowthBranch::Cubic) {
        rep.checks.push_back({"cubic_bound", bounds, "||xi||_{L2(0,T;H)} <= C (1 + sup ||u||_V1^3)"});
    }
    return rep;
}

}  // namespace sch
