#include "sch/runner.hpp"

#include "sch/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

namespace sch {

Scenario build_scenario(const RunConfig& c)
{
    const Domain domain = c.domain.dimension == 1
                              ? Domain::interval(c.domain.length_x, c.domain.modes_x)
                              : Domain::rectangle(c.domain.length_x, c.domain.length_y, c.domain.modes_x,
                                                  c.domain.modes_y);
    Scenario s;
    s.basis = Basis::make(domain);
    s.potential = {make_graph(c.potential.name, c.potential.scale),
                   LipschitzPerturbation::linear(c.potential.pi_coefficient)};

    auto& sv = s.solver;
    sv.epsilon = c.solver.epsilon;
    sv.lambda = c.solver.lambda;
    sv.dt = c.solver.dt;
    sv.horizon = c.solver.horizon;
    sv.newton_tol = c.solver.newton_tol;
    sv.newton_max_iter = c.solver.newton_max_iter;
    sv.cg_max_iter = c.solver.cg_max_iter;
    sv.splitting = c.solver.splitting == "fully_implicit" ? Splitting::FullyImplicit : Splitting::ConvexSplitting;
    sv.max_rejections = c.solver.max_rejections;
    if (c.solver.source_constant != 0.0 || c.solver.source_amplitude != 0.0) {
        SpectralField g = SpectralField::constant(s.basis, c.solver.source_constant);
        if (c.solver.source_amplitude != 0.0) {
            g += SpectralField::cosine(s.basis, c.solver.source_amplitude, c.solver.source_mode, 0);
        }
        sv.source = SourceTerm::constant(std::move(g));
    }

    if (c.noise.kind == "additive") {
        s.diffusion = DiffusionOperator::additive(s.basis, c.noise.modes, c.noise.sigma, c.noise.rho,
                                                  c.noise.mean_zero);
    } else if (c.noise.kind == "multiplicative") {
        s.diffusion = DiffusionOperator::multiplicative(
            s.basis, c.noise.modes, c.noise.sigma, c.noise.rho, c.noise.clamp,
            c.noise.map == "constant" ? MultiplicativeMap::Constant : MultiplicativeMap::Clamp);
    } else {
        s.diffusion = DiffusionOperator::zero(s.basis);
    }
    if (c.noise.kind != "none" && c.noise.smoothing > 0) {
        s.diffusion = s.diffusion.smooth(c.noise.smoothing);
    }
    s.seed = c.run.seed;
    s.noise_base_dt = c.noise.base_dt;

    const auto& in = c.initial;
    s.u0 = SpectralField::constant(s.basis, in.mean);
    if (in.kind == "cosine" && !(in.mode_x == 0 && in.mode_y == 0)) {
        s.u0 += SpectralField::cosine(s.basis, in.amplitude, in.mode_x, in.mode_y);
    } else if (in.kind == "random") {
        s.u0 += random_field(s.basis, c.run.seed, 0, in.amplitude, in.decay, true);
    }
    return s;
}

SpectralField perturbed_initial(const RunConfig& c, const Scenario& s)
{
    const int k = c.initial.perturbation_mode;
    const double mu = std::pow(k * std::numbers::pi / c.domain.length_x, 2);
    // ||cos||_*^2 = |D| w_k / mu_k with w_k = 1/2
    const double unit = std::sqrt(s.basis->measure() * 0.5 / mu);
    return s.u0 + SpectralField::cosine(s.basis, c.initial.perturbation / unit, k, 0);
}

namespace {

using nlohmann::json;

json number(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

std::string csv_header(const RunConfig& c)
{
    return "# sch_lab " + std::string(artifact_version) + " config_hash=" + config_hash(c) + "\n";
}

std::string csv_rows(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows)
{
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out += (j ? "," : "") + columns[j];
    }
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            out += (j ? "," : "") + format_double(r[j]);
        }
        out += '\n';
    }
    return out;
}

void add(std::vector<Check>& checks, std::string name, bool passed, std::string detail = {})
{
    checks.push_back({std::move(name), passed, std::move(detail)});
}

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

json simulate_mode(const RunConfig& c, const Scenario& s, RunOutcome& out)
{
    const Trajectory tr = s.run(0);
    const Diagnostics d = run_diagnostics(tr, s.potential, s.solver);
    const auto& sum = d.summary;

    std::vector<std::vector<double>> rows;
    for (const auto& r : d.records) {
        rows.push_back({r.t, r.mean_u, r.norm_star, r.norm_h, r.norm_v1, r.norm_v2, r.norm_v3, r.energy,
                        r.energy_concave, r.w_l1, r.xi_l1, r.beta_hat_mass, r.conjugate_mass, r.residual,
                        static_cast<double>(r.newton_iters)});
    }
    out.csv = csv_header(c) + csv_rows({"t", "mean_u", "norm_star", "norm_h", "norm_v1", "norm_v2", "norm_v3",
                                        "energy", "energy_concave", "w_l1", "xi_l1", "beta_hat_mass",
                                        "conjugate_mass", "residual", "newton_iters"},
                                       rows);

    add(out.checks, "mean_identity", sum.max_mean_defect <= 1e-12, "max defect " + sci(sum.max_mean_defect));
    const bool deterministic = s.diffusion.is_zero() && s.solver.source.is_zero() &&
                               s.solver.splitting == Splitting::ConvexSplitting;
    if (deterministic) {
        add(out.checks, "energy_nonincreasing", sum.max_energy_increase <= 1e-12,
            "max increase " + sci(sum.max_energy_increase));
    }
    if (tr.rejections == 0) {
        add(out.checks, "variational_residual", sum.max_residual <= 10.0 * s.solver.newton_tol,
            "max residual " + sci(sum.max_residual));
    }
    const Stepper stepper(s.potential, s.solver);
    const SpectralField g = s.solver.source.at(s.basis, 0.0);
    const auto mono = weak_monotonicity_check(stepper, s.basis, 100, c.run.seed, &g);
    add(out.checks, "weak_monotonicity", mono.passed, "c = " + sci(mono.c));
    const auto coer = weak_coercivity_check(stepper, s.basis, 100, c.run.seed, &g);
    add(out.checks, "weak_coercivity", coer.passed, "c1' = " + sci(coer.c1_prime));
    const double b2 = noise_mean_moment(tr, s.potential.graph);
    add(out.checks, "noise_mean_moment_finite", std::isfinite(b2));

    const auto& last = d.records.back();
    return {{"steps", tr.states.size() - 1},
            {"rejections", tr.rejections},
            {"final_energy", number(last.energy)},
            {"final_mean", number(last.mean_u)},
            {"sup_star_sq", number(sum.sup_star_sq)},
            {"sup_h_sq", number(sum.sup_h_sq)},
            {"sup_v1", number(sum.sup_v1)},
            {"grad_l2_sq", number(sum.grad_l2_sq)},
            {"v2_l2_sq", number(sum.v2_l2_sq)},
            {"max_w_l1", number(sum.max_w_l1)},
            {"max_xi_l1", number(sum.max_xi_l1)},
            {"max_energy_increase", number(sum.max_energy_increase)},
            {"max_residual", number(sum.max_residual)},
            {"max_mean_defect", number(sum.max_mean_defect)},
            {"monotonicity_constant", number(mono.c)},
            {"coercivity_c1_prime", number(coer.c1_prime)},
            {"noise_mean_moment", number(b2)},
            {"hilbert_schmidt_norm", number(s.diffusion.hilbert_schmidt_norm())}};
}

json report_mode(const RunConfig& c, const SweepReport& rep, RunOutcome& out)
{
    out.csv = csv_header(c) + csv_rows(rep.columns, rep.rows);
    out.checks.insert(out.checks.end(), rep.checks.begin(), rep.checks.end());
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json row = json::object();
        for (std::size_t j = 0; j < r.size(); ++j) {
            row[rep.columns[j]] = number(r[j]);
        }
        rows.push_back(std::move(row));
    }
    return {{"variable", rep.variable}, {"rows", rows}};
}

json dispatch(const RunConfig& c, RunOutcome& out)
{
    const Scenario s = build_scenario(c);
    const auto& mode = c.run.mode;
    if (mode == "simulate") {
        return simulate_mode(c, s, out);
    }
    if (mode == "continuous_dependence") {
        const PathData first{s.u0, s.solver.source};
        const PathData second{perturbed_initial(c, s), s.solver.source};
        return report_mode(c, continuous_dependence_study(s, first, second, c.sweep.epsilon, c.sweep.k_cap), out);
    }
    if (mode == "vanishing_viscosity") {
        return report_mode(c, vanishing_viscosity_study(s, c.sweep.epsilon), out);
    }
    if (mode == "yosida_sweep") {
        return report_mode(c, yosida_convergence_study(s, c.sweep.lambda), out);
    }
    if (mode == "ensemble") {
        const auto eps = c.sweep.ensemble_epsilon.empty() ? std::vector<double>{c.solver.epsilon}
                                                          : c.sweep.ensemble_epsilon;
        const auto lam = c.sweep.ensemble_lambda.empty() ? std::vector<double>{c.solver.lambda}
                                                         : c.sweep.ensemble_lambda;
        return report_mode(c, ensemble_sweep(s, c.sweep.members, eps, lam, c.run.threads), out);
    }
    return report_mode(c, regularity_study(s, c.sweep.epsilon), out);
}

}  // namespace

RunOutcome execute(const RunConfig& config, const RunOptions& options)
{
    validate_config(config);
    RunOutcome out;
    json metrics;
    try {
        metrics = dispatch(config, out);
    } catch (const NewtonDiverged& e) {
        out.error = e.what();
        out.exit_code = exit_divergence;
    } catch (const NonFinite& e) {
        out.error = e.what();
        out.exit_code = exit_divergence;
    }

    const Check* failed = nullptr;
    for (const auto& ch : out.checks) {
        if (!ch.passed) {
            failed = &ch;
            break;
        }
    }
    if (out.exit_code == exit_pass && failed) {
        out.exit_code = exit_assertion_failed;
    }

    json checks = json::array();
    for (const auto& ch : out.checks) {
        checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    }
    json summary = {{"version", artifact_version},
                    {"config_hash", config_hash(config)},
                    {"mode", config.run.mode},
                    {"seed", config.run.seed},
                    {"passed", out.exit_code == exit_pass},
                    {"exit_code", out.exit_code},
                    {"first_failure", failed ? json(failed->name) : json(nullptr)},
                    {"error", out.error.empty() ? json(nullptr) : json(out.error)},
                    {"checks", checks},
                    {"metrics", metrics.is_null() ? json::object() : metrics}};
    out.summary_json = summary.dump(2) + "\n";

    if (options.log && !options.quiet) {
        for (const auto& ch : out.checks) {
            *options.log << (ch.passed ? "PASS " : "FAIL ") << ch.name
                         << (ch.detail.empty() ? "" : "  (" + ch.detail + ")") << '\n';
        }
        if (!out.error.empty()) {
            *options.log << "solver failure: " << out.error << '\n';
        }
    }
    return out;
}

int run(const RunConfig& config, const RunOptions& options)
{
    const RunOutcome out = execute(config, options);
    const std::filesystem::path dir = options.out_dir.empty() ? config.output.dir : options.out_dir;
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + (dir / name).string());
        }
        f << text;
    };
    if (!out.csv.empty()) {
        write(config.run.mode + ".csv", out.csv);
    }
    write("summary.json", out.summary_json);
    write("config.ini", "# sch_lab " + std::string(artifact_version) + " config_hash=" + config_hash(config) +
                            "\n" + emit_config(config));
    return out.exit_code;
}

}  // namespace sch
