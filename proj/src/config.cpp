#include "sch/config.hpp"

#include "sch/errors.hpp"
#include "sch/monotone.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace sch {

std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& v, int line)
{
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ParseError("expected a number, got '" + v + "'", line);
    }
    return x;
}

template <class I>
I parse_integer(const std::string& v, int line)
{
    I x{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ParseError("expected an integer, got '" + v + "'", line);
    }
    return x;
}

bool parse_bool(const std::string& v, int line)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ParseError("expected true or false, got '" + v + "'", line);
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    if (trim(v).empty()) {
        return out;
    }
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        out.push_back(trim(item));
    }
    return out;
}

struct Field {
    const char* section;
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, int)> set;
};

template <class S, class T>
Field make_field(const char* section, const char* key, S RunConfig::*outer, T S::*inner)
{
    Field f{section, key, nullptr, nullptr};
    if constexpr (std::is_same_v<T, double>) {
        f.get = [=](const RunConfig& c) { return format_double(c.*outer.*inner); };
        f.set = [=](RunConfig& c, const std::string& v, int line) { c.*outer.*inner = parse_double(v, line); };
    } else if constexpr (std::is_same_v<T, bool>) {
        f.get = [=](const RunConfig& c) { return std::string(c.*outer.*inner ? "true" : "false"); };
        f.set = [=](RunConfig& c, const std::string& v, int line) { c.*outer.*inner = parse_bool(v, line); };
    } else if constexpr (std::is_same_v<T, std::string>) {
        f.get = [=](const RunConfig& c) { return c.*outer.*inner; };
        f.set = [=](RunConfig& c, const std::string& v, int) { c.*outer.*inner = v; };
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        f.get = [=](const RunConfig& c) {
            std::string s;
            for (double x : c.*outer.*inner) {
                s += (s.empty() ? "" : ", ") + format_double(x);
            }
            return s;
        };
        f.set = [=](RunConfig& c, const std::string& v, int line) {
            std::vector<double> xs;
            for (const auto& item : split_list(v)) {
                xs.push_back(parse_double(item, line));
            }
            c.*outer.*inner = std::move(xs);
        };
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        f.get = [=](const RunConfig& c) {
            std::string s;
            for (int x : c.*outer.*inner) {
                s += (s.empty() ? "" : ", ") + std::to_string(x);
            }
            return s;
        };
        f.set = [=](RunConfig& c, const std::string& v, int line) {
            std::vector<int> xs;
            for (const auto& item : split_list(v)) {
                xs.push_back(parse_integer<int>(item, line));
            }
            c.*outer.*inner = std::move(xs);
        };
    } else {
        static_assert(std::is_integral_v<T>);
        f.get = [=](const RunConfig& c) { return std::to_string(c.*outer.*inner); };
        f.set = [=](RunConfig& c, const std::string& v, int line) { c.*outer.*inner = parse_integer<T>(v, line); };
    }
    return f;
}

const std::vector<Field>& fields()
{
    using C = RunConfig;
    static const std::vector<Field> table{
        make_field("run", "mode", &C::run, &C::Run::mode),
        make_field("run", "seed", &C::run, &C::Run::seed),
        make_field("run", "threads", &C::run, &C::Run::threads),
        make_field("domain", "dimension", &C::domain, &C::DomainSettings::dimension),
        make_field("domain", "length_x", &C::domain, &C::DomainSettings::length_x),
        make_field("domain", "length_y", &C::domain, &C::DomainSettings::length_y),
        make_field("domain", "modes_x", &C::domain, &C::DomainSettings::modes_x),
        make_field("domain", "modes_y", &C::domain, &C::DomainSettings::modes_y),
        make_field("potential", "name", &C::potential, &C::PotentialSettings::name),
        make_field("potential", "scale", &C::potential, &C::PotentialSettings::scale),
        make_field("potential", "pi_coefficient", &C::potential, &C::PotentialSettings::pi_coefficient),
        make_field("noise", "kind", &C::noise, &C::NoiseSettings::kind),
        make_field("noise", "modes", &C::noise, &C::NoiseSettings::modes),
        make_field("noise", "sigma", &C::noise, &C::NoiseSettings::sigma),
        make_field("noise", "rho", &C::noise, &C::NoiseSettings::rho),
        make_field("noise", "mean_zero", &C::noise, &C::NoiseSettings::mean_zero),
        make_field("noise", "clamp", &C::noise, &C::NoiseSettings::clamp),
        make_field("noise", "map", &C::noise, &C::NoiseSettings::map),
        make_field("noise", "smoothing", &C::noise, &C::NoiseSettings::smoothing),
        make_field("noise", "base_dt", &C::noise, &C::NoiseSettings::base_dt),
        make_field("solver", "epsilon", &C::solver, &C::SolverSettings::epsilon),
        make_field("solver", "lambda", &C::solver, &C::SolverSettings::lambda),
        make_field("solver", "dt", &C::solver, &C::SolverSettings::dt),
        make_field("solver", "horizon", &C::solver, &C::SolverSettings::horizon),
        make_field("solver", "newton_tol", &C::solver, &C::SolverSettings::newton_tol),
        make_field("solver", "newton_max_iter", &C::solver, &C::SolverSettings::newton_max_iter),
        make_field("solver", "cg_max_iter", &C::solver, &C::SolverSettings::cg_max_iter),
        make_field("solver", "splitting", &C::solver, &C::SolverSettings::splitting),
        make_field("solver", "max_rejections", &C::solver, &C::SolverSettings::max_rejections),
        make_field("solver", "source_constant", &C::solver, &C::SolverSettings::source_constant),
        make_field("solver", "source_amplitude", &C::solver, &C::SolverSettings::source_amplitude),
        make_field("solver", "source_mode", &C::solver, &C::SolverSettings::source_mode),
        make_field("initial", "kind", &C::initial, &C::InitialSettings::kind),
        make_field("initial", "mean", &C::initial, &C::InitialSettings::mean),
        make_field("initial", "amplitude", &C::initial, &C::InitialSettings::amplitude),
        make_field("initial", "mode_x", &C::initial, &C::InitialSettings::mode_x),
        make_field("initial", "mode_y", &C::initial, &C::InitialSettings::mode_y),
        make_field("initial", "decay", &C::initial, &C::InitialSettings::decay),
        make_field("initial", "perturbation", &C::initial, &C::InitialSettings::perturbation),
        make_field("initial", "perturbation_mode", &C::initial, &C::InitialSettings::perturbation_mode),
        make_field("sweep", "epsilon", &C::sweep, &C::SweepSettings::epsilon),
        make_field("sweep", "lambda", &C::sweep, &C::SweepSettings::lambda),
        make_field("sweep", "smoothing", &C::sweep, &C::SweepSettings::smoothing),
        make_field("sweep", "members", &C::sweep, &C::SweepSettings::members),
        make_field("sweep", "k_cap", &C::sweep, &C::SweepSettings::k_cap),
        make_field("sweep", "ensemble_epsilon", &C::sweep, &C::SweepSettings::ensemble_epsilon),
        make_field("sweep", "ensemble_lambda", &C::sweep, &C::SweepSettings::ensemble_lambda),
        make_field("output", "dir", &C::output, &C::OutputSettings::dir),
        make_field("output", "format", &C::output, &C::OutputSettings::format),
    };
    return table;
}

bool one_of(const std::string& v, std::initializer_list<const char*> options)
{
    return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

RunConfig parse_config_unvalidated(const std::string& text)
{
    RunConfig c;
    std::istringstream is(text);
    std::string raw, section;
    int line = 0;
    std::vector<std::string> seen;
    while (std::getline(is, raw)) {
        ++line;
        auto cut = raw.find_first_of("#;");
        const std::string s = trim(std::string_view(raw).substr(0, cut));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw ParseError("unterminated section header", line);
            }
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            const bool known = std::any_of(fields().begin(), fields().end(),
                                           [&](const Field& f) { return section == f.section; });
            if (!known) {
                throw ParseError("unknown section [" + section + "]", line);
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected key = value", line);
        }
        if (section.empty()) {
            throw ParseError("key outside any [section]", line);
        }
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) {
            return section == f.section && key == f.key;
        });
        if (it == fields().end()) {
            throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
        }
        const std::string id = section + "." + key;
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
            throw ParseError("duplicate key '" + key + "' in [" + section + "]", line);
        }
        seen.push_back(id);
        it->set(c, value, line);
    }
    return c;
}

RunConfig parse_config(const std::string& text)
{
    RunConfig c = parse_config_unvalidated(text);
    validate_config(c);
    return c;
}

std::string emit_config(const RunConfig& config)
{
    std::string out, section;
    for (const auto& f : fields()) {
        if (section != f.section) {
            if (!section.empty()) {
                out += '\n';
            }
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(config) + "\n";
    }
    return out;
}

void apply_env_overrides(RunConfig& config, const std::function<const char*(const char*)>& getenv)
{
    for (const auto& f : fields()) {
        std::string name = std::string("SCH_") + f.section + "_" + f.key;
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        const char* v = getenv ? getenv(name.c_str()) : std::getenv(name.c_str());
        if (v != nullptr) {
            try {
                f.set(config, trim(v), 0);
            } catch (const ParseError& e) {
                throw ParseError(name + ": " + e.what(), 0);
            }
        }
    }
}

void validate_config(const RunConfig& c)
{
    if (!one_of(c.run.mode, {"simulate", "continuous_dependence", "vanishing_viscosity", "yosida_sweep",
                             "ensemble", "regularity"})) {
        throw ValidationError("unknown mode '" + c.run.mode + "'");
    }
    if (c.run.threads < 1) {
        throw ValidationError("threads must be >= 1");
    }
    if (c.domain.dimension != 1 && c.domain.dimension != 2) {
        throw ValidationError("domain dimension must be 1 or 2");
    }
    if (!(c.domain.length_x > 0.0) || !(c.domain.length_y > 0.0) || !std::isfinite(c.domain.length_x) ||
        !std::isfinite(c.domain.length_y)) {
        throw ValidationError("domain lengths must be positive and finite");
    }
    if (c.domain.modes_x < 2 || (c.domain.dimension == 2 && c.domain.modes_y < 2)) {
        throw ValidationError("every active axis needs at least 2 modes");
    }

    // (H1): registry lookup rejects bounded-domain potentials
    const MonotoneGraph graph = make_graph(c.potential.name, c.potential.scale);
    validate_graph(graph);
    if (!std::isfinite(c.potential.pi_coefficient)) {
        throw ValidationError("pi must be Lipschitz with finite C_pi, violates (H2)");
    }

    if (!one_of(c.noise.kind, {"none", "additive", "multiplicative"})) {
        throw ValidationError("unknown noise kind '" + c.noise.kind + "'");
    }
    if (c.noise.kind != "none") {
        const int available = c.domain.modes_x * (c.domain.dimension == 2 ? c.domain.modes_y : 1);
        if (c.noise.modes < 1 || c.noise.modes + (c.noise.mean_zero ? 1 : 0) > available) {
            throw ValidationError("noise mode count must lie within the spatial basis");
        }
        if (!std::isfinite(c.noise.sigma) || c.noise.sigma < 0.0 || !std::isfinite(c.noise.rho) ||
            c.noise.rho < 0.0) {
            throw ValidationError("noise amplitudes must be finite with rho >= 0, violates (B1)");
        }
        if (c.noise.smoothing < 0) {
            throw ValidationError("smoothing level must be >= 0");
        }
        if (!(c.noise.base_dt >= 0.0)) {
            throw ValidationError("noise base_dt must be >= 0");
        }
    }
    if (c.noise.kind == "multiplicative") {
        if (!c.noise.mean_zero) {
            throw ValidationError("multiplicative noise must take mean-zero values, violates (B3)/(B4)");
        }
        if (!(c.noise.clamp > 0.0) || !std::isfinite(c.noise.clamp)) {
            throw ValidationError("multiplicative truncation M must be positive, violates (B3)");
        }
        if (!one_of(c.noise.map, {"clamp", "constant"})) {
            throw ValidationError("unknown multiplicative map '" + c.noise.map + "'");
        }
    }

    if (!(c.solver.lambda > 0.0) || !std::isfinite(c.solver.lambda)) {
        throw ValidationError("Yosida parameter lambda must be > 0");
    }
    if (!(c.solver.epsilon >= 0.0) || !std::isfinite(c.solver.epsilon)) {
        throw ValidationError("viscosity eps must be >= 0");
    }
    if (!(c.solver.dt > 0.0) || !(c.solver.horizon > 0.0) || c.solver.dt > c.solver.horizon) {
        throw ValidationError("time step must satisfy 0 < dt <= T");
    }
    if (!(c.solver.newton_tol >= 1e-14)) {
        throw ValidationError("newton_tol must be >= 1e-14");
    }
    if (c.solver.newton_max_iter < 1 || c.solver.cg_max_iter < 1 || c.solver.max_rejections < 0) {
        throw ValidationError("iteration caps must be positive");
    }
    if (!one_of(c.solver.splitting, {"convex_splitting", "fully_implicit"})) {
        throw ValidationError("unknown splitting '" + c.solver.splitting + "'");
    }
    if (!std::isfinite(c.solver.source_constant) || !std::isfinite(c.solver.source_amplitude)) {
        throw ValidationError("source g must be finite, violates (H3)");
    }
    if (c.solver.source_mode < 0 || c.solver.source_mode >= c.domain.modes_x) {
        throw ValidationError("source mode outside the basis");
    }

    if (!one_of(c.initial.kind, {"cosine", "constant", "random"})) {
        throw ValidationError("unknown initial kind '" + c.initial.kind + "'");
    }
    if (!std::isfinite(c.initial.mean) || !std::isfinite(c.initial.amplitude)) {
        throw ValidationError("initial datum must be finite, violates (H4)");
    }
    const int my = c.domain.dimension == 2 ? c.domain.modes_y : 1;
    if (c.initial.mode_x < 0 || c.initial.mode_x >= c.domain.modes_x || c.initial.mode_y < 0 ||
        c.initial.mode_y >= my) {
        throw ValidationError("initial mode outside the basis");
    }
    if (c.initial.perturbation_mode < 1 || c.initial.perturbation_mode >= c.domain.modes_x ||
        !(c.initial.perturbation >= 0.0)) {
        throw ValidationError("perturbation needs a nonconstant mode and a nonnegative size");
    }

    for (double e : c.sweep.epsilon) {
        if (!(e >= 0.0) || !std::isfinite(e)) {
            throw ValidationError("sweep eps values must be >= 0");
        }
    }
    for (double l : c.sweep.lambda) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw ValidationError("sweep lambda values must be > 0");
        }
    }
    for (int n : c.sweep.smoothing) {
        if (n < 1) {
            throw ValidationError("smoothing levels must be >= 1");
        }
    }
    if (c.sweep.members < 8) {
        throw ValidationError("ensembles need at least 8 members");
    }
    if (!one_of(c.output.format, {"csv"})) {
        throw ValidationError("unknown output format '" + c.output.format + "'");
    }
}

std::string config_hash(const RunConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : emit_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sch
