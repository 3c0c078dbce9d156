#include "sch/monotone.hpp"

#include "sch/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sch {

LipschitzPerturbation LipschitzPerturbation::linear(double coefficient)
{
    LipschitzPerturbation p;
    p.pi = [coefficient](double r) { return -coefficient * r; };
    p.pi_hat = [coefficient](double r) { return -0.5 * coefficient * r * r; };
    p.pi_prime = [coefficient](double) { return -coefficient; };
    p.lipschitz_constant = std::abs(coefficient);
    p.linear_slope = -coefficient;
    return p;
}

// ---------------------------------------------------------------------------
// Registry

MonotoneGraph linear_graph(double scale)
{
    MonotoneGraph g;
    g.name = "linear";
    g.beta = [scale](double r) { return scale * r; };
    g.beta_hat = [scale](double r) { return 0.5 * scale * r * r; };
    g.beta_prime = [scale](double) { return scale; };
    g.closed_form_resolvent = [scale](double lambda, double r) { return r / (1.0 + lambda * scale); };
    g.growth = {GrowthKind::Polynomial, 1};
    return g;
}

MonotoneGraph quartic_graph(double scale)
{
    MonotoneGraph g;
    g.name = "quartic";
    g.beta = [scale](double r) { return scale * r * r * r; };
    g.beta_hat = [scale](double r) { return 0.25 * scale * r * r * r * r; };
    g.beta_prime = [scale](double r) { return 3.0 * scale * r * r; };
    g.growth = {GrowthKind::Polynomial, 3};
    return g;
}

MonotoneGraph sextic_graph(double scale)
{
    MonotoneGraph g;
    g.name = "sextic";
    g.beta = [scale](double r) {
        const double r2 = r * r;
        return scale * r2 * r2 * r;
    };
    g.beta_hat = [scale](double r) {
        const double r2 = r * r;
        return scale * r2 * r2 * r2 / 6.0;
    };
    g.beta_prime = [scale](double r) {
        const double r2 = r * r;
        return 5.0 * scale * r2 * r2;
    };
    g.growth = {GrowthKind::Polynomial, 5};
    return g;
}

MonotoneGraph exponential_graph(double scale)
{
    MonotoneGraph g;
    g.name = "exponential";
    g.beta = [scale](double r) { return scale * std::sinh(r); };
    // cosh(r) - 1 = 2 sinh^2(r/2) avoids cancellation near 0
    g.beta_hat = [scale](double r) {
        const double s = std::sinh(0.5 * r);
        return 2.0 * scale * s * s;
    };
    g.beta_prime = [scale](double r) { return scale * std::cosh(r); };
    g.growth = {GrowthKind::Exponential, 0};
    return g;
}

const std::vector<std::string>& graph_names()
{
    static const std::vector<std::string> names{"linear", "quartic", "sextic", "exponential"};
    return names;
}

MonotoneGraph make_graph(const std::string& name, double scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ValidationError("potential scale must be positive and finite, (H1) needs a monotone graph");
    }
    if (name == "linear") {
        return linear_graph(scale);
    }
    if (name == "quartic" || name == "quartic_double_well") {
        return quartic_graph(scale);
    }
    if (name == "sextic") {
        return sextic_graph(scale);
    }
    if (name == "exponential" || name == "sinh") {
        return exponential_graph(scale);
    }
    if (name == "log" || name == "logarithmic" || name == "log_double_well" ||
        name == "obstacle" || name == "double_obstacle") {
        throw ValidationError("potential '" + name + "': potential domain not all of R violates (H1)");
    }
    throw ValidationError("unknown potential '" + name +
                          "': (H1) is only checked for linear, quartic, sextic, exponential");
}

namespace {

// 5-point Gauss-Legendre on [a, b]
double gauss_legendre(const ScalarFunction& f, double a, double b)
{
    static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                             -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665,
                                             0.4786286704993665, 0.2369268850561891,
                                             0.2369268850561891};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i] * f(c + h * x[i]);
    }
    return h * s;
}

}  // namespace

void validate_graph(const MonotoneGraph& graph)
{
    if (!graph.beta || !graph.beta_hat || !graph.beta_prime) {
        throw ValidationError("graph '" + graph.name + "' is missing beta, beta_hat or beta'");
    }
    if (std::abs(graph.beta(0.0)) > 1e-14 || std::abs(graph.beta_hat(0.0)) > 1e-14) {
        throw ValidationError("graph '" + graph.name + "': (H1) requires beta(0) = 0 and beta_hat(0) = 0");
    }
    std::vector<double> r;
    for (int i = -100; i <= 100; ++i) {
        r.push_back(0.1 * i);
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (std::size_t j = i + 1; j < r.size(); j += 7) {
            if ((graph.beta(r[j]) - graph.beta(r[i])) * (r[j] - r[i]) < 0.0) {
                throw ValidationError("graph '" + graph.name + "' is not monotone, violates (H1)");
            }
        }
    }
    // primitive consistency: beta_hat(r) = int_0^r beta, accumulated panel by panel
    double acc = 0.0;
    for (int i = 0; i < 100; ++i) {
        acc += gauss_legendre(graph.beta, 0.1 * i, 0.1 * (i + 1));
        const double expect = graph.beta_hat(0.1 * (i + 1));
        if (std::abs(acc - expect) > 1e-8 * std::max(1.0, std::abs(expect))) {
            throw ValidationError("graph '" + graph.name + "': beta_hat is not a primitive of beta");
        }
    }
    acc = 0.0;
    for (int i = 0; i < 100; ++i) {
        acc += gauss_legendre(graph.beta, -0.1 * i, -0.1 * (i + 1));
        const double expect = graph.beta_hat(-0.1 * (i + 1));
        if (std::abs(acc - expect) > 1e-8 * std::max(1.0, std::abs(expect))) {
            throw ValidationError("graph '" + graph.name + "': beta_hat is not a primitive of beta");
        }
    }
    for (double x = 1.0; x <= 10.0; x += 1.0) {
        const double ratio = graph.beta_hat(x) / graph.beta_hat(-x);
        if (!std::isfinite(ratio) || ratio > 1e6 || ratio < 1e-6) {
            throw ValidationError("graph '" + graph.name + "' fails the symmetry-like bound of (H1)");
        }
    }
}

void validate_perturbation(const LipschitzPerturbation& p)
{
    if (!p.pi || !p.pi_hat) {
        throw ValidationError("perturbation is missing pi or pi_hat");
    }
    if (p.pi(0.0) != 0.0) {
        throw ValidationError("(H2) requires pi(0) = 0");
    }
    if (!std::isfinite(p.lipschitz_constant) || p.lipschitz_constant < 0.0) {
        throw ValidationError("(H2) requires a finite Lipschitz constant");
    }
    for (int i = -50; i <= 50; ++i) {
        for (int j = i + 1; j <= 50; j += 3) {
            const double a = 0.2 * i, b = 0.2 * j;
            if (std::abs(p.pi(a) - p.pi(b)) > p.lipschitz_constant * std::abs(a - b) * (1.0 + 1e-12)) {
                throw ValidationError("perturbation exceeds its Lipschitz constant, violates (H2)");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Regularisation

double resolvent(const MonotoneGraph& graph, double lambda, double r)
{
    if (graph.closed_form_resolvent) {
        return graph.closed_form_resolvent(lambda, r);
    }
    if (r == 0.0 || !std::isfinite(r)) {
        return r;  // non-finite input propagates to the caller's finiteness checks
    }
    double lo = std::min(0.0, r);
    double hi = std::max(0.0, r);
    double x = r / (1.0 + lambda * graph.beta_prime(r));  // lands inside the bracket
    for (int it = 0; it < resolvent_max_iterations; ++it) {
        const double f = x + lambda * graph.beta(x) - r;
        if (f == 0.0) {
            return x;
        }
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double tol = std::max(resolvent_tolerance, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x));
        const double df = 1.0 + lambda * graph.beta_prime(x);
        double next = x - f / df;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= tol || hi - lo <= tol) {
            return next;
        }
        x = next;
    }
    throw NoConvergence("resolvent of graph '" + graph.name + "' did not converge");
}

double yosida(const MonotoneGraph& graph, double lambda, double r)
{
    return graph.beta(resolvent(graph, lambda, r));
}

double yosida_derivative(const MonotoneGraph& graph, double lambda, double r)
{
    return yosida_with_derivative(graph, lambda, r).derivative;
}

YosidaValue yosida_with_derivative(const MonotoneGraph& graph, double lambda, double r)
{
    const double j = resolvent(graph, lambda, r);
    const double bp = graph.beta_prime(j);
    return {graph.beta(j), bp / (1.0 + lambda * bp)};
}

double moreau_envelope(const MonotoneGraph& graph, double lambda, double r)
{
    const double j = resolvent(graph, lambda, r);
    const double b = graph.beta(j);
    return graph.beta_hat(j) + 0.5 * lambda * b * b;
}

double conjugate(const MonotoneGraph& graph, double s)
{
    const double target = 10.0 * std::abs(s);
    double bound = 1.0;
    while ((graph.beta(bound) < target || graph.beta(-bound) > -target) && bound < 1e150) {
        bound *= 2.0;
    }
    auto h = [&](double r) { return s * r - graph.beta_hat(r); };

    // golden-section maximisation of the concave h on [-bound, bound]
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -bound, b = bound;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double hc = h(c), hd = h(d);
    const double tol = 1e-10 * std::max(1.0, bound);
    while (b - a > tol) {
        if (hc > hd) {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    return std::max({0.0, hc, hd, h(0.5 * (a + b))});
}

SpectralField apply_pointwise(const SpectralField& field, const ScalarFunction& f)
{
    auto values = field.grid_values();
    for (auto& v : values) {
        v = f(v);
    }
    return SpectralField::from_grid(field.basis(), values);
}

}  // namespace sch
