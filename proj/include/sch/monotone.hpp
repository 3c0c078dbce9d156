#pragma once

#include "sch/spectral.hpp"

#include <functional>
#include <optional>
#include <string>

namespace sch {

using ScalarFunction = std::function<double(double)>;

enum class GrowthKind { Polynomial, Exponential };

struct Growth {
    GrowthKind kind = GrowthKind::Polynomial;
    int degree = 1;  // degree of beta for polynomial growth

    bool is_cubic() const noexcept { return kind == GrowthKind::Polynomial && degree == 3; }
};

/// Maximal monotone graph beta = d(beta_hat) with everywhere-defined domain,
/// stored through its single-valued representative. beta(0) = 0, beta_hat(0) = 0.
struct MonotoneGraph {
    std::string name;
    ScalarFunction beta;
    ScalarFunction beta_hat;
    ScalarFunction beta_prime;
    /// (I + lambda beta)^{-1} r when available in closed form: f(lambda, r).
    std::function<double(double, double)> closed_form_resolvent;
    Growth growth;
};

/// Lipschitz perturbation pi with pi(0) = 0 and primitive pi_hat.
struct LipschitzPerturbation {
    ScalarFunction pi;
    ScalarFunction pi_hat;
    ScalarFunction pi_prime;
    double lipschitz_constant = 0.0;
    /// Set when pi(r) = slope * r, which lets the stepper apply it exactly in
    /// coefficient space.
    std::optional<double> linear_slope;

    /// pi(r) = -coefficient * r, the concave part of a double well.
    static LipschitzPerturbation linear(double coefficient);
    static LipschitzPerturbation none() { return linear(0.0); }
};

/// The convex/concave pair driving the chemical potential.
struct Potential {
    MonotoneGraph graph;
    LipschitzPerturbation perturbation;
};

// ---------------------------------------------------------------------------
// Built-in registry

/// beta(r) = scale * r
MonotoneGraph linear_graph(double scale = 1.0);
/// beta(r) = scale * r^3, beta_hat = scale r^4 / 4
MonotoneGraph quartic_graph(double scale = 1.0);
/// beta(r) = scale * r^5, beta_hat = scale r^6 / 6
MonotoneGraph sextic_graph(double scale = 1.0);
/// beta(r) = scale * sinh(r), beta_hat = scale (cosh r - 1)
MonotoneGraph exponential_graph(double scale = 1.0);

/// Looks up a graph by name ("linear", "quartic", "sextic", "exponential").
/// Potentials whose domain is not all of R (logarithmic, obstacle) are
/// rejected with a ValidationError citing (H1); unknown names likewise.
MonotoneGraph make_graph(const std::string& name, double scale = 1.0);

/// Names accepted by make_graph.
const std::vector<std::string>& graph_names();

/// Samples the structural properties: beta(0) = 0, beta_hat(0) = 0,
/// monotonicity, primitive consistency (Gauss-Legendre, 1e-8 relative) and the
/// symmetry-like ratio bound on [-10, 10]. Throws ValidationError on failure.
void validate_graph(const MonotoneGraph& graph);

/// Checks pi(0) = 0 and the Lipschitz bound on sampled pairs.
void validate_perturbation(const LipschitzPerturbation& perturbation);

// ---------------------------------------------------------------------------
// Regularisation

inline constexpr double resolvent_tolerance = 1e-12;
inline constexpr int resolvent_max_iterations = 200;

/// J = (I + lambda beta)^{-1} r: safeguarded Newton with bisection fallback on
/// [min(0, r), max(0, r)]. Throws NoConvergence after the iteration cap.
double resolvent(const MonotoneGraph& graph, double lambda, double r);

/// beta_lambda(r) = (r - J_lambda r) / lambda, evaluated as beta(J_lambda r).
double yosida(const MonotoneGraph& graph, double lambda, double r);

/// beta_lambda'(r) = beta'(J) / (1 + lambda beta'(J)).
double yosida_derivative(const MonotoneGraph& graph, double lambda, double r);

/// Both at once, sharing the resolvent solve.
struct YosidaValue {
    double value;
    double derivative;
};
YosidaValue yosida_with_derivative(const MonotoneGraph& graph, double lambda, double r);

/// beta_hat_lambda(r) = beta_hat(J r) + lambda/2 beta_lambda(r)^2.
double moreau_envelope(const MonotoneGraph& graph, double lambda, double r);

/// Convex conjugate sup_r { s r - beta_hat(r) }, by golden-section search on a
/// bracket [-B, B] grown until beta(+-B) exceeds |s| tenfold.
double conjugate(const MonotoneGraph& graph, double s);

/// Applies f on the collocation grid (twice the mode count per axis) and
/// projects back onto the retained modes.
SpectralField apply_pointwise(const SpectralField& field, const ScalarFunction& f);

}  // namespace sch
