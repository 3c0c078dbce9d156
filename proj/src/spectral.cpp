#include "sch/spectral.hpp"

#include "sch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sch {

// ---------------------------------------------------------------------------
// Domain

void Domain::validate() const
{
    if (dimension != 1 && dimension != 2) {
        throw ValidationError("domain dimension must be 1 or 2");
    }
    for (int a = 0; a < dimension; ++a) {
        if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
            throw ValidationError("domain lengths must be positive and finite");
        }
        if (modes[a] < 2) {
            throw ValidationError("every active axis needs at least 2 modes");
        }
    }
    if (dimension == 1 && modes[1] != 1) {
        throw ValidationError("a 1D domain carries exactly one mode on the inert axis");
    }
}

Domain Domain::interval(double length, int modes)
{
    Domain d{1, {length, 1.0}, {modes, 1}};
    d.validate();
    return d;
}

Domain Domain::rectangle(double lx, double ly, int mx, int my)
{
    Domain d{2, {lx, ly}, {mx, my}};
    d.validate();
    return d;
}

EigenSystem neumann_eigensystem(const Domain& domain)
{
    domain.validate();
    EigenSystem sys;
    sys.modes.reserve(static_cast<std::size_t>(domain.mode_count()));
    for (int k0 = 0; k0 < domain.modes[0]; ++k0) {
        for (int k1 = 0; k1 < domain.modes[1]; ++k1) {
            const double m0 = k0 * std::numbers::pi / domain.lengths[0];
            const double m1 = domain.dimension == 2 ? k1 * std::numbers::pi / domain.lengths[1] : 0.0;
            sys.modes.push_back({{k0, k1}, k0 * domain.modes[1] + k1, m0 * m0 + m1 * m1});
        }
    }
    std::stable_sort(sys.modes.begin(), sys.modes.end(),
                     [](const EigenMode& a, const EigenMode& b) { return a.value < b.value; });
    return sys;
}

// ---------------------------------------------------------------------------
// Basis

Basis::Basis(const Domain& domain, TransformBackend backend)
    : domain_(domain), eigensystem_(neumann_eigensystem(domain))
{
    const auto n = static_cast<std::size_t>(domain_.mode_count());
    eigenvalues_.assign(n, 0.0);
    weights_.assign(n, 1.0);
    for (const auto& m : eigensystem_.modes) {
        eigenvalues_[static_cast<std::size_t>(m.flat)] = m.value;
        double w = 1.0;
        for (int a = 0; a < domain_.dimension; ++a) {
            if (m.index[a] != 0) {
                w *= 0.5;
            }
        }
        weights_[static_cast<std::size_t>(m.flat)] = w;
    }
    const std::array<int, 2> grid{2 * domain_.modes[0], domain_.dimension == 2 ? 2 * domain_.modes[1] : 1};
    if (backend == TransformBackend::Dense) {
        transform_ = std::make_unique<DenseCosineTransform>(domain_.modes, grid);
    } else {
        transform_ = std::make_unique<FastCosineTransform>(domain_.modes, grid);
    }
}

std::shared_ptr<const Basis> Basis::make(const Domain& domain, TransformBackend backend)
{
    return std::make_shared<const Basis>(domain, backend);
}

std::vector<std::array<double, 2>> Basis::grid_points() const
{
    const auto& g = transform_->grid();
    std::vector<std::array<double, 2>> pts;
    pts.reserve(static_cast<std::size_t>(g[0] * g[1]));
    for (int j0 = 0; j0 < g[0]; ++j0) {
        for (int j1 = 0; j1 < g[1]; ++j1) {
            const double x = (j0 + 0.5) * domain_.lengths[0] / g[0];
            const double y = domain_.dimension == 2 ? (j1 + 0.5) * domain_.lengths[1] / g[1] : 0.0;
            pts.push_back({x, y});
        }
    }
    return pts;
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(BasisPtr basis)
    : basis_(std::move(basis)), c_(static_cast<std::size_t>(basis_->size()), 0.0) {}

SpectralField::SpectralField(BasisPtr basis, std::vector<double> coefficients)
    : basis_(std::move(basis)), c_(std::move(coefficients))
{
    if (c_.size() != static_cast<std::size_t>(basis_->size())) {
        throw DimensionMismatch("coefficient count does not match the basis");
    }
}

SpectralField SpectralField::constant(BasisPtr basis, double value)
{
    SpectralField f(std::move(basis));
    f.c_[0] = value;
    return f;
}

SpectralField SpectralField::cosine(BasisPtr basis, double amplitude, int k0, int k1)
{
    const auto& m = basis->domain().modes;
    if (k0 < 0 || k0 >= m[0] || k1 < 0 || k1 >= m[1]) {
        throw DimensionMismatch("cosine mode outside the truncated basis");
    }
    SpectralField f(basis);
    f.c_[static_cast<std::size_t>(basis->flat_index(k0, k1))] = amplitude;
    return f;
}

SpectralField SpectralField::from_function(BasisPtr basis,
                                           const std::function<double(double, double)>& f)
{
    const auto pts = basis->grid_points();
    std::vector<double> values(pts.size());
    std::transform(pts.begin(), pts.end(), values.begin(),
                   [&](const std::array<double, 2>& p) { return f(p[0], p[1]); });
    return from_grid(std::move(basis), values);
}

SpectralField SpectralField::from_grid(BasisPtr basis, std::span<const double> values)
{
    SpectralField out(basis);
    basis->transform().analyze(values, out.c_);
    return out;
}

SpectralField SpectralField::without_mean() const
{
    SpectralField out = *this;
    out.c_[0] = 0.0;
    return out;
}

std::vector<double> SpectralField::grid_values() const
{
    std::vector<double> values(static_cast<std::size_t>(basis_->grid_size()));
    basis_->transform().synthesize(c_, values);
    return values;
}

std::vector<double> SpectralField::grid_values(std::array<int, 2> points) const
{
    const auto& dom = basis_->domain();
    if (dom.dimension == 1) {
        points[1] = 1;
    }
    FastCosineTransform t(dom.modes, points);
    std::vector<double> values(static_cast<std::size_t>(t.grid_count()));
    t.synthesize(c_, values);
    return values;
}

void SpectralField::check_compatible(const SpectralField& other) const
{
    if (basis_ != other.basis_ && (basis_ == nullptr || other.basis_ == nullptr ||
                                   !(basis_->domain() == other.basis_->domain()))) {
        throw DimensionMismatch("fields live on different bases");
    }
}

SpectralField& SpectralField::operator+=(const SpectralField& other)
{
    check_compatible(other);
    for (std::size_t k = 0; k < c_.size(); ++k) {
        c_[k] += other.c_[k];
    }
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other)
{
    check_compatible(other);
    for (std::size_t k = 0; k < c_.size(); ++k) {
        c_[k] -= other.c_[k];
    }
    return *this;
}

SpectralField& SpectralField::operator*=(double s)
{
    for (auto& c : c_) {
        c *= s;
    }
    return *this;
}

bool SpectralField::operator==(const SpectralField& other) const
{
    if (basis_ == nullptr || other.basis_ == nullptr) {
        return basis_ == other.basis_ && c_ == other.c_;
    }
    return basis_->domain() == other.basis_->domain() && c_ == other.c_;
}

// ---------------------------------------------------------------------------
// Operators

namespace {

template <class F>
SpectralField scale_modes(const SpectralField& v, F&& factor)
{
    SpectralField out = v;
    const auto mu = v.basis()->eigenvalues();
    auto c = out.coefficients();
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] *= factor(mu[k], k);
    }
    return out;
}

// |D| sum_k w_k mu_k^p c_k^2, skipping the constant mode when p < 0
double weighted_sum(const SpectralField& v, int power)
{
    const auto mu = v.basis()->eigenvalues();
    const auto w = v.basis()->weights();
    const auto c = v.coefficients();
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (power < 0 && k == 0) {
            continue;
        }
        double m = 1.0;
        for (int p = 0; p < std::abs(power); ++p) {
            m *= mu[k];
        }
        if (power < 0) {
            m = 1.0 / m;
        }
        s += w[k] * m * c[k] * c[k];
    }
    return v.basis()->measure() * s;
}

}  // namespace

SpectralField apply_laplacian(const SpectralField& v)
{
    return scale_modes(v, [](double mu, std::size_t) { return -mu; });
}

SpectralField apply_inverse_neumann(const SpectralField& v)
{
    const double tol = 1e-12 * norm(v, norm_h);
    if (std::abs(v.mean()) > tol) {
        throw NonZeroMean(v.mean(), tol);
    }
    return scale_modes(v, [](double mu, std::size_t k) { return k == 0 ? 0.0 : 1.0 / mu; });
}

SpectralField apply_resolvent(const SpectralField& v, double eps)
{
    if (eps == 0.0) {
        return v;
    }
    return scale_modes(v, [eps](double mu, std::size_t) { return 1.0 / (1.0 + eps * mu); });
}

SpectralField apply_viscous_operator(const SpectralField& v, double eps)
{
    return scale_modes(v, [eps](double mu, std::size_t) { return 1.0 + eps * mu; });
}

SpectralField phi_eps(const SpectralField& v, double eps)
{
    return apply_inverse_neumann(apply_resolvent(v.without_mean(), eps));
}

double Phi_eps(const SpectralField& v, double eps)
{
    const SpectralField r = apply_resolvent(v.without_mean(), eps);
    const SpectralField nr = apply_inverse_neumann(r);
    return 0.5 * grad_norm_sq(nr) + 0.5 * eps * inner(r, r);
}

double inner(const SpectralField& a, const SpectralField& b)
{
    if (a.size() != b.size()) {
        throw DimensionMismatch("inner product of fields on different bases");
    }
    const auto w = a.basis()->weights();
    const auto ca = a.coefficients();
    const auto cb = b.coefficients();
    double s = 0.0;
    for (std::size_t k = 0; k < ca.size(); ++k) {
        s += w[k] * ca[k] * cb[k];
    }
    return a.basis()->measure() * s;
}

double grad_norm_sq(const SpectralField& v)
{
    return weighted_sum(v, 1);
}

double norm(const SpectralField& v, Norm kind)
{
    const double h2 = weighted_sum(v, 0);
    const double m = v.mean();
    switch (kind.kind) {
    case NormKind::H:
        return std::sqrt(h2);
    case NormKind::V1:
        return std::sqrt(m * m + weighted_sum(v, 1));
    case NormKind::V2:
        return std::sqrt(h2 + weighted_sum(v, 2));
    case NormKind::V3:
        return std::sqrt(h2 + weighted_sum(v, 3));
    case NormKind::Star:
        return std::sqrt(weighted_sum(v, -1) + m * m);
    case NormKind::OneEps:
        return std::sqrt(h2 + kind.eps * weighted_sum(v, 1));
    }
    return 0.0;
}

double integrate_pointwise(const SpectralField& v, const std::function<double(double)>& f)
{
    const auto values = v.grid_values();
    double s = 0.0;
    for (double x : values) {
        s += f(x);
    }
    return v.basis()->measure() * s / static_cast<double>(values.size());
}

double lp_norm(const SpectralField& v, double p)
{
    return std::pow(integrate_pointwise(v, [p](double x) { return std::pow(std::abs(x), p); }),
                    1.0 / p);
}

}  // namespace sch
