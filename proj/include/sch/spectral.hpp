#pragma once

#include "sch/transform.hpp"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace sch {

/// Axis-aligned box (0, L_0) x (0, L_1) with a truncated Neumann-cosine basis.
/// In 1D the second axis is inert (length 1, one mode).
struct Domain {
    int dimension = 1;
    std::array<double, 2> lengths{1.0, 1.0};
    std::array<int, 2> modes{64, 1};

    /// Throws ValidationError unless dimension is 1 or 2, lengths are positive
    /// and every active axis carries at least two modes.
    void validate() const;

    static Domain interval(double length, int modes);
    static Domain rectangle(double lx, double ly, int mx, int my);

    double measure() const noexcept { return lengths[0] * (dimension == 2 ? lengths[1] : 1.0); }
    int mode_count() const noexcept { return modes[0] * modes[1]; }

    bool operator==(const Domain&) const = default;
};

/// One eigenpair label of the Neumann Laplacian on the box.
struct EigenMode {
    std::array<int, 2> index{0, 0};
    int flat = 0;         // position in coefficient storage
    double value = 0.0;   // mu_k >= 0
};

/// Eigenvalues of -Laplacian with Neumann conditions, sorted ascending (ties by
/// storage position), so the constant mode with mu = 0 comes first.
struct EigenSystem {
    std::vector<EigenMode> modes;
};

EigenSystem neumann_eigensystem(const Domain& domain);

enum class TransformBackend { Fast, Dense };

/// Immutable discretisation shared by every field on a domain: eigenvalues,
/// L2 weights of the basis functions and the collocation transform (grid of
/// twice the mode count per axis).
class Basis {
public:
    explicit Basis(const Domain& domain, TransformBackend backend = TransformBackend::Fast);

    static std::shared_ptr<const Basis> make(const Domain& domain,
                                             TransformBackend backend = TransformBackend::Fast);

    const Domain& domain() const noexcept { return domain_; }
    int size() const noexcept { return domain_.mode_count(); }
    int grid_size() const noexcept { return transform_->grid_count(); }
    double measure() const noexcept { return domain_.measure(); }

    /// mu_k in coefficient storage order.
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    /// |D|^{-1} ||phi_k||_H^2: 1 for the constant mode, 1/2 or 1/4 otherwise.
    std::span<const double> weights() const noexcept { return weights_; }
    const EigenSystem& eigensystem() const noexcept { return eigensystem_; }
    const CosineTransform& transform() const noexcept { return *transform_; }

    /// Collocation point coordinates, row-major like the grid values.
    std::vector<std::array<double, 2>> grid_points() const;

    int flat_index(int k0, int k1 = 0) const noexcept { return k0 * domain_.modes[1] + k1; }

private:
    Domain domain_;
    std::vector<double> eigenvalues_;
    std::vector<double> weights_;
    EigenSystem eigensystem_;
    std::unique_ptr<const CosineTransform> transform_;
};

using BasisPtr = std::shared_ptr<const Basis>;

/// A function on the domain stored as truncated cosine coefficients.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(BasisPtr basis);
    SpectralField(BasisPtr basis, std::vector<double> coefficients);

    static SpectralField zeros(BasisPtr basis) { return SpectralField(std::move(basis)); }
    static SpectralField constant(BasisPtr basis, double value);
    /// amplitude * cos(k0 pi x / L0) cos(k1 pi y / L1)
    static SpectralField cosine(BasisPtr basis, double amplitude, int k0, int k1 = 0);
    /// Interpolates `f` at the collocation points.
    static SpectralField from_function(BasisPtr basis,
                                       const std::function<double(double, double)>& f);
    static SpectralField from_grid(BasisPtr basis, std::span<const double> values);

    const BasisPtr& basis() const noexcept { return basis_; }
    std::span<const double> coefficients() const noexcept { return c_; }
    std::span<double> coefficients() noexcept { return c_; }
    std::size_t size() const noexcept { return c_.size(); }
    double operator[](std::size_t k) const { return c_[k]; }
    double& operator[](std::size_t k) { return c_[k]; }

    /// Spatial mean; equals the constant-mode coefficient exactly.
    double mean() const noexcept { return c_.empty() ? 0.0 : c_[0]; }
    SpectralField without_mean() const;

    std::vector<double> grid_values() const;
    /// Values on a finer cell-centred grid with `points` points per active axis.
    std::vector<double> grid_values(std::array<int, 2> points) const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

    bool operator==(const SpectralField& other) const;

private:
    void check_compatible(const SpectralField& other) const;

    BasisPtr basis_;
    std::vector<double> c_;
};

// ---------------------------------------------------------------------------
// Linear operators (all diagonal in the cosine basis)

/// Delta v: coefficients multiplied by -mu_k.
SpectralField apply_laplacian(const SpectralField& v);

/// N v, the null-mean solution of -Delta z = v. Throws NonZeroMean when
/// |v_D| > 1e-12 ||v||_H.
SpectralField apply_inverse_neumann(const SpectralField& v);

/// R_eps^{-1} v = (I - eps Delta)^{-1} v; eps = 0 is the identity.
SpectralField apply_resolvent(const SpectralField& v, double eps);

/// R_eps v = v - eps Delta v.
SpectralField apply_viscous_operator(const SpectralField& v, double eps);

/// phi_eps(v) = N R_eps^{-1} (v - v_D).
SpectralField phi_eps(const SpectralField& v, double eps);

/// Phi_eps(v) = 1/2 ||grad N R_eps^{-1}(v - v_D)||^2 + eps/2 ||R_eps^{-1}(v - v_D)||^2.
double Phi_eps(const SpectralField& v, double eps);

// ---------------------------------------------------------------------------
// Inner products and norms

/// (a, b)_H computed from coefficients.
double inner(const SpectralField& a, const SpectralField& b);

/// ||grad v||_H^2
double grad_norm_sq(const SpectralField& v);

enum class NormKind {
    H,       // L2
    V1,      // sqrt(|v_D|^2 + ||grad v||^2)
    V2,      // sqrt(||v||^2 + ||Delta v||^2)
    V3,      // sqrt(||v||^2 + ||grad Delta v||^2), H^3 surrogate
    Star,    // sqrt(||grad N (v - v_D)||^2 + |v_D|^2), the dual norm on V1*
    OneEps,  // sqrt(||v||^2 + eps ||grad v||^2)
};

struct Norm {
    NormKind kind = NormKind::H;
    double eps = 0.0;

    static constexpr Norm one_eps(double e) { return {NormKind::OneEps, e}; }
};

inline constexpr Norm norm_h{NormKind::H};
inline constexpr Norm norm_v1{NormKind::V1};
inline constexpr Norm norm_v2{NormKind::V2};
inline constexpr Norm norm_v3{NormKind::V3};
inline constexpr Norm norm_star{NormKind::Star};

double norm(const SpectralField& v, Norm kind);

// ---------------------------------------------------------------------------
// Collocation quadrature

/// Midpoint-rule integral of f(v(x)) over D on the collocation grid.
double integrate_pointwise(const SpectralField& v, const std::function<double(double)>& f);

/// ||v||_{L^p} by collocation quadrature.
double lp_norm(const SpectralField& v, double p);

}  // namespace sch
