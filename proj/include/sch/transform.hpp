#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace sch {

/// Moves between truncated Neumann-cosine coefficients and point values on a
/// cell-centred collocation grid, x_j = (j + 1/2) L / P along each axis.
///
/// Coefficients c_k multiply the unnormalised basis prod_a cos(k_a pi x_a / L_a);
/// storage is row-major with the last axis fastest. A 1D transform is a 2D one
/// with a single mode and a single grid point on axis 1. `analyze` is the exact
/// discrete inverse of `synthesize` for fields whose modes fit on the grid, and
/// otherwise returns the discrete projection truncated to the retained modes.
class CosineTransform {
public:
    CosineTransform(std::array<int, 2> modes, std::array<int, 2> grid);
    virtual ~CosineTransform() = default;

    CosineTransform(const CosineTransform&) = delete;
    CosineTransform& operator=(const CosineTransform&) = delete;

    const std::array<int, 2>& modes() const noexcept { return modes_; }
    const std::array<int, 2>& grid() const noexcept { return grid_; }
    int mode_count() const noexcept { return modes_[0] * modes_[1]; }
    int grid_count() const noexcept { return grid_[0] * grid_[1]; }

    virtual void synthesize(std::span<const double> coefficients, std::span<double> values) const = 0;
    virtual void analyze(std::span<const double> values, std::span<double> coefficients) const = 0;

protected:
    void check_sizes(std::size_t coefficients, std::size_t values) const;

    std::array<int, 2> modes_;
    std::array<int, 2> grid_;
};

/// Even-extension fast cosine transform (FFTW REDFT01 / REDFT10).
/// Plans are created once per grid shape and shared; execution is thread safe.
class FastCosineTransform final : public CosineTransform {
public:
    FastCosineTransform(std::array<int, 2> modes, std::array<int, 2> grid);

    void synthesize(std::span<const double> coefficients, std::span<double> values) const override;
    void analyze(std::span<const double> values, std::span<double> coefficients) const override;

    struct Plans;

private:
    std::shared_ptr<const Plans> plans_;
};

/// Direct evaluation of the cosine sums with precomputed tables. O(K P) per axis;
/// used as the reference for the fast transform and for small mode counts.
class DenseCosineTransform final : public CosineTransform {
public:
    DenseCosineTransform(std::array<int, 2> modes, std::array<int, 2> grid);

    void synthesize(std::span<const double> coefficients, std::span<double> values) const override;
    void analyze(std::span<const double> values, std::span<double> coefficients) const override;

private:
    // table_[a][j * modes_[a] + k] = cos(k pi (j + 1/2) / grid_[a])
    std::array<std::vector<double>, 2> table_;
};

}  // namespace sch
