#include "sch/transform.hpp"

#include "sch/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace sch {

CosineTransform::CosineTransform(std::array<int, 2> modes, std::array<int, 2> grid)
    : modes_(modes), grid_(grid)
{
    for (int a = 0; a < 2; ++a) {
        if (modes_[a] < 1 || grid_[a] < modes_[a]) {
            throw DimensionMismatch("cosine transform needs 1 <= modes <= grid points on every axis");
        }
    }
}

void CosineTransform::check_sizes(std::size_t coefficients, std::size_t values) const
{
    if (coefficients != static_cast<std::size_t>(mode_count()) ||
        values != static_cast<std::size_t>(grid_count())) {
        throw DimensionMismatch("cosine transform: buffer sizes do not match modes/grid");
    }
}

// ---------------------------------------------------------------------------
// FFTW backend

struct FastCosineTransform::Plans {
    fftw_plan forward = nullptr;   // coefficients -> values (REDFT01)
    fftw_plan backward = nullptr;  // values -> coefficients (REDFT10)
};

namespace {

// The FFTW planner is not reentrant; plan execution on new arrays is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// Plans live for the lifetime of the process.
std::shared_ptr<const FastCosineTransform::Plans> make_plans(std::array<int, 2> grid)
{
    static std::map<std::array<int, 2>, std::shared_ptr<const FastCosineTransform::Plans>> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (auto it = cache.find(grid); it != cache.end()) {
        return it->second;
    }
    const int n = grid[0] * grid[1];
    std::vector<double> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    auto plans = std::make_shared<FastCosineTransform::Plans>();
    if (grid[1] == 1) {
        plans->forward = fftw_plan_r2r_1d(grid[0], in.data(), out.data(), FFTW_REDFT01, flags);
        plans->backward = fftw_plan_r2r_1d(grid[0], in.data(), out.data(), FFTW_REDFT10, flags);
    } else {
        plans->forward = fftw_plan_r2r_2d(grid[0], grid[1], in.data(), out.data(),
                                          FFTW_REDFT01, FFTW_REDFT01, flags);
        plans->backward = fftw_plan_r2r_2d(grid[0], grid[1], in.data(), out.data(),
                                           FFTW_REDFT10, FFTW_REDFT10, flags);
    }
    if (plans->forward == nullptr || plans->backward == nullptr) {
        throw Error("FFTW failed to create a cosine transform plan");
    }
    cache.emplace(grid, plans);
    return plans;
}

}  // namespace

FastCosineTransform::FastCosineTransform(std::array<int, 2> modes, std::array<int, 2> grid)
    : CosineTransform(modes, grid), plans_(make_plans(grid)) {}

void FastCosineTransform::synthesize(std::span<const double> coefficients,
                                     std::span<double> values) const
{
    check_sizes(coefficients.size(), values.size());
    const int g1 = grid_[1];
    std::vector<double> padded(static_cast<std::size_t>(grid_count()), 0.0);
    // REDFT01 weighs every non-constant input by 2 along each axis.
    for (int k0 = 0; k0 < modes_[0]; ++k0) {
        const double f0 = k0 == 0 ? 1.0 : 0.5;
        for (int k1 = 0; k1 < modes_[1]; ++k1) {
            const double f1 = k1 == 0 ? 1.0 : 0.5;
            padded[static_cast<std::size_t>(k0 * g1 + k1)] =
                coefficients[static_cast<std::size_t>(k0 * modes_[1] + k1)] * f0 * f1;
        }
    }
    fftw_execute_r2r(plans_->forward, padded.data(), values.data());
}

void FastCosineTransform::analyze(std::span<const double> values,
                                  std::span<double> coefficients) const
{
    check_sizes(coefficients.size(), values.size());
    std::vector<double> in(values.begin(), values.end());
    std::vector<double> out(in.size());
    fftw_execute_r2r(plans_->backward, in.data(), out.data());
    const int g1 = grid_[1];
    const double inv0 = 1.0 / grid_[0];
    const double inv1 = 1.0 / grid_[1];
    for (int k0 = 0; k0 < modes_[0]; ++k0) {
        const double s0 = k0 == 0 ? 0.5 * inv0 : inv0;
        for (int k1 = 0; k1 < modes_[1]; ++k1) {
            // 1D plans leave axis 1 untouched
            const double s1 = g1 == 1 ? 1.0 : (k1 == 0 ? 0.5 * inv1 : inv1);
            coefficients[static_cast<std::size_t>(k0 * modes_[1] + k1)] =
                out[static_cast<std::size_t>(k0 * g1 + k1)] * s0 * s1;
        }
    }
}

// ---------------------------------------------------------------------------
// Dense reference

DenseCosineTransform::DenseCosineTransform(std::array<int, 2> modes, std::array<int, 2> grid)
    : CosineTransform(modes, grid)
{
    for (int a = 0; a < 2; ++a) {
        auto& t = table_[a];
        t.resize(static_cast<std::size_t>(grid_[a] * modes_[a]));
        for (int j = 0; j < grid_[a]; ++j) {
            for (int k = 0; k < modes_[a]; ++k) {
                t[static_cast<std::size_t>(j * modes_[a] + k)] =
                    std::cos(k * std::numbers::pi * (j + 0.5) / grid_[a]);
            }
        }
    }
}

void DenseCosineTransform::synthesize(std::span<const double> coefficients,
                                      std::span<double> values) const
{
    check_sizes(coefficients.size(), values.size());
    const int m0 = modes_[0], m1 = modes_[1], g0 = grid_[0], g1 = grid_[1];
    // axis 1 first: tmp[k0][j1]
    std::vector<double> tmp(static_cast<std::size_t>(m0 * g1), 0.0);
    for (int k0 = 0; k0 < m0; ++k0) {
        for (int j1 = 0; j1 < g1; ++j1) {
            double s = 0.0;
            for (int k1 = 0; k1 < m1; ++k1) {
                s += coefficients[static_cast<std::size_t>(k0 * m1 + k1)] *
                     table_[1][static_cast<std::size_t>(j1 * m1 + k1)];
            }
            tmp[static_cast<std::size_t>(k0 * g1 + j1)] = s;
        }
    }
    for (int j0 = 0; j0 < g0; ++j0) {
        for (int j1 = 0; j1 < g1; ++j1) {
            double s = 0.0;
            for (int k0 = 0; k0 < m0; ++k0) {
                s += tmp[static_cast<std::size_t>(k0 * g1 + j1)] *
                     table_[0][static_cast<std::size_t>(j0 * m0 + k0)];
            }
            values[static_cast<std::size_t>(j0 * g1 + j1)] = s;
        }
    }
}

void DenseCosineTransform::analyze(std::span<const double> values,
                                   std::span<double> coefficients) const
{
    check_sizes(coefficients.size(), values.size());
    const int m0 = modes_[0], m1 = modes_[1], g0 = grid_[0], g1 = grid_[1];
    auto scale = [](int k, int g) { return k == 0 ? 1.0 / g : 2.0 / g; };
    std::vector<double> tmp(static_cast<std::size_t>(g0 * m1), 0.0);
    for (int j0 = 0; j0 < g0; ++j0) {
        for (int k1 = 0; k1 < m1; ++k1) {
            double s = 0.0;
            for (int j1 = 0; j1 < g1; ++j1) {
                s += values[static_cast<std::size_t>(j0 * g1 + j1)] *
                     table_[1][static_cast<std::size_t>(j1 * m1 + k1)];
            }
            tmp[static_cast<std::size_t>(j0 * m1 + k1)] = s * scale(k1, g1);
        }
    }
    for (int k0 = 0; k0 < m0; ++k0) {
        for (int k1 = 0; k1 < m1; ++k1) {
            double s = 0.0;
            for (int j0 = 0; j0 < g0; ++j0) {
                s += tmp[static_cast<std::size_t>(j0 * m1 + k1)] *
                     table_[0][static_cast<std::size_t>(j0 * m0 + k0)];
            }
            coefficients[static_cast<std::size_t>(k0 * m1 + k1)] = s * scale(k0, g0);
        }
    }
}

}  // namespace sch
