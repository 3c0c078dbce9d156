#pragma once

#include "sch/spectral.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace sch {

// ---------------------------------------------------------------------------
// Counter-based random numbers

/// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection of a 128-bit
/// counter. Stateless, so any (key, counter) can be evaluated in any order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finaliser, used to fold identifiers into Philox keys.
std::uint64_t splitmix64(std::uint64_t x);

/// Standard normal draw addressed by (key, a, b).
double keyed_normal(std::uint64_t key, std::uint64_t a, std::uint64_t b);

// ---------------------------------------------------------------------------
// Truncated cylindrical Wiener process

/// K independent Brownian motions. Increment (step, mode) of stream `stream` is
/// a pure function of (seed, stream, step, mode), so two ensemble members
/// never share draws and paths do not depend on scheduling.
///
/// With a positive `base_dt`, increments over [t, t + dt] are sums of base
/// increments, so runs at different step sizes see the same Brownian path.
class WienerProcess {
public:
    WienerProcess() = default;
    WienerProcess(int mode_count, std::uint64_t seed, std::uint64_t stream = 0, double base_dt = 0.0);

    int mode_count() const noexcept { return mode_count_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    double base_dt() const noexcept { return base_dt_; }
    std::int64_t cursor() const noexcept { return cursor_; }

    /// N(0, dt) draws for `step`; pure.
    std::vector<double> increment(std::int64_t step, double dt) const;

    /// Increment over [t, t + dt] built from base increments; requires
    /// base_dt > 0 and both ends on the base grid (to 1e-9 relative).
    std::vector<double> nested_increment(double t, double dt) const;

    /// Dispatches to nested_increment when base_dt > 0, otherwise increment.
    std::vector<double> increment_for(std::int64_t step, double t, double dt) const;

    /// Increment at the cursor, then advances it.
    std::vector<double> sample_increment(double dt);

    /// Brownian-bridge split of `increment` over a step of length dt into two
    /// halves; `node` identifies the split within the step.
    std::pair<std::vector<double>, std::vector<double>>
    bridge_split(std::span<const double> increment, double dt, std::int64_t step,
                 std::uint64_t node) const;

private:
    std::uint64_t key(std::uint64_t tag) const;

    int mode_count_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    double base_dt_ = 0.0;
    std::int64_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Diffusion operator B

enum class NoiseKind { Additive, Multiplicative };

enum class MultiplicativeMap {
    Clamp,     // B(v) e_k = P0[T_M(v) b_k], T_M truncation to [-M, M]
    Constant,  // B(v) e_k = P0[b_k]
};

/// Columns b_k = B e_k as fields. For the multiplicative kind the columns are
/// profiles modulated by the state.
class DiffusionOperator {
public:
    DiffusionOperator() = default;

    /// No noise at all.
    static DiffusionOperator zero(BasisPtr basis);

    /// b_k = sigma (1 + mu_k)^{-rho} phi_k over the K lowest eigenmodes
    /// (skipping the constant mode when mean_zero).
    static DiffusionOperator additive(BasisPtr basis, int mode_count, double sigma, double rho,
                                      bool mean_zero);

    /// Arbitrary additive columns.
    static DiffusionOperator from_columns(BasisPtr basis, std::vector<SpectralField> columns);

    /// Mean-zero multiplicative noise with decaying profiles.
    static DiffusionOperator multiplicative(BasisPtr basis, int mode_count, double sigma, double rho,
                                            double clamp, MultiplicativeMap map = MultiplicativeMap::Clamp);

    NoiseKind kind() const noexcept { return kind_; }
    int mode_count() const noexcept { return static_cast<int>(columns_.size()); }
    bool mean_zero() const noexcept { return mean_zero_; }
    int smoothing_level() const noexcept { return smoothing_level_; }
    double clamp() const noexcept { return clamp_; }
    MultiplicativeMap map() const noexcept { return map_; }
    const std::vector<SpectralField>& columns() const noexcept { return columns_; }
    const BasisPtr& basis() const noexcept { return basis_; }
    bool is_zero() const noexcept { return columns_.empty(); }

    /// ||B||_{L2(U,H)}: sqrt(sum_k ||b_k||_H^2); for multiplicative noise the
    /// profile ledger (state-independent).
    double hilbert_schmidt_norm() const;
    /// ||B(v)||_{L2(U,H)} for multiplicative noise (equals the profile norm for additive).
    double hilbert_schmidt_norm(const SpectralField& state) const;

    /// Lipschitz constant N_B of v -> B(v) in (H, L2(U,H)): clamp slope times
    /// sqrt(sum_k max_grid |b_k|^2). Zero for additive noise.
    double lipschitz_constant() const;

    /// (I - Delta / n)^{-3} applied to every column; n >= 1.
    DiffusionOperator smooth(int n) const;

    /// B(state) e_k
    SpectralField column(const SpectralField& state, int k) const;

    /// sum_k B(state) e_k dW_k. Throws DimensionMismatch on a wrong increment length.
    SpectralField apply(const SpectralField& state, std::span<const double> increment) const;

private:
    BasisPtr basis_;
    NoiseKind kind_ = NoiseKind::Additive;
    std::vector<SpectralField> columns_;
    bool mean_zero_ = true;
    int smoothing_level_ = 0;
    double clamp_ = 0.0;
    MultiplicativeMap map_ = MultiplicativeMap::Clamp;
};

/// Diffusion operator together with the Brownian motion driving it.
struct NoiseModel {
    DiffusionOperator diffusion;
    WienerProcess wiener;

    static NoiseModel none(BasisPtr basis) { return {DiffusionOperator::zero(std::move(basis)), {}}; }
};

/// Running stochastic integral B . W(t_n) for additive noise.
class NoiseLedger {
public:
    explicit NoiseLedger(const DiffusionOperator& diffusion);

    void accumulate(std::span<const double> increment);
    const SpectralField& value() const noexcept { return value_; }
    double mean() const noexcept { return value_.mean(); }
    std::int64_t steps() const noexcept { return steps_; }

private:
    const DiffusionOperator* diffusion_;
    SpectralField value_;
    std::int64_t steps_ = 0;
};

}  // namespace sch
