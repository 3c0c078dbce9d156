#include "sch/noise.hpp"

#include "sch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sch {

// ---------------------------------------------------------------------------
// Philox4x32-10

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key)
{
    constexpr std::uint64_t m0 = 0xD2511F53u;
    constexpr std::uint64_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += w0;
            key[1] += w1;
        }
        const std::uint64_t p0 = m0 * ctr[0];
        const std::uint64_t p1 = m1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double keyed_normal(std::uint64_t key, std::uint64_t a, std::uint64_t b)
{
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
         static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
        {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    const std::uint64_t x1 = (static_cast<std::uint64_t>(out[0]) << 32 | out[1]) >> 11;
    const std::uint64_t x2 = (static_cast<std::uint64_t>(out[2]) << 32 | out[3]) >> 11;
    const double u1 = (static_cast<double>(x1) + 0.5) * scale;  // (0, 1)
    const double u2 = static_cast<double>(x2) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// WienerProcess

WienerProcess::WienerProcess(int mode_count, std::uint64_t seed, std::uint64_t stream, double base_dt)
    : mode_count_(mode_count), seed_(seed), stream_(stream), base_dt_(base_dt)
{
    if (mode_count < 0) {
        throw DimensionMismatch("Wiener process needs a nonnegative mode count");
    }
    if (base_dt < 0.0) {
        throw PreconditionViolated("Wiener base step must be nonnegative");
    }
}

std::uint64_t WienerProcess::key(std::uint64_t tag) const
{
    return splitmix64(seed_ ^ splitmix64(stream_ ^ splitmix64(tag)));
}

std::vector<double> WienerProcess::increment(std::int64_t step, double dt) const
{
    if (!(dt > 0.0)) {
        throw PreconditionViolated("Wiener increment needs dt > 0");
    }
    const std::uint64_t k0 = key(0);
    const double s = std::sqrt(dt);
    std::vector<double> out(static_cast<std::size_t>(mode_count_));
    for (int k = 0; k < mode_count_; ++k) {
        out[static_cast<std::size_t>(k)] =
            s * keyed_normal(k0, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(k));
    }
    return out;
}

std::vector<double> WienerProcess::nested_increment(double t, double dt) const
{
    if (!(base_dt_ > 0.0)) {
        throw PreconditionViolated("nested increments need a positive base step");
    }
    const double a = t / base_dt_, b = (t + dt) / base_dt_;
    const auto i0 = std::llround(a), i1 = std::llround(b);
    if (std::abs(a - static_cast<double>(i0)) > 1e-9 * std::max(1.0, a) ||
        std::abs(b - static_cast<double>(i1)) > 1e-9 * std::max(1.0, b) || i1 <= i0) {
        throw PreconditionViolated("step does not align with the Wiener base grid");
    }
    const std::uint64_t k0 = key(0);
    const double s = std::sqrt(base_dt_);
    std::vector<double> out(static_cast<std::size_t>(mode_count_), 0.0);
    for (auto i = i0; i < i1; ++i) {
        for (int k = 0; k < mode_count_; ++k) {
            out[static_cast<std::size_t>(k)] +=
                s * keyed_normal(k0, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        }
    }
    return out;
}

std::vector<double> WienerProcess::increment_for(std::int64_t step, double t, double dt) const
{
    return base_dt_ > 0.0 ? nested_increment(t, dt) : increment(step, dt);
}

std::vector<double> WienerProcess::sample_increment(double dt)
{
    auto out = increment(cursor_, dt);
    ++cursor_;
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
WienerProcess::bridge_split(std::span<const double> inc, double dt, std::int64_t step,
                            std::uint64_t node) const
{
    if (inc.size() != static_cast<std::size_t>(mode_count_)) {
        throw DimensionMismatch("bridge split: increment length differs from the mode count");
    }
    const std::uint64_t kb = key(1 + node);
    const double s = 0.5 * std::sqrt(dt);
    std::vector<double> first(inc.size()), second(inc.size());
    for (std::size_t k = 0; k < inc.size(); ++k) {
        first[k] = 0.5 * inc[k] + s * keyed_normal(kb, static_cast<std::uint64_t>(step), k);
        second[k] = inc[k] - first[k];
    }
    return {std::move(first), std::move(second)};
}

// ---------------------------------------------------------------------------
// DiffusionOperator

namespace {

std::vector<SpectralField> decaying_columns(const BasisPtr& basis, int mode_count, double sigma,
                                            double rho, bool skip_constant)
{
    const auto& modes = basis->eigensystem().modes;
    const std::size_t first = skip_constant ? 1 : 0;
    if (mode_count < 0 || first + static_cast<std::size_t>(mode_count) > modes.size()) {
        throw DimensionMismatch("noise mode count exceeds the spatial basis");
    }
    std::vector<SpectralField> cols;
    cols.reserve(static_cast<std::size_t>(mode_count));
    for (std::size_t i = first; i < first + static_cast<std::size_t>(mode_count); ++i) {
        SpectralField col(basis);
        col[static_cast<std::size_t>(modes[i].flat)] = sigma * std::pow(1.0 + modes[i].value, -rho);
        cols.push_back(std::move(col));
    }
    return cols;
}

}  // namespace

DiffusionOperator DiffusionOperator::zero(BasisPtr basis)
{
    DiffusionOperator b;
    b.basis_ = std::move(basis);
    return b;
}

DiffusionOperator DiffusionOperator::additive(BasisPtr basis, int mode_count, double sigma, double rho,
                                              bool mean_zero)
{
    DiffusionOperator b;
    b.columns_ = decaying_columns(basis, mode_count, sigma, rho, mean_zero);
    b.basis_ = std::move(basis);
    b.mean_zero_ = mean_zero;
    return b;
}

DiffusionOperator DiffusionOperator::from_columns(BasisPtr basis, std::vector<SpectralField> columns)
{
    DiffusionOperator b;
    b.basis_ = std::move(basis);
    b.mean_zero_ = std::all_of(columns.begin(), columns.end(),
                               [](const SpectralField& c) { return c.mean() == 0.0; });
    b.columns_ = std::move(columns);
    return b;
}

DiffusionOperator DiffusionOperator::multiplicative(BasisPtr basis, int mode_count, double sigma,
                                                    double rho, double clamp, MultiplicativeMap map)
{
    if (!(clamp > 0.0)) {
        throw ValidationError("multiplicative noise needs a positive truncation level M, (B3)/(B4)");
    }
    DiffusionOperator b;
    b.columns_ = decaying_columns(basis, mode_count, sigma, rho, true);
    b.basis_ = std::move(basis);
    b.kind_ = NoiseKind::Multiplicative;
    b.mean_zero_ = true;
    b.clamp_ = clamp;
    b.map_ = map;
    return b;
}

double DiffusionOperator::hilbert_schmidt_norm() const
{
    double s = 0.0;
    for (const auto& c : columns_) {
        const double n = norm(c, norm_h);
        s += n * n;
    }
    return std::sqrt(s);
}

double DiffusionOperator::hilbert_schmidt_norm(const SpectralField& state) const
{
    if (kind_ == NoiseKind::Additive) {
        return hilbert_schmidt_norm();
    }
    double s = 0.0;
    for (int k = 0; k < mode_count(); ++k) {
        const double n = norm(column(state, k), norm_h);
        s += n * n;
    }
    return std::sqrt(s);
}

double DiffusionOperator::lipschitz_constant() const
{
    if (kind_ == NoiseKind::Additive || map_ == MultiplicativeMap::Constant) {
        return 0.0;
    }
    double s = 0.0;
    for (const auto& c : columns_) {
        const auto g = c.grid_values();
        double m = 0.0;
        for (double x : g) {
            m = std::max(m, std::abs(x));
        }
        s += m * m;
    }
    return std::sqrt(s);  // clamp slope is 1
}

DiffusionOperator DiffusionOperator::smooth(int n) const
{
    if (n < 1) {
        throw PreconditionViolated("smoothing level must be >= 1");
    }
    DiffusionOperator out = *this;
    const auto mu = basis_->eigenvalues();
    for (auto& col : out.columns_) {
        auto c = col.coefficients();
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double f = 1.0 / (1.0 + mu[k] / n);
            c[k] *= f * f * f;
        }
    }
    out.smoothing_level_ = n;
    return out;
}

SpectralField DiffusionOperator::column(const SpectralField& state, int k) const
{
    const auto& b = columns_.at(static_cast<std::size_t>(k));
    if (kind_ == NoiseKind::Additive) {
        return b;
    }
    SpectralField out = b;
    if (map_ == MultiplicativeMap::Clamp) {
        auto gb = b.grid_values();
        const auto gv = state.grid_values();
        for (std::size_t j = 0; j < gb.size(); ++j) {
            gb[j] *= std::clamp(gv[j], -clamp_, clamp_);
        }
        out = SpectralField::from_grid(basis_, gb);
    }
    out[0] = 0.0;
    return out;
}

SpectralField DiffusionOperator::apply(const SpectralField& state, std::span<const double> increment) const
{
    if (increment.size() != columns_.size()) {
        throw DimensionMismatch("noise increment length " + std::to_string(increment.size()) +
                                " differs from mode count " + std::to_string(columns_.size()));
    }
    SpectralField sum(basis_);
    auto s = sum.coefficients();
    for (std::size_t k = 0; k < columns_.size(); ++k) {
        const auto c = columns_[k].coefficients();
        const double dw = increment[k];
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] += c[i] * dw;
        }
    }
    if (kind_ == NoiseKind::Additive) {
        return sum;
    }
    if (map_ == MultiplicativeMap::Clamp) {
        auto gs = sum.grid_values();
        const auto gv = state.grid_values();
        for (std::size_t j = 0; j < gs.size(); ++j) {
            gs[j] *= std::clamp(gv[j], -clamp_, clamp_);
        }
        sum = SpectralField::from_grid(basis_, gs);
    }
    sum[0] = 0.0;
    return sum;
}

// ---------------------------------------------------------------------------
// NoiseLedger

NoiseLedger::NoiseLedger(const DiffusionOperator& diffusion)
    : diffusion_(&diffusion), value_(diffusion.basis())
{
    if (diffusion.kind() != NoiseKind::Additive) {
        throw KindMismatch("the noise ledger tracks B . W for additive noise only");
    }
}

void NoiseLedger::accumulate(std::span<const double> increment)
{
    value_ += diffusion_->apply(value_, increment);
    ++steps_;
}

}  // namespace sch
