#pragma once

// Spacetime probability density g(x) = psi^2(x) on the grid, its marginals,
// the fixed-time conditional and region probabilities. All integrals are
// midpoint sums over cell centers.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stpd/fields.hpp"
#include "stpd/lattice.hpp"

namespace stpd {

inline constexpr double normalization_tolerance = 1e-10;

class SpacetimeDensity {
public:
    SpacetimeDensity(UniformGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values))
    {
        detail::require(values_.size() == grid_.cell_count(), "SpacetimeDensity: value count mismatch");
        for (double v : values_) detail::require(v >= 0.0 && std::isfinite(v), "SpacetimeDensity: negative or non-finite value");
        normalized_ = std::abs(total() - 1.0) <= normalization_tolerance;
    }

    const UniformGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double at(CellIndex c) const { return values_[grid_.flat(c)]; }
    double at(std::size_t flat) const { return values_[flat]; }
    bool normalized() const { return normalized_; }

    // sum_cells g w
    double total() const
    {
        double s = 0.0;
        for (double v : values_) s += v;
        return s * grid_.cell_volume();
    }

private:
    UniformGrid grid_;
    std::vector<double> values_;
    bool normalized_ = false;
};

enum class Axis { time, space };

struct Marginal {
    Axis axis = Axis::space;
    double bin_width = 0.0;
    std::vector<double> values;

    double total() const
    {
        double s = 0.0;
        for (double v : values) s += v;
        return s * bin_width;
    }
};

// g = sum_a |psi^a|^2. For the massive vector (u^0 = 0 in the box frame) this
// is the Minkowski square u^2; for the photon (u^2)^2 + (u^3)^2.
inline SpacetimeDensity density(const WaveFunction& psi)
{
    const auto& grid = psi.grid();
    std::vector<double> g(grid.cell_count());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = psi.modulus_squared(k);
    return SpacetimeDensity(grid, std::move(g));
}

namespace detail {

inline void require_normalized(const SpacetimeDensity& g, const char* where)
{
    if (!g.normalized()) throw std::invalid_argument(std::string(where) + ": density is not normalized");
}

} // namespace detail

// g1(x) = integral of g over x^0.
inline Marginal marginal_spatial(const SpacetimeDensity& g)
{
    detail::require_normalized(g, "marginal_spatial");
    const auto& grid = g.grid();
    Marginal m{Axis::space, grid.dx(), std::vector<double>(grid.n_space(), 0.0)};
    for (int it = 0; it < grid.n_time(); ++it)
        for (int ix = 0; ix < grid.n_space(); ++ix) m.values[ix] += g.at(CellIndex{it, ix});
    for (auto& v : m.values) v *= grid.dt();
    return m;
}

// g0(x^0) = integral of g over space.
inline Marginal marginal_temporal(const SpacetimeDensity& g)
{
    detail::require_normalized(g, "marginal_temporal");
    const auto& grid = g.grid();
    Marginal m{Axis::time, grid.dt(), std::vector<double>(grid.n_time(), 0.0)};
    for (int it = 0; it < grid.n_time(); ++it) {
        double s = 0.0;
        for (int ix = 0; ix < grid.n_space(); ++ix) s += g.at(CellIndex{it, ix});
        m.values[it] = s * grid.dx();
    }
    return m;
}

// g1(x | x^0) = g(x) / g0(x^0) on one time row.
inline Marginal conditional_spatial(const SpacetimeDensity& g, int it)
{
    const auto& grid = g.grid();
    if (it < 0 || it >= grid.n_time()) throw std::out_of_range("conditional_spatial: time index out of range");
    double g0 = 0.0;
    for (int ix = 0; ix < grid.n_space(); ++ix) g0 += g.at(CellIndex{it, ix});
    g0 *= grid.dx();
    if (!(g0 > 0.0)) throw degenerate_input("conditional_spatial: temporal marginal vanishes on this slice");
    Marginal m{Axis::space, grid.dx(), std::vector<double>(grid.n_space())};
    for (int ix = 0; ix < grid.n_space(); ++ix) m.values[ix] = g.at(CellIndex{it, ix}) / g0;
    return m;
}

// Region sum of g w; meaningful as a probability for normalized g.
inline double region_sum(const SpacetimeDensity& g, const Region& q)
{
    double s = 0.0;
    for (const auto& c : q.cells()) s += g.at(c);
    return s * g.grid().cell_volume();
}

inline double region_probability(const SpacetimeDensity& g, const Region& q)
{
    detail::require_normalized(g, "region_probability");
    return region_sum(g, q);
}

// P(Q1)/P(Q2) from an unnormalized density; invariant under psi -> s psi.
inline double relative_probability(const SpacetimeDensity& g, const Region& q1, const Region& q2)
{
    const double den = region_sum(g, q2);
    if (!(den > 0.0)) throw degenerate_input("relative_probability: denominator region has zero weight");
    return region_sum(g, q1) / den;
}

struct ElectronTemporalReport {
    double expected_g0 = 0.0;            // 1 / cT
    double max_relative_deviation = 0.0; // max |g0 - 1/cT| / (1/cT)
    double rescaled_norm = 0.0;          // ||(cT)^{-1/2} u|| with ||u(t, .)|| = 1 per row
    double rescaling_mismatch = 0.0;     // max |(cT)^{-1/2} u - psi|
};

// Temporal law for the electron: g0 = 1/cT, and psi = (cT)^{-1/2} u where u is
// the fixed-time normalized field.
inline ElectronTemporalReport electron_temporal_check(const WaveFunction& psi_e)
{
    detail::require(psi_e.kind().species == Species::electron, "electron_temporal_check: electron field required");
    const auto g = density(psi_e);
    const auto g0 = marginal_temporal(g);
    const auto& grid = psi_e.grid();
    const double ct = grid.box().time_extent();

    ElectronTemporalReport r;
    r.expected_g0 = 1.0 / ct;
    for (double v : g0.values) r.max_relative_deviation = std::max(r.max_relative_deviation, std::abs(v * ct - 1.0));

    double norm2 = 0.0;
    for (int it = 0; it < grid.n_time(); ++it) {
        const double row_norm = std::sqrt(norm_spatial(psi_e, it));
        if (!(row_norm > 0.0)) throw degenerate_input("electron_temporal_check: vanishing time slice");
        const double scale = 1.0 / (row_norm * std::sqrt(ct));
        for (int ix = 0; ix < grid.n_space(); ++ix) {
            const auto v = psi_e.at(CellIndex{it, ix});
            for (const auto& c : v) {
                const Complex rescaled = c * scale;
                norm2 += std::norm(rescaled);
                r.rescaling_mismatch = std::max(r.rescaling_mismatch, std::abs(rescaled - c));
            }
        }
    }
    r.rescaled_norm = std::sqrt(norm2 * grid.cell_volume());
    return r;
}

} // namespace stpd
