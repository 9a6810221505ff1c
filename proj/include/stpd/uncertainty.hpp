#pragma once

// Coordinate moments from g(x), momentum moments from {n_k}, and the two
// uncertainty products dx^1 dp^1 and dx^0 dp^0.

#include <cmath>
#include <cstdio>
#include <utility>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stpd/density.hpp"
#include "stpd/fields.hpp"
#include "stpd/momentum.hpp"

namespace stpd {

struct CoordinateMoments {
    double mean_time = 0.0;
    double mean_space = 0.0;
    double spread_time = 0.0;
    double spread_space = 0.0;
    // Sheppard corrections h^2/12 to the variances from binning on cell centers.
    double sheppard_time = 0.0;
    double sheppard_space = 0.0;
};

inline CoordinateMoments coordinate_moments(const SpacetimeDensity& g)
{
    detail::require_normalized(g, "coordinate_moments");
    const auto& grid = g.grid();
    const double w = grid.cell_volume();
    CoordinateMoments m;
    for (std::size_t k = 0; k < grid.cell_count(); ++k) {
        const Event c = grid.cell_center(grid.cell(k));
        m.mean_time += g.at(k) * w * c.t;
        m.mean_space += g.at(k) * w * c.x;
    }
    double vt = 0.0, vx = 0.0;
    for (std::size_t k = 0; k < grid.cell_count(); ++k) {
        const Event c = grid.cell_center(grid.cell(k));
        vt += g.at(k) * w * (c.t - m.mean_time) * (c.t - m.mean_time);
        vx += g.at(k) * w * (c.x - m.mean_space) * (c.x - m.mean_space);
    }
    m.spread_time = std::sqrt(std::max(0.0, vt));
    m.spread_space = std::sqrt(std::max(0.0, vx));
    m.sheppard_time = grid.dt() * grid.dt() / 12.0;
    m.sheppard_space = grid.dx() * grid.dx() / 12.0;
    return m;
}

struct MomentumMoments {
    double mean_energy = 0.0;
    double mean_momentum = 0.0;
    double spread_energy = 0.0;
    double spread_momentum = 0.0;
};

inline MomentumMoments momentum_moments(const Spectrum& s)
{
    const FourMomentum mean = mean_four_momentum(s);
    MomentumMoments m{mean.energy, mean.momentum, 0.0, 0.0};
    double ve = 0.0, vp = 0.0;
    for (std::size_t k = 0; k < s.momenta.size(); ++k) {
        const double n = std::norm(s.coefficients[k]);
        ve += n * (s.momenta[k].energy - mean.energy) * (s.momenta[k].energy - mean.energy);
        vp += n * (s.momenta[k].momentum - mean.momentum) * (s.momenta[k].momentum - mean.momentum);
    }
    m.spread_energy = std::sqrt(std::max(0.0, ve));
    m.spread_momentum = std::sqrt(std::max(0.0, vp));
    return m;
}

inline MomentumMoments momentum_moments(const ModeCoefficients& c) { return momentum_moments(spectrum_of(c)); }

inline constexpr double half_hbar = 0.5;
inline constexpr double uncertainty_tolerance = 1e-2;

struct MomentReport {
    CoordinateMoments coordinates;
    MomentumMoments momenta;
    double product_space = 0.0; // dx^1 dp^1
    double product_time = 0.0;  // dx^0 dp^0
    double energy_scale = 0.0;      // epsilon = <p^0>
    double min_resolvable_length = 0.0; // hbar c / epsilon
    double velocity = 0.0;          // <p^1> / <p^0>
    double velocity_product = 0.0;  // |v| dx^0 dp^1, reported without a bound
    bool degenerate = false;        // some momentum spread vanishes (plane-wave limit)
    bool localized = false;         // negligible weight within the boundary margin on both axes
    bool space_violation = false;
    bool time_violation = false;
};

// Fraction of the probability within `margin` cells of any face of the box.
inline double boundary_weight(const SpacetimeDensity& g, int margin)
{
    const auto& grid = g.grid();
    double s = 0.0;
    for (std::size_t k = 0; k < grid.cell_count(); ++k) {
        const auto c = grid.cell(k);
        const bool edge = c.it < margin || c.it >= grid.n_time() - margin || c.ix < margin || c.ix >= grid.n_space() - margin;
        if (edge) s += g.at(k);
    }
    return s * grid.cell_volume();
}

inline constexpr int localization_margin_cells = 5;
inline constexpr double localization_leakage = 1e-6;

inline MomentReport uncertainty_report(const WaveFunction& psi, const Spectrum& spectrum)
{
    const auto g = density(psi);
    MomentReport r;
    r.coordinates = coordinate_moments(g);
    r.momenta = momentum_moments(spectrum);
    r.product_space = r.coordinates.spread_space * r.momenta.spread_momentum;
    r.product_time = r.coordinates.spread_time * r.momenta.spread_energy;
    r.energy_scale = r.momenta.mean_energy;
    r.min_resolvable_length = r.energy_scale != 0.0 ? 1.0 / std::abs(r.energy_scale) : 0.0;
    r.velocity = r.energy_scale != 0.0 ? r.momenta.mean_momentum / r.energy_scale : 0.0;
    r.velocity_product = std::abs(r.velocity) * r.coordinates.spread_time * r.momenta.spread_momentum;
    r.degenerate = r.momenta.spread_momentum == 0.0 || r.momenta.spread_energy == 0.0;
    r.localized = boundary_weight(g, localization_margin_cells) <= localization_leakage;
    const double floor = half_hbar * (1.0 - uncertainty_tolerance);
    if (r.localized && !r.degenerate) {
        r.space_violation = r.product_space < floor;
        r.time_violation = r.product_time < floor;
    }
    return r;
}

inline MomentReport uncertainty_report(const ModeCoefficients& c, const UniformGrid& grid)
{
    const auto psi = normalize(synthesize(c.modes, c.coefficients, grid));
    return uncertainty_report(psi, spectrum_of(c));
}

// Flat key = value record.
inline void write_report(std::ostream& os, const MomentReport& r)
{
    auto line = [&os](const char* key, double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << key << " = " << buf << '\n';
    };
    line("mean_t", r.coordinates.mean_time);
    line("spread_t", r.coordinates.spread_time);
    line("mean_x", r.coordinates.mean_space);
    line("spread_x", r.coordinates.spread_space);
    line("sheppard_t", r.coordinates.sheppard_time);
    line("sheppard_x", r.coordinates.sheppard_space);
    line("mean_p0", r.momenta.mean_energy);
    line("spread_p0", r.momenta.spread_energy);
    line("mean_p1", r.momenta.mean_momentum);
    line("spread_p1", r.momenta.spread_momentum);
    line("product_x1_p1", r.product_space);
    line("product_x0_p0", r.product_time);
    line("energy_scale", r.energy_scale);
    line("min_resolvable_length", r.min_resolvable_length);
    line("velocity", r.velocity);
    line("velocity_product", r.velocity_product);
    os << "degenerate = " << (r.degenerate ? "true" : "false") << '\n';
    os << "localized = " << (r.localized ? "true" : "false") << '\n';
    os << "space_violation = " << (r.space_violation ? "true" : "false") << '\n';
    os << "time_violation = " << (r.time_violation ? "true" : "false") << '\n';
}

// Gaussian packet over the reciprocal lattice of the box:
//   psi(x) = |V|^{-1/2} sum_{j,n} C_jn exp(i (p^1 (x^1 - x_c^1) - p^0 (x^0 - x_c^0))),
//   p^0 = 2 pi j / cT, p^1 = 2 pi n / L, |C_jn|^2 Gaussian in j and n with the
//   given index-space standard deviations (zero selects the carrier index only).
// The plane waves are orthonormal on the grid but are not confined to a mass
// shell; this is the axis-symmetric construction for the time-energy product.
struct PacketSpec {
    Event center;
    int time_carrier = 0;
    int space_carrier = 0;
    double time_sigma = 0.0;
    double space_sigma = 0.0;

    PacketSpec exchanged() const { return {{center.x, center.t}, space_carrier, time_carrier, space_sigma, time_sigma}; }
};

struct SpacetimePacket {
    Spectrum spectrum;
    WaveFunction field;
};

namespace detail {

inline std::vector<std::pair<int, double>> gaussian_weights(int carrier, double sigma, int cells)
{
    std::vector<std::pair<int, double>> out;
    if (sigma == 0.0) {
        out.emplace_back(carrier, 1.0);
        return out;
    }
    const int reach = static_cast<int>(std::ceil(8.0 * sigma));
    for (int k = carrier - reach; k <= carrier + reach; ++k) {
        if (2 * std::abs(k) >= cells) throw aliasing_error("gaussian packet exceeds the band limit of the grid");
        const double d = k - carrier;
        out.emplace_back(k, std::exp(-d * d / (4.0 * sigma * sigma)));
    }
    return out;
}

} // namespace detail

inline SpacetimePacket gaussian_spacetime_packet(const UniformGrid& grid, const PacketSpec& spec)
{
    detail::require(spec.time_sigma >= 0.0 && spec.space_sigma >= 0.0, "gaussian_spacetime_packet: negative width");
    const auto& box = grid.box();
    const auto wt = detail::gaussian_weights(spec.time_carrier, spec.time_sigma, grid.n_time());
    const auto wx = detail::gaussian_weights(spec.space_carrier, spec.space_sigma, grid.n_space());

    Spectrum s;
    double norm2 = 0.0;
    for (const auto& [j, a] : wt) {
        for (const auto& [n, b] : wx) {
            const FourMomentum p{two_pi * j / box.time_extent(), two_pi * n / box.space_extent()};
            s.momenta.push_back(p);
            s.coefficients.push_back(a * b * std::polar(1.0, p.energy * spec.center.t - p.momentum * spec.center.x));
            norm2 += a * a * b * b;
        }
    }
    for (auto& c : s.coefficients) c /= std::sqrt(norm2);

    WaveFunction psi(grid, ParticleKind{Species::complex_scalar, 0.0});
    const double amp = 1.0 / std::sqrt(box.volume());
    // Separable sum: psi = amp * (sum_j a_j e^{-i p0 t}) (sum_n b_n e^{i p1 x}) up to the centering phases.
    std::vector<Complex> ft(grid.n_time(), Complex{0.0}), fx(grid.n_space(), Complex{0.0});
    double nt = 0.0, nx = 0.0;
    for (const auto& [j, a] : wt) nt += a * a;
    for (const auto& [n, b] : wx) nx += b * b;
    for (int it = 0; it < grid.n_time(); ++it)
        for (const auto& [j, a] : wt)
            ft[it] += a / std::sqrt(nt) * std::polar(1.0, -two_pi * j * (grid.time_center(it) - spec.center.t) / box.time_extent());
    for (int ix = 0; ix < grid.n_space(); ++ix)
        for (const auto& [n, b] : wx)
            fx[ix] += b / std::sqrt(nx) * std::polar(1.0, two_pi * n * (grid.space_center(ix) - spec.center.x) / box.space_extent());
    for (int it = 0; it < grid.n_time(); ++it)
        for (int ix = 0; ix < grid.n_space(); ++ix) psi.at(CellIndex{it, ix})[0] = amp * ft[it] * fx[ix];
    return {std::move(s), std::move(psi)};
}

// On-shell comb of positive-frequency modes n with |C_n|^2 Gaussian around n0,
// phased to peak at x_c at x^0 = 0.
inline ModeCoefficients gaussian_mode_comb(const ParticleKind& kind, const UniformGrid& grid, int n0, double sigma,
                                           double x_center)
{
    const auto weights = detail::gaussian_weights(n0, sigma, grid.n_space());
    ModeCoefficients c;
    double norm2 = 0.0;
    for (const auto& [n, a] : weights) {
        c.modes.push_back(make_mode(kind, n, Frequency::positive, grid.box()));
        c.coefficients.push_back(a * std::polar(1.0, -c.modes.back().p.momentum * x_center));
        norm2 += a * a;
    }
    for (auto& v : c.coefficients) v /= std::sqrt(norm2);
    return c;
}

} // namespace stpd
