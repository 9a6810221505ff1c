#pragma once

// Boosts along x^1: transport of events, four-momenta and mode sets, and the
// invariance checks for g(x), region probabilities and the photon calibration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "stpd/density.hpp"
#include "stpd/fields.hpp"
#include "stpd/lattice.hpp"

namespace stpd {

class Boost {
public:
    explicit Boost(double beta) : beta_(beta)
    {
        detail::require(std::isfinite(beta) && std::abs(beta) < 1.0, "Boost: |beta| must be below 1");
    }

    double beta() const { return beta_; }
    double gamma() const { return 1.0 / std::sqrt(1.0 - beta_ * beta_); }
    double rapidity() const { return std::atanh(beta_); }
    Boost inverse() const { return Boost(-beta_); }

private:
    double beta_;
};

// Relativistic velocity addition for collinear boosts.
inline Boost compose(const Boost& a, const Boost& b)
{
    return Boost((a.beta() + b.beta()) / (1.0 + a.beta() * b.beta()));
}

inline Event boost_event(const Event& e, const Boost& b)
{
    const double g = b.gamma();
    return {g * (e.t - b.beta() * e.x), g * (e.x - b.beta() * e.t)};
}

inline FourMomentum boost_momentum(const FourMomentum& p, const Boost& b)
{
    const double g = b.gamma();
    return {g * (p.energy - b.beta() * p.momentum), g * (p.momentum - b.beta() * p.energy)};
}

// (u^0, u^1) components of a vector field transform like events.
inline std::pair<Complex, Complex> boost_vector(Complex u0, Complex u1, const Boost& b)
{
    const double g = b.gamma();
    return {g * (u0 - b.beta() * u1), g * (u1 - b.beta() * u0)};
}

// Spinor boost S = exp(-eta/2 gamma^0 gamma^1) = cosh(eta/2) - sinh(eta/2) sigma_x,
// with the sign fixed so that S u(p) is proportional to u(Lambda p). S is not
// unitary, so boosted spinor weights are no longer unit vectors.
inline std::array<Complex, 2> boost_spinor(const std::array<Complex, 2>& u, const Boost& b)
{
    const double h = 0.5 * b.rapidity();
    const double ch = std::cosh(h);
    const double sh = std::sinh(h);
    return {ch * u[0] - sh * u[1], ch * u[1] - sh * u[0]};
}

inline Mode boost_mode(const Mode& mode, const Boost& b)
{
    Mode out = mode;
    out.p = boost_momentum(mode.p, b);
    switch (mode.kind.species) {
    case Species::massive_vector: {
        const auto [u0, u1] = boost_vector(mode.temporal_weight, mode.weight[0], b);
        out.temporal_weight = u0;
        out.weight[0] = u1;
        break;
    }
    case Species::electron: {
        const auto s = boost_spinor({mode.weight[0], mode.weight[1]}, b);
        out.weight = {s[0], s[1]};
        break;
    }
    default:
        // Scalars are unchanged; photon transverse components are untouched by
        // boosts collinear with the wave vector.
        break;
    }
    return out;
}

struct BoostedModes {
    std::vector<Mode> modes;
    std::vector<Complex> coefficients;
};

inline BoostedModes boost_modes(std::span<const Mode> modes, std::span<const Complex> coefficients, const Boost& b)
{
    detail::require_same_kind(modes);
    detail::require(modes.size() == coefficients.size(), "boost_modes: mode and coefficient counts differ");
    BoostedModes out;
    out.modes.reserve(modes.size());
    for (const auto& m : modes) out.modes.push_back(boost_mode(m, b));
    out.coefficients.assign(coefficients.begin(), coefficients.end());
    return out;
}

// Same, rejecting boosted momenta that alias on the target grid.
inline BoostedModes boost_modes(std::span<const Mode> modes, std::span<const Complex> coefficients, const Boost& b,
                                const UniformGrid& target)
{
    auto out = boost_modes(modes, coefficients, b);
    for (const auto& m : out.modes) check_band_limit(m, target);
    return out;
}

// Pointwise density from an analytic mode superposition, in the frame the
// modes are expressed in. Massive vectors use the Minkowski square
// sum |u^i|^2 - |u^0|^2; electrons use sum_a |u^a|^2, the time component of
// the current in that frame.
inline double local_density(std::span<const Mode> modes, std::span<const Complex> coefficients, const Event& e)
{
    const auto u = evaluate_superposition(modes, coefficients, e);
    double g = 0.0;
    for (const auto& c : u) g += std::norm(c);
    if (modes.front().kind.species == Species::massive_vector) {
        Complex u0{0.0};
        for (std::size_t k = 0; k < modes.size(); ++k)
            u0 += coefficients[k] * modes[k].amplitude * plane_wave_phase(modes[k].p, e) * modes[k].temporal_weight;
        g -= std::norm(u0);
    }
    return g;
}

// Electron density in a boosted frame, projected on the time direction of the
// box frame: g' = gamma (j'^0 + beta j'^1), with j'^0 = u'^dagger u' and
// j'^1 = u'^dagger sigma_x u'. This is the bookkeeping that carries the
// box-frame (cT) normalization into the boosted frame.
inline double electron_box_frame_density(std::span<const Mode> boosted, std::span<const Complex> coefficients,
                                         const Event& e_boosted, const Boost& b)
{
    const auto u = evaluate_superposition(boosted, coefficients, e_boosted);
    const double j0 = std::norm(u[0]) + std::norm(u[1]);
    const double j1 = 2.0 * std::real(std::conj(u[0]) * u[1]);
    return b.gamma() * (j0 + b.beta() * j1);
}

struct DensityInvarianceReport {
    std::size_t probes = 0;
    double max_deviation = 0.0;     // max |g'(Lambda x) - g(x)|
    double raw_max_deviation = 0.0; // electrons: same with g' = sum |u'^a|^2, no box-frame projection
};

namespace detail {

inline void require_probe(const SpacetimeBox& box, const Event& x, const Event& xb)
{
    if (!box.contains(x)) throw coverage_error("probe event lies outside the box");
    if (!box.contains(xb)) throw coverage_error("boosted probe event lies outside the boosted box");
}

} // namespace detail

// The boosted frame reuses a box of the same extents.
inline DensityInvarianceReport check_density_invariance(std::span<const Mode> modes,
                                                        std::span<const Complex> coefficients, const Boost& b,
                                                        std::span<const Event> probes, const SpacetimeBox& box)
{
    const auto boosted = boost_modes(modes, coefficients, b);
    const bool electron = modes.front().kind.species == Species::electron;
    DensityInvarianceReport r;
    r.probes = probes.size();
    for (const auto& x : probes) {
        const Event xb = boost_event(x, b);
        detail::require_probe(box, x, xb);
        const double g = local_density(modes, coefficients, x);
        const double raw = local_density(boosted.modes, boosted.coefficients, xb);
        const double gb = electron ? electron_box_frame_density(boosted.modes, boosted.coefficients, xb, b) : raw;
        r.max_deviation = std::max(r.max_deviation, std::abs(gb - g));
        r.raw_max_deviation = std::max(r.raw_max_deviation, std::abs(raw - g));
    }
    return r;
}

// Uniform random events inside the box whose boosted images also lie inside it.
inline std::vector<Event> sample_probes(const SpacetimeBox& box, const Boost& b, std::size_t count,
                                        std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, box.time_extent());
    std::uniform_real_distribution<double> ux(0.0, box.space_extent());
    std::vector<Event> out;
    out.reserve(count);
    std::size_t attempts = 0;
    while (out.size() < count) {
        if (++attempts > 1000 * count + 1000) throw coverage_error("sample_probes: box and boosted box barely overlap");
        const Event e{ut(rng), ux(rng)};
        if (box.contains(boost_event(e, b), 0.0)) out.push_back(e);
    }
    return out;
}

namespace detail {

using Quad = std::array<Event, 4>;

inline Quad cell_quad(const UniformGrid& g, CellIndex c)
{
    const double t0 = c.it * g.dt(), t1 = (c.it + 1) * g.dt();
    const double x0 = c.ix * g.dx(), x1 = (c.ix + 1) * g.dx();
    return {Event{t0, x0}, Event{t1, x0}, Event{t1, x1}, Event{t0, x1}};
}

// Separating-axis test for two convex quadrilaterals; true when the overlap
// has positive area (touching along an edge does not count).
inline bool quads_overlap(const Quad& a, const Quad& b, double eps)
{
    auto project = [](const Quad& q, double nt, double nx) {
        double lo = nt * q[0].t + nx * q[0].x, hi = lo;
        for (const auto& v : q) {
            const double s = nt * v.t + nx * v.x;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        return std::pair{lo, hi};
    };
    for (const Quad* q : {&a, &b}) {
        for (int i = 0; i < 4; ++i) {
            const Event& p = (*q)[i];
            const Event& r = (*q)[(i + 1) % 4];
            const double nt = -(r.x - p.x);
            const double nx = r.t - p.t;
            const double len = std::hypot(nt, nx);
            if (len == 0.0) continue;
            const auto [alo, ahi] = project(a, nt / len, nx / len);
            const auto [blo, bhi] = project(b, nt / len, nx / len);
            if (ahi <= blo + eps || bhi <= alo + eps) return false;
        }
    }
    return true;
}

inline Quad transform_quad(const Quad& q, const Boost& b)
{
    return {boost_event(q[0], b), boost_event(q[1], b), boost_event(q[2], b), boost_event(q[3], b)};
}

} // namespace detail

struct RegionInvarianceReport {
    double probability = 0.0;          // sum_Q g w in the box frame
    double boosted_probability = 0.0;  // sum over the covering of Lambda Q in the boosted grid
    double difference = 0.0;           // |boosted - original|
    double relative_difference = 0.0;
    std::size_t covering_cells = 0;
    std::size_t boundary_cells = 0;    // covering cells not fully inside Lambda Q
    double max_density = 0.0;          // max g' over the covering
    double cell_volume = 0.0;
};

// Compares P(Q) with the quadrature of g' over the covering of Lambda Q by the
// boosted grid (same extents and cell counts). The covering over-counts by at
// most boundary_cells * w * max g'.
inline RegionInvarianceReport check_region_invariance(std::span<const Mode> modes,
                                                      std::span<const Complex> coefficients, const Boost& b,
                                                      const UniformGrid& grid, const Region& q)
{
    detail::require(!q.empty(), "check_region_invariance: empty region");
    const auto& box = grid.box();
    for (const auto& c : q.cells())
        for (const auto& corner : detail::cell_quad(grid, c))
            if (!box.contains(boost_event(corner, b)))
                throw coverage_error("check_region_invariance: image of the region leaves the boosted box");

    const auto psi = synthesize(modes, coefficients, grid);
    RegionInvarianceReport r;
    r.probability = region_sum(density(psi), q);
    r.cell_volume = grid.cell_volume();

    const auto boosted = boost_modes(modes, coefficients, b);
    const bool electron = modes.front().kind.species == Species::electron;
    const Boost back = b.inverse();
    const auto mask = q.mask(grid);
    const double eps = 1e-12 * std::max(grid.dt(), grid.dx());

    auto member_overlap = [&](const detail::Quad& pre, bool& fully_inside) {
        double tmin = pre[0].t, tmax = pre[0].t, xmin = pre[0].x, xmax = pre[0].x;
        for (const auto& v : pre) {
            tmin = std::min(tmin, v.t); tmax = std::max(tmax, v.t);
            xmin = std::min(xmin, v.x); xmax = std::max(xmax, v.x);
        }
        const int it0 = std::max(0, static_cast<int>(std::floor(tmin / grid.dt())) - 1);
        const int it1 = std::min(grid.n_time() - 1, static_cast<int>(std::floor(tmax / grid.dt())) + 1);
        const int ix0 = std::max(0, static_cast<int>(std::floor(xmin / grid.dx())) - 1);
        const int ix1 = std::min(grid.n_space() - 1, static_cast<int>(std::floor(xmax / grid.dx())) + 1);
        bool any = false;
        fully_inside = true;
        // Vertices are pulled slightly toward the centroid so shared edges do not
        // resolve to the neighbouring cell.
        Event mid{0.0, 0.0};
        for (const auto& v : pre) {
            mid.t += 0.25 * v.t;
            mid.x += 0.25 * v.x;
        }
        for (const auto& v : pre) {
            const Event in{v.t + 1e-9 * (mid.t - v.t), v.x + 1e-9 * (mid.x - v.x)};
            if (!grid.box().contains(in, 0.0) || !mask[grid.flat(grid.locate(in))]) fully_inside = false;
        }
        for (int it = it0; it <= it1 && !any; ++it)
            for (int ix = ix0; ix <= ix1 && !any; ++ix)
                if (mask[grid.flat({it, ix})] && detail::quads_overlap(pre, detail::cell_quad(grid, {it, ix}), eps))
                    any = true;
        return any;
    };

    double sum = 0.0;
    for (std::size_t k = 0; k < grid.cell_count(); ++k) {
        const CellIndex c = grid.cell(k);
        const auto pre = detail::transform_quad(detail::cell_quad(grid, c), back);
        bool inside = false;
        if (!member_overlap(pre, inside)) continue;
        ++r.covering_cells;
        if (!inside) ++r.boundary_cells;
        const Event center = grid.cell_center(c);
        const double g = electron ? electron_box_frame_density(boosted.modes, boosted.coefficients, center, b)
                                  : local_density(boosted.modes, boosted.coefficients, center);
        r.max_density = std::max(r.max_density, g);
        sum += g;
    }
    r.boosted_probability = sum * grid.cell_volume();
    r.difference = std::abs(r.boosted_probability - r.probability);
    r.relative_difference = r.probability > 0.0 ? r.difference / r.probability : r.difference;
    return r;
}

struct RefinementRow {
    int cells_per_axis = 0;
    RegionInvarianceReport report;
    double ratio = 0.0; // previous difference / this difference
};

// Region invariance at several resolutions of the same box, for the sub-box
// t_range x x_range (cell-aligned at every resolution when the bounds are dyadic).
inline std::vector<RefinementRow> region_invariance_study(std::span<const Mode> modes,
                                                          std::span<const Complex> coefficients, const Boost& b,
                                                          const SpacetimeBox& box, Interval t_range,
                                                          Interval x_range, std::span<const int> resolutions)
{
    std::vector<RefinementRow> rows;
    for (int n : resolutions) {
        const UniformGrid grid(box, n, n);
        const auto q = region_from_subbox(grid, t_range, x_range);
        RefinementRow row{n, check_region_invariance(modes, coefficients, b, grid, q), 0.0};
        if (!rows.empty() && row.report.difference > 0.0) row.ratio = rows.back().report.difference / row.report.difference;
        rows.push_back(row);
    }
    return rows;
}

struct PhotonGaugeReport {
    double max_longitudinal = 0.0;       // max |u'^0|, |u'^1| after the boost
    double max_density_deviation = 0.0; // max |g'(Lambda x) - g(x)|
    bool calibration_preserved = false;
};

inline constexpr double calibration_tolerance = 1e-12;

// Boosts the embedded four-vector (0, 0, u^2, u^3) of an analytic photon packet.
inline PhotonGaugeReport photon_gauge_family_check(std::span<const Mode> modes, std::span<const Complex> coefficients,
                                                   const Boost& b, std::span<const Event> probes)
{
    detail::require_same_kind(modes);
    detail::require(modes.front().kind.species == Species::photon, "photon_gauge_family_check: photon modes required");
    const auto boosted = boost_modes(modes, coefficients, b);
    PhotonGaugeReport r;
    for (const auto& x : probes) {
        const auto u = evaluate_superposition(modes, coefficients, x);
        const auto [u0, u1] = boost_vector(Complex{0.0}, Complex{0.0}, b);
        const Event xb = boost_event(x, b);
        const auto ub = evaluate_superposition(boosted.modes, boosted.coefficients, xb);
        const double g = std::norm(u[0]) + std::norm(u[1]);
        const double gb = std::norm(ub[0]) + std::norm(ub[1]) - std::norm(u0) + std::norm(u1);
        r.max_longitudinal = std::max({r.max_longitudinal, std::abs(u0), std::abs(u1)});
        r.max_density_deviation = std::max(r.max_density_deviation, std::abs(gb - g));
    }
    r.calibration_preserved = r.max_longitudinal <= calibration_tolerance && r.max_density_deviation <= calibration_tolerance;
    return r;
}

// Calibration check for a sampled four-vector field (e.g. after a gauge
// transform): boosts every cell value and reports the surviving u'^0, u'^1.
inline PhotonGaugeReport photon_gauge_family_check(const FourVectorField& u, const Boost& b)
{
    PhotonGaugeReport r;
    for (std::size_t k = 0; k < u.grid().cell_count(); ++k) {
        const auto v = u.at(k);
        const auto [u0, u1] = boost_vector(v[0], v[1], b);
        r.max_longitudinal = std::max({r.max_longitudinal, std::abs(u0), std::abs(u1)});
        const double gb = std::norm(u1) + std::norm(v[2]) + std::norm(v[3]) - std::norm(u0);
        r.max_density_deviation = std::max(r.max_density_deviation, std::abs(gb - u.minkowski_square(k)));
    }
    r.calibration_preserved = r.max_longitudinal <= calibration_tolerance;
    return r;
}

} // namespace stpd
