#pragma once

// Plane-wave modes on the spatially periodic box, multi-component wave
// functions sampled at cell centers, and the H(V) norms and inner products.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "stpd/errors.hpp"
#include "stpd/lattice.hpp"

namespace stpd {

using Complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class Species { real_scalar, complex_scalar, massive_vector, photon, electron };

inline std::string to_string(Species s)
{
    switch (s) {
    case Species::real_scalar: return "real_scalar";
    case Species::complex_scalar: return "complex_scalar";
    case Species::massive_vector: return "massive_vector";
    case Species::photon: return "photon";
    case Species::electron: return "electron";
    }
    return "unknown";
}

struct ParticleKind {
    Species species = Species::complex_scalar;
    double mass = 0.0;

    // Dimension of the value space U.
    int components() const
    {
        switch (species) {
        case Species::massive_vector: return 3; // rest-frame spatial section
        case Species::photon: return 2;         // transverse u^2, u^3
        case Species::electron: return 2;       // 1+1D spinor
        default: return 1;
        }
    }

    bool has_charge() const { return species == Species::complex_scalar; }

    friend bool operator==(const ParticleKind&, const ParticleKind&) = default;
};

inline ParticleKind make_kind(Species species, double mass)
{
    detail::require(std::isfinite(mass) && mass >= 0.0, "particle mass must be finite and nonnegative");
    if (species == Species::photon) detail::require(mass == 0.0, "photon mass must be zero");
    if (species == Species::massive_vector || species == Species::electron)
        detail::require(mass > 0.0, to_string(species) + " requires positive mass");
    return {species, mass};
}

enum class Frequency : int { positive = 1, negative = -1 };

inline double sign_of(Frequency f) { return static_cast<double>(static_cast<int>(f)); }

// Contravariant four-momentum (p^0, p^1).
struct FourMomentum {
    double energy = 0.0;
    double momentum = 0.0;

    // p.p + m^2; zero on the mass shell.
    double shell_residual(double mass) const
    {
        return momentum * momentum - energy * energy + mass * mass;
    }
};

inline double lattice_momentum(int n, const SpacetimeBox& box) { return two_pi * n / box.space_extent(); }

struct Mode {
    ParticleKind kind;
    int index = 0; // spatial label n; boosted modes keep the label of their source
    Frequency frequency = Frequency::positive;
    FourMomentum p;
    double amplitude = 0.0;
    std::vector<Complex> weight;  // components in U
    Complex temporal_weight{0.0}; // u^0 of a boosted massive vector; zero in the box frame
};

// Phase convention: psi_k(x) = weight * a_k * exp(i (p^1 x^1 - p^0 x^0)).
inline Complex plane_wave_phase(const FourMomentum& p, const Event& e)
{
    return std::polar(1.0, p.momentum * e.x - p.energy * e.t);
}

namespace detail {

inline double euclidean_norm(std::span<const Complex> v)
{
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}

inline FourMomentum shell_momentum(const ParticleKind& kind, int n, Frequency f, const SpacetimeBox& box)
{
    const double p1 = lattice_momentum(n, box);
    return {sign_of(f) * std::sqrt(p1 * p1 + kind.mass * kind.mass), p1};
}

} // namespace detail

// Free Dirac spinor in the representation gamma^0 = diag(1,-1),
// gamma^1 = [[0,1],[-1,0]], i.e. H(p) = alpha p + beta m with alpha = sigma_x,
// beta = sigma_z. Phase convention: the component carrying (E + m) is real and
// positive, so the rest spinors are (1,0) for positive and (0,1) for negative
// frequency.
inline std::vector<Complex> dirac_spinor(const FourMomentum& p, double mass)
{
    const double e = std::abs(p.energy);
    std::vector<Complex> u(2);
    if (p.energy >= 0.0) {
        u[0] = e + mass;
        u[1] = p.momentum;
    } else {
        u[0] = -p.momentum;
        u[1] = e + mass;
    }
    const double nrm = detail::euclidean_norm(u);
    for (auto& c : u) c /= nrm;
    return u;
}

inline Mode make_electron_mode(int n, Frequency f, double mass, const SpacetimeBox& box)
{
    detail::require(mass > 0.0, "make_electron_mode: mass must be positive");
    const ParticleKind kind{Species::electron, mass};
    Mode m;
    m.kind = kind;
    m.index = n;
    m.frequency = f;
    m.p = detail::shell_momentum(kind, n, f, box);
    m.amplitude = 1.0 / std::sqrt(box.volume());
    m.weight = dirac_spinor(m.p, mass);
    return m;
}

// Builds psi_k with unit spacetime norm on the box. The weight must be a unit
// vector in U. Photons accept either (u^2, u^3) or a full (u^0, u^1, u^2, u^3)
// with vanishing u^0, u^1; massive vectors accept (u^1, u^2, u^3) or a
// four-vector with vanishing u^0. An empty weight selects the first basis
// vector (the Dirac spinor for electrons).
inline Mode make_mode(const ParticleKind& kind, int n, Frequency f, std::vector<Complex> weight,
                      const SpacetimeBox& box)
{
    if (kind.species == Species::electron && weight.empty()) {
        return make_electron_mode(n, f, kind.mass, box);
    }
    const auto m = static_cast<std::size_t>(kind.components());
    if (weight.empty()) {
        weight.assign(m, Complex{0.0});
        weight[0] = 1.0;
    }
    if (kind.species == Species::photon) {
        detail::require(n != 0, "photon mode needs a nonzero wave vector");
        if (weight.size() == 4) {
            if (std::abs(weight[0]) > 1e-12 || std::abs(weight[1]) > 1e-12)
                throw std::invalid_argument("photon weight violates the transverse calibration u0 = u1 = 0");
            weight.erase(weight.begin(), weight.begin() + 2);
        }
    } else if (kind.species == Species::massive_vector && weight.size() == 4) {
        if (std::abs(weight[0]) > 1e-12)
            throw std::invalid_argument("massive vector weight must have u0 = 0 in the box frame");
        weight.erase(weight.begin());
    }
    detail::require(weight.size() == m, "mode weight has the wrong number of components");
    detail::require(std::abs(detail::euclidean_norm(weight) - 1.0) <= 1e-12, "mode weight must have unit length");
    if (kind.species == Species::electron) {
        // A caller-provided spinor must still solve the Dirac equation for p.
        const auto p = detail::shell_momentum(kind, n, f, box);
        const auto u = dirac_spinor(p, kind.mass);
        const Complex overlap = std::conj(u[0]) * weight[0] + std::conj(u[1]) * weight[1];
        detail::require(std::abs(std::abs(overlap) - 1.0) <= 1e-10, "electron weight is not a Dirac spinor for this momentum");
    }

    Mode mode;
    mode.kind = kind;
    mode.index = n;
    mode.frequency = f;
    mode.p = detail::shell_momentum(kind, n, f, box);
    mode.amplitude = 1.0 / std::sqrt(box.volume());
    mode.weight = std::move(weight);
    return mode;
}

inline Mode make_mode(const ParticleKind& kind, int n, Frequency f, const SpacetimeBox& box)
{
    return make_mode(kind, n, f, {}, box);
}

inline std::vector<Complex> evaluate_mode(const Mode& mode, const Event& e)
{
    const Complex phase = mode.amplitude * plane_wave_phase(mode.p, e);
    std::vector<Complex> out(mode.weight.size());
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = mode.weight[a] * phase;
    return out;
}

// |p^1| must stay below the grid's Nyquist momentum pi * n_space / L.
inline void check_band_limit(const Mode& mode, const UniformGrid& grid)
{
    const double nyquist = std::numbers::pi * grid.n_space() / grid.box().space_extent();
    if (!(std::abs(mode.p.momentum) < nyquist * (1.0 - 1e-12)))
        throw aliasing_error("mode momentum " + std::to_string(mode.p.momentum) +
                             " exceeds the band limit of the grid");
}

// m-component complex field sampled at cell centers; layout [cell][component].
class WaveFunction {
public:
    WaveFunction(UniformGrid grid, ParticleKind kind)
        : grid_(grid), kind_(kind), values_(grid.cell_count() * kind.components(), Complex{0.0})
    {
    }

    WaveFunction(UniformGrid grid, ParticleKind kind, std::vector<Complex> values)
        : grid_(grid), kind_(kind), values_(std::move(values))
    {
        detail::require(values_.size() == grid_.cell_count() * kind_.components(),
                        "WaveFunction: value count does not match grid and kind");
    }

    const UniformGrid& grid() const { return grid_; }
    const ParticleKind& kind() const { return kind_; }
    int components() const { return kind_.components(); }

    std::span<const Complex> at(CellIndex c) const { return at(grid_.flat(c)); }
    std::span<Complex> at(CellIndex c) { return at(grid_.flat(c)); }
    std::span<const Complex> at(std::size_t flat) const
    {
        return {values_.data() + flat * components(), static_cast<std::size_t>(components())};
    }
    std::span<Complex> at(std::size_t flat)
    {
        return {values_.data() + flat * components(), static_cast<std::size_t>(components())};
    }

    // Sum over components of |psi^a|^2 at one cell.
    double modulus_squared(std::size_t flat) const
    {
        double s = 0.0;
        for (const auto& c : at(flat)) s += std::norm(c);
        return s;
    }

    std::span<const Complex> values() const { return values_; }
    std::span<Complex> values() { return values_; }

    WaveFunction& operator*=(Complex s)
    {
        for (auto& v : values_) v *= s;
        return *this;
    }

    friend WaveFunction operator*(Complex s, WaveFunction psi)
    {
        psi *= s;
        return psi;
    }

private:
    UniformGrid grid_;
    ParticleKind kind_;
    std::vector<Complex> values_;
};

namespace detail {

inline void require_same_kind(std::span<const Mode> modes)
{
    detail::require(!modes.empty(), "mode list is empty");
    for (const auto& m : modes) {
        detail::require(m.kind == modes.front().kind, "modes must share one particle kind");
    }
}

// Collinear photon packets only: all wave vectors point the same way.
inline void require_collinear_photons(std::span<const Mode> modes)
{
    if (modes.front().kind.species != Species::photon) return;
    int direction = 0;
    for (const auto& m : modes) {
        const int d = (m.p.momentum > 0.0) - (m.p.momentum < 0.0);
        if (d == 0) throw std::invalid_argument("photon packet contains a mode without a wave vector");
        if (direction != 0 && d != direction)
            throw std::invalid_argument("photon packets with opposite wave vectors are not supported in 1+1D");
        direction = d;
    }
}

} // namespace detail

// Pointwise analytic superposition sum_k C_k psi_k(x).
inline std::vector<Complex> evaluate_superposition(std::span<const Mode> modes, std::span<const Complex> coefficients,
                                                   const Event& e)
{
    const auto m = modes.front().weight.size();
    std::vector<Complex> out(m, Complex{0.0});
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const Complex c = coefficients[k] * modes[k].amplitude * plane_wave_phase(modes[k].p, e);
        for (std::size_t a = 0; a < m; ++a) out[a] += c * modes[k].weight[a];
    }
    return out;
}

inline WaveFunction synthesize(std::span<const Mode> modes, std::span<const Complex> coefficients,
                               const UniformGrid& grid)
{
    detail::require_same_kind(modes);
    detail::require(modes.size() == coefficients.size(), "synthesize: mode and coefficient counts differ");
    detail::require_collinear_photons(modes);
    for (const auto& m : modes) check_band_limit(m, grid);

    WaveFunction psi(grid, modes.front().kind);
    const int m = psi.components();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const Mode& mode = modes[k];
        if (coefficients[k] == Complex{0.0}) continue;
        detail::require(static_cast<int>(mode.weight.size()) == m, "synthesize: weight size mismatch");
        // Separable phase: exp(i p1 x) * exp(-i p0 t).
        std::vector<Complex> space_phase(grid.n_space());
        for (int ix = 0; ix < grid.n_space(); ++ix)
            space_phase[ix] = std::polar(1.0, mode.p.momentum * grid.space_center(ix));
        for (int it = 0; it < grid.n_time(); ++it) {
            const Complex row = coefficients[k] * mode.amplitude * std::polar(1.0, -mode.p.energy * grid.time_center(it));
            for (int ix = 0; ix < grid.n_space(); ++ix) {
                const Complex c = row * space_phase[ix];
                auto cell = psi.at(CellIndex{it, ix});
                for (int a = 0; a < m; ++a) cell[a] += c * mode.weight[a];
            }
        }
    }
    return psi;
}

// (psi1, psi2) = sum_cells sum_a conj(psi1^a) psi2^a w, antilinear in the first slot.
inline Complex inner_product(const WaveFunction& a, const WaveFunction& b)
{
    detail::require(a.grid() == b.grid() && a.components() == b.components(),
                    "inner_product: incompatible wave functions");
    Complex s{0.0};
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) s += std::conj(va[i]) * vb[i];
    return s * a.grid().cell_volume();
}

inline double norm_spacetime_squared(const WaveFunction& psi)
{
    double s = 0.0;
    for (const auto& v : psi.values()) s += std::norm(v);
    return s * psi.grid().cell_volume();
}

inline double norm_spacetime(const WaveFunction& psi) { return std::sqrt(norm_spacetime_squared(psi)); }

inline WaveFunction normalize(WaveFunction psi)
{
    const double nrm = norm_spacetime(psi);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw degenerate_input("normalize: zero or non-finite field");
    psi *= Complex{1.0 / nrm};
    return psi;
}

// Fixed-time squared norm ||psi(t, .)||^2 = sum_x |psi|^2 dx over one time row.
inline double norm_spatial(const WaveFunction& psi, int it)
{
    const auto& g = psi.grid();
    if (it < 0 || it >= g.n_time()) throw std::out_of_range("norm_spatial: time index out of range");
    double s = 0.0;
    for (int ix = 0; ix < g.n_space(); ++ix) s += psi.modulus_squared(g.flat({it, ix}));
    return s * g.dx();
}

// Residual of the free Dirac equation i d_t psi = -i alpha d_x psi + beta m psi
// with second-order central differences (periodic in x, interior rows in t).
inline double dirac_residual(const WaveFunction& psi)
{
    detail::require(psi.kind().species == Species::electron, "dirac_residual: electron field required");
    const auto& g = psi.grid();
    const double mass = psi.kind().mass;
    const Complex i{0.0, 1.0};
    double worst = 0.0;
    for (int it = 1; it + 1 < g.n_time(); ++it) {
        for (int ix = 0; ix < g.n_space(); ++ix) {
            const auto up = psi.at(CellIndex{it + 1, ix});
            const auto dn = psi.at(CellIndex{it - 1, ix});
            const auto rt = psi.at(CellIndex{it, (ix + 1) % g.n_space()});
            const auto lf = psi.at(CellIndex{it, (ix + g.n_space() - 1) % g.n_space()});
            const auto c = psi.at(CellIndex{it, ix});
            const Complex dt0 = (up[0] - dn[0]) / (2.0 * g.dt());
            const Complex dt1 = (up[1] - dn[1]) / (2.0 * g.dt());
            const Complex dx0 = (rt[0] - lf[0]) / (2.0 * g.dx());
            const Complex dx1 = (rt[1] - lf[1]) / (2.0 * g.dx());
            // alpha = sigma_x swaps components; beta = sigma_z flips the lower sign.
            const Complex r0 = i * dt0 + i * dx1 - mass * c[0];
            const Complex r1 = i * dt1 + i * dx0 + mass * c[1];
            worst = std::max({worst, std::abs(r0), std::abs(r1)});
        }
    }
    return worst;
}

// Four-vector field (u^0, u^1, u^2, u^3) on the grid, used for the photon gauge
// family. Layout [cell][mu].
class FourVectorField {
public:
    explicit FourVectorField(UniformGrid grid) : grid_(grid), values_(grid.cell_count() * 4, Complex{0.0}) {}

    const UniformGrid& grid() const { return grid_; }
    std::span<const Complex> at(std::size_t flat) const { return {values_.data() + 4 * flat, 4}; }
    std::span<Complex> at(std::size_t flat) { return {values_.data() + 4 * flat, 4}; }

    // Minkowski square u.u = |u^1|^2 + |u^2|^2 + |u^3|^2 - |u^0|^2.
    double minkowski_square(std::size_t flat) const
    {
        const auto u = at(flat);
        return std::norm(u[1]) + std::norm(u[2]) + std::norm(u[3]) - std::norm(u[0]);
    }

    // max |u^0|, |u^1| over the grid.
    double longitudinal_magnitude() const
    {
        double worst = 0.0;
        for (std::size_t k = 0; k < grid_.cell_count(); ++k)
            worst = std::max({worst, std::abs(at(k)[0]), std::abs(at(k)[1])});
        return worst;
    }

private:
    UniformGrid grid_;
    std::vector<Complex> values_;
};

inline FourVectorField embed_photon(const WaveFunction& psi)
{
    detail::require(psi.kind().species == Species::photon, "embed_photon: photon field required");
    FourVectorField u(psi.grid());
    for (std::size_t k = 0; k < psi.grid().cell_count(); ++k) {
        u.at(k)[2] = psi.at(k)[0];
        u.at(k)[3] = psi.at(k)[1];
    }
    return u;
}

// u^mu -> u^mu + e^{mu nu} d_nu chi, so u^0 shifts by -d_0 chi and u^1 by +d_1 chi.
// Derivatives: central differences in the interior, one-sided at the time
// faces, periodic in space.
inline FourVectorField gauge_transform(const WaveFunction& psi, std::span<const double> chi)
{
    const auto& g = psi.grid();
    detail::require(chi.size() == g.cell_count(), "gauge_transform: gauge function size mismatch");
    FourVectorField u = embed_photon(psi);
    for (int it = 0; it < g.n_time(); ++it) {
        for (int ix = 0; ix < g.n_space(); ++ix) {
            double d0;
            if (it == 0)
                d0 = (chi[g.flat({1, ix})] - chi[g.flat({0, ix})]) / g.dt();
            else if (it == g.n_time() - 1)
                d0 = (chi[g.flat({it, ix})] - chi[g.flat({it - 1, ix})]) / g.dt();
            else
                d0 = (chi[g.flat({it + 1, ix})] - chi[g.flat({it - 1, ix})]) / (2.0 * g.dt());
            const int r = (ix + 1) % g.n_space();
            const int l = (ix + g.n_space() - 1) % g.n_space();
            const double d1 = (chi[g.flat({it, r})] - chi[g.flat({it, l})]) / (2.0 * g.dx());
            auto cell = u.at(g.flat({it, ix}));
            cell[0] += metric::time_sign * d0;
            cell[1] += metric::space_sign * d1;
        }
    }
    return u;
}

} // namespace stpd
