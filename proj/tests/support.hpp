#pragma once

// Shared helpers for the test suites: reference states and independent
// closed-form oracles written without the library's evaluation paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "stpd/stpd.hpp"

namespace stpd::testing {

inline constexpr double pi = std::numbers::pi;

// sum_{j=0}^{n-1} exp(i theta (j + 1/2)), summed in closed form.
inline Complex midpoint_phase_sum(double theta, int n)
{
    const Complex z = std::polar(1.0, theta);
    if (std::abs(z - 1.0) < 1e-14) return Complex{static_cast<double>(n)} * std::polar(1.0, 0.5 * theta);
    return std::polar(1.0, 0.5 * theta) * (1.0 - std::pow(z, n)) / (1.0 - z);
}

// Grid inner product of two scalar plane waves with unit weight, from the
// separable geometric sums (never touches synthesize or inner_product).
inline Complex plane_wave_overlap(const FourMomentum& a, const FourMomentum& b, const UniformGrid& g)
{
    const double amp2 = 1.0 / g.box().volume();
    const Complex st = midpoint_phase_sum(-(b.energy - a.energy) * g.dt(), g.n_time());
    const Complex sx = midpoint_phase_sum((b.momentum - a.momentum) * g.dx(), g.n_space());
    return amp2 * st * sx * g.cell_volume();
}

// Interference state (psi_0 + psi_1)/sqrt 2 of massless scalar modes n = 0, 1.
struct TwoModeState {
    std::vector<Mode> modes;
    std::vector<Complex> coefficients;
};

inline TwoModeState interference_state(const SpacetimeBox& box, Species species = Species::complex_scalar)
{
    const ParticleKind k{species, 0.0};
    const double s = 1.0 / std::sqrt(2.0);
    return {{make_mode(k, 0, Frequency::positive, box), make_mode(k, 1, Frequency::positive, box)}, {s, s}};
}

// Random band-limited superposition: distinct spatial indices, random
// frequency signs (positive only when the kind has no antiparticle freedom
// worth exercising), random complex coefficients normalized to unit l2 norm.
inline TwoModeState random_state(const ParticleKind& kind, const UniformGrid& g, int count, std::mt19937_64& rng)
{
    const int limit = g.n_space() / 2 - 1;
    std::uniform_int_distribution<int> idx(-limit, limit);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    TwoModeState s;
    std::vector<int> used;
    while (static_cast<int>(s.modes.size()) < count) {
        int n = idx(rng);
        if (kind.species == Species::photon) {
            n = std::abs(n);
            if (n == 0) continue;
        }
        if (std::find(used.begin(), used.end(), n) != used.end()) continue;
        used.push_back(n);
        const Frequency f = coin(rng) ? Frequency::positive : Frequency::negative;
        std::vector<Complex> w;
        if (kind.species == Species::photon || kind.species == Species::massive_vector) {
            w.resize(kind.components());
            double nrm = 0.0;
            for (auto& c : w) {
                c = {gauss(rng), gauss(rng)};
                nrm += std::norm(c);
            }
            for (auto& c : w) c /= std::sqrt(nrm);
        }
        s.modes.push_back(make_mode(kind, n, f, w, g.box()));
        s.coefficients.emplace_back(gauss(rng), gauss(rng));
    }
    double nrm = 0.0;
    for (const auto& c : s.coefficients) nrm += std::norm(c);
    for (auto& c : s.coefficients) c /= std::sqrt(nrm);
    return s;
}

inline std::vector<ParticleKind> all_kinds()
{
    return {{Species::real_scalar, 0.7},
            {Species::complex_scalar, 1.3},
            {Species::massive_vector, 2.0},
            {Species::photon, 0.0},
            {Species::electron, 1.0}};
}

} // namespace stpd::testing
