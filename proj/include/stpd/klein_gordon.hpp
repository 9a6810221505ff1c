#pragma once

// Leapfrog evolution of the free Klein-Gordon equation
// (d_0^2 - d_1^2 + m^2) psi = 0 on the periodic box. Independent of the
// plane-wave machinery; used as a numerical oracle for it.

#include <span>
#include <vector>

#include "stpd/fields.hpp"

namespace stpd {

// initial: psi on the first time row (t = dt/2); initial_rate: d_0 psi there.
inline WaveFunction fd_evolve_klein_gordon(std::span<const Complex> initial, std::span<const Complex> initial_rate,
                                           const UniformGrid& grid, double mass)
{
    const int nx = grid.n_space();
    detail::require(initial.size() == static_cast<std::size_t>(nx) && initial_rate.size() == initial.size(),
                    "fd_evolve_klein_gordon: initial data must cover one time row");
    detail::require(mass >= 0.0, "fd_evolve_klein_gordon: negative mass");
    if (grid.dt() > grid.dx() * (1.0 + 1e-12))
        throw std::invalid_argument("fd_evolve_klein_gordon: Courant condition dt <= dx violated");

    const double dt2 = grid.dt() * grid.dt();
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    const double m2 = mass * mass;

    auto force = [&](std::span<const Complex> row, int ix) {
        const Complex lap = (row[(ix + 1) % nx] - 2.0 * row[ix] + row[(ix + nx - 1) % nx]) * inv_dx2;
        return lap - m2 * row[ix];
    };

    WaveFunction psi(grid, ParticleKind{Species::complex_scalar, mass});
    auto values = psi.values();
    auto row = [&](int it) { return values.subspan(static_cast<std::size_t>(it) * nx, nx); };

    std::copy(initial.begin(), initial.end(), row(0).begin());
    if (grid.n_time() == 1) return psi;

    // Taylor start: psi(dt) = psi + dt psi_t + dt^2/2 psi_tt.
    {
        auto r0 = row(0);
        auto r1 = row(1);
        for (int ix = 0; ix < nx; ++ix) r1[ix] = r0[ix] + grid.dt() * initial_rate[ix] + 0.5 * dt2 * force(r0, ix);
    }
    for (int it = 1; it + 1 < grid.n_time(); ++it) {
        auto prev = row(it - 1);
        auto cur = row(it);
        auto next = row(it + 1);
        for (int ix = 0; ix < nx; ++ix) next[ix] = 2.0 * cur[ix] - prev[ix] + dt2 * force(cur, ix);
    }
    return psi;
}

} // namespace stpd
