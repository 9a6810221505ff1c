#pragma once

// Projection onto the plane-wave eigenbasis: coefficients C_k, occupation
// numbers n_k = |C_k|^2, mean four-momentum and charge from frequency sign.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "stpd/fields.hpp"

namespace stpd {

struct ModeCoefficients {
    std::vector<Mode> modes;
    std::vector<Complex> coefficients;
    double residual = 0.0;        // ||psi - sum C_k psi_k|| from decompose
    double gram_deviation = 0.0;  // max |(psi_i, psi_j) - delta_ij| of the mode set

    std::vector<double> occupations() const
    {
        std::vector<double> n(coefficients.size());
        for (std::size_t k = 0; k < n.size(); ++k) n[k] = std::norm(coefficients[k]);
        return n;
    }

    double norm_squared() const
    {
        double s = 0.0;
        for (const auto& c : coefficients) s += std::norm(c);
        return s;
    }
};

// A weighted set of four-momenta: the distribution {n_k} over {p_k}. Produced
// from mode coefficients, or directly by packet constructors whose plane waves
// are not tied to a mass shell.
struct Spectrum {
    std::vector<FourMomentum> momenta;
    std::vector<Complex> coefficients;
};

inline Spectrum spectrum_of(const ModeCoefficients& c)
{
    Spectrum s;
    for (const auto& m : c.modes) s.momenta.push_back(m.p);
    s.coefficients = c.coefficients;
    return s;
}

inline constexpr double orthonormality_tolerance = 1e-10;

namespace detail {

inline void require_distinct_on_grid(std::span<const Mode> modes, const UniformGrid& grid)
{
    for (const auto& m : modes) check_band_limit(m, grid);
}

} // namespace detail

// C_k = (psi_k, psi). For a mode set that is not orthonormal on this grid the
// Gram system is solved instead and the deviation is reported.
inline ModeCoefficients decompose(const WaveFunction& psi, std::span<const Mode> modes)
{
    detail::require_same_kind(modes);
    detail::require(modes.front().kind.components() == psi.components(), "decompose: component count mismatch");
    detail::require_distinct_on_grid(modes, psi.grid());

    const auto k = static_cast<Eigen::Index>(modes.size());
    std::vector<WaveFunction> basis;
    basis.reserve(modes.size());
    for (const auto& m : modes) {
        const Complex one{1.0};
        basis.push_back(synthesize(std::span<const Mode>(&m, 1), std::span<const Complex>(&one, 1), psi.grid()));
    }

    Eigen::MatrixXcd gram(k, k);
    Eigen::VectorXcd rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        rhs(i) = inner_product(basis[i], psi);
        for (Eigen::Index j = 0; j < k; ++j) gram(i, j) = inner_product(basis[i], basis[j]);
    }

    ModeCoefficients out;
    out.modes.assign(modes.begin(), modes.end());
    out.gram_deviation = (gram - Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff();
    Eigen::VectorXcd c = rhs;
    if (out.gram_deviation > orthonormality_tolerance) {
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
        if (!lu.isInvertible()) throw degenerate_input("decompose: mode set is linearly dependent on this grid");
        c = lu.solve(rhs);
    }
    out.coefficients.assign(c.data(), c.data() + k);

    WaveFunction rest = psi;
    for (Eigen::Index i = 0; i < k; ++i) {
        auto rv = rest.values();
        const auto bv = basis[i].values();
        for (std::size_t q = 0; q < rv.size(); ++q) rv[q] -= c(i) * bv[q];
    }
    out.residual = norm_spacetime(rest);
    return out;
}

// Fixed-time projection on one time row: C_k(t) = (psi_k(t,.), psi(t,.)) / ||psi_k(t,.)||^2.
// Reported alongside the spacetime projection; the two agree up to the
// normalization of the mode set.
inline std::vector<Complex> decompose_fixed_time(const WaveFunction& psi, std::span<const Mode> modes, int it)
{
    detail::require_same_kind(modes);
    const auto& g = psi.grid();
    if (it < 0 || it >= g.n_time()) throw std::out_of_range("decompose_fixed_time: time index out of range");
    std::vector<Complex> c(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        Complex s{0.0};
        double nrm = 0.0;
        for (int ix = 0; ix < g.n_space(); ++ix) {
            const auto basis = evaluate_mode(modes[k], g.cell_center({it, ix}));
            const auto v = psi.at(CellIndex{it, ix});
            for (std::size_t a = 0; a < basis.size(); ++a) {
                s += std::conj(basis[a]) * v[a];
                nrm += std::norm(basis[a]);
            }
        }
        c[k] = s / nrm;
    }
    return c;
}

namespace detail {

inline void require_unit_norm(std::span<const Complex> c, const char* where)
{
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    if (std::abs(s - 1.0) > orthonormality_tolerance)
        throw std::invalid_argument(std::string(where) + ": coefficients are not normalized");
}

} // namespace detail

inline FourMomentum mean_four_momentum(const Spectrum& s)
{
    detail::require_unit_norm(s.coefficients, "mean_four_momentum");
    FourMomentum mean;
    for (std::size_t k = 0; k < s.momenta.size(); ++k) {
        const double n = std::norm(s.coefficients[k]);
        mean.energy += n * s.momenta[k].energy;
        mean.momentum += n * s.momenta[k].momentum;
    }
    return mean;
}

inline FourMomentum mean_four_momentum(const ModeCoefficients& c) { return mean_four_momentum(spectrum_of(c)); }

// sum_{+} n_k - sum_{-} n_k, unit charge per particle.
inline double charge_expectation(const ModeCoefficients& c)
{
    detail::require_same_kind(c.modes);
    if (!c.modes.front().kind.has_charge())
        throw std::invalid_argument("charge_expectation: " + to_string(c.modes.front().kind.species) + " carries no charge");
    double q = 0.0;
    for (std::size_t k = 0; k < c.modes.size(); ++k) q += sign_of(c.modes[k].frequency) * std::norm(c.coefficients[k]);
    return q;
}

} // namespace stpd
