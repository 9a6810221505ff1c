#pragma once

// Truncated second quantization over a one-particle basis (plane-wave modes or
// grid cells): occupation-number states, ladder operators, one-body operators
// sum_ij l_ij a_i^+ a_j, region-count operators and the N = 1 cell subsystem.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stpd/density.hpp"
#include "stpd/fields.hpp"
#include "stpd/lattice.hpp"

namespace stpd {

enum class Statistics { bose, fermi };

// Occupied one-particle indices in ascending order; a boson index repeats n_i times.
using Occupation = std::vector<std::uint32_t>;

using SparseOperator = Eigen::SparseMatrix<Complex>;

// All occupation tuples with sum n_i <= max_particles (n_i <= 1 for fermions),
// ordered by total N and then lexicographically.
class FockSpace {
public:
    FockSpace(std::size_t modes, int max_particles, Statistics statistics)
        : modes_(modes), max_particles_(max_particles), statistics_(statistics)
    {
        detail::require(modes >= 1, "FockSpace: need at least one mode");
        detail::require(max_particles >= 0, "FockSpace: negative particle ceiling");
        Occupation current;
        for (int n = 0; n <= max_particles; ++n) enumerate(current, 0, n);
        for (std::size_t k = 0; k < states_.size(); ++k) index_.emplace(states_[k], k);
    }

    std::size_t size() const { return states_.size(); }
    std::size_t modes() const { return modes_; }
    int max_particles() const { return max_particles_; }
    Statistics statistics() const { return statistics_; }

    const Occupation& state(std::size_t k) const { return states_[k]; }
    int total(std::size_t k) const { return static_cast<int>(states_[k].size()); }

    int occupation(std::size_t k, std::size_t mode) const
    {
        const auto& s = states_[k];
        const auto range = std::equal_range(s.begin(), s.end(), static_cast<std::uint32_t>(mode));
        return static_cast<int>(range.second - range.first);
    }

    std::optional<std::size_t> find(const Occupation& occ) const
    {
        const auto it = index_.find(occ);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // Index of the tuple given as occupation numbers (n_0, n_1, ...).
    std::size_t index_of(std::span<const int> numbers) const
    {
        detail::require(numbers.size() == modes_, "FockSpace::index_of: wrong tuple length");
        Occupation occ;
        for (std::size_t i = 0; i < numbers.size(); ++i)
            for (int r = 0; r < numbers[i]; ++r) occ.push_back(static_cast<std::uint32_t>(i));
        const auto k = find(occ);
        detail::require(k.has_value(), "FockSpace::index_of: tuple outside the truncated space");
        return *k;
    }

    std::size_t vacuum() const { return 0; }

private:
    void enumerate(Occupation& current, std::uint32_t start, int remaining)
    {
        if (remaining == 0) {
            states_.push_back(current);
            detail::require(states_.size() <= 5'000'000, "FockSpace: truncated space too large");
            return;
        }
        for (std::uint32_t i = start; i < modes_; ++i) {
            current.push_back(i);
            enumerate(current, statistics_ == Statistics::bose ? i : i + 1, remaining - 1);
            current.pop_back();
        }
    }

    std::size_t modes_;
    int max_particles_;
    Statistics statistics_;
    std::vector<Occupation> states_;
    std::map<Occupation, std::size_t> index_;
};

namespace detail {

struct LadderResult {
    Occupation occupation;
    double factor = 0.0; // zero when the action annihilates the state
};

// Fermi sign convention: |n> = (a_0^+)^{n_0} (a_1^+)^{n_1} ... |0>, so moving
// a_i^(+) into place costs (-1)^{sum_{j<i} n_j}.
inline double fermi_sign(const Occupation& occ, std::uint32_t mode)
{
    const auto below = std::lower_bound(occ.begin(), occ.end(), mode) - occ.begin();
    return (below % 2 == 0) ? 1.0 : -1.0;
}

inline LadderResult create(const Occupation& occ, std::uint32_t mode, Statistics stats)
{
    const auto range = std::equal_range(occ.begin(), occ.end(), mode);
    const auto n = range.second - range.first;
    LadderResult r{occ, 0.0};
    if (stats == Statistics::fermi) {
        if (n > 0) return r;
        r.factor = fermi_sign(occ, mode);
    } else {
        r.factor = std::sqrt(static_cast<double>(n + 1));
    }
    r.occupation.insert(r.occupation.begin() + (range.second - occ.begin()), mode);
    return r;
}

inline LadderResult annihilate(const Occupation& occ, std::uint32_t mode, Statistics stats)
{
    const auto range = std::equal_range(occ.begin(), occ.end(), mode);
    const auto n = range.second - range.first;
    LadderResult r{occ, 0.0};
    if (n == 0) return r;
    r.factor = stats == Statistics::fermi ? fermi_sign(occ, mode) : std::sqrt(static_cast<double>(n));
    r.occupation.erase(r.occupation.begin() + (range.first - occ.begin()));
    return r;
}

} // namespace detail

// Matrix of a_i on the truncated space.
inline SparseOperator annihilation(const FockSpace& space, std::size_t mode)
{
    detail::require(mode < space.modes(), "annihilation: mode index out of range");
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto r = detail::annihilate(space.state(k), static_cast<std::uint32_t>(mode), space.statistics());
        if (r.factor == 0.0) continue;
        t.emplace_back(static_cast<int>(*space.find(r.occupation)), static_cast<int>(k), r.factor);
    }
    SparseOperator m(space.size(), space.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// Matrix of a_i^+; components that would exceed the particle ceiling are dropped.
inline SparseOperator creation(const FockSpace& space, std::size_t mode)
{
    detail::require(mode < space.modes(), "creation: mode index out of range");
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto r = detail::create(space.state(k), static_cast<std::uint32_t>(mode), space.statistics());
        if (r.factor == 0.0) continue;
        const auto target = space.find(r.occupation);
        if (!target) continue;
        t.emplace_back(static_cast<int>(*target), static_cast<int>(k), r.factor);
    }
    SparseOperator m(space.size(), space.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// Amplitudes Phi(n) over a truncated space. The inner product carries an
// optional per-tuple weight (the cell volumes of the N = 1 cell subsystem);
// an empty weight list means unit weights.
struct FockState {
    std::shared_ptr<const FockSpace> space;
    Eigen::VectorXcd amplitudes;
    std::vector<double> weights;

    double weight(std::size_t k) const { return weights.empty() ? 1.0 : weights[k]; }

    double norm_squared() const
    {
        double s = 0.0;
        for (Eigen::Index k = 0; k < amplitudes.size(); ++k) s += std::norm(amplitudes(k)) * weight(k);
        return s;
    }
};

inline FockState basis_state(std::shared_ptr<const FockSpace> space, std::span<const int> numbers)
{
    FockState s{space, Eigen::VectorXcd::Zero(space->size()), {}};
    s.amplitudes(space->index_of(numbers)) = 1.0;
    return s;
}

inline FockState apply_annihilation(std::size_t mode, const FockState& phi)
{
    return {phi.space, annihilation(*phi.space, mode) * phi.amplitudes, phi.weights};
}

inline FockState apply_creation(std::size_t mode, const FockState& phi)
{
    const auto& space = *phi.space;
    for (std::size_t k = 0; k < space.size(); ++k) {
        if (space.total(k) == space.max_particles() && phi.amplitudes(k) != Complex{0.0} &&
            detail::create(space.state(k), static_cast<std::uint32_t>(mode), space.statistics()).factor != 0.0)
            throw truncation_overflow("apply_creation: state has weight on the particle ceiling");
    }
    return {phi.space, creation(space, mode) * phi.amplitudes, phi.weights};
}

// Matrix elements l_ij = (psi_i, L psi_j) over a one-particle basis.
struct OneBodyOperator {
    Eigen::MatrixXcd elements;
    bool hermitian = false;

    std::size_t dimension() const { return static_cast<std::size_t>(elements.rows()); }
};

inline constexpr double hermiticity_tolerance = 1e-12;

inline OneBodyOperator make_one_body(Eigen::MatrixXcd elements)
{
    OneBodyOperator op{std::move(elements), false};
    const double scale = std::max(1.0, op.elements.cwiseAbs().maxCoeff());
    op.hermitian = (op.elements - op.elements.adjoint()).cwiseAbs().maxCoeff() <= hermiticity_tolerance * scale;
    return op;
}

using OneParticleMap = std::function<WaveFunction(const WaveFunction&)>;

namespace detail {

inline std::vector<WaveFunction> basis_functions(std::span<const Mode> modes, const UniformGrid& grid)
{
    std::vector<WaveFunction> out;
    out.reserve(modes.size());
    const Complex one{1.0};
    for (const auto& m : modes) out.push_back(synthesize(std::span<const Mode>(&m, 1), std::span<const Complex>(&one, 1), grid));
    return out;
}

} // namespace detail

// Operator synthesis rule: record the one-particle average (psi, L psi) and
// replace psi by the wave operator, giving Lambda = sum_ij l_ij a_i^+ a_j.
inline OneBodyOperator one_body_operator_from_kernel(const OneParticleMap& kernel, std::span<const Mode> modes,
                                                     const UniformGrid& grid)
{
    detail::require_same_kind(modes);
    const auto basis = detail::basis_functions(modes, grid);
    const auto k = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd l(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const WaveFunction image = kernel(basis[j]);
        detail::require(image.grid() == grid && image.components() == basis[j].components(),
                        "one_body_operator_from_kernel: kernel changed grid or component count");
        for (Eigen::Index i = 0; i < k; ++i) l(i, j) = inner_product(basis[i], image);
    }
    return make_one_body(std::move(l));
}

// Multiplication by the indicator of a region.
inline OneParticleMap indicator_kernel(const Region& q)
{
    return [q](const WaveFunction& psi) {
        WaveFunction out(psi.grid(), psi.kind());
        for (const auto& c : q.cells()) {
            const auto src = psi.at(c);
            auto dst = out.at(c);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        return out;
    };
}

// p^1 = -i d_1 applied spectrally row by row (exact on band-limited fields).
inline WaveFunction spectral_momentum(const WaveFunction& psi)
{
    const auto& g = psi.grid();
    const int nx = g.n_space();
    const int m = psi.components();
    WaveFunction out(g, psi.kind());
    std::vector<Complex> coeff(nx);
    for (int it = 0; it < g.n_time(); ++it) {
        for (int a = 0; a < m; ++a) {
            for (int q = 0; q < nx; ++q) {
                Complex s{0.0};
                for (int ix = 0; ix < nx; ++ix) s += psi.at(CellIndex{it, ix})[a] * std::polar(1.0, -two_pi * q * ix / nx);
                coeff[q] = s / static_cast<double>(nx);
            }
            for (int ix = 0; ix < nx; ++ix) {
                Complex s{0.0};
                for (int q = 0; q < nx; ++q) {
                    const int n = (q <= nx / 2) ? q : q - nx;
                    if (2 * std::abs(n) == nx) continue; // Nyquist component has no signed momentum
                    s += coeff[q] * lattice_momentum(n, g.box()) * std::polar(1.0, two_pi * q * ix / nx);
                }
                out.at(CellIndex{it, ix})[a] = s;
            }
        }
    }
    return out;
}

// Region-count kernel l_ij(Q) = sum_{cells in Q} sum_a conj(psi_i^a) psi_j^a w.
inline OneBodyOperator lambda_region(const Region& q, std::span<const Mode> modes, const UniformGrid& grid)
{
    detail::require_same_kind(modes);
    const auto basis = detail::basis_functions(modes, grid);
    const auto k = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(k, k);
    for (const auto& c : q.cells()) {
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto vi = basis[i].at(c);
            for (Eigen::Index j = 0; j < k; ++j) {
                const auto vj = basis[j].at(c);
                Complex s{0.0};
                for (std::size_t a = 0; a < vi.size(); ++a) s += std::conj(vi[a]) * vj[a];
                l(i, j) += s;
            }
        }
    }
    l *= grid.cell_volume();
    return make_one_body(std::move(l));
}

// Lambda = sum_ij l_ij a_i^+ a_j on the truncated space.
inline SparseOperator second_quantize(const OneBodyOperator& op, const FockSpace& space)
{
    detail::require(op.dimension() == space.modes(), "second_quantize: operator and Fock space disagree on the basis size");
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto& occ = space.state(k);
        for (std::size_t pos = 0; pos < occ.size(); ++pos) {
            if (pos > 0 && occ[pos] == occ[pos - 1]) continue;
            const std::uint32_t j = occ[pos];
            const auto lowered = detail::annihilate(occ, j, space.statistics());
            for (std::size_t i = 0; i < space.modes(); ++i) {
                const Complex lij = op.elements(static_cast<Eigen::Index>(i), j);
                if (lij == Complex{0.0}) continue;
                const auto raised = detail::create(lowered.occupation, static_cast<std::uint32_t>(i), space.statistics());
                if (raised.factor == 0.0) continue;
                const auto target = space.find(raised.occupation);
                if (!target) continue;
                t.emplace_back(static_cast<int>(*target), static_cast<int>(k), lij * lowered.factor * raised.factor);
            }
        }
    }
    SparseOperator m(space.size(), space.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline double expected_count(const FockState& phi, const SparseOperator& op)
{
    detail::require(op.rows() == phi.amplitudes.size(), "expected_count: operator and state sizes differ");
    const Eigen::VectorXcd image = op * phi.amplitudes;
    Complex s{0.0};
    for (Eigen::Index k = 0; k < image.size(); ++k) s += std::conj(phi.amplitudes(k)) * image(k) * phi.weight(k);
    return s.real();
}

inline double expected_count(const FockState& phi, const OneBodyOperator& op)
{
    return expected_count(phi, second_quantize(op, *phi.space));
}

inline double event_probability(const FockState& phi, const std::function<bool(const Occupation&)>& predicate)
{
    double p = 0.0;
    for (std::size_t k = 0; k < phi.space->size(); ++k)
        if (predicate(phi.space->state(k))) p += std::norm(phi.amplitudes(static_cast<Eigen::Index>(k))) * phi.weight(k);
    return p;
}

// Normal-ordered form of a region-count operator built from a field
// bilinear: the number-conserving kernel, the pair terms
// sum_ij A_ij c_i c_j and sum_ij B_ij c_i^+ c_j^+, and the vacuum constant.
// Ladder indices run over the particle modes, followed by the antiparticle
// modes for the charged scalar.
struct NormalOrderedCount {
    OneBodyOperator number_conserving;
    Eigen::MatrixXcd pair_annihilation;
    Eigen::MatrixXcd pair_creation;
    double vacuum_constant = 0.0;
};

namespace detail {

// Bilinear integrals over Q: conj(psi_i) psi_j and psi_i psi_j (summed over components).
inline void region_bilinears(const Region& q, const std::vector<WaveFunction>& basis, double w,
                             Eigen::MatrixXcd& hermitian, Eigen::MatrixXcd& symmetric)
{
    const auto k = static_cast<Eigen::Index>(basis.size());
    hermitian = Eigen::MatrixXcd::Zero(k, k);
    symmetric = Eigen::MatrixXcd::Zero(k, k);
    for (const auto& c : q.cells()) {
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto vi = basis[i].at(c);
            for (Eigen::Index j = 0; j < k; ++j) {
                const auto vj = basis[j].at(c);
                for (std::size_t a = 0; a < vi.size(); ++a) {
                    hermitian(i, j) += std::conj(vi[a]) * vj[a];
                    symmetric(i, j) += vi[a] * vj[a];
                }
            }
        }
    }
    hermitian *= w;
    symmetric *= w;
}

} // namespace detail

// Region counts for concrete particles:
//   neutral scalar and photon: (1/2) int_Q Psi^2 dE with Psi = sum psi_i a_i + conj(psi_i) a_i^+,
//   charged scalar: int_Q Psi^+ Psi dE with Psi = sum a_i psi_i + b_i^+ conj(psi_i).
inline NormalOrderedCount specialized_lambda(const Region& q, std::span<const Mode> modes, const UniformGrid& grid)
{
    detail::require_same_kind(modes);
    const auto species = modes.front().kind.species;
    const auto basis = detail::basis_functions(modes, grid);
    Eigen::MatrixXcd l, s;
    detail::region_bilinears(q, basis, grid.cell_volume(), l, s);
    const auto m = l.rows();

    NormalOrderedCount out;
    switch (species) {
    case Species::real_scalar:
    case Species::photon:
        // (1/2)[psi_i psi_j a_i a_j + conj(psi_i psi_j) a_i^+ a_j^+ + 2 conj(psi_i) psi_j a_i^+ a_j] + (1/2) tr l
        out.number_conserving = make_one_body(l);
        out.pair_annihilation = 0.5 * s;
        out.pair_creation = 0.5 * s.conjugate();
        out.vacuum_constant = 0.5 * l.trace().real();
        break;
    case Species::complex_scalar: {
        Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
        n.topLeftCorner(m, m) = l;
        n.bottomRightCorner(m, m) = l;
        out.number_conserving = make_one_body(std::move(n));
        // a_i^+ b_j^+ conj(psi_i psi_j) and b_i a_j psi_i psi_j
        out.pair_creation = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
        out.pair_creation.topRightCorner(m, m) = s.conjugate();
        out.pair_annihilation = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
        out.pair_annihilation.bottomLeftCorner(m, m) = s;
        out.vacuum_constant = l.trace().real();
        break;
    }
    default:
        throw std::invalid_argument("specialized_lambda: unsupported particle kind " + to_string(species));
    }
    return out;
}

// Full operator including the pair terms and the vacuum constant.
inline SparseOperator second_quantize(const NormalOrderedCount& op, const FockSpace& space, bool include_off_sector)
{
    SparseOperator m = second_quantize(op.number_conserving, space);
    if (!include_off_sector) return m;
    const auto n = space.modes();
    std::vector<SparseOperator> a(n), ad(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = annihilation(space, i);
        ad[i] = creation(space, i);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex ca = op.pair_annihilation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const Complex cc = op.pair_creation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (ca != Complex{0.0}) m += SparseOperator(ca * (a[i] * a[j]));
            if (cc != Complex{0.0}) m += SparseOperator(cc * (ad[i] * ad[j]));
        }
    }
    SparseOperator id(space.size(), space.size());
    id.setIdentity();
    m += SparseOperator(Complex{op.vacuum_constant} * id);
    return m;
}

// Diagonal count operator of the cell basis: eigenvalue sum_{xi in Q'} n(xi).
struct CellCountOperator {
    std::vector<bool> member; // over the grid's flat cell indices

    double eigenvalue(const Occupation& occ) const
    {
        double n = 0.0;
        for (auto i : occ) n += member[i] ? 1.0 : 0.0;
        return n;
    }
};

inline CellCountOperator cell_basis_count(const UniformGrid& grid, const Region& q) { return {q.mask(grid)}; }

inline double expected_count(const FockState& phi, const CellCountOperator& op)
{
    detail::require(op.member.size() == phi.space->modes(), "expected_count: cell operator does not match the basis");
    double s = 0.0;
    for (std::size_t k = 0; k < phi.space->size(); ++k)
        s += std::norm(phi.amplitudes(static_cast<Eigen::Index>(k))) * phi.weight(k) * op.eigenvalue(phi.space->state(k));
    return s;
}

// N = 1 sector of the cell-basis field: Phi(n) = psi(xi(n)) with inner product
// weighted by the cell volume. Multi-component fields contribute the modulus
// sqrt(sum_a |psi^a|^2) as the amplitude. Single-occupancy tuples are not
// symmetrized.
inline FockState single_particle_subsystem(const WaveFunction& psi)
{
    const auto& grid = psi.grid();
    auto space = std::make_shared<const FockSpace>(grid.cell_count(), 1, Statistics::bose);
    FockState phi{space, Eigen::VectorXcd::Zero(space->size()), std::vector<double>(space->size(), grid.cell_volume())};
    phi.weights[space->vacuum()] = 1.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const auto k = *space->find(Occupation{static_cast<std::uint32_t>(c)});
        const auto v = psi.at(c);
        phi.amplitudes(static_cast<Eigen::Index>(k)) = v.size() == 1 ? v[0] : Complex{std::sqrt(psi.modulus_squared(c))};
    }
    return phi;
}

// Fock representation Gamma(U) of a one-particle unitary: a_j^+ -> sum_k U_kj a_k^+.
inline Eigen::MatrixXcd induced_unitary(const Eigen::MatrixXcd& u, const FockSpace& space)
{
    const auto n = space.modes();
    detail::require(static_cast<std::size_t>(u.rows()) == n && u.rows() == u.cols(), "induced_unitary: size mismatch");
    std::vector<SparseOperator> ad(n);
    for (std::size_t i = 0; i < n; ++i) ad[i] = creation(space, i);

    const auto dim = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t k = 0; k < space.size(); ++k) {
        const auto& occ = space.state(k);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
        v(static_cast<Eigen::Index>(space.vacuum())) = 1.0;
        double norm = 1.0;
        for (auto it = occ.rbegin(); it != occ.rend(); ++it) {
            Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
            for (std::size_t q = 0; q < n; ++q) {
                const Complex c = u(static_cast<Eigen::Index>(q), *it);
                if (c != Complex{0.0}) next += c * (ad[q] * v);
            }
            v = std::move(next);
        }
        if (space.statistics() == Statistics::bose) {
            for (std::size_t i = 0; i < n; ++i) norm *= std::tgamma(space.occupation(k, i) + 1.0);
        }
        gamma.col(static_cast<Eigen::Index>(k)) = v / std::sqrt(norm);
    }
    return gamma;
}

} // namespace stpd
