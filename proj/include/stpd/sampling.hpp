#pragma once

// Simulated observation sessions: appearance events drawn from g(x) with an
// alias table over cells plus uniform jitter inside the cell, session
// filtering against a box, and Pearson goodness of fit.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "stpd/density.hpp"
#include "stpd/lattice.hpp"

namespace stpd {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter). SplitMix64 finalizer over a per-stream offset.
class CounterRng {
public:
    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
    {
        const std::uint64_t base = mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL));
        return mix(base + (counter + 1) * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform in [0, 1) with 53 random bits.
    static constexpr double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
    {
        return static_cast<double>(bits(seed, stream, counter) >> 11) * 0x1.0p-53;
    }
};

// Vose's alias method over a discrete distribution.
class AliasTable {
public:
    explicit AliasTable(std::span<const double> weights)
        : probability_(weights.size()), alias_(weights.size())
    {
        detail::require(!weights.empty(), "AliasTable: empty distribution");
        double total = 0.0;
        for (double w : weights) {
            detail::require(w >= 0.0 && std::isfinite(w), "AliasTable: negative or non-finite weight");
            total += w;
        }
        detail::require(total > 0.0, "AliasTable: all weights are zero");

        const std::size_t n = weights.size();
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const auto s = small.back();
            small.pop_back();
            const auto l = large.back();
            probability_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto i : large) { probability_[i] = 1.0; alias_[i] = i; }
        for (auto i : small) { probability_[i] = 1.0; alias_[i] = i; } // round-off leftovers
    }

    std::size_t size() const { return probability_.size(); }

    std::size_t sample(double u_column, double u_accept) const
    {
        const auto n = probability_.size();
        auto column = static_cast<std::size_t>(u_column * static_cast<double>(n));
        if (column >= n) column = n - 1;
        return u_accept < probability_[column] ? column : alias_[column];
    }

private:
    std::vector<double> probability_;
    std::vector<std::uint32_t> alias_;
};

struct SampledEvent {
    Event event;
    std::uint32_t stream = 0;
    std::uint64_t index = 0;
};

struct EventSample {
    std::vector<SampledEvent> events; // accepted sessions, ordered by stream then index
    std::uint64_t seed = 0;
    std::size_t accepted = 0;
    std::size_t discarded = 0;
};

class Sampler {
public:
    Sampler(const SpacetimeDensity& g, std::uint64_t seed) : grid_(g.grid()), table_(cell_weights(g)), seed_(seed) {}

    const UniformGrid& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }

    // Session `index` of `stream`; consumes counters 4*index .. 4*index+3.
    Event draw(std::uint64_t stream, std::uint64_t index) const
    {
        const std::uint64_t c = 4 * index;
        const auto cell = grid_.cell(table_.sample(CounterRng::uniform(seed_, stream, c),
                                                   CounterRng::uniform(seed_, stream, c + 1)));
        return {(cell.it + CounterRng::uniform(seed_, stream, c + 2)) * grid_.dt(),
                (cell.ix + CounterRng::uniform(seed_, stream, c + 3)) * grid_.dx()};
    }

    // Cell of session `index` only (no jitter draws).
    std::size_t draw_cell(std::uint64_t stream, std::uint64_t index) const
    {
        const std::uint64_t c = 4 * index;
        return table_.sample(CounterRng::uniform(seed_, stream, c), CounterRng::uniform(seed_, stream, c + 1));
    }

private:
    static std::vector<double> cell_weights(const SpacetimeDensity& g)
    {
        detail::require_normalized(g, "build_sampler");
        std::vector<double> w(g.values().begin(), g.values().end());
        for (auto& v : w) v *= g.grid().cell_volume();
        return w;
    }

    UniformGrid grid_;
    AliasTable table_;
    std::uint64_t seed_;
};

inline Sampler build_sampler(const SpacetimeDensity& g, std::uint64_t seed) { return Sampler(g, seed); }

// Runs `count` sessions split round-robin over `streams` (session j goes to
// stream j % streams as index j / streams). Events outside the filter box
// (0, T_f) x (0, L_f) are discarded and tallied.
inline EventSample run_sessions(const Sampler& sampler, std::size_t count, const SpacetimeBox& filter,
                                std::uint32_t streams = 1)
{
    detail::require(count >= 1, "run_sessions: need at least one session");
    detail::require(streams >= 1, "run_sessions: need at least one stream");
    EventSample out;
    out.seed = sampler.seed();
    out.events.reserve(count);
    for (std::uint32_t s = 0; s < streams; ++s) {
        const std::size_t per_stream = count / streams + (s < count % streams ? 1 : 0);
        for (std::uint64_t i = 0; i < per_stream; ++i) {
            const Event e = sampler.draw(s, i);
            if (filter.contains(e, 0.0)) {
                out.events.push_back({e, s, i});
                ++out.accepted;
            } else {
                ++out.discarded;
            }
        }
    }
    return out;
}

inline void write_events_csv(std::ostream& os, const EventSample& sample)
{
    os << "t,x,stream,index\n";
    char buf[96];
    for (const auto& e : sample.events) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%u,%llu\n", e.event.t, e.event.x, e.stream,
                      static_cast<unsigned long long>(e.index));
        os << buf;
    }
}

// Regularized upper incomplete gamma Q(a, x): power series for x < a + 1,
// modified Lentz continued fraction otherwise.
inline double regularized_gamma_q(double a, double x)
{
    detail::require(a > 0.0 && x >= 0.0, "regularized_gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
    constexpr double eps = 1e-16;
    constexpr int max_iter = 100000;
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < max_iter; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::max(0.0, 1.0 - sum * std::exp(log_prefactor));
    }
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::exp(log_prefactor) * h;
}

inline double chi_square_upper_tail(double chi2, int dof)
{
    detail::require(dof >= 1, "chi_square_upper_tail: dof must be positive");
    return regularized_gamma_q(0.5 * dof, 0.5 * chi2);
}

struct GoodnessOfFit {
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 0.0;
    std::size_t bins = 0;
};

struct FitOptions {
    double min_expected = 5.0;
    bool coarsen = true; // merge consecutive cells until each bin expects min_expected events
};

namespace detail {

inline GoodnessOfFit pearson(std::span<const double> observed, std::span<const double> expected, FitOptions opt)
{
    std::vector<double> obs, exp;
    double acc_o = 0.0, acc_e = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        acc_o += observed[k];
        acc_e += expected[k];
        if (acc_e >= opt.min_expected) {
            obs.push_back(acc_o);
            exp.push_back(acc_e);
            acc_o = acc_e = 0.0;
        } else if (!opt.coarsen) {
            throw std::invalid_argument("goodness_of_fit: bin expects fewer than the minimum count");
        }
    }
    if (acc_e > 0.0 || acc_o > 0.0) {
        if (exp.empty()) throw degenerate_input("goodness_of_fit: too few events for a single bin");
        obs.back() += acc_o;
        exp.back() += acc_e;
    }
    detail::require(exp.size() >= 2, "goodness_of_fit: need at least two bins");
    GoodnessOfFit r;
    for (std::size_t k = 0; k < exp.size(); ++k) r.chi2 += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
    r.bins = exp.size();
    r.dof = static_cast<int>(exp.size()) - 1;
    r.p_value = chi_square_upper_tail(r.chi2, r.dof);
    return r;
}

} // namespace detail

// Pearson chi-square of per-cell counts against n g(xi) w.
inline GoodnessOfFit goodness_of_fit(const EventSample& sample, const SpacetimeDensity& g, FitOptions opt = {})
{
    detail::require_normalized(g, "goodness_of_fit");
    const auto& grid = g.grid();
    std::vector<double> observed(grid.cell_count(), 0.0);
    for (const auto& e : sample.events) observed[grid.flat(grid.locate(e.event))] += 1.0;
    std::vector<double> expected(grid.cell_count());
    const double n = static_cast<double>(sample.events.size());
    for (std::size_t k = 0; k < expected.size(); ++k) expected[k] = n * g.at(k) * grid.cell_volume();
    return detail::pearson(observed, expected, opt);
}

// Same test on the x^1 histogram alone against g1.
inline GoodnessOfFit goodness_of_fit_spatial(const EventSample& sample, const SpacetimeDensity& g, FitOptions opt = {})
{
    const auto g1 = marginal_spatial(g);
    const auto& grid = g.grid();
    std::vector<double> observed(grid.n_space(), 0.0);
    for (const auto& e : sample.events) observed[grid.locate(e.event).ix] += 1.0;
    std::vector<double> expected(grid.n_space());
    const double n = static_cast<double>(sample.events.size());
    for (int ix = 0; ix < grid.n_space(); ++ix) expected[ix] = n * g1.values[ix] * g1.bin_width;
    return detail::pearson(observed, expected, opt);
}

} // namespace stpd
