#pragma once

// Spacetime box, uniform cell decomposition and cell-aligned regions in 1+1
// dimensions. Natural units: c = hbar = 1, so the time extent is cT.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stpd/errors.hpp"

namespace stpd {

// An event (x^0, x^1) with x^0 = ct.
struct Event {
    double t = 0.0;
    double x = 0.0;

    friend bool operator==(const Event&, const Event&) = default;
};

// Signature (-, +): a.b = a^1 b^1 - a^0 b^0.
namespace metric {

inline constexpr double time_sign = -1.0;
inline constexpr double space_sign = 1.0;

constexpr double product(const Event& a, const Event& b)
{
    return space_sign * a.x * b.x + time_sign * a.t * b.t;
}

constexpr double interval(const Event& a) { return product(a, a); }

} // namespace metric

class SpacetimeBox {
public:
    SpacetimeBox(double time_extent, double space_extent)
        : time_extent_(time_extent), space_extent_(space_extent)
    {
        detail::require(std::isfinite(time_extent) && time_extent > 0.0,
                        "SpacetimeBox: time extent must be positive");
        detail::require(std::isfinite(space_extent) && space_extent > 0.0,
                        "SpacetimeBox: space extent must be positive");
    }

    double time_extent() const { return time_extent_; }
    double space_extent() const { return space_extent_; }
    double volume() const { return time_extent_ * space_extent_; }

    // Closed-box membership with a small relative slack for round-off.
    bool contains(const Event& e, double slack = 1e-12) const
    {
        const double st = slack * time_extent_;
        const double sx = slack * space_extent_;
        return e.t >= -st && e.t <= time_extent_ + st && e.x >= -sx && e.x <= space_extent_ + sx;
    }

    friend bool operator==(const SpacetimeBox&, const SpacetimeBox&) = default;

private:
    double time_extent_;
    double space_extent_;
};

struct CellIndex {
    int it = 0;
    int ix = 0;

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

class UniformGrid {
public:
    UniformGrid(SpacetimeBox box, int n_time, int n_space)
        : box_(box), n_time_(n_time), n_space_(n_space)
    {
        detail::require(n_time >= 2 && n_space >= 2, "UniformGrid: need at least 2 cells per axis");
        dt_ = box_.time_extent() / n_time_;
        dx_ = box_.space_extent() / n_space_;
    }

    const SpacetimeBox& box() const { return box_; }
    int n_time() const { return n_time_; }
    int n_space() const { return n_space_; }
    std::size_t cell_count() const { return static_cast<std::size_t>(n_time_) * n_space_; }

    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double cell_volume() const { return dt_ * dx_; }

    bool contains(CellIndex c) const
    {
        return c.it >= 0 && c.it < n_time_ && c.ix >= 0 && c.ix < n_space_;
    }

    // Row-major: time is the slow index.
    std::size_t flat(CellIndex c) const
    {
        return static_cast<std::size_t>(c.it) * n_space_ + static_cast<std::size_t>(c.ix);
    }

    CellIndex cell(std::size_t flat_index) const
    {
        return {static_cast<int>(flat_index / n_space_), static_cast<int>(flat_index % n_space_)};
    }

    double time_center(int it) const { return (it + 0.5) * dt_; }
    double space_center(int ix) const { return (ix + 0.5) * dx_; }
    Event cell_center(CellIndex c) const { return {time_center(c.it), space_center(c.ix)}; }

    // Cell containing e, clamped to the grid for events on the outer faces.
    CellIndex locate(const Event& e) const
    {
        const int it = std::clamp(static_cast<int>(std::floor(e.t / dt_)), 0, n_time_ - 1);
        const int ix = std::clamp(static_cast<int>(std::floor(e.x / dx_)), 0, n_space_ - 1);
        return {it, ix};
    }

    bool operator==(const UniformGrid& other) const
    {
        return box_ == other.box_ && n_time_ == other.n_time_ && n_space_ == other.n_space_;
    }

private:
    SpacetimeBox box_;
    int n_time_;
    int n_space_;
    double dt_ = 0.0;
    double dx_ = 0.0;
};

inline UniformGrid build_grid(const SpacetimeBox& box, int n_time, int n_space)
{
    return UniformGrid(box, n_time, n_space);
}

// Ordered, duplicate-free set of cells of one grid.
class Region {
public:
    Region() = default;

    Region(const UniformGrid& grid, std::vector<CellIndex> cells) : cells_(std::move(cells))
    {
        for (const auto& c : cells_) {
            detail::require(grid.contains(c), "Region: cell outside the grid");
        }
        std::sort(cells_.begin(), cells_.end());
        detail::require(std::adjacent_find(cells_.begin(), cells_.end()) == cells_.end(),
                        "Region: duplicate cell");
    }

    std::span<const CellIndex> cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    bool contains(CellIndex c) const { return std::binary_search(cells_.begin(), cells_.end(), c); }

    double volume(const UniformGrid& grid) const { return static_cast<double>(size()) * grid.cell_volume(); }

    bool disjoint_from(const Region& other) const
    {
        auto a = cells_.begin();
        auto b = other.cells_.begin();
        while (a != cells_.end() && b != other.cells_.end()) {
            if (*a == *b) return false;
            if (*a < *b) ++a; else ++b;
        }
        return true;
    }

    bool subset_of(const Region& other) const
    {
        return std::includes(other.cells_.begin(), other.cells_.end(), cells_.begin(), cells_.end());
    }

    // Membership mask over the grid's flat indices.
    std::vector<bool> mask(const UniformGrid& grid) const
    {
        std::vector<bool> m(grid.cell_count(), false);
        for (const auto& c : cells_) m[grid.flat(c)] = true;
        return m;
    }

    friend bool operator==(const Region&, const Region&) = default;

private:
    std::vector<CellIndex> cells_;
};

inline Region full_region(const UniformGrid& grid)
{
    std::vector<CellIndex> cells;
    cells.reserve(grid.cell_count());
    for (std::size_t k = 0; k < grid.cell_count(); ++k) cells.push_back(grid.cell(k));
    return Region(grid, std::move(cells));
}

inline Region region_union(const UniformGrid& grid, const Region& a, const Region& b)
{
    std::vector<CellIndex> cells;
    std::set_union(a.cells().begin(), a.cells().end(), b.cells().begin(), b.cells().end(),
                   std::back_inserter(cells));
    return Region(grid, std::move(cells));
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Minimal covering set Q' of a sub-box: every cell that overlaps the requested
// interval product with positive measure. Cells touching the sub-box only along
// a face are excluded; degenerate intervals pick the cell(s) containing the point.
inline Region region_from_subbox(const UniformGrid& grid, Interval t_range, Interval x_range)
{
    detail::require(t_range.lo <= t_range.hi && x_range.lo <= x_range.hi,
                    "region_from_subbox: inverted interval");

    auto covered = [](double lo, double hi, double h, int n) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i) {
            const double a = i * h;
            const double b = (i + 1) * h;
            const bool overlaps = (lo < hi) ? (a < hi && b > lo) : (a <= lo && lo < b) || (i == n - 1 && lo == b);
            if (overlaps) idx.push_back(i);
        }
        return idx;
    };

    const auto ts = covered(t_range.lo, t_range.hi, grid.dt(), grid.n_time());
    const auto xs = covered(x_range.lo, x_range.hi, grid.dx(), grid.n_space());
    std::vector<CellIndex> cells;
    cells.reserve(ts.size() * xs.size());
    for (int it : ts)
        for (int ix : xs) cells.push_back({it, ix});
    return Region(grid, std::move(cells));
}

} // namespace stpd
