#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stpd/lattice.hpp"

using namespace stpd;

TEST(Grid, CellVolumeAndCenters)
{
    const auto g = build_grid(SpacetimeBox(1, 1), 4, 4);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.0625);
    const Event c = g.cell_center({0, 0});
    EXPECT_DOUBLE_EQ(c.t, 0.125);
    EXPECT_DOUBLE_EQ(c.x, 0.125);
    EXPECT_DOUBLE_EQ(build_grid(SpacetimeBox(2, 1), 8, 4).cell_volume(), 0.0625);
}

TEST(Grid, VolumesPartitionTheBox)
{
    for (auto [t, x, nt, nx] : {std::tuple{1.0, 1.0, 64, 64}, {2.5, 0.7, 33, 17}, {0.1, 3.0, 2, 1000}}) {
        const auto g = build_grid(SpacetimeBox(t, x), nt, nx);
        double total = 0.0;
        for (std::size_t k = 0; k < g.cell_count(); ++k) total += g.cell_volume();
        EXPECT_NEAR(total / (t * x), 1.0, 1e-12);
        EXPECT_NEAR(full_region(g).volume(g), t * x, 1e-12 * t * x);
    }
}

TEST(Grid, RejectsBadInput)
{
    EXPECT_THROW(SpacetimeBox(0, 1), std::invalid_argument);
    EXPECT_THROW(SpacetimeBox(1, -1), std::invalid_argument);
    EXPECT_THROW(build_grid(SpacetimeBox(1, 1), 1, 4), std::invalid_argument);
    EXPECT_THROW(build_grid(SpacetimeBox(1, 1), 4, 0), std::invalid_argument);
}

TEST(Grid, FlatIndexRoundTrip)
{
    const auto g = build_grid(SpacetimeBox(1, 2), 5, 7);
    for (std::size_t k = 0; k < g.cell_count(); ++k) EXPECT_EQ(g.flat(g.cell(k)), k);
    EXPECT_EQ(g.flat({1, 0}), 7u);
    const auto c = g.locate(g.cell_center({3, 6}));
    EXPECT_EQ(c.it, 3);
    EXPECT_EQ(c.ix, 6);
    EXPECT_EQ(g.locate({1.0, 2.0}).it, 4); // outer face clamps
}

TEST(Metric, SignatureMinusPlus)
{
    EXPECT_DOUBLE_EQ(metric::product({1, 0}, {1, 0}), -1.0);
    EXPECT_DOUBLE_EQ(metric::product({0, 1}, {0, 1}), 1.0);
    EXPECT_DOUBLE_EQ(metric::interval({2, 3}), 9.0 - 4.0);
}

TEST(Region, SubboxCovering)
{
    const auto g = build_grid(SpacetimeBox(1, 1), 4, 4);
    EXPECT_EQ(region_from_subbox(g, {0, 1}, {0, 0.5}).size(), 8u);
    EXPECT_EQ(region_from_subbox(g, {0, 1}, {0, 0.51}).size(), 12u);
    EXPECT_TRUE(region_from_subbox(g, {0, 1}, {2, 3}).empty());
    EXPECT_THROW(region_from_subbox(g, {1, 0}, {0, 1}), std::invalid_argument);
    // A point selects the cell that contains it.
    EXPECT_EQ(region_from_subbox(g, {0.3, 0.3}, {0.6, 0.6}).size(), 1u);
}

TEST(Region, SubboxIsMonotone)
{
    const auto g = build_grid(SpacetimeBox(1, 1), 16, 16);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        if (a > b) std::swap(a, b);
        if (c > d) std::swap(c, d);
        const auto small = region_from_subbox(g, {a, b}, {c, d});
        const auto big = region_from_subbox(g, {a * 0.9, std::min(1.0, b * 1.1)}, {c * 0.9, std::min(1.0, d * 1.1)});
        EXPECT_TRUE(small.subset_of(big));
    }
}

TEST(Region, SetOperations)
{
    const auto g = build_grid(SpacetimeBox(1, 1), 4, 4);
    const auto left = region_from_subbox(g, {0, 1}, {0, 0.5});
    const auto right = region_from_subbox(g, {0, 1}, {0.5, 1});
    EXPECT_TRUE(left.disjoint_from(right));
    const auto all = region_union(g, left, right);
    EXPECT_EQ(all, full_region(g));
    EXPECT_DOUBLE_EQ(left.volume(g), 0.5);
    EXPECT_TRUE(left.contains({2, 1}));
    EXPECT_FALSE(left.contains({2, 2}));
    EXPECT_THROW(Region(g, {{0, 0}, {0, 0}}), std::invalid_argument);
    EXPECT_THROW(Region(g, {{4, 0}}), std::invalid_argument);
}
