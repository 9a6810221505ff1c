#include <gtest/gtest.h>

#include "support.hpp"

using namespace stpd;
using namespace stpd::testing;

namespace {

const SpacetimeBox unit_box(1, 1);

std::vector<Mode> positive_modes(const ParticleKind& k, int lo, int hi, const SpacetimeBox& box = unit_box)
{
    std::vector<Mode> m;
    for (int n = lo; n <= hi; ++n) m.push_back(make_mode(k, n, Frequency::positive, box));
    return m;
}

} // namespace

TEST(Decompose, SingleModeIsUnitVector)
{
    const UniformGrid g(unit_box, 16, 16);
    const auto modes = positive_modes({Species::complex_scalar, 1.0}, -5, 5);
    const Complex one{1.0};
    const auto psi = synthesize(std::span(&modes[8], 1), std::span(&one, 1), g); // n = 3
    const auto c = decompose(psi, modes);
    for (std::size_t k = 0; k < modes.size(); ++k) EXPECT_NEAR(std::abs(c.coefficients[k] - (k == 8 ? one : Complex{0.0})), 0.0, 1e-12);
    EXPECT_LE(c.residual, 1e-12);
    EXPECT_LE(c.gram_deviation, 1e-10);
}

TEST(Decompose, EqualModuli)
{
    const UniformGrid g(unit_box, 16, 16);
    const auto modes = positive_modes({Species::complex_scalar, 0.0}, 1, 2);
    const std::vector<Complex> c{1 / std::sqrt(2.0), Complex(0, 1 / std::sqrt(2.0))};
    const auto r = decompose(synthesize(modes, c, g), modes);
    const auto n = r.occupations();
    EXPECT_NEAR(n[0], 0.5, 1e-12);
    EXPECT_NEAR(n[1], 0.5, 1e-12);
}

TEST(Decompose, RoundTripAndParsevalForEveryKind)
{
    std::mt19937_64 rng(31);
    const UniformGrid g(SpacetimeBox(1.2, 0.9), 12, 24);
    for (const auto& k : all_kinds()) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto s = random_state(k, g, 5, rng);
            const auto psi = synthesize(s.modes, s.coefficients, g);
            const auto c = decompose(psi, s.modes);
            EXPECT_NEAR(c.norm_squared(), norm_spacetime_squared(psi), 1e-10);
            const auto back = synthesize(s.modes, c.coefficients, g);
            double worst = 0.0;
            for (std::size_t q = 0; q < back.values().size(); ++q) worst = std::max(worst, std::abs(back.values()[q] - psi.values()[q]));
            EXPECT_LE(worst, 1e-10) << to_string(k.species);
            for (std::size_t i = 0; i < s.coefficients.size(); ++i) EXPECT_NEAR(std::abs(c.coefficients[i] - s.coefficients[i]), 0.0, 1e-10);
        }
    }
}

// Same spatial label with both frequency signs: the pair is not orthogonal on a
// finite time extent, so the Gram system is solved.
TEST(Decompose, FrequencyPairsUseGramSolve)
{
    const UniformGrid g(SpacetimeBox(0.7, 1.0), 16, 16);
    const ParticleKind k{Species::complex_scalar, 1.0};
    const std::vector<Mode> modes{make_mode(k, 1, Frequency::positive, g.box()), make_mode(k, 1, Frequency::negative, g.box())};
    const std::vector<Complex> c{0.8, Complex(0, 0.6)};
    const auto r = decompose(synthesize(modes, c, g), modes);
    EXPECT_GT(r.gram_deviation, 1e-3);
    EXPECT_NEAR(std::abs(r.coefficients[0] - c[0]), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(r.coefficients[1] - c[1]), 0.0, 1e-10);
    EXPECT_LE(r.residual, 1e-10);
}

TEST(Decompose, OutOfSpanResidualAndAliasing)
{
    const UniformGrid g(unit_box, 8, 8);
    const auto all = positive_modes({Species::complex_scalar, 0.0}, -2, 2);
    const std::vector<Complex> c{0.0, 0.6, 0.0, 0.8, 0.0};
    const auto psi = synthesize(all, c, g);
    const std::vector<Mode> partial{all[1]};
    const auto r = decompose(psi, partial);
    EXPECT_NEAR(r.residual, 0.8, 1e-12);
    const auto aliased = positive_modes({Species::complex_scalar, 0.0}, 4, 4);
    EXPECT_THROW(decompose(psi, aliased), aliasing_error);
}

TEST(Decompose, FixedTimeProjectionAgrees)
{
    const UniformGrid g(unit_box, 8, 16);
    const auto modes = positive_modes({Species::complex_scalar, 0.5}, -3, 3);
    std::vector<Complex> c(modes.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = Complex(0.1 * k, 0.2);
    const auto psi = synthesize(modes, c, g);
    for (int it = 0; it < g.n_time(); ++it) {
        const auto ct = decompose_fixed_time(psi, modes, it);
        for (std::size_t k = 0; k < c.size(); ++k) EXPECT_NEAR(std::abs(ct[k] - c[k]), 0.0, 1e-10);
    }
}

TEST(MeanMomentum, Examples)
{
    const ParticleKind k{Species::complex_scalar, 0.0};
    const auto one = positive_modes(k, 2, 2);
    ModeCoefficients single{one, {Complex(0, 1)}, 0, 0};
    const auto p = mean_four_momentum(single);
    EXPECT_DOUBLE_EQ(p.energy, one[0].p.energy);
    EXPECT_DOUBLE_EQ(p.momentum, one[0].p.momentum);

    const std::vector<Mode> pm{make_mode(k, 1, Frequency::positive, unit_box), make_mode(k, -1, Frequency::positive, unit_box)};
    ModeCoefficients even{pm, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, 0, 0};
    EXPECT_NEAR(mean_four_momentum(even).momentum, 0.0, 1e-14);
    EXPECT_NEAR(mean_four_momentum(even).energy, 2 * pi, 1e-14);
    ModeCoefficients skew{pm, {0.5, std::sqrt(0.75)}, 0, 0};
    EXPECT_NEAR(mean_four_momentum(skew).momentum, -pi, 1e-14);
    ModeCoefficients unnormalized{pm, {1.0, 1.0}, 0, 0};
    EXPECT_THROW(mean_four_momentum(unnormalized), std::invalid_argument);
}

TEST(Charge, Expectation)
{
    const ParticleKind k{Species::complex_scalar, 1.0};
    const std::vector<Mode> m{make_mode(k, 0, Frequency::positive, unit_box), make_mode(k, 1, Frequency::negative, unit_box)};
    EXPECT_NEAR(charge_expectation({m, {1.0, 0.0}, 0, 0}), 1.0, 1e-15);
    EXPECT_NEAR(charge_expectation({m, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, 0, 0}), 0.0, 1e-15);
    EXPECT_NEAR(charge_expectation({m, {std::sqrt(0.8), std::sqrt(0.2)}, 0, 0}), 0.6, 1e-15);
    const ParticleKind neutral{Species::real_scalar, 1.0};
    const std::vector<Mode> n{make_mode(neutral, 0, Frequency::positive, unit_box)};
    EXPECT_THROW(charge_expectation({n, {1.0}, 0, 0}), std::invalid_argument);
}

TEST(Occupations, InvariantUnderBoostTransport)
{
    std::mt19937_64 rng(44);
    const UniformGrid g(unit_box, 8, 32);
    const auto s = random_state({Species::complex_scalar, 1.0}, g, 6, rng);
    const auto c = decompose(synthesize(s.modes, s.coefficients, g), s.modes);
    const auto b = boost_modes(c.modes, c.coefficients, Boost(0.6));
    const auto before = c.occupations();
    for (std::size_t k = 0; k < before.size(); ++k) EXPECT_EQ(std::norm(b.coefficients[k]), before[k]);
}
