#include <gtest/gtest.h>

#include "stpd_cli/commands.hpp"

#include <sstream>

using namespace stpd;
using namespace stpd::cli;

namespace {

ScenarioConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

// Expects a ConfigError on the given line and field.
void expect_error(const std::string& text, int line, const std::string& field)
{
    try {
        auto cfg = parse(text);
        validate(cfg);
        FAIL() << "no error for:\n" << text;
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_EQ(e.field(), field) << e.what();
    }
}

const std::string base = "[particle]\nkind = complex_scalar\nmass = 1\n";

} // namespace

TEST(Config, FullScenario)
{
    const auto cfg = parse(base + R"(
[units]
c = 2
hbar = 4
[box]
t = 0.5   # duration in time units
x = 3
[grid]
nt = 8
nx = 12
[modes]
mode = 1 + 3 0
mode = -2 - 0 4
[boost]
beta = -0.25
[region.a]
t = 0 0.25
x = 1 2
[sampling]
count = 10
seed = 99
streams = 3
filter_x = 1.5
[fock]
statistics = fermi
n_max = 3
[output]
dir = results
)");
    EXPECT_EQ(cfg.kind.species, Species::complex_scalar);
    EXPECT_DOUBLE_EQ(cfg.kind.mass, 0.5); // m c / hbar
    EXPECT_DOUBLE_EQ(cfg.time_extent, 1.0); // c T
    EXPECT_DOUBLE_EQ(cfg.space_extent, 3.0);
    EXPECT_EQ(cfg.n_time, 8);
    EXPECT_EQ(cfg.n_space, 12);
    ASSERT_EQ(cfg.modes.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.input_norm, 5.0);
    EXPECT_DOUBLE_EQ(cfg.modes[0].coefficient.real(), 0.6);
    EXPECT_DOUBLE_EQ(cfg.modes[1].coefficient.imag(), 0.8);
    EXPECT_EQ(cfg.modes[1].n, -2);
    EXPECT_EQ(cfg.modes[1].frequency, Frequency::negative);
    EXPECT_DOUBLE_EQ(cfg.beta, -0.25);
    ASSERT_EQ(cfg.regions.size(), 1u);
    EXPECT_EQ(cfg.regions[0].name, "a");
    EXPECT_DOUBLE_EQ(cfg.regions[0].t.hi, 0.5);
    EXPECT_DOUBLE_EQ(cfg.regions[0].x.lo, 1.0);
    EXPECT_EQ(cfg.sample_count, 10u);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.streams, 3u);
    EXPECT_FALSE(cfg.filter_t.has_value());
    EXPECT_DOUBLE_EQ(*cfg.filter_x, 1.5);
    EXPECT_EQ(cfg.statistics, Statistics::fermi);
    EXPECT_EQ(cfg.n_max, 3);
    EXPECT_EQ(cfg.out_dir, "results");
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, WeightsAndDefaults)
{
    const auto cfg = parse("[particle]\nkind = photon\n[modes]\nmode = 2 + 1 0 0 1 0 0\n");
    ASSERT_EQ(cfg.modes[0].weight.size(), 2u);
    EXPECT_EQ(cfg.modes[0].weight[0], Complex(0, 1));
    EXPECT_EQ(cfg.n_time, 16);
    EXPECT_EQ(cfg.seed, 1u);
    EXPECT_NO_THROW(validate(cfg));
    const auto modes = cfg.build_modes();
    EXPECT_EQ(modes[0].weight[0], Complex(0, 1));
}

TEST(Config, Diagnostics)
{
    expect_error("[particle]\nkind = muon\n", 2, "particle.kind");
    expect_error("[particle]\nmass = 1\n", 0, "particle.kind");
    expect_error(base + "[grid]\nnt = ten\n", 5, "grid.nt");
    expect_error(base + "[grid]\nnt = 0\n", 5, "grid.nt");
    expect_error(base + "[boost]\nbeta = 1\n", 5, "boost.beta");
    expect_error(base + "[modes]\nmode = 1 * 1 0\n", 5, "modes.mode");
    expect_error(base + "[modes]\nmode = 1 + 1\n", 5, "modes.mode");
    expect_error(base + "[modes]\nmode = 1 + 0 0\n", 5, "modes.mode");
    expect_error(base + "[modes]\nmode = 1 + 1 0\nmode = 1 + 1 0\n", 6, "modes.mode");
    expect_error(base + "[modes]\nmode = 8 + 1 0\n", 5, "modes.mode"); // band limit on 16 cells
    expect_error(base + "[modes]\nmode = 1 + 1 0 1 0 0 0\n", 5, "modes.mode"); // scalar weights have one component
    expect_error(base + "[bogus]\n", 4, "bogus");
    expect_error(base + "[grid]\nsize = 3\n", 5, "grid.size");
    expect_error(base + "[grid]\nnt = 4\nnt = 5\n", 6, "grid.nt");
    expect_error(base + "just text\n", 4, "particle");
    expect_error(base + "[region.a]\nt = 0 1\n", 4, "region.a");
    expect_error(base + "[region.a]\nt = 1 0\nx = 0 1\n", 5, "region.a.t");
    expect_error(base + "[region.a]\nt = 0 1\nx = 0 2\n", 4, "region.a");
    expect_error(base + "[fock]\nstatistics = anyon\n", 5, "fock.statistics");
    expect_error("[particle]\nkind = photon\nmass = 1\n", 3, "particle.mass");
    expect_error("[particle]\nkind = electron\nmass = 1\n[modes]\nmode = 0 + 1 0 1 0 0 0\n", 5, "modes.mode");
    expect_error(base + "[sampling]\ncount = 0\n", 5, "sampling.count");
}

TEST(Config, MissingFileIsConfigError)
{
    EXPECT_THROW(load_config("/nonexistent/scenario.ini"), ConfigError);
}

TEST(ExitCodes, FailureMapping)
{
    std::ostringstream err;
    auto code = [&](auto e) { return report_failure(std::make_exception_ptr(e), err); };
    EXPECT_EQ(code(ConfigError(3, "grid.nt", "bad")), 2);
    EXPECT_EQ(code(NumericFailure("drift")), 3);
    EXPECT_EQ(code(IoError("disk")), 4);
    EXPECT_EQ(code(aliasing_error("band")), 2);
    EXPECT_NE(err.str().find("config error at line 3 [grid.nt]: bad"), std::string::npos);
    EXPECT_NE(err.str().find("numeric check failed: drift"), std::string::npos);
}
