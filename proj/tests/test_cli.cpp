#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string cli = STPD_CLI_PATH;
const std::string scenarios = STPD_SCENARIO_DIR;

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("stpd_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

int run(const std::string& args)
{
    const std::string cmd = cli + " " + args + " --quiet 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string config(const std::string& name) { return "--config " + scenarios + "/" + name; }

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

} // namespace

TEST(Cli, DensityUniformLeftHalf)
{
    const auto out = scratch("uniform");
    ASSERT_EQ(run("density " + config("uniform.ini") + " --out " + out.string()), 0);
    const auto s = read_json(out / "summary.json");
    EXPECT_NEAR(s["region_probability"]["left"].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(s["total_probability"].get<double>(), 1.0, 1e-10);
    EXPECT_EQ(first_line(out / "g.csv"), "it,ix,t,x,g");
    EXPECT_EQ(first_line(out / "marginal_x.csv"), "ix,x,g1");
    EXPECT_EQ(first_line(out / "marginal_t.csv"), "it,t,g0");
}

TEST(Cli, ByteIdenticalReruns)
{
    for (const std::string cmd : {"density", "sample", "fock", "momentum", "boost-check"}) {
        const auto a = scratch(cmd + "_a");
        const auto b = scratch(cmd + "_b");
        const std::string args = cmd + " " + config("interference.ini") + " --grid 16x16 --seed 5 --out ";
        ASSERT_EQ(run(args + a.string()), 0) << cmd;
        ASSERT_EQ(run(args + b.string()), 0) << cmd;
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
        }
        EXPECT_GT(files, 0u);
    }
}

TEST(Cli, FloatsCarrySeventeenDigits)
{
    const auto out = scratch("digits");
    ASSERT_EQ(run("density " + config("interference.ini") + " --out " + out.string()), 0);
    std::ifstream in(out / "g.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    // it,ix,t,x,g with g = 1 + cos(...) printed by %.17g.
    const auto g = line.substr(line.rfind(',') + 1);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::stod(g));
    EXPECT_EQ(g, buf);
}

TEST(Cli, BoostCheckScalar)
{
    const auto out = scratch("boost");
    ASSERT_EQ(run("boost-check " + config("boost_scalar.ini") + " --out " + out.string()), 0);
    const auto r = read_json(out / "boost_report.json");
    EXPECT_DOUBLE_EQ(r["beta"].get<double>(), 0.5);
    EXPECT_LE(r["max_deviation"].get<double>(), 1e-10);
    EXPECT_EQ(r["region_invariance"]["center"].size(), 3u);
    EXPECT_EQ(first_line(out / "boost_regions.csv"), "region,cells_per_axis,probability,boosted_probability,difference,ratio");
}

TEST(Cli, BoostCheckPhotonGauge)
{
    const auto out = scratch("photon");
    ASSERT_EQ(run("boost-check " + config("photon.ini") + " --out " + out.string()), 0);
    const auto r = read_json(out / "boost_report.json");
    EXPECT_TRUE(r["photon_gauge"]["calibration_preserved"].get<bool>());
    EXPECT_LE(r["max_deviation"].get<double>(), 1e-10);
}

TEST(Cli, FockEquivalence)
{
    const auto out = scratch("fock");
    ASSERT_EQ(run("fock " + config("interference.ini") + " --out " + out.string()), 0);
    const auto r = read_json(out / "fock.json");
    EXPECT_LE(r["equivalence_max_difference"].get<double>(), 1e-12);
    std::ifstream in(out / "fock_equivalence.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "cells_per_axis,region,expected_count,probability,abs_difference");
    bool saw32 = false;
    while (std::getline(in, line)) {
        if (line.rfind("32,", 0) != 0) continue;
        saw32 = true;
        EXPECT_LE(std::stod(line.substr(line.rfind(',') + 1)), 1e-12);
    }
    EXPECT_TRUE(saw32);
    EXPECT_NEAR(r["momentum_basis"]["left"]["expected_count"].get<double>(), 0.5, 1e-10);
}

TEST(Cli, MomentumSpectrum)
{
    const auto out = scratch("momentum");
    ASSERT_EQ(run("momentum " + config("boost_scalar.ini") + " --out " + out.string()), 0);
    EXPECT_EQ(first_line(out / "spectrum.csv"), "n,freq_sign,p0,p1,C_re,C_im,n_k");
    const auto r = read_json(out / "momentum.json");
    EXPECT_NEAR(r["occupation_sum"].get<double>(), 1.0, 1e-10);
    EXPECT_FALSE(r["charge"].is_null());
}

TEST(Cli, SampleAndFit)
{
    const auto out = scratch("sample");
    ASSERT_EQ(run("sample " + config("interference.ini") + " --out " + out.string()), 0);
    const auto r = read_json(out / "fit.json");
    EXPECT_EQ(r["accepted"].get<std::size_t>(), 200000u);
    EXPECT_GT(r["p"].get<double>(), 1e-4);
    EXPECT_EQ(first_line(out / "events.csv"), "t,x,stream,index");
    // The seed flag overrides the config.
    const auto other = scratch("sample_seed");
    ASSERT_EQ(run("sample " + config("interference.ini") + " --seed 8 --out " + other.string()), 0);
    EXPECT_NE(slurp(out / "events.csv"), slurp(other / "events.csv"));
    EXPECT_EQ(read_json(other / "fit.json")["seed"].get<std::uint64_t>(), 8u);
}

TEST(Cli, UncertaintyPacket)
{
    const auto out = scratch("packet");
    ASSERT_EQ(run("uncertainty " + config("packet.ini") + " --out " + out.string()), 0);
    const auto text = slurp(out / "uncertainty.txt");
    EXPECT_NE(text.find("localized = true"), std::string::npos);
    EXPECT_NE(text.find("space_violation = false"), std::string::npos);
}

TEST(Cli, ElectronAndPhysicalUnits)
{
    const auto out = scratch("electron");
    EXPECT_EQ(run("boost-check " + config("electron.ini") + " --out " + out.string()), 0);
    EXPECT_EQ(run("density " + config("physical_units.ini") + " --out " + out.string()), 0);
    const auto s = read_json(out / "summary.json");
    EXPECT_DOUBLE_EQ(s["box"]["t"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(s["mass"].get<double>(), 1.0);
}

TEST(Cli, ExitCodes)
{
    const auto out = scratch("codes");
    fs::create_directories(out);
    const auto bad = out / "bad.ini";
    std::ofstream(bad) << "[particle]\nkind = tachyon\n";
    EXPECT_EQ(run("density --config " + bad.string() + " --out " + out.string()), 2);
    EXPECT_EQ(run("density --config " + (out / "missing.ini").string()), 2);
    EXPECT_EQ(run("density " + config("uniform.ini") + " --grid 4by4 --out " + out.string()), 2);
    // n = 1 aliases on a 2-cell axis.
    EXPECT_EQ(run("density " + config("uniform.ini") + " --grid 2x2 --out " + out.string()), 2);
    EXPECT_EQ(run("nonsense " + config("uniform.ini")), 2);
    // A regular file where the output directory should be.
    const auto blocker = out / "blocker";
    std::ofstream(blocker) << "x";
    EXPECT_EQ(run("density " + config("uniform.ini") + " --out " + (blocker / "sub").string()), 4);
    // Boost beyond the box: the probes cannot be placed, so the scenario is rejected.
    const auto fast = out / "fast.ini";
    std::ofstream(fast) << "[particle]\nkind = complex_scalar\nmass = 1\n[modes]\nmode = 1 + 1 0\n[boost]\nbeta = 0.9999\n";
    EXPECT_EQ(run("boost-check --config " + fast.string() + " --out " + out.string()), 2);
}

TEST(Cli, DegeneratePacketIsNotAViolation)
{
    // Zero widths select one plane wave: spreads vanish and no bound is asserted.
    const auto out = scratch("degenerate");
    fs::create_directories(out);
    const auto cfg = out / "plane.ini";
    std::ofstream(cfg) << "[particle]\nkind = complex_scalar\n[grid]\nnt = 32\nnx = 32\n"
                          "[uncertainty]\nsource = packet\ntime_carrier = 2\nspace_carrier = 3\n";
    EXPECT_EQ(run("uncertainty --config " + cfg.string() + " --out " + out.string()), 0);
    EXPECT_NE(slurp(out / "uncertainty.txt").find("degenerate = true"), std::string::npos);
}
