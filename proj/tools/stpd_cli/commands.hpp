#pragma once

// Scenario commands. Each writes its artifacts into the output directory and
// throws NumericFailure when a numerical self-check fails.

#include "config.hpp"

#include <json.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace stpd::cli {

class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunContext {
    ScenarioConfig config;
    std::filesystem::path out;
    bool quiet = false;
    std::ostream* log = nullptr;

    void note(const std::string& line) const
    {
        if (!quiet && log) *log << line << '\n';
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) const
    {
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
        const auto path = out / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
        body(os);
        os.flush();
        if (!os) throw IoError("write to '" + path.string() + "' failed");
        note("wrote " + path.string());
    }

    void write_json(const std::string& name, const Json& j) const
    {
        write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }
};

namespace detail {

inline void require_modes(const ScenarioConfig& cfg)
{
    if (cfg.modes.empty()) throw ConfigError(0, "modes.mode", "at least one mode is required");
}

inline WaveFunction normalized_field(const ScenarioConfig& cfg, const UniformGrid& grid)
{
    const auto modes = cfg.build_modes();
    return normalize(synthesize(modes, cfg.coefficients(), grid));
}

inline void check(bool ok, const std::string& what)
{
    if (!ok) throw NumericFailure(what);
}

inline Json scenario_json(const ScenarioConfig& cfg)
{
    return Json{{"kind", to_string(cfg.kind.species)},
                {"mass", cfg.kind.mass},
                {"box", {{"t", cfg.time_extent}, {"x", cfg.space_extent}}},
                {"grid", {{"nt", cfg.n_time}, {"nx", cfg.n_space}}},
                {"modes", cfg.modes.size()},
                {"input_norm", cfg.input_norm}};
}

} // namespace detail

inline void cmd_density(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    detail::require_modes(cfg);
    const auto grid = cfg.grid();
    const auto modes = cfg.build_modes();
    const auto raw = synthesize(modes, cfg.coefficients(), grid);
    const double raw_norm2 = norm_spacetime_squared(raw);
    const auto g = density(normalize(raw));
    const auto gx = marginal_spatial(g);
    const auto gt = marginal_temporal(g);

    ctx.write("g.csv", [&](std::ostream& os) {
        os << "it,ix,t,x,g\n";
        for (std::size_t k = 0; k < grid.cell_count(); ++k) {
            const auto c = grid.cell(k);
            const auto e = grid.cell_center(c);
            os << c.it << ',' << c.ix << ',' << fmt17(e.t) << ',' << fmt17(e.x) << ',' << fmt17(g.at(k)) << '\n';
        }
    });
    ctx.write("marginal_x.csv", [&](std::ostream& os) {
        os << "ix,x,g1\n";
        for (int ix = 0; ix < grid.n_space(); ++ix)
            os << ix << ',' << fmt17(grid.space_center(ix)) << ',' << fmt17(gx.values[ix]) << '\n';
    });
    ctx.write("marginal_t.csv", [&](std::ostream& os) {
        os << "it,t,g0\n";
        for (int it = 0; it < grid.n_time(); ++it)
            os << it << ',' << fmt17(grid.time_center(it)) << ',' << fmt17(gt.values[it]) << '\n';
    });

    Json regions = Json::object();
    for (const auto& [name, q] : cfg.build_regions(grid)) regions[name] = region_probability(g, q);
    Json summary = detail::scenario_json(cfg);
    summary["synthesized_norm_squared"] = raw_norm2;
    summary["total_probability"] = g.total();
    summary["marginal_x_total"] = gx.total();
    summary["marginal_t_total"] = gt.total();
    summary["region_probability"] = regions;
    ctx.write_json("summary.json", summary);

    detail::check(std::abs(g.total() - 1.0) <= 1e-10, "density does not integrate to one: " + fmt17(g.total()));
    detail::check(std::abs(gx.total() - 1.0) <= 1e-10 && std::abs(gt.total() - 1.0) <= 1e-10, "marginals do not sum to one");
}

inline constexpr std::size_t boost_probe_count = 200;
inline constexpr double boost_tolerance = 1e-10;

inline void cmd_boost_check(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    detail::require_modes(cfg);
    const auto modes = cfg.build_modes();
    const auto coeffs = cfg.coefficients();
    const auto box = cfg.box();
    const Boost b(cfg.beta);

    // Analytic packets are normalized on the configured grid so the probe values match g.
    const double scale = 1.0 / norm_spacetime_squared(synthesize(modes, coeffs, cfg.grid()));
    std::vector<Complex> c(coeffs);
    for (auto& v : c) v *= std::sqrt(scale);

    const auto probes = sample_probes(box, b, boost_probe_count, cfg.seed);
    const auto inv = check_density_invariance(modes, c, b, probes, box);

    Json report = detail::scenario_json(cfg);
    report["beta"] = cfg.beta;
    report["probes"] = inv.probes;
    report["max_deviation"] = inv.max_deviation;
    if (cfg.kind.species == Species::electron) report["raw_max_deviation"] = inv.raw_max_deviation;

    const std::vector<int> resolutions{16, 32, 64};
    Json regions = Json::object();
    std::vector<std::string> rows;
    for (const auto& r : cfg.regions) {
        try {
            const auto study = region_invariance_study(modes, c, b, box, r.t, r.x, resolutions);
            Json entries = Json::array();
            for (const auto& row : study) {
                entries.push_back({{"cells_per_axis", row.cells_per_axis},
                                   {"probability", row.report.probability},
                                   {"boosted_probability", row.report.boosted_probability},
                                   {"difference", row.report.difference},
                                   {"ratio", row.ratio}});
                rows.push_back(r.name + ',' + std::to_string(row.cells_per_axis) + ',' + fmt17(row.report.probability) + ',' +
                               fmt17(row.report.boosted_probability) + ',' + fmt17(row.report.difference) + ',' +
                               (row.ratio > 0.0 ? fmt17(row.ratio) : std::string()));
            }
            regions[r.name] = entries;
        } catch (const coverage_error& e) {
            regions[r.name] = Json{{"error", e.what()}};
        }
    }
    report["region_invariance"] = regions;

    bool gauge_ok = true;
    if (cfg.kind.species == Species::photon) {
        const auto gauge = photon_gauge_family_check(modes, c, b, probes);
        report["photon_gauge"] = {{"max_longitudinal", gauge.max_longitudinal},
                                  {"max_density_deviation", gauge.max_density_deviation},
                                  {"calibration_preserved", gauge.calibration_preserved}};
        gauge_ok = gauge.calibration_preserved;
    }
    ctx.write_json("boost_report.json", report);
    ctx.write("boost_regions.csv", [&](std::ostream& os) {
        os << "region,cells_per_axis,probability,boosted_probability,difference,ratio\n";
        for (const auto& row : rows) os << row << '\n';
    });

    detail::check(inv.max_deviation <= boost_tolerance, "density invariance violated: " + fmt17(inv.max_deviation));
    detail::check(gauge_ok, "transverse calibration not preserved by the boost");
}

inline void cmd_momentum(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    detail::require_modes(cfg);
    const auto modes = cfg.build_modes();
    const auto coeffs = cfg.coefficients();
    const auto dec = decompose(synthesize(modes, coeffs, cfg.grid()), modes);

    double roundtrip = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) roundtrip = std::max(roundtrip, std::abs(dec.coefficients[k] - coeffs[k]));
    ctx.write("spectrum.csv", [&](std::ostream& os) {
        os << "n,freq_sign,p0,p1,C_re,C_im,n_k\n";
        for (std::size_t k = 0; k < dec.modes.size(); ++k) {
            const auto& m = dec.modes[k];
            const Complex ck = dec.coefficients[k];
            os << m.index << ',' << static_cast<int>(m.frequency) << ',' << fmt17(m.p.energy) << ',' << fmt17(m.p.momentum)
               << ',' << fmt17(ck.real()) << ',' << fmt17(ck.imag()) << ',' << fmt17(std::norm(ck)) << '\n';
        }
    });

    const double total = dec.norm_squared();
    Json j = detail::scenario_json(cfg);
    j["occupation_sum"] = total;
    j["roundtrip_error"] = roundtrip;
    j["residual"] = dec.residual;
    j["gram_deviation"] = dec.gram_deviation;
    const ModeCoefficients loaded{modes, coeffs, 0.0, 0.0};
    const auto p = mean_four_momentum(loaded);
    j["mean_p0"] = p.energy;
    j["mean_p1"] = p.momentum;
    j["charge"] = cfg.kind.has_charge() ? Json(charge_expectation(loaded)) : Json(nullptr);
    ctx.write_json("momentum.json", j);

    detail::check(std::abs(total - 1.0) <= 1e-10, "occupation numbers do not sum to one: " + fmt17(total));
    detail::check(roundtrip <= 1e-10, "decomposition does not reproduce the configured coefficients");
}

inline void cmd_sample(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    detail::require_modes(cfg);
    const auto grid = cfg.grid();
    const auto g = density(detail::normalized_field(cfg, grid));
    const SpacetimeBox filter(cfg.filter_t.value_or(cfg.time_extent), cfg.filter_x.value_or(cfg.space_extent));
    const auto sample = run_sessions(build_sampler(g, cfg.seed), cfg.sample_count, filter, cfg.streams);
    ctx.write("events.csv", [&](std::ostream& os) { write_events_csv(os, sample); });

    Json j = detail::scenario_json(cfg);
    j["count"] = cfg.sample_count;
    j["seed"] = cfg.seed;
    j["streams"] = cfg.streams;
    j["accepted"] = sample.accepted;
    j["discarded"] = sample.discarded;

    // The fit needs a filter that is a union of whole cells.
    const auto covering = region_from_subbox(grid, {0.0, filter.time_extent()}, {0.0, filter.space_extent()});
    const double expected = region_probability(g, covering);
    j["filter_probability"] = expected;
    const bool aligned = std::abs(covering.volume(grid) - filter.volume()) <= 1e-12 * filter.volume();
    if (aligned && sample.accepted > 0) {
        std::vector<double> restricted(grid.cell_count(), 0.0);
        for (const auto& c : covering.cells()) restricted[grid.flat(c)] = g.at(grid.flat(c)) / expected;
        const SpacetimeDensity target(grid, restricted);
        try {
            const auto fit = goodness_of_fit(sample, target);
            j["chi2"] = fit.chi2;
            j["dof"] = fit.dof;
            j["p"] = fit.p_value;
            j["bins"] = fit.bins;
        } catch (const degenerate_input& e) {
            j["fit_error"] = e.what();
        }
    } else {
        j["fit_error"] = "filter is not aligned with the grid cells";
    }
    ctx.write_json("fit.json", j);
}

inline void cmd_fock(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    detail::require_modes(cfg);
    const auto grid = cfg.grid();
    const auto modes = cfg.build_modes();
    const auto coeffs = cfg.coefficients();
    auto regions = cfg.regions;
    if (regions.empty()) regions.push_back({"full", {0.0, cfg.time_extent}, {0.0, cfg.space_extent}, 0});

    // One-particle state sum_i C_i a_i^+ |0> in the truncated momentum-basis space.
    auto space = std::make_shared<const FockSpace>(modes.size(), cfg.n_max, cfg.statistics);
    FockState phi{space, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space->size())), {}};
    for (std::size_t i = 0; i < modes.size(); ++i) {
        std::vector<int> numbers(modes.size(), 0);
        numbers[i] = 1;
        phi.amplitudes(static_cast<Eigen::Index>(space->index_of(numbers))) = coeffs[i];
    }
    const auto g = density(detail::normalized_field(cfg, grid));

    Json j = detail::scenario_json(cfg);
    j["statistics"] = cfg.statistics == Statistics::bose ? "bose" : "fermi";
    j["n_max"] = cfg.n_max;
    j["fock_dimension"] = space->size();
    Json table = Json::object();
    for (const auto& r : regions) {
        const auto q = region_from_subbox(grid, r.t, r.x);
        const auto l = lambda_region(q, modes, grid);
        ctx.write("lambda_" + r.name + ".csv", [&](std::ostream& os) {
            os << "i,j,re,im\n";
            for (Eigen::Index a = 0; a < l.elements.rows(); ++a)
                for (Eigen::Index b = 0; b < l.elements.cols(); ++b)
                    os << a << ',' << b << ',' << fmt17(l.elements(a, b).real()) << ',' << fmt17(l.elements(a, b).imag()) << '\n';
        });
        table[r.name] = {{"expected_count", expected_count(phi, l)},
                         {"probability", region_probability(g, q)},
                         {"hermitian", l.hermitian}};
    }
    j["momentum_basis"] = table;

    // Cell-basis N = 1 subsystem against the density, across refinements.
    double worst = 0.0;
    std::vector<std::string> rows;
    Json skipped = Json::array();
    for (int n : {16, 32, 64}) {
        const UniformGrid gn(cfg.box(), n, n);
        WaveFunction psi(gn, cfg.kind);
        try {
            psi = detail::normalized_field(cfg, gn);
        } catch (const aliasing_error&) {
            skipped.push_back(n);
            continue;
        }
        const auto sub = single_particle_subsystem(psi);
        const auto dn = density(psi);
        for (const auto& r : regions) {
            const auto q = region_from_subbox(gn, r.t, r.x);
            const double count = expected_count(sub, cell_basis_count(gn, q));
            const double p = region_probability(dn, q);
            worst = std::max(worst, std::abs(count - p));
            rows.push_back(std::to_string(n) + ',' + r.name + ',' + fmt17(count) + ',' + fmt17(p) + ',' + fmt17(std::abs(count - p)));
        }
    }
    ctx.write("fock_equivalence.csv", [&](std::ostream& os) {
        os << "cells_per_axis,region,expected_count,probability,abs_difference\n";
        for (const auto& row : rows) os << row << '\n';
    });
    j["equivalence_max_difference"] = worst;
    j["equivalence_skipped_resolutions"] = skipped;
    ctx.write_json("fock.json", j);

    detail::check(worst <= 1e-12, "cell-basis count differs from the region probability: " + fmt17(worst));
}

inline void cmd_uncertainty(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    const auto grid = cfg.grid();
    const auto& u = cfg.uncertainty;
    MomentReport r;
    switch (u.source) {
    case UncertaintySource::modes:
        detail::require_modes(cfg);
        r = uncertainty_report(ModeCoefficients{cfg.build_modes(), cfg.coefficients(), 0.0, 0.0}, grid);
        break;
    case UncertaintySource::packet: {
        const auto p = gaussian_spacetime_packet(grid, {u.center, u.time_carrier, u.space_carrier, u.time_sigma, u.space_sigma});
        r = uncertainty_report(p.field, p.spectrum);
        break;
    }
    case UncertaintySource::comb:
        r = uncertainty_report(gaussian_mode_comb(cfg.kind, grid, u.space_carrier, u.space_sigma, u.center.x), grid);
        break;
    }
    ctx.write("uncertainty.txt", [&](std::ostream& os) { write_report(os, r); });
    detail::check(!r.space_violation, "localized state below the spatial uncertainty bound");
    detail::check(!r.time_violation, "localized state below the temporal uncertainty bound");
}

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_io = 4 };

// Maps a failure to its exit code and writes the diagnostic.
inline int report_failure(std::exception_ptr failure, std::ostream& err)
{
    try {
        std::rethrow_exception(failure);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_config;
    } catch (const NumericFailure& e) {
        err << "numeric check failed: " << e.what() << '\n';
        return exit_numeric;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        // Library preconditions reject the scenario (aliasing, coverage, degenerate input).
        err << "scenario rejected: " << e.what() << '\n';
        return exit_config;
    }
}

struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunContext&);
};

inline const std::vector<Command>& commands()
{
    static const std::vector<Command> list{
        {"density", "spacetime density, marginals and region probabilities", cmd_density},
        {"boost-check", "Lorentz invariance of the density and of region probabilities", cmd_boost_check},
        {"momentum", "occupation spectrum and mean four-momentum", cmd_momentum},
        {"sample", "session sampling and goodness of fit", cmd_sample},
        {"fock", "region count operators and the cell-basis subsystem", cmd_fock},
        {"uncertainty", "coordinate and momentum spreads", cmd_uncertainty}};
    return list;
}

} // namespace stpd::cli
