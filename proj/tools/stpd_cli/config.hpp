#pragma once

// Scenario configuration: a flat sectioned key = value file. The grammar is
// documented in README.md.

#include <stpd/stpd.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stpd::cli {

// Malformed or inconsistent configuration; carries the offending line (0 when
// the problem is not tied to one line) and field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string field, const std::string& message)
        : std::runtime_error(format(line, field, message)), line_(line), field_(std::move(field))
    {
    }

    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& message)
    {
        std::string s = "config error";
        if (line > 0) s += " at line " + std::to_string(line);
        if (!field.empty()) s += " [" + field + "]";
        return s + ": " + message;
    }

    int line_;
    std::string field_;
};

struct ModeSpec {
    int n = 0;
    Frequency frequency = Frequency::positive;
    Complex coefficient{0.0};
    std::vector<Complex> weight; // empty selects the default unit weight
    int line = 0;
};

struct RegionSpec {
    std::string name;
    Interval t{0.0, 0.0}; // natural units (x^0 = c t)
    Interval x{0.0, 0.0};
    int line = 0;
};

enum class UncertaintySource { modes, packet, comb };

struct UncertaintySpec {
    UncertaintySource source = UncertaintySource::modes;
    Event center{0.0, 0.0};
    int time_carrier = 0;
    int space_carrier = 0;
    double time_sigma = 0.0;
    double space_sigma = 0.0;
    bool center_set = false;
};

struct ScenarioConfig {
    ParticleKind kind{Species::complex_scalar, 0.0};
    double c = 1.0;
    double hbar = 1.0;
    double time_extent = 1.0; // natural units: c T
    double space_extent = 1.0;
    int n_time = 16;
    int n_space = 16;
    std::vector<ModeSpec> modes;
    double input_norm = 0.0; // coefficient norm before normalization
    double beta = 0.5;
    std::vector<RegionSpec> regions;
    std::size_t sample_count = 100000;
    std::uint64_t seed = 1;
    std::uint32_t streams = 1;
    std::optional<double> filter_t; // session filter (0, T_f) x (0, L_f); natural units
    std::optional<double> filter_x;
    Statistics statistics = Statistics::bose;
    int n_max = 2;
    std::string out_dir = "out";
    UncertaintySpec uncertainty;

    SpacetimeBox box() const { return SpacetimeBox(time_extent, space_extent); }
    UniformGrid grid() const { return UniformGrid(box(), n_time, n_space); }

    std::vector<Mode> build_modes() const
    {
        std::vector<Mode> out;
        for (const auto& m : modes) {
            if (kind.species == Species::electron)
                out.push_back(make_electron_mode(m.n, m.frequency, kind.mass, box()));
            else if (m.weight.empty())
                out.push_back(make_mode(kind, m.n, m.frequency, box()));
            else
                out.push_back(make_mode(kind, m.n, m.frequency, m.weight, box()));
        }
        return out;
    }

    std::vector<Complex> coefficients() const
    {
        std::vector<Complex> c;
        for (const auto& m : modes) c.push_back(m.coefficient);
        return c;
    }

    // Named regions as cell coverings of a grid.
    std::vector<std::pair<std::string, Region>> build_regions(const UniformGrid& g) const
    {
        std::vector<std::pair<std::string, Region>> out;
        for (const auto& r : regions) out.emplace_back(r.name, region_from_subbox(g, r.t, r.x));
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

inline double parse_double(const std::string& text, int line, const std::string& field)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw ConfigError(line, field, "expected a finite number, got '" + text + "'");
    return v;
}

template <class Int>
Int parse_integer(const std::string& text, int line, const std::string& field)
{
    Int v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError(line, field, "expected an integer, got '" + text + "'");
    return v;
}

inline Interval parse_interval(const std::string& text, int line, const std::string& field)
{
    const auto w = split_words(text);
    if (w.size() != 2) throw ConfigError(line, field, "expected two bounds 'lo hi'");
    const Interval iv{parse_double(w[0], line, field), parse_double(w[1], line, field)};
    if (!(iv.lo < iv.hi)) throw ConfigError(line, field, "lower bound must be below upper bound");
    return iv;
}

inline Species parse_species(const std::string& text, int line)
{
    static const std::map<std::string, Species> names{{"real_scalar", Species::real_scalar},
                                                      {"complex_scalar", Species::complex_scalar},
                                                      {"massive_vector", Species::massive_vector},
                                                      {"photon", Species::photon},
                                                      {"electron", Species::electron}};
    const auto it = names.find(text);
    if (it == names.end()) throw ConfigError(line, "particle.kind", "unknown particle kind '" + text + "'");
    return it->second;
}

// mode = n (+|-) re im [w1_re w1_im ...]
inline ModeSpec parse_mode(const std::string& text, int line)
{
    const auto w = split_words(text);
    const std::string field = "modes.mode";
    if (w.size() < 4 || (w.size() - 4) % 2 != 0)
        throw ConfigError(line, field, "expected 'n +|- re im' followed by weight pairs 're im'");
    ModeSpec m;
    m.line = line;
    m.n = parse_integer<int>(w[0], line, field);
    if (w[1] == "+") m.frequency = Frequency::positive;
    else if (w[1] == "-") m.frequency = Frequency::negative;
    else throw ConfigError(line, field, "frequency sign must be '+' or '-'");
    m.coefficient = Complex(parse_double(w[2], line, field), parse_double(w[3], line, field));
    for (std::size_t k = 4; k < w.size(); k += 2)
        m.weight.emplace_back(parse_double(w[k], line, field), parse_double(w[k + 1], line, field));
    return m;
}

struct RawEntry {
    std::string value;
    int line = 0;
};

struct RawRegion {
    std::optional<RawEntry> t, x;
    int line = 0;
};

} // namespace detail

// Parses and validates a configuration. Physical inputs (mass, durations) are
// converted to natural units with the [units] constants.
inline ScenarioConfig parse_config(std::istream& in)
{
    using detail::RawEntry;
    std::map<std::string, RawEntry> scalars; // "section.key"
    std::vector<ModeSpec> modes;
    std::map<std::string, detail::RawRegion> regions;
    std::vector<std::string> region_order;

    static const std::map<std::string, std::vector<std::string>> known{
        {"particle", {"kind", "mass"}},
        {"units", {"c", "hbar"}},
        {"box", {"t", "x"}},
        {"grid", {"nt", "nx"}},
        {"modes", {"mode"}},
        {"boost", {"beta"}},
        {"sampling", {"count", "seed", "streams", "filter_t", "filter_x"}},
        {"fock", {"statistics", "n_max"}},
        {"output", {"dir"}},
        {"uncertainty", {"source", "center_t", "center_x", "time_carrier", "space_carrier", "time_sigma", "space_sigma"}}};

    std::string section;
    std::string region_name;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        const auto hash = text.find_first_of("#;");
        if (hash != std::string::npos) text.erase(hash);
        text = detail::trim(text);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(line, "", "unterminated section header");
            section = detail::trim(text.substr(1, text.size() - 2));
            region_name.clear();
            if (section.rfind("region.", 0) == 0) {
                region_name = section.substr(7);
                if (region_name.empty()) throw ConfigError(line, section, "region needs a name");
                if (regions.count(region_name)) throw ConfigError(line, section, "duplicate region '" + region_name + "'");
                regions[region_name].line = line;
                region_order.push_back(region_name);
            } else if (!known.count(section)) {
                throw ConfigError(line, section, "unknown section");
            }
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(line, section, "expected 'key = value'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (section.empty()) throw ConfigError(line, key, "key outside any section");
        const std::string field = section + "." + key;
        if (value.empty()) throw ConfigError(line, field, "empty value");
        if (!region_name.empty()) {
            auto& r = regions[region_name];
            if (key == "t") {
                if (r.t) throw ConfigError(line, field, "duplicate key");
                r.t = RawEntry{value, line};
            } else if (key == "x") {
                if (r.x) throw ConfigError(line, field, "duplicate key");
                r.x = RawEntry{value, line};
            } else {
                throw ConfigError(line, field, "unknown key");
            }
            continue;
        }
        const auto& keys = known.at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(line, field, "unknown key");
        if (section == "modes") {
            modes.push_back(detail::parse_mode(value, line));
            continue;
        }
        if (scalars.count(field)) throw ConfigError(line, field, "duplicate key");
        scalars[field] = RawEntry{value, line};
    }

    ScenarioConfig cfg;
    auto get = [&](const std::string& f) -> const RawEntry* {
        const auto it = scalars.find(f);
        return it == scalars.end() ? nullptr : &it->second;
    };
    auto number = [&](const std::string& f, double fallback) {
        const auto* e = get(f);
        return e ? detail::parse_double(e->value, e->line, f) : fallback;
    };
    auto positive = [&](const std::string& f, double fallback) {
        const double v = number(f, fallback);
        if (!(v > 0.0)) throw ConfigError(get(f) ? get(f)->line : 0, f, "must be positive");
        return v;
    };
    auto line_of = [&](const std::string& f) { return get(f) ? get(f)->line : 0; };

    cfg.c = positive("units.c", 1.0);
    cfg.hbar = positive("units.hbar", 1.0);

    const auto* kind = get("particle.kind");
    if (!kind) throw ConfigError(0, "particle.kind", "missing required key");
    const Species species = detail::parse_species(kind->value, kind->line);
    const double mass = number("particle.mass", 0.0) * cfg.c / cfg.hbar;
    try {
        cfg.kind = make_kind(species, mass);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line_of("particle.mass"), "particle.mass", e.what());
    }

    cfg.time_extent = positive("box.t", 1.0) * cfg.c;
    cfg.space_extent = positive("box.x", 1.0);

    auto count = [&](const std::string& f, int fallback) {
        const auto* e = get(f);
        const int v = e ? detail::parse_integer<int>(e->value, e->line, f) : fallback;
        if (v < 1) throw ConfigError(line_of(f), f, "must be at least 1");
        return v;
    };
    cfg.n_time = count("grid.nt", 16);
    cfg.n_space = count("grid.nx", 16);

    cfg.beta = number("boost.beta", 0.5);
    if (!(std::abs(cfg.beta) < 1.0)) throw ConfigError(line_of("boost.beta"), "boost.beta", "|beta| must be below 1");

    if (const auto* e = get("sampling.count")) cfg.sample_count = detail::parse_integer<std::size_t>(e->value, e->line, "sampling.count");
    if (cfg.sample_count == 0) throw ConfigError(line_of("sampling.count"), "sampling.count", "must be at least 1");
    if (const auto* e = get("sampling.seed")) cfg.seed = detail::parse_integer<std::uint64_t>(e->value, e->line, "sampling.seed");
    if (const auto* e = get("sampling.streams")) cfg.streams = detail::parse_integer<std::uint32_t>(e->value, e->line, "sampling.streams");
    if (cfg.streams == 0) throw ConfigError(line_of("sampling.streams"), "sampling.streams", "must be at least 1");
    if (get("sampling.filter_t")) cfg.filter_t = positive("sampling.filter_t", 1.0) * cfg.c;
    if (get("sampling.filter_x")) cfg.filter_x = positive("sampling.filter_x", 1.0);

    if (const auto* e = get("fock.statistics")) {
        if (e->value == "bose") cfg.statistics = Statistics::bose;
        else if (e->value == "fermi") cfg.statistics = Statistics::fermi;
        else throw ConfigError(e->line, "fock.statistics", "expected 'bose' or 'fermi'");
    }
    if (const auto* e = get("fock.n_max")) {
        cfg.n_max = detail::parse_integer<int>(e->value, e->line, "fock.n_max");
        if (cfg.n_max < 1) throw ConfigError(e->line, "fock.n_max", "must be at least 1");
    }
    if (const auto* e = get("output.dir")) cfg.out_dir = e->value;

    if (const auto* e = get("uncertainty.source")) {
        if (e->value == "modes") cfg.uncertainty.source = UncertaintySource::modes;
        else if (e->value == "packet") cfg.uncertainty.source = UncertaintySource::packet;
        else if (e->value == "comb") cfg.uncertainty.source = UncertaintySource::comb;
        else throw ConfigError(e->line, "uncertainty.source", "expected 'modes', 'packet' or 'comb'");
    }
    auto& u = cfg.uncertainty;
    u.center_set = get("uncertainty.center_t") || get("uncertainty.center_x");
    u.center = {number("uncertainty.center_t", 0.5 * cfg.time_extent / cfg.c) * cfg.c,
                number("uncertainty.center_x", 0.5 * cfg.space_extent)};
    auto integer_or = [&](const std::string& f, int fallback) {
        const auto* e = get(f);
        return e ? detail::parse_integer<int>(e->value, e->line, f) : fallback;
    };
    u.time_carrier = integer_or("uncertainty.time_carrier", 0);
    u.space_carrier = integer_or("uncertainty.space_carrier", 0);
    u.time_sigma = number("uncertainty.time_sigma", 0.0);
    u.space_sigma = number("uncertainty.space_sigma", 0.0);
    if (u.time_sigma < 0.0) throw ConfigError(line_of("uncertainty.time_sigma"), "uncertainty.time_sigma", "must be non-negative");
    if (u.space_sigma < 0.0) throw ConfigError(line_of("uncertainty.space_sigma"), "uncertainty.space_sigma", "must be non-negative");

    for (const auto& name : region_order) {
        const auto& r = regions.at(name);
        if (!r.t || !r.x) throw ConfigError(r.line, "region." + name, "region needs both 't' and 'x'");
        RegionSpec spec;
        spec.name = name;
        spec.line = r.line;
        const auto t = detail::parse_interval(r.t->value, r.t->line, "region." + name + ".t");
        spec.t = {t.lo * cfg.c, t.hi * cfg.c};
        spec.x = detail::parse_interval(r.x->value, r.x->line, "region." + name + ".x");
        cfg.regions.push_back(spec);
    }

    cfg.modes = std::move(modes);
    double norm2 = 0.0;
    for (const auto& m : cfg.modes) norm2 += std::norm(m.coefficient);
    cfg.input_norm = std::sqrt(norm2);
    if (!cfg.modes.empty() && norm2 == 0.0) throw ConfigError(cfg.modes.front().line, "modes.mode", "all coefficients are zero");
    for (auto& m : cfg.modes) m.coefficient /= cfg.input_norm;
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
    return parse_config(in);
}

// Checks that depend on the final grid (after command-line overrides): every
// region lies in the box and every mode is representable.
inline void validate(const ScenarioConfig& cfg)
{
    const auto box = cfg.box();
    for (const auto& r : cfg.regions) {
        if (r.t.lo < 0.0 || r.t.hi > box.time_extent() * (1 + 1e-12) || r.x.lo < 0.0 || r.x.hi > box.space_extent() * (1 + 1e-12))
            throw ConfigError(r.line, "region." + r.name, "region leaves the box");
    }
    const UniformGrid grid = cfg.grid();
    std::vector<std::pair<int, Frequency>> seen;
    for (const auto& m : cfg.modes) {
        const std::pair<int, Frequency> key{m.n, m.frequency};
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw ConfigError(m.line, "modes.mode", "duplicate mode");
        seen.push_back(key);
        Mode mode;
        try {
            if (cfg.kind.species == Species::electron) {
                if (!m.weight.empty()) throw std::invalid_argument("electron modes take no weight; the spinor is fixed");
                mode = make_electron_mode(m.n, m.frequency, cfg.kind.mass, box);
            } else if (m.weight.empty()) {
                mode = make_mode(cfg.kind, m.n, m.frequency, box);
            } else {
                mode = make_mode(cfg.kind, m.n, m.frequency, m.weight, box);
            }
            check_band_limit(mode, grid);
        } catch (const std::exception& e) {
            throw ConfigError(m.line, "modes.mode", e.what());
        }
    }
}

} // namespace stpd::cli
