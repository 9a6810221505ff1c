#include "stpd_cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <regex>

namespace {

struct GridOverride {
    int nt = 0;
    int nx = 0;
};

std::optional<GridOverride> parse_grid(const std::string& text)
{
    static const std::regex pattern(R"(([0-9]+)x([0-9]+))");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) return std::nullopt;
    try {
        const GridOverride g{std::stoi(m[1]), std::stoi(m[2])};
        if (g.nt < 1 || g.nx < 1) return std::nullopt;
        return g;
    } catch (const std::out_of_range&) {
        return std::nullopt;
    }
}

} // namespace

int main(int argc, char** argv)
{
    using namespace stpd::cli;

    CLI::App app{"Spacetime probability density experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string grid_text;
    bool quiet = false;
    app.add_option("--config", config_path, "scenario file")->required();
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_option("--seed", seed, "sampling and probe seed (overrides [sampling] seed)");
    app.add_option("--grid", grid_text, "grid override NTxNX");
    app.add_flag("--quiet", quiet, "suppress progress messages");

    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands()) subs.emplace_back(app.add_subcommand(c.name, c.help), &c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_config;
    }

    const Command* command = nullptr;
    for (const auto& [sub, c] : subs)
        if (sub->parsed()) command = c;

    RunContext ctx;
    ctx.quiet = quiet;
    ctx.log = &std::cerr;
    try {
        ctx.config = load_config(config_path);
        if (seed) ctx.config.seed = *seed;
        if (!grid_text.empty()) {
            const auto g = parse_grid(grid_text);
            if (!g) throw ConfigError(0, "--grid", "expected NTxNX with positive integers, got '" + grid_text + "'");
            ctx.config.n_time = g->nt;
            ctx.config.n_space = g->nx;
        }
        validate(ctx.config);
        ctx.out = out_dir.empty() ? ctx.config.out_dir : out_dir;
        command->run(ctx);
    } catch (...) {
        return report_failure(std::current_exception(), std::cerr);
    }
    ctx.note(std::string(command->name) + ": done");
    return exit_ok;
}
