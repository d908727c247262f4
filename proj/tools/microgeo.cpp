// microgeo command-line front end: compare, simulate, render.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "microgeo/cli.hpp"

int main(int argc, char** argv) {
    using namespace microgeo;
    CLI::App app{"Micro-scale spatial comparison of token usage in geotagged text"};
    app.require_subcommand(1);

    // compare
    cli::RunConfig run;
    std::string extent_arg, grid_arg = "200x200", lang_arg = "es", since_arg, until_arg;
    auto* compare = app.add_subcommand("compare", "Bin two token sets and compare their spatial distributions");
    compare->add_option("--input,-i", run.inputs, "Corpus file(s), one JSON record per line")->required();
    compare->add_option("--config,-c", run.config_path,
                        std::string("Token-set config (default: $") + cli::kConfigEnv + ")");
    compare->add_option("--target-set,-t", run.target_set, "Target token set name")->required();
    compare->add_option("--reference-set,-r", run.reference_set, "Reference token set name")->required();
    compare->add_option("--extent", extent_arg, "lon_min,lon_max,lat_min,lat_max (default: CABA)");
    compare->add_option("--grid", grid_arg, "Bins as NxM (longitude x latitude)")->capture_default_str();
    compare->add_option("--lang", lang_arg, "Language filter; 'any' disables it")->capture_default_str();
    compare->add_option("--since", since_arg, "Keep records created at or after this RFC 3339 time");
    compare->add_option("--until", until_arg, "Keep records created before this RFC 3339 time");
    compare->add_option("--out,-o", run.out_dir, "Output directory")->capture_default_str();
    compare->add_flag("--strict", run.strict, "Abort on the first unparseable record");
    compare->add_option("--threads", run.threads, "Parser threads (0 = hardware concurrency)");
    compare->add_option("--style", run.style, "Map style override key=value (repeatable)");

    // simulate
    cli::SimulateConfig sim;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::size_t> sim_n;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus from a scenario config");
    simulate->add_option("scenario", sim.scenario_path, "Scenario JSON")->required();
    simulate->add_option("--out,-o", sim.output_path, "Output corpus file")->required();
    simulate->add_option("--seed", sim_seed, "Override the scenario seed");
    simulate->add_option("--n-tweets", sim_n, "Override the number of records");

    // render
    cli::RenderConfig ren;
    auto* render = app.add_subcommand("render", "Render a grid file as an SVG map");
    render->add_option("grid", ren.grid_path, "Grid file")->required();
    render->add_option("--out,-o", ren.output_path, "Output SVG ('-' for stdout)");
    render->add_option("--style", ren.style, "Map style override key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*compare) {
            if (!extent_arg.empty()) run.extent = cli::parse_extent(extent_arg);
            std::tie(run.n, run.m) = cli::parse_grid_size(grid_arg);
            run.lang = lang_arg == "any" ? std::nullopt : std::optional<std::string>(lang_arg);
            if (!since_arg.empty()) run.since = cli::parse_time_arg(since_arg);
            if (!until_arg.empty()) run.until = cli::parse_time_arg(until_arg);
            return cli::cmd_compare(run, std::cout, std::cerr);
        }
        if (*simulate) {
            sim.seed = sim_seed;
            sim.n_tweets = sim_n;
            return cli::cmd_simulate(sim, std::cout, std::cerr);
        }
        return cli::cmd_render(ren, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "microgeo: " << e.what() << '\n';
        return 2;
    }
}
