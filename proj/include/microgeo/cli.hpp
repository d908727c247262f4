#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

#include "microgeo/corpus.hpp"
#include "microgeo/error.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/pipeline.hpp"
#include "microgeo/render.hpp"
#include "microgeo/report.hpp"
#include "microgeo/stats.hpp"
#include "microgeo/synth.hpp"
#include "microgeo/tokenmatch.hpp"

namespace microgeo::cli {

/// Environment variable naming the token config used when --config is absent.
inline constexpr const char* kConfigEnv = "MICROGEO_CONFIG";

struct RunConfig {
    std::vector<std::string> inputs;
    std::string config_path;
    std::string target_set;
    std::string reference_set;
    Extent extent = caba_extent();
    std::size_t n = kDefaultGridSize;
    std::size_t m = kDefaultGridSize;
    std::optional<std::string> lang = std::string("es");
    std::optional<Timestamp> since;
    std::optional<Timestamp> until;
    std::string out_dir = ".";
    bool strict = false;
    unsigned threads = 0;
    std::vector<std::string> style;  ///< key=value overrides

    void validate() const {
        if (inputs.empty()) throw ConfigError("no input corpus given");
        if (target_set.empty() || reference_set.empty()) throw ConfigError("target and reference sets are required");
        if (target_set == reference_set) throw ConfigError("target and reference sets must differ");
        if (since && until && !(*since < *until)) throw ConfigError("--since must be earlier than --until");
    }
};

/// "lon_min,lon_max,lat_min,lat_max"
inline Extent parse_extent(std::string_view s) {
    std::vector<double> v;
    std::string item;
    std::istringstream is{std::string(s)};
    while (std::getline(is, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw ConfigError("");
        } catch (const std::exception&) {
            throw ConfigError("extent component '" + item + "' is not a number");
        }
    }
    if (v.size() != 4) throw ConfigError("extent needs lon_min,lon_max,lat_min,lat_max");
    return Extent(v[0], v[1], v[2], v[3]);
}

/// "NxM"
inline std::pair<std::size_t, std::size_t> parse_grid_size(std::string_view s) {
    const auto x = s.find_first_of("xX");
    const auto parse = [&](std::string_view part) {
        unsigned long long v = 0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || end != part.data() + part.size()) {
            throw ConfigError("grid size must look like NxM");
        }
        if (v == 0 || v > 100000) throw ConfigError("grid dimensions must be in [1, 100000]");
        return static_cast<std::size_t>(v);
    };
    if (x == std::string_view::npos) throw ConfigError("grid size must look like NxM");
    return {parse(s.substr(0, x)), parse(s.substr(x + 1))};
}

inline Timestamp parse_time_arg(const std::string& s) {
    if (auto t = parse_rfc3339(s)) return *t;
    if (auto t = parse_rfc3339(s + "T00:00:00Z")) return *t;  // bare date
    throw ConfigError("'" + s + "' is not an RFC 3339 timestamp or YYYY-MM-DD date");
}

/// File-name-safe rendering of a set name; bytes outside [A-Za-z0-9._-] become xHH.
inline std::string slug(std::string_view name) {
    std::string out;
    for (unsigned char c : name) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "x%02X", c);
            out += buf;
        }
    }
    return out;
}

/// Writes named files into a directory all-or-nothing: everything goes to a
/// staging directory first and is moved into place only by commit().
class StagedOutput {
public:
    explicit StagedOutput(std::filesystem::path dir) : dir_(std::move(dir)) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
        staging_ = dir_ / (".microgeo-staging-" + std::to_string(::getpid()));
        fs::remove_all(staging_, ec);
        fs::create_directory(staging_, ec);
        if (ec) throw IoError("cannot create staging directory: " + ec.message());
    }

    StagedOutput(const StagedOutput&) = delete;
    StagedOutput& operator=(const StagedOutput&) = delete;

    ~StagedOutput() {
        std::error_code ec;
        std::filesystem::remove_all(staging_, ec);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(staging_ / name, std::ios::binary);
        out << content;
        out.close();
        if (!out) throw IoError("cannot write '" + name + "'");
        names_.push_back(name);
    }

    std::vector<std::string> commit() {
        for (const auto& n : names_) {
            std::error_code ec;
            std::filesystem::rename(staging_ / n, dir_ / n, ec);
            if (ec) throw IoError("cannot move '" + n + "' into place: " + ec.message());
        }
        return names_;
    }

private:
    std::filesystem::path dir_;
    std::filesystem::path staging_;
    std::vector<std::string> names_;
};

/// Artifact names for one comparison, all derived from the set names.
struct ArtifactNames {
    std::string prefix;
    std::string delta_svg() const { return prefix + "_delta.svg"; }
    std::string target_svg() const { return prefix + "_target_counts.svg"; }
    std::string reference_svg() const { return prefix + "_reference_counts.svg"; }
    std::string scatter_svg() const { return prefix + "_scatter.svg"; }
    std::string angles_svg() const { return prefix + "_angles.svg"; }
    std::string report() const { return prefix + "_report.txt"; }
    std::string target_grid() const { return prefix + "_target.grid"; }
    std::string reference_grid() const { return prefix + "_reference.grid"; }
    std::string delta_grid() const { return prefix + "_delta.grid"; }
};

inline ArtifactNames artifact_names(const std::string& target, const std::string& reference) {
    return {slug(target) + "_vs_" + slug(reference)};
}

inline std::string resolve_config_path(const std::string& given) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv(kConfigEnv); env && *env) return env;
    throw ConfigError(std::string("no token config: pass --config or set ") + kConfigEnv);
}

/// ingest -> select -> bin -> compare -> render/report. Returns the process exit status.
inline int cmd_compare(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        cfg.validate();
        const auto tokens = load_token_config(resolve_config_path(cfg.config_path));
        const auto& target = tokens.set(cfg.target_set);
        const auto& reference = tokens.set(cfg.reference_set);

        MapStyle style;
        for (const auto& kv : cfg.style) apply_style_override(style, kv);

        CorpusFilter filter;
        filter.extent = cfg.extent;
        filter.lang = cfg.lang;
        if (cfg.since || cfg.until) filter.time_range = TimeRange{cfg.since, cfg.until};
        IngestOptions opts;
        opts.strict = cfg.strict;
        opts.threads = cfg.threads;

        std::vector<Tweet> corpus;
        IngestReport total;
        for (const auto& path : cfg.inputs) {
            auto res = ingest_file(path, filter, opts);
            total.accepted += res.report.accepted;
            total.rejected_parse += res.report.rejected_parse;
            total.rejected_filter += res.report.rejected_filter;
            total.blank_lines += res.report.blank_lines;
            corpus.insert(corpus.end(), std::make_move_iterator(res.tweets.begin()),
                          std::make_move_iterator(res.tweets.end()));
        }
        log << "ingested " << total.accepted << " records (" << total.rejected_parse << " unparseable, "
            << total.rejected_filter << " filtered)\n";

        const GridSpec spec(cfg.extent, cfg.n, cfg.m);
        const auto grids = bin_pair(corpus, spec, target, reference);
        if (grids.target.total() == 0) throw EmptyDistributionError("no record matches target set '" + target.name + "'");
        if (grids.reference.total() == 0) {
            throw EmptyDistributionError("no record matches reference set '" + reference.name + "'");
        }

        const auto d = delta(grids.target, grids.reference);
        const auto stats = frequency_comparison(grids.target, grids.reference);
        const auto angles = angle_histogram(grids.target, grids.reference);
        const double coverage = noise_band_coverage(stats);

        const auto names = artifact_names(target.name, reference.name);
        StagedOutput out(cfg.out_dir);

        auto map_style = style;
        map_style.title = target.name + " vs " + reference.name + ": relative distribution";
        out.write(names.delta_svg(), render_delta(d, map_style));
        map_style.title = target.name + ": counts";
        out.write(names.target_svg(), render_counts(grids.target, map_style));
        map_style.title = reference.name + ": counts";
        out.write(names.reference_svg(), render_counts(grids.reference, map_style));
        PlotStyle plot;
        plot.title = target.name + " vs " + reference.name + ": frequency comparison";
        out.write(names.scatter_svg(), render_scatter(stats, plot));
        plot.title = target.name + " vs " + reference.name + ": angle histogram";
        out.write(names.angles_svg(), render_angle_histogram(angles, plot));

        std::ostringstream report;
        write_report(report, {target.name, reference.name, &spec, &stats, &angles, coverage});
        out.write(names.report(), report.str());
        out.write(names.target_grid(), grid_to_string(grids.target));
        out.write(names.reference_grid(), grid_to_string(grids.reference));
        out.write(names.delta_grid(), grid_to_string(d));

        for (const auto& n : out.commit()) log << "wrote " << (std::filesystem::path(cfg.out_dir) / n).string() << '\n';
        char summary[200];
        std::snprintf(summary, sizeof summary, "N_T=%llu N_R=%llu k=%.4g slope=%.4g r=%.4g p=%.3g angle_std=%.2f\n",
                      static_cast<unsigned long long>(stats.n_target),
                      static_cast<unsigned long long>(stats.n_reference), stats.k_exact, stats.regression.slope,
                      stats.regression.pearson_r, stats.regression.p_value, angles.std_deg);
        log << summary;
        return 0;
    } catch (const std::exception& e) {
        err << "microgeo compare: " << e.what() << '\n';
        return 1;
    }
}

struct SimulateConfig {
    std::string scenario_path;
    std::string output_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_tweets;
};

/// Writes a synthetic corpus in the record format.
inline int cmd_simulate(const SimulateConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        auto sc = synth::load_scenario(cfg.scenario_path);
        if (cfg.seed) sc.seed = *cfg.seed;
        if (cfg.n_tweets) sc.n_tweets = *cfg.n_tweets;
        if (cfg.output_path.empty()) throw ConfigError("no output path given");
        const auto tweets = synth::generate(sc);

        const std::filesystem::path final_path(cfg.output_path);
        const auto tmp = final_path.string() + ".tmp-" + std::to_string(::getpid());
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw IoError("cannot write '" + tmp + "'");
            write_corpus(out, tweets);
            out.close();
            if (!out) {
                std::filesystem::remove(tmp);
                throw IoError("error writing '" + tmp + "'");
            }
        }
        std::filesystem::rename(tmp, final_path);

        const TokenMatcher mt(TokenSet{.name = "t", .tokens = {sc.target.token}}, {});
        const TokenMatcher mr(TokenSet{.name = "r", .tokens = {sc.reference.token}}, {});
        std::size_t nt = 0, nr = 0;
        for (const auto& t : tweets) {
            nt += mt.matches(t.text);
            nr += mr.matches(t.text);
        }
        log << "wrote " << tweets.size() << " records to " << cfg.output_path << " (scenario '" << sc.name
            << "', seed " << sc.seed << "; " << nt << " with '" << sc.target.token << "', " << nr << " with '"
            << sc.reference.token << "')\n";
        return 0;
    } catch (const std::exception& e) {
        err << "microgeo simulate: " << e.what() << '\n';
        return 1;
    }
}

struct RenderConfig {
    std::string grid_path;
    std::string output_path;
    std::vector<std::string> style;
};

/// Renders a grid file: counts as a count map, delta as a two-color map,
/// fractions as a single-color map scaled like delta.
inline std::string render_grid(const AnyGrid& grid, const MapStyle& style) {
    if (const auto* c = std::get_if<CountGrid>(&grid)) return render_counts(*c, style);
    if (const auto* d = std::get_if<DeltaGrid>(&grid)) return render_delta(*d, style);
    const auto& f = std::get<FractionGrid>(grid);
    auto mono = style;
    mono.color_pos = style.color_mono;
    return render_delta(DeltaGrid(f.spec(), std::vector<double>(f.values().begin(), f.values().end())), mono);
}

inline int cmd_render(const RenderConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        MapStyle style;
        for (const auto& kv : cfg.style) apply_style_override(style, kv);
        std::ifstream in(cfg.grid_path);
        if (!in) throw IoError("cannot open grid file '" + cfg.grid_path + "'");
        const auto grid = read_grid(in);
        const auto svg = render_grid(grid, style);
        if (cfg.output_path.empty() || cfg.output_path == "-") {
            log << svg;
            return 0;
        }
        const auto tmp = cfg.output_path + ".tmp-" + std::to_string(::getpid());
        {
            std::ofstream out(tmp, std::ios::binary);
            out << svg;
            out.close();
            if (!out) {
                std::filesystem::remove(tmp);
                throw IoError("cannot write '" + cfg.output_path + "'");
            }
        }
        std::filesystem::rename(tmp, cfg.output_path);
        log << "wrote " << cfg.output_path << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "microgeo render: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace microgeo::cli
