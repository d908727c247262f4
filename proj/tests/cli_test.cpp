#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "microgeo/cli.hpp"
#include "svg_util.hpp"

using namespace microgeo;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = MICROGEO_SOURCE_DIR "/configs";

class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(fs::temp_directory_path() / ("microgeo-" + name + "-" + std::to_string(::getpid()))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::map<std::string, std::string> report_at(const std::string& path) {
    std::ifstream in(path);
    return parse_report(in);
}

void write_scenario(const std::string& path, const synth::Scenario& sc) {
    // Scenario documents are plain JSON; build the subset needed here.
    nlohmann::json j{{"kind", sc.kind == synth::ScenarioKind::null ? "null" : "hotspot"},
                     {"name", sc.name},
                     {"n_tweets", sc.n_tweets},
                     {"seed", sc.seed}};
    j["spatial"] = nlohmann::json::array();
    for (const auto& c : sc.spatial.components) {
        if (c.kind == synth::SpatialComponent::Kind::uniform) {
            j["spatial"].push_back({{"type", "uniform"}, {"weight", c.weight}});
        } else {
            j["spatial"].push_back({{"type", "gaussian"}, {"lon", c.lon}, {"lat", c.lat}, {"sigma", c.sigma}, {"weight", c.weight}});
        }
    }
    for (const char* side : {"target", "reference"}) {
        const auto& u = std::string(side) == "target" ? sc.target : sc.reference;
        nlohmann::json ju{{"token", u.token}, {"base", u.base}, {"gradient", u.gradient}};
        ju["hotspots"] = nlohmann::json::array();
        for (const auto& h : u.hotspots) {
            ju["hotspots"].push_back({{"lon", h.lon}, {"lat", h.lat}, {"sigma", h.sigma}, {"multiplier", h.multiplier}});
        }
        j[side] = ju;
    }
    std::ofstream(path) << j.dump(2);
}

cli::RunConfig synthetic_run(const std::string& corpus, const std::string& out_dir) {
    cli::RunConfig cfg;
    cfg.inputs = {corpus};
    cfg.config_path = kConfigs + "/synthetic.json";
    cfg.target_set = "alfa";
    cfg.reference_set = "bravo";
    cfg.out_dir = out_dir;
    return cfg;
}

std::string simulate(const TempDir& dir, const synth::Scenario& sc, const std::string& leaf) {
    const auto scenario = dir / (leaf + ".scenario.json");
    write_scenario(scenario, sc);
    std::ostringstream log, err;
    const auto out = dir / (leaf + ".jsonl");
    EXPECT_EQ(cli::cmd_simulate({.scenario_path = scenario, .output_path = out}, log, err), 0) << err.str();
    return out;
}

}  // namespace

TEST(Cli, ParsesArguments) {
    EXPECT_EQ(cli::parse_grid_size("200x200"), (std::pair<std::size_t, std::size_t>{200, 200}));
    EXPECT_EQ(cli::parse_grid_size("3X7"), (std::pair<std::size_t, std::size_t>{3, 7}));
    for (const char* bad : {"200", "x3", "0x4", "4x-1", "99999999999999999999999x2", "2x2x2"}) {
        EXPECT_THROW(cli::parse_grid_size(bad), ConfigError) << bad;
    }
    const auto e = cli::parse_extent("-58.5,-58.3,-34.7,-34.5");
    EXPECT_EQ(e.lon_min(), -58.5);
    EXPECT_THROW(cli::parse_extent("1,2,3"), ConfigError);
    EXPECT_THROW(cli::parse_extent("1,2,3,x"), ConfigError);
    EXPECT_EQ(cli::parse_time_arg("2016-03-01"), *parse_rfc3339("2016-03-01T00:00:00Z"));
    EXPECT_THROW(cli::parse_time_arg("March"), ConfigError);
    EXPECT_EQ(cli::slug("la boca/😊"), "lax20bocax2FxF0x9Fx98x8A");
}

TEST(Cli, ShippedConfigsLoad) {
    const auto cases = load_token_config(kConfigs + "/cases.json");
    EXPECT_EQ(cases.comparisons.size(), 7u);
    EXPECT_TRUE(matches("Vamos a La Boca!", cases.set("la-boca")));
    EXPECT_TRUE(matches("quieres venir?", cases.set("pensp")));
    EXPECT_TRUE(matches("¿querés venir?", cases.set("argsp")));
    EXPECT_TRUE(matches("me encanta 😊", cases.set("smile")));
    for (const char* s : {"null_uniform", "null_city", "hotspot", "gradient"}) {
        EXPECT_NO_THROW(synth::load_scenario(kConfigs + "/scenarios/" + s + ".json")) << s;
    }
}

TEST(Cli, CompareWithDefaults) {
    TempDir dir("defaults");
    const auto corpus = simulate(dir, synth::null_scenario(synth::city_model(caba_extent()), 20000, 2), "null");
    auto cfg = synthetic_run(corpus, dir / "out");
    std::ostringstream log, err;
    ASSERT_EQ(cli::cmd_compare(cfg, log, err), 0) << err.str();
    const auto names = cli::artifact_names("alfa", "bravo");
    for (const auto& f : {names.delta_svg(), names.target_svg(), names.reference_svg(), names.scatter_svg(),
                          names.angles_svg(), names.report(), names.target_grid(), names.reference_grid(),
                          names.delta_grid()}) {
        EXPECT_TRUE(fs::exists(dir.path() / "out" / f)) << f;
    }
    const auto report = report_at(dir / ("out/" + names.report()));
    EXPECT_EQ(report.at("grid"), "200x200");
    EXPECT_EQ(report.at("bins"), "40000");
    EXPECT_EQ(report.at("df"), "39998");
    EXPECT_EQ(report.at("target_set"), "alfa");
}

TEST(Cli, NullCorpusReportsHighCorrelation) {
    TempDir dir("null");
    const auto corpus = simulate(dir, synth::null_scenario(synth::city_model(caba_extent()), 200000, 3), "null");
    auto cfg = synthetic_run(corpus, dir / "out");
    cfg.n = cfg.m = 20;
    std::ostringstream log, err;
    ASSERT_EQ(cli::cmd_compare(cfg, log, err), 0) << err.str();
    const auto report = report_at(dir / ("out/" + cli::artifact_names("alfa", "bravo").report()));
    const double r = std::stod(report.at("pearson_r"));
    const double slope = std::stod(report.at("slope"));
    const double k = std::stod(report.at("k_exact"));
    EXPECT_GT(r, 0.95);
    EXPECT_NEAR(slope / k, 1.0, 0.05);
}

TEST(Cli, RerunIsByteIdentical) {
    TempDir dir("rerun");
    const auto corpus = simulate(dir, synth::null_scenario(synth::city_model(caba_extent()), 5000, 4), "c");
    std::ostringstream log, err;
    auto a = synthetic_run(corpus, dir / "a");
    auto b = synthetic_run(corpus, dir / "b");
    a.n = a.m = b.n = b.m = 30;
    ASSERT_EQ(cli::cmd_compare(a, log, err), 0) << err.str();
    ASSERT_EQ(cli::cmd_compare(b, log, err), 0) << err.str();
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir.path() / "a")) {
        ++files;
        EXPECT_EQ(slurp(entry.path().string()), slurp((dir.path() / "b" / entry.path().filename()).string()));
    }
    EXPECT_EQ(files, 9u);
}

TEST(Cli, MissingTargetTokenFailsWithoutArtifacts) {
    TempDir dir("empty");
    const auto corpus = simulate(dir, synth::null_scenario(synth::SpatialModel::uniform(), 2000, 5), "c");
    const auto config = dir / "sets.json";
    std::ofstream(config) << R"({"token_sets":[{"name":"zulu","tokens":["zulu"]},{"name":"bravo","tokens":["bravo"]}]})";
    auto cfg = synthetic_run(corpus, dir / "out");
    cfg.config_path = config;
    cfg.target_set = "zulu";
    std::ostringstream log, err;
    EXPECT_NE(cli::cmd_compare(cfg, log, err), 0);
    EXPECT_NE(err.str().find("zulu"), std::string::npos);
    EXPECT_TRUE(!fs::exists(dir.path() / "out") || fs::is_empty(dir.path() / "out"));
}

TEST(Cli, ConfigFromEnvironment) {
    TempDir dir("env");
    const auto corpus = simulate(dir, synth::null_scenario(synth::SpatialModel::uniform(), 3000, 6), "c");
    auto cfg = synthetic_run(corpus, dir / "out");
    cfg.config_path.clear();
    cfg.n = cfg.m = 10;
    std::ostringstream log, err;
    ::unsetenv(cli::kConfigEnv);
    EXPECT_NE(cli::cmd_compare(cfg, log, err), 0);
    ::setenv(cli::kConfigEnv, (kConfigs + "/synthetic.json").c_str(), 1);
    EXPECT_EQ(cli::cmd_compare(cfg, log, err), 0) << err.str();
    ::unsetenv(cli::kConfigEnv);
}

TEST(Cli, SimulateIsDeterministic) {
    TempDir dir("sim");
    const auto sc = synth::null_scenario(synth::SpatialModel::uniform(), 1234, 8);
    const auto a = simulate(dir, sc, "a");
    const auto b = simulate(dir, sc, "b");
    const auto text = slurp(a);
    EXPECT_EQ(text, slurp(b));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1234);
    std::ostringstream log, err;
    EXPECT_NE(cli::cmd_simulate({.scenario_path = dir / "missing.json", .output_path = dir / "x.jsonl"}, log, err), 0);
}

TEST(Cli, HotspotCorpusFlagsPlantedBins) {
    TempDir dir("hotspot");
    const auto sc = synth::disjoint_hotspot_scenario(synth::city_model(caba_extent()), 200000, 9);
    const auto corpus = simulate(dir, sc, "h");
    auto cfg = synthetic_run(corpus, dir / "out");
    cfg.n = cfg.m = 25;
    std::ostringstream log, err;
    ASSERT_EQ(cli::cmd_compare(cfg, log, err), 0) << err.str();
    std::ifstream in(dir / ("out/" + cli::artifact_names("alfa", "bravo").delta_grid()));
    const auto d = std::get<DeltaGrid>(read_grid(in));
    const auto planted = synth::planted_expectation(sc, d.spec());
    std::size_t agree = 0;
    for (std::size_t k = 0; k < d.spec().size(); ++k) {
        if (planted.flag[k] != 0 && planted.flag[k] * d.values()[k] > 0.0) ++agree;
    }
    ASSERT_GT(planted.n_flagged, 0u);
    EXPECT_GE(double(agree) / double(planted.n_flagged), 0.95);
}

TEST(Cli, RenderRoundTripAndStyle) {
    TempDir dir("render");
    const GridSpec spec(caba_extent(), 12, 9);
    const auto tweets = synth::generate(synth::null_scenario(synth::city_model(caba_extent()), 3000, 10));
    const auto counts = bin_counts(tweets, spec);
    std::ofstream(dir / "c.grid") << grid_to_string(counts);
    std::ofstream(dir / "zero.grid") << grid_to_string(CountGrid(spec));

    std::ostringstream log, err;
    ASSERT_EQ(cli::cmd_render({.grid_path = dir / "c.grid", .output_path = dir / "c.svg"}, log, err), 0) << err.str();
    EXPECT_EQ(slurp(dir / "c.svg"), render_counts(counts));

    ASSERT_EQ(cli::cmd_render({.grid_path = dir / "c.grid", .output_path = dir / "big.svg", .style = {"max_marker_px=3"}},
                              log, err),
              0);
    for (const auto& c : svgtest::circles(slurp(dir / "big.svg"))) EXPECT_LE(c.r, 3.0);

    ASSERT_EQ(cli::cmd_render({.grid_path = dir / "zero.grid", .output_path = dir / "zero.svg"}, log, err), 0);
    EXPECT_TRUE(svgtest::circles(slurp(dir / "zero.svg")).empty());

    std::ofstream(dir / "bad.grid") << "microgeo-grid 1\nkind counts\n";
    EXPECT_NE(cli::cmd_render({.grid_path = dir / "bad.grid", .output_path = dir / "bad.svg"}, log, err), 0);
    EXPECT_FALSE(fs::exists(dir / "bad.svg"));
}

TEST(Cli, ExecutableExitStatus) {
    TempDir dir("exe");
    const std::string exe = MICROGEO_CLI_PATH;
    EXPECT_EQ(std::system((exe + " --help > /dev/null").c_str()), 0);
    const auto corpus = simulate(dir, synth::null_scenario(synth::SpatialModel::uniform(), 1000, 11), "c");
    const std::string base = exe + " compare -i " + corpus + " -c " + kConfigs + "/synthetic.json -o " + (dir / "out");
    EXPECT_EQ(std::system((base + " -t alfa -r bravo --grid 8x8 > /dev/null 2>&1").c_str()), 0);
    EXPECT_NE(std::system((base + " -t alfa -r alfa > /dev/null 2>&1").c_str()), 0);
    EXPECT_NE(std::system((base + " -t alfa -r bravo --grid 0x3 > /dev/null 2>&1").c_str()), 0);
}
