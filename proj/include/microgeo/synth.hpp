#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "microgeo/corpus.hpp"
#include "microgeo/error.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/tokenmatch.hpp"

namespace microgeo::synth {

/// Portable random stream: std::mt19937_64 (fully specified by the standard)
/// with hand-written transforms, since std:: distributions differ across
/// standard libraries.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) from the top 53 bits of one engine draw.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

private:
    std::mt19937_64 engine_;
};

struct SpatialComponent {
    enum class Kind { uniform, gaussian };
    Kind kind = Kind::uniform;
    double weight = 1.0;
    double lon = 0.0;    ///< gaussian center
    double lat = 0.0;
    double sigma = 0.0;  ///< gaussian spread in degrees, isotropic
};

/// Weighted mixture of point sources; samples outside the extent are re-drawn
/// from the same component.
struct SpatialModel {
    std::vector<SpatialComponent> components;

    void validate(const Extent& extent) const {
        if (components.empty()) throw ConfigError("spatial model has no components");
        double total = 0.0;
        for (const auto& c : components) {
            if (!(c.weight > 0.0)) throw ConfigError("spatial weights must be positive");
            total += c.weight;
            if (c.kind == SpatialComponent::Kind::gaussian) {
                if (!(c.sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
                if (!extent.contains(c.lon, c.lat)) throw ConfigError("gaussian center must lie inside the extent");
            }
        }
        if (std::fabs(total - 1.0) > 1e-12) throw ConfigError("spatial weights must sum to 1");
    }

    static SpatialModel uniform() { return {{SpatialComponent{}}}; }
};

struct Hotspot {
    double lon = 0.0;
    double lat = 0.0;
    double sigma = 0.0;
    double multiplier = 1.0;  ///< usage factor at the center; 1 means no effect

    friend bool operator==(const Hotspot&, const Hotspot&) = default;
};

/// Probability that a tweet at a location carries a token:
///   clamp(base * (1 + gradient * u) * (1 + sum_h (multiplier_h - 1) * exp(-d_h^2 / (2 sigma_h^2))), 0, 1)
/// where u runs from -1 at lon_min to +1 at lon_max.
struct UsageField {
    std::string token;
    double base = 0.05;
    double gradient = 0.0;
    std::vector<Hotspot> hotspots;
    /// Filler words that contain the token as a substring but must not match it as a word.
    std::vector<std::string> decoys;

    double probability(const Extent& e, double lon, double lat) const {
        const double u = 2.0 * (lon - e.lon_min()) / e.lon_span() - 1.0;
        double boost = 1.0;
        for (const auto& h : hotspots) {
            const double d2 = (lon - h.lon) * (lon - h.lon) + (lat - h.lat) * (lat - h.lat);
            boost += (h.multiplier - 1.0) * std::exp(-d2 / (2.0 * h.sigma * h.sigma));
        }
        return std::clamp(base * (1.0 + gradient * u) * boost, 0.0, 1.0);
    }

    /// Same probability surface, ignoring token and decoys.
    bool same_usage(const UsageField& o) const {
        return base == o.base && gradient == o.gradient && hotspots == o.hotspots;
    }

    void validate() const {
        if (token.empty()) throw ConfigError("usage field needs a token");
        if (!(base >= 0.0 && base <= 1.0)) throw ConfigError("usage base rate must be in [0, 1]");
        if (!(gradient >= -1.0 && gradient <= 1.0)) throw ConfigError("usage gradient must be in [-1, 1]");
        for (const auto& h : hotspots) {
            if (!(h.sigma > 0.0)) throw ConfigError("hotspot sigma must be positive");
            if (!(h.multiplier >= 0.0)) throw ConfigError("hotspot multiplier must be non-negative");
        }
    }
};

enum class ScenarioKind { null, hotspot, gradient };

inline ScenarioKind parse_scenario_kind(const std::string& s) {
    if (s == "null") return ScenarioKind::null;
    if (s == "hotspot") return ScenarioKind::hotspot;
    if (s == "gradient") return ScenarioKind::gradient;
    throw ConfigError("unknown scenario kind '" + s + "'");
}

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words{
        "hoy", "che", "mirá", "qué", "día", "buenos", "aires", "vamos", "ahora", "calle", "gente", "bien",
        "todo", "nada", "siempre", "noche", "mañana", "ciudad", "barrio", "café", "amigos", "lindo"};
    return words;
}

struct Scenario {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::null;
    Extent extent = caba_extent();
    SpatialModel spatial = SpatialModel::uniform();
    UsageField target{.token = "alfa"};
    UsageField reference{.token = "bravo"};
    std::size_t n_tweets = 0;
    std::uint64_t seed = 1;
    std::string lang = "es";

    void validate() const {
        spatial.validate(extent);
        target.validate();
        reference.validate();
        if (kind == ScenarioKind::null && !target.same_usage(reference)) {
            throw ConfigError("null scenario requires identical target and reference usage");
        }
        // Generated filler must never be mistaken for a token.
        const MatchConfig cfg;
        for (const auto* field : {&target, &reference}) {
            const TokenMatcher m(TokenSet{.name = field->token, .tokens = {field->token}}, cfg);
            for (const auto& w : filler_words()) {
                if (m.matches(w)) throw ConfigError("token '" + field->token + "' matches filler word '" + w + "'");
            }
            for (const auto* other : {&target, &reference}) {
                for (const auto& d : other->decoys) {
                    if (m.matches(d)) throw ConfigError("decoy '" + d + "' matches token '" + field->token + "'");
                }
            }
        }
        if (TokenMatcher(TokenSet{.name = "t", .tokens = {target.token}}, cfg).matches(reference.token) ||
            TokenMatcher(TokenSet{.name = "r", .tokens = {reference.token}}, cfg).matches(target.token)) {
            throw ConfigError("target and reference tokens overlap");
        }
    }
};

namespace detail {

inline void sample_location(const Scenario& sc, Random& rng, double& lon, double& lat) {
    const auto& e = sc.extent;
    const double pick = rng.uniform();
    double acc = 0.0;
    const SpatialComponent* comp = &sc.spatial.components.back();
    for (const auto& c : sc.spatial.components) {
        acc += c.weight;
        if (pick < acc) {
            comp = &c;
            break;
        }
    }
    if (comp->kind == SpatialComponent::Kind::uniform) {
        lon = e.lon_min() + rng.uniform() * e.lon_span();
        lat = e.lat_min() + rng.uniform() * e.lat_span();
        return;
    }
    do {
        lon = comp->lon + comp->sigma * rng.normal();
        lat = comp->lat + comp->sigma * rng.normal();
    } while (!e.contains(lon, lat));
}

inline std::string compose_text(const Scenario& sc, Random& rng, bool has_target, bool has_reference) {
    const auto& fillers = filler_words();
    std::vector<std::string> pool = fillers;
    for (const auto* f : {&sc.target, &sc.reference}) pool.insert(pool.end(), f->decoys.begin(), f->decoys.end());

    const std::size_t n_words = 3 + rng.index(6);
    std::vector<std::string> words;
    words.reserve(n_words + 2);
    for (std::size_t k = 0; k < n_words; ++k) words.push_back(pool[rng.index(pool.size())]);
    const auto insert = [&](const std::string& token) {
        const std::size_t at = rng.index(words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), token);
    };
    if (has_target) insert(sc.target.token);
    if (has_reference) insert(sc.reference.token);

    std::string text;
    for (std::size_t k = 0; k < words.size(); ++k) {
        if (k) text += ' ';
        text += words[k];
    }
    if (rng.uniform() < 0.3) text += '!';
    return text;
}

}  // namespace detail

/// Draws n_tweets records. Per record the stream is consumed in a fixed order:
/// component, location, target draw, reference draw, then the text.
inline std::vector<Tweet> generate(const Scenario& sc) {
    sc.validate();
    Random rng(sc.seed);
    std::vector<Tweet> out;
    out.reserve(sc.n_tweets);
    for (std::size_t k = 0; k < sc.n_tweets; ++k) {
        Tweet t;
        detail::sample_location(sc, rng, t.lon, t.lat);
        const bool has_target = rng.uniform() < sc.target.probability(sc.extent, t.lon, t.lat);
        const bool has_reference = rng.uniform() < sc.reference.probability(sc.extent, t.lon, t.lat);
        t.text = detail::compose_text(sc, rng, has_target, has_reference);
        t.id = "s" + std::to_string(sc.seed) + "-" + std::to_string(k);
        t.lang = sc.lang;
        out.push_back(std::move(t));
    }
    return out;
}

/// Normalized density of the spatial model at a point inside the extent.
inline double spatial_density(const Scenario& sc, double lon, double lat) {
    const auto& e = sc.extent;
    const auto mass_1d = [](double lo, double hi, double c, double s) {
        return 0.5 * (std::erf((hi - c) / (s * std::numbers::sqrt2)) - std::erf((lo - c) / (s * std::numbers::sqrt2)));
    };
    double d = 0.0;
    for (const auto& c : sc.spatial.components) {
        if (c.kind == SpatialComponent::Kind::uniform) {
            d += c.weight / (e.lon_span() * e.lat_span());
            continue;
        }
        const double z = mass_1d(e.lon_min(), e.lon_max(), c.lon, c.sigma) * mass_1d(e.lat_min(), e.lat_max(), c.lat, c.sigma);
        const double r2 = (lon - c.lon) * (lon - c.lon) + (lat - c.lat) * (lat - c.lat);
        d += c.weight * std::exp(-r2 / (2.0 * c.sigma * c.sigma)) / (2.0 * std::numbers::pi * c.sigma * c.sigma * z);
    }
    return d;
}

/// Analytic ground truth for a scenario on a grid.
struct PlantedExpectation {
    GridSpec spec;
    std::vector<double> mass_target;     ///< expected share of target-token tweets per bin
    std::vector<double> mass_reference;  ///< same for reference
    std::vector<double> expected_delta;  ///< mass_target - mass_reference
    std::vector<int> flag;               ///< +1 target over-represented, -1 under, 0 not preferred
    std::size_t n_flagged = 0;

    bool any_preferred() const noexcept { return n_flagged > 0; }
    int flag_at(std::size_t i, std::size_t j) const { return flag.at(spec.flat(i, j)); }
};

/// Integrates density * usage over each bin (midpoint rule on `subsamples`^2
/// points per bin) and flags bins whose expected target/reference share ratio
/// is at least `ratio_threshold` (or at most its inverse).
inline PlantedExpectation planted_expectation(const Scenario& sc, const GridSpec& spec, double ratio_threshold = 4.0,
                                              std::size_t subsamples = 8) {
    sc.validate();
    if (!(spec.extent() == sc.extent)) throw SpecMismatchError("grid extent differs from the scenario extent");
    if (!(ratio_threshold > 1.0)) throw ConfigError("ratio threshold must exceed 1");

    PlantedExpectation out{spec, std::vector<double>(spec.size()), std::vector<double>(spec.size()),
                           std::vector<double>(spec.size()), std::vector<int>(spec.size(), 0), 0};
    const double s = static_cast<double>(subsamples);
    CompensatedSum tot_t, tot_r;
    for (std::size_t j = 0; j < spec.m(); ++j) {
        for (std::size_t i = 0; i < spec.n(); ++i) {
            double mt = 0.0, mr = 0.0;
            for (std::size_t a = 0; a < subsamples; ++a) {
                for (std::size_t b = 0; b < subsamples; ++b) {
                    const double lon = sc.extent.lon_min() + (static_cast<double>(i) + (a + 0.5) / s) * spec.dx();
                    const double lat = sc.extent.lat_min() + (static_cast<double>(j) + (b + 0.5) / s) * spec.dy();
                    const double d = spatial_density(sc, lon, lat);
                    mt += d * sc.target.probability(sc.extent, lon, lat);
                    mr += d * sc.reference.probability(sc.extent, lon, lat);
                }
            }
            out.mass_target[spec.flat(i, j)] = mt;
            out.mass_reference[spec.flat(i, j)] = mr;
            tot_t.add(mt);
            tot_r.add(mr);
        }
    }
    const double nt = tot_t.value(), nr = tot_r.value();
    if (!(nt > 0.0) || !(nr > 0.0)) throw EmptyDistributionError("scenario usage is zero everywhere");
    for (std::size_t k = 0; k < spec.size(); ++k) {
        out.mass_target[k] /= nt;
        out.mass_reference[k] /= nr;
        out.expected_delta[k] = out.mass_target[k] - out.mass_reference[k];
        const double ft = out.mass_target[k], fr = out.mass_reference[k];
        if (ft >= ratio_threshold * fr && ft > 0.0) out.flag[k] = 1;
        else if (fr >= ratio_threshold * ft && fr > 0.0) out.flag[k] = -1;
        if (out.flag[k] != 0) ++out.n_flagged;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario config documents.
//
// Coordinates may be absolute ("lon", "lat", "sigma" in degrees) or relative to
// the extent ("u", "v" in [0, 1], "sigma_frac" as a fraction of the longitude span).
// Spatial weights are normalized to sum to 1 on load.

namespace detail {

inline void read_point(const nlohmann::json& j, const Extent& e, double& lon, double& lat, double& sigma) {
    if (j.contains("u")) lon = e.lon_min() + j.at("u").get<double>() * e.lon_span();
    else lon = j.at("lon").get<double>();
    if (j.contains("v")) lat = e.lat_min() + j.at("v").get<double>() * e.lat_span();
    else lat = j.at("lat").get<double>();
    if (j.contains("sigma_frac")) sigma = j.at("sigma_frac").get<double>() * e.lon_span();
    else sigma = j.at("sigma").get<double>();
}

inline UsageField read_usage(const nlohmann::json& j, const Extent& e) {
    UsageField u;
    u.token = j.at("token").get<std::string>();
    u.base = j.value("base", 0.05);
    u.gradient = j.value("gradient", 0.0);
    for (const auto& jh : j.value("hotspots", nlohmann::json::array())) {
        Hotspot h;
        read_point(jh, e, h.lon, h.lat, h.sigma);
        h.multiplier = jh.at("multiplier").get<double>();
        u.hotspots.push_back(h);
    }
    u.decoys = j.value("decoys", std::vector<std::string>{});
    return u;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
    Scenario sc;
    try {
        sc.name = j.value("name", "scenario");
        sc.kind = parse_scenario_kind(j.at("kind").get<std::string>());
        if (j.contains("extent")) {
            const auto v = j.at("extent").get<std::vector<double>>();
            if (v.size() != 4) throw ConfigError("extent needs four numbers");
            sc.extent = Extent(v[0], v[1], v[2], v[3]);
        }
        const auto n = j.at("n_tweets").get<long long>();
        if (n < 0) throw ConfigError("n_tweets must be non-negative");
        sc.n_tweets = static_cast<std::size_t>(n);
        sc.seed = j.value("seed", std::uint64_t{1});
        sc.lang = j.value("lang", "es");
        if (j.contains("spatial")) {
            sc.spatial.components.clear();
            double total = 0.0;
            for (const auto& jc : j.at("spatial")) {
                SpatialComponent c;
                const auto type = jc.at("type").get<std::string>();
                c.weight = jc.value("weight", 1.0);
                if (type == "uniform") {
                    c.kind = SpatialComponent::Kind::uniform;
                } else if (type == "gaussian") {
                    c.kind = SpatialComponent::Kind::gaussian;
                    detail::read_point(jc, sc.extent, c.lon, c.lat, c.sigma);
                } else {
                    throw ConfigError("unknown spatial component '" + type + "'");
                }
                if (!(c.weight > 0.0)) throw ConfigError("spatial weights must be positive");
                total += c.weight;
                sc.spatial.components.push_back(c);
            }
            for (auto& c : sc.spatial.components) c.weight /= total;
        }
        sc.target = detail::read_usage(j.at("target"), sc.extent);
        sc.reference = detail::read_usage(j.at("reference"), sc.extent);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario '" + path + "'");
    try {
        return parse_scenario(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("scenario '" + path + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Built-in scenarios used by the test suites and shipped configs.

/// City-like population: diffuse background plus a dense downtown and two secondary centers.
inline SpatialModel city_model(const Extent& e) {
    const auto at = [&](double u, double v, double sigma_frac, double w) {
        SpatialComponent c;
        c.kind = SpatialComponent::Kind::gaussian;
        c.lon = e.lon_min() + u * e.lon_span();
        c.lat = e.lat_min() + v * e.lat_span();
        c.sigma = sigma_frac * e.lon_span();
        c.weight = w;
        return c;
    };
    SpatialModel m;
    m.components.push_back(SpatialComponent{.kind = SpatialComponent::Kind::uniform, .weight = 0.30});
    m.components.push_back(at(0.80, 0.70, 0.08, 0.35));
    m.components.push_back(at(0.50, 0.50, 0.14, 0.20));
    m.components.push_back(at(0.30, 0.30, 0.10, 0.15));
    return m;
}

/// Identical usage for both tokens.
inline Scenario null_scenario(SpatialModel spatial, std::size_t n_tweets, std::uint64_t seed, double rate = 0.05) {
    Scenario sc;
    sc.name = "null";
    sc.kind = ScenarioKind::null;
    sc.spatial = std::move(spatial);
    sc.target = UsageField{.token = "alfa", .base = rate};
    sc.reference = UsageField{.token = "bravo", .base = rate};
    sc.n_tweets = n_tweets;
    sc.seed = seed;
    return sc;
}

/// Target and reference concentrated in two separate neighborhoods over a low common background.
inline Scenario disjoint_hotspot_scenario(SpatialModel spatial, std::size_t n_tweets, std::uint64_t seed) {
    Scenario sc;
    sc.name = "disjoint-hotspot";
    sc.kind = ScenarioKind::hotspot;
    sc.spatial = std::move(spatial);
    const auto& e = sc.extent;
    const double sigma = 0.07 * e.lon_span();
    const auto spot = [&](double u, double v) {
        return Hotspot{e.lon_min() + u * e.lon_span(), e.lat_min() + v * e.lat_span(), sigma, 40.0};
    };
    sc.target = UsageField{.token = "alfa", .base = 0.01, .hotspots = {spot(0.30, 0.30)}};
    sc.reference = UsageField{.token = "bravo", .base = 0.01, .hotspots = {spot(0.75, 0.70)}};
    sc.n_tweets = n_tweets;
    sc.seed = seed;
    return sc;
}

/// Opposite east-west usage trends.
inline Scenario gradient_scenario(SpatialModel spatial, std::size_t n_tweets, std::uint64_t seed) {
    Scenario sc;
    sc.name = "gradient";
    sc.kind = ScenarioKind::gradient;
    sc.spatial = std::move(spatial);
    sc.target = UsageField{.token = "alfa", .base = 0.05, .gradient = 0.9};
    sc.reference = UsageField{.token = "bravo", .base = 0.05, .gradient = -0.9};
    sc.n_tweets = n_tweets;
    sc.seed = seed;
    return sc;
}

}  // namespace microgeo::synth
