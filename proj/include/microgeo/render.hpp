#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "microgeo/error.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/stats.hpp"

namespace microgeo {

/// Visual conventions for map output. Marker area encodes magnitude.
struct MapStyle {
    double width_px = 800.0;
    double height_px = 800.0;
    double marker_unit_px = 1.5;  ///< count maps: radius of a single-count bin
    double max_marker_px = 12.0;  ///< radius cap; delta maps scale the largest |value| to it
    double alpha = 0.5;
    std::string color_pos = "#d62728";
    std::string color_neg = "#1f77b4";
    std::string color_mono = "#4a6b8a";
    std::optional<std::string> background;  ///< raster image referenced under the markers
    bool legend = true;
    std::string title;

    void validate() const {
        if (!(width_px > 0.0) || !(height_px > 0.0)) throw ConfigError("canvas size must be positive");
        if (!(max_marker_px > 0.0)) throw ConfigError("max_marker_px must be positive");
        if (!(marker_unit_px > 0.0)) throw ConfigError("marker_unit_px must be positive");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
    }
};

/// Applies one "key=value" override, as given to --style.
inline void apply_style_override(MapStyle& style, std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ConfigError("style override must be key=value");
    const std::string key(kv.substr(0, eq));
    const std::string value(kv.substr(eq + 1));
    const auto number = [&]() {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw ConfigError("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("style '" + key + "' expects a number, got '" + value + "'");
        }
    };
    if (key == "width") style.width_px = number();
    else if (key == "height") style.height_px = number();
    else if (key == "max_marker_px") style.max_marker_px = number();
    else if (key == "marker_unit_px") style.marker_unit_px = number();
    else if (key == "alpha") style.alpha = number();
    else if (key == "color_pos") style.color_pos = value;
    else if (key == "color_neg") style.color_neg = value;
    else if (key == "color_mono") style.color_mono = value;
    else if (key == "background") style.background = value.empty() ? std::nullopt : std::optional<std::string>(value);
    else if (key == "legend") {
        if (value == "true" || value == "1" || value == "on") style.legend = true;
        else if (value == "false" || value == "0" || value == "off") style.legend = false;
        else throw ConfigError("style 'legend' expects on/off");
    } else if (key == "title") style.title = value;
    else throw ConfigError("unknown style key '" + key + "'");
    style.validate();
}

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline void svg_open(std::ostringstream& os, double w, double h) {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" "
       << "width=\"" << fmt(w) << "\" height=\"" << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n";
}

inline void map_frame(std::ostringstream& os, const MapStyle& style) {
    os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(style.width_px) << "\" height=\"" << fmt(style.height_px)
       << "\" fill=\"#ffffff\"/>\n";
    if (style.background) {
        os << "<image x=\"0\" y=\"0\" width=\"" << fmt(style.width_px) << "\" height=\"" << fmt(style.height_px)
           << "\" preserveAspectRatio=\"none\" xlink:href=\"" << xml_escape(*style.background) << "\"/>\n";
    }
    if (!style.title.empty()) {
        os << "<title>" << xml_escape(style.title) << "</title>\n";
    }
}

// North is up: row j = 0 sits at the bottom of the canvas.
inline double canvas_x(const GridSpec& spec, std::size_t i, const MapStyle& s) {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(spec.n()) * s.width_px;
}
inline double canvas_y(const GridSpec& spec, std::size_t j, const MapStyle& s) {
    return s.height_px - (static_cast<double>(j) + 0.5) / static_cast<double>(spec.m()) * s.height_px;
}

inline void circle(std::ostringstream& os, const char* cls, double cx, double cy, double r, const std::string& fill,
                   double alpha) {
    os << "<circle class=\"" << cls << "\" cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
       << "\" fill=\"" << xml_escape(fill) << "\" fill-opacity=\"" << fmt(alpha) << "\"/>\n";
}

inline void text(std::ostringstream& os, double x, double y, std::string_view s, const char* anchor = "start",
                 int size = 12) {
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
       << "\" text-anchor=\"" << anchor << "\">" << xml_escape(s) << "</text>\n";
}

inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

/// Radius of a count marker: marker_unit_px * sqrt(count), capped at max_marker_px.
inline double count_marker_radius(std::uint64_t count, const MapStyle& style) {
    return std::min(style.max_marker_px, style.marker_unit_px * std::sqrt(static_cast<double>(count)));
}

/// One semi-transparent circle per nonzero bin.
inline std::string render_counts(const CountGrid& grid, const MapStyle& style = {}) {
    style.validate();
    const auto& spec = grid.spec();
    std::ostringstream os;
    detail::svg_open(os, style.width_px, style.height_px);
    detail::map_frame(os, style);

    std::uint64_t max_count = 0;
    os << "<g class=\"markers\">\n";
    for (std::size_t j = 0; j < spec.m(); ++j) {
        for (std::size_t i = 0; i < spec.n(); ++i) {
            const auto c = grid.at(i, j);
            if (c == 0) continue;
            max_count = std::max(max_count, c);
            detail::circle(os, "marker", detail::canvas_x(spec, i, style), detail::canvas_y(spec, j, style),
                           count_marker_radius(c, style), style.color_mono, style.alpha);
        }
    }
    os << "</g>\n";

    if (style.legend && max_count > 0) {
        // Reference markers for 1, the cap value, and the grid maximum.
        const double cap_count = std::pow(style.max_marker_px / style.marker_unit_px, 2.0);
        std::vector<std::uint64_t> samples{1};
        if (cap_count > 1.0 && static_cast<double>(max_count) > cap_count) {
            samples.push_back(static_cast<std::uint64_t>(std::ceil(cap_count)));
        } else if (max_count > 1) {
            samples.push_back(max_count);
        }
        os << "<g class=\"legend\">\n";
        double y = 20.0;
        detail::text(os, 10.0, y, "count (marker area)");
        for (auto v : samples) {
            y += 2.0 * style.max_marker_px + 6.0;
            const double r = count_marker_radius(v, style);
            detail::circle(os, "legend-marker", 10.0 + style.max_marker_px, y, r, style.color_mono, style.alpha);
            detail::text(os, 16.0 + 2.0 * style.max_marker_px, y + 4.0,
                         (static_cast<double>(v) >= cap_count ? ">= " : "") + std::to_string(v));
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Two-color relative distribution: positive in color_pos, negative in color_neg,
/// radius max_marker_px * sqrt(|value| / max|value|); zero bins emit nothing.
inline std::string render_delta(const DeltaGrid& grid, const MapStyle& style = {}) {
    style.validate();
    const auto& spec = grid.spec();
    double max_abs = 0.0;
    for (double v : grid.values()) max_abs = std::max(max_abs, std::fabs(v));

    std::ostringstream os;
    detail::svg_open(os, style.width_px, style.height_px);
    detail::map_frame(os, style);
    os << "<g class=\"markers\">\n";
    for (std::size_t j = 0; j < spec.m(); ++j) {
        for (std::size_t i = 0; i < spec.n(); ++i) {
            const double v = grid.at(i, j);
            if (v == 0.0) continue;
            const double r = style.max_marker_px * std::sqrt(std::fabs(v) / max_abs);
            detail::circle(os, "marker", detail::canvas_x(spec, i, style), detail::canvas_y(spec, j, style), r,
                           v > 0.0 ? style.color_pos : style.color_neg, style.alpha);
        }
    }
    os << "</g>\n";

    if (style.legend && max_abs > 0.0) {
        os << "<g class=\"legend\">\n";
        double y = 20.0;
        detail::text(os, 10.0, y, "relative distribution (marker area)");
        for (double v : {max_abs, -max_abs, 0.25 * max_abs, -0.25 * max_abs}) {
            y += 2.0 * style.max_marker_px + 6.0;
            const double r = style.max_marker_px * std::sqrt(std::fabs(v) / max_abs);
            detail::circle(os, "legend-marker", 10.0 + style.max_marker_px, y, r,
                           v > 0.0 ? style.color_pos : style.color_neg, style.alpha);
            detail::text(os, 16.0 + 2.0 * style.max_marker_px, y + 4.0, (v > 0 ? "+" : "") + detail::format_value(v));
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Plots

struct PlotStyle {
    double width_px = 640.0;
    double height_px = 640.0;
    double margin_px = 60.0;
    std::string point_color = "#333333";
    std::string fit_color = "#d62728";
    std::string exact_color = "#2ca02c";
    std::string band_color = "#999999";
    std::string bar_color = "#4a6b8a";
    std::string title;
};

/// Frequency-comparison scatter (c_ref, c_target) with best-fit, exact-correlation,
/// and +-k sqrt(c_ref) shot-noise lines.
inline std::string render_scatter(const ComparisonStats& stats, const PlotStyle& style = {}) {
    double max_v = 1.0;
    for (const auto& p : stats.points) {
        max_v = std::max({max_v, static_cast<double>(p.c_ref), static_cast<double>(p.c_target)});
    }
    const double x0 = style.margin_px, y0 = style.height_px - style.margin_px;
    const double plot_w = style.width_px - 2.0 * style.margin_px;
    const double plot_h = style.height_px - 2.0 * style.margin_px;
    const auto px = [&](double x) { return x0 + x / max_v * plot_w; };
    const auto py = [&](double y) { return y0 - y / max_v * plot_h; };

    std::ostringstream os;
    detail::svg_open(os, style.width_px, style.height_px);
    os << "<rect x=\"0\" y=\"0\" width=\"" << detail::fmt(style.width_px) << "\" height=\""
       << detail::fmt(style.height_px) << "\" fill=\"#ffffff\"/>\n";
    if (!style.title.empty()) os << "<title>" << detail::xml_escape(style.title) << "</title>\n";
    os << "<defs><clipPath id=\"plot\"><rect x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(y0 - plot_h)
       << "\" width=\"" << detail::fmt(plot_w) << "\" height=\"" << detail::fmt(plot_h) << "\"/></clipPath></defs>\n";
    os << "<g class=\"axes\" stroke=\"#000000\" fill=\"none\">\n"
       << "<line x1=\"" << detail::fmt(x0) << "\" y1=\"" << detail::fmt(y0) << "\" x2=\"" << detail::fmt(x0 + plot_w)
       << "\" y2=\"" << detail::fmt(y0) << "\"/>\n"
       << "<line x1=\"" << detail::fmt(x0) << "\" y1=\"" << detail::fmt(y0) << "\" x2=\"" << detail::fmt(x0)
       << "\" y2=\"" << detail::fmt(y0 - plot_h) << "\"/>\n"
       << "</g>\n";
    detail::text(os, x0 + plot_w / 2.0, style.height_px - 15.0, "reference count per bin", "middle");
    detail::text(os, 15.0, y0 - plot_h / 2.0, "target count per bin", "middle");
    detail::text(os, x0, y0 + 15.0, "0", "middle", 10);
    detail::text(os, x0 + plot_w, y0 + 15.0, detail::format_value(max_v), "middle", 10);
    detail::text(os, x0 - 5.0, y0 - plot_h + 4.0, detail::format_value(max_v), "end", 10);

    os << "<g clip-path=\"url(#plot)\">\n";
    // Shot-noise band as polylines sampled along x.
    constexpr int kSamples = 200;
    const double k = stats.k_exact;
    for (int sign : {1, -1}) {
        os << "<polyline class=\"noise-band\" fill=\"none\" stroke=\"" << detail::xml_escape(style.band_color)
           << "\" stroke-width=\"1\" points=\"";
        for (int s = 0; s <= kSamples; ++s) {
            const double x = max_v * s / kSamples;
            const double y = std::max(0.0, k * x + sign * noise_band(k, x));
            os << (s ? " " : "") << detail::fmt(px(x)) << ',' << detail::fmt(py(y));
        }
        os << "\"/>\n";
    }
    os << "<line class=\"exact-line\" x1=\"" << detail::fmt(px(0)) << "\" y1=\"" << detail::fmt(py(0)) << "\" x2=\""
       << detail::fmt(px(max_v)) << "\" y2=\"" << detail::fmt(py(k * max_v)) << "\" stroke=\""
       << detail::xml_escape(style.exact_color) << "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    const auto& reg = stats.regression;
    os << "<line class=\"fit-line\" x1=\"" << detail::fmt(px(0)) << "\" y1=\"" << detail::fmt(py(reg.intercept))
       << "\" x2=\"" << detail::fmt(px(max_v)) << "\" y2=\"" << detail::fmt(py(reg.intercept + reg.slope * max_v))
       << "\" stroke=\"" << detail::xml_escape(style.fit_color) << "\" stroke-width=\"1.5\"/>\n";
    os << "</g>\n<g class=\"points\">\n";
    for (const auto& p : stats.points) {
        if (p.c_ref + p.c_target == 0) continue;
        detail::circle(os, "point", px(static_cast<double>(p.c_ref)), py(static_cast<double>(p.c_target)), 2.0,
                       style.point_color, 0.4);
    }
    os << "</g>\n";

    char caption[160];
    std::snprintf(caption, sizeof caption, "r(%zu) = %.3f, p = %.3g, N_T = %llu, N_R = %llu", reg.df, reg.pearson_r,
                  reg.p_value, static_cast<unsigned long long>(stats.n_target),
                  static_cast<unsigned long long>(stats.n_reference));
    detail::text(os, x0 + 5.0, y0 - plot_h - 10.0, caption);
    os << "</svg>\n";
    return os.str();
}

inline std::string render_angle_histogram(const AngleHistogram& hist, const PlotStyle& style = {}) {
    std::uint64_t max_count = 1;
    for (auto c : hist.bin_counts) max_count = std::max(max_count, c);
    const double x0 = style.margin_px, y0 = style.height_px - style.margin_px;
    const double plot_w = style.width_px - 2.0 * style.margin_px;
    const double plot_h = style.height_px - 2.0 * style.margin_px;
    const double bar_w = plot_w / static_cast<double>(kAngleBins);

    std::ostringstream os;
    detail::svg_open(os, style.width_px, style.height_px);
    os << "<rect x=\"0\" y=\"0\" width=\"" << detail::fmt(style.width_px) << "\" height=\""
       << detail::fmt(style.height_px) << "\" fill=\"#ffffff\"/>\n";
    if (!style.title.empty()) os << "<title>" << detail::xml_escape(style.title) << "</title>\n";
    os << "<g class=\"bars\" fill=\"" << detail::xml_escape(style.bar_color) << "\">\n";
    for (std::size_t b = 0; b < kAngleBins; ++b) {
        const double h = static_cast<double>(hist.bin_counts[b]) / static_cast<double>(max_count) * plot_h;
        os << "<rect class=\"bar\" x=\"" << detail::fmt(x0 + b * bar_w) << "\" y=\"" << detail::fmt(y0 - h)
           << "\" width=\"" << detail::fmt(bar_w) << "\" height=\"" << detail::fmt(h) << "\"/>\n";
    }
    os << "</g>\n";
    os << "<line x1=\"" << detail::fmt(x0) << "\" y1=\"" << detail::fmt(y0) << "\" x2=\"" << detail::fmt(x0 + plot_w)
       << "\" y2=\"" << detail::fmt(y0) << "\" stroke=\"#000000\"/>\n";
    for (int deg = 0; deg <= 90; deg += 15) {
        detail::text(os, x0 + deg * bar_w, y0 + 15.0, std::to_string(deg), "middle", 10);
    }
    detail::text(os, x0 + plot_w / 2.0, style.height_px - 15.0, "angle from reference axis (degrees)", "middle");
    char caption[128];
    std::snprintf(caption, sizeof caption, "n = %zu, mean = %.2f deg, std = %.2f deg", hist.n_points, hist.mean_deg,
                  hist.std_deg);
    detail::text(os, x0 + 5.0, y0 - plot_h - 10.0, caption);
    os << "</svg>\n";
    return os.str();
}

}  // namespace microgeo
