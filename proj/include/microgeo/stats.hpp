#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "microgeo/error.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/math.hpp"

namespace microgeo {

struct XY {
    double x = 0.0;
    double y = 0.0;
};

/// One grid bin in the frequency-comparison plane: x = reference count, y = target count.
struct ScatterPoint {
    std::uint64_t c_ref = 0;
    std::uint64_t c_target = 0;
    BinIndex bin;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
    double p_value = 1.0;
    std::size_t df = 0;  ///< points - 2
};

namespace detail {

struct Moments {
    double mean_x = 0.0, mean_y = 0.0;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
};

// Two-pass centered second moments with compensated accumulation.
inline Moments centered_moments(std::span<const XY> pts) {
    CompensatedSum sx, sy;
    for (const auto& p : pts) {
        sx.add(p.x);
        sy.add(p.y);
    }
    Moments m;
    const double n = static_cast<double>(pts.size());
    m.mean_x = sx.value() / n;
    m.mean_y = sy.value() / n;
    CompensatedSum xx, yy, xy;
    for (const auto& p : pts) {
        const double dx = p.x - m.mean_x;
        const double dy = p.y - m.mean_y;
        xx.add(dx * dx);
        yy.add(dy * dy);
        xy.add(dx * dy);
    }
    m.sxx = xx.value();
    m.syy = yy.value();
    m.sxy = xy.value();
    return m;
}

inline bool constant_x(std::span<const XY> pts) {
    return std::all_of(pts.begin(), pts.end(), [&](const XY& p) { return p.x == pts.front().x; });
}

inline bool constant_y(std::span<const XY> pts) {
    return std::all_of(pts.begin(), pts.end(), [&](const XY& p) { return p.y == pts.front().y; });
}

}  // namespace detail

/// Product-moment correlation coefficient.
inline double pearson(std::span<const XY> pts) {
    if (pts.size() < 2) throw UndefinedCorrelationError("pearson needs at least two points");
    if (detail::constant_x(pts) || detail::constant_y(pts)) {
        throw UndefinedCorrelationError("pearson undefined: zero variance in one coordinate");
    }
    const auto m = detail::centered_moments(pts);
    const double r = m.sxy / std::sqrt(m.sxx * m.syy);
    return std::clamp(r, -1.0, 1.0);
}

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit linear_fit(std::span<const XY> pts) {
    if (pts.size() < 2) throw UndefinedCorrelationError("linear fit needs at least two points");
    if (detail::constant_x(pts)) throw UndefinedCorrelationError("linear fit undefined: zero variance in x");
    const auto m = detail::centered_moments(pts);
    LinearFit fit;
    fit.slope = m.sxy / m.sxx;
    fit.intercept = m.mean_y - fit.slope * m.mean_x;
    return fit;
}

/// Two-sided p-value of a correlation `r` with `df` degrees of freedom.
/// With t = r sqrt(df / (1 - r^2)), P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2) and
/// df/(df+t^2) reduces to 1 - r^2, which avoids forming t.
inline double p_value(double r, std::size_t df) {
    if (df < 1) throw Error("p_value requires df >= 1");
    if (!(std::fabs(r) <= 1.0)) throw Error("p_value requires |r| <= 1");
    if (r == 0.0) return 1.0;
    if (std::fabs(r) == 1.0) return 0.0;
    const double x = (1.0 - r) * (1.0 + r);
    return std::clamp(regularized_incomplete_beta(0.5 * static_cast<double>(df), 0.5, x), 0.0, 1.0);
}

inline RegressionResult regression(std::span<const XY> pts) {
    if (pts.size() < 3) throw UndefinedCorrelationError("regression needs at least three points");
    RegressionResult res;
    const auto fit = linear_fit(pts);
    res.slope = fit.slope;
    res.intercept = fit.intercept;
    res.pearson_r = pearson(pts);
    res.df = pts.size() - 2;
    res.p_value = p_value(res.pearson_r, res.df);
    return res;
}

/// Half-width k * sqrt(c_ref) of the shot-noise band around the exact-correlation line.
inline double noise_band(double k, double c_ref) {
    if (!(k > 0.0)) throw Error("noise band requires k > 0");
    if (!(c_ref >= 0.0)) throw Error("noise band requires c_ref >= 0");
    return k * std::sqrt(c_ref);
}

struct NoiseBand {
    double k = 1.0;
    double operator()(double c_ref) const { return noise_band(k, c_ref); }
};

struct ComparisonStats {
    RegressionResult regression;
    double k_exact = 0.0;  ///< N_T / N_R
    std::uint64_t n_target = 0;
    std::uint64_t n_reference = 0;
    std::vector<ScatterPoint> points;

    NoiseBand band() const { return NoiseBand{k_exact}; }
};

/// Every bin of the two grids as a scatter point, in storage order.
inline std::vector<ScatterPoint> scatter_points(const CountGrid& target, const CountGrid& reference) {
    detail::require_same_spec(target.spec(), reference.spec());
    const auto& spec = target.spec();
    std::vector<ScatterPoint> pts;
    pts.reserve(spec.size());
    for (std::size_t j = 0; j < spec.m(); ++j) {
        for (std::size_t i = 0; i < spec.n(); ++i) {
            pts.push_back({reference.at(i, j), target.at(i, j), {i, j}});
        }
    }
    return pts;
}

/// Regression of target counts on reference counts over all n x m bins, empty bins included.
inline ComparisonStats frequency_comparison(const CountGrid& target, const CountGrid& reference) {
    detail::require_same_spec(target.spec(), reference.spec());
    if (target.total() == 0) throw EmptyDistributionError("target grid is empty");
    if (reference.total() == 0) throw EmptyDistributionError("reference grid is empty");

    ComparisonStats out;
    out.points = scatter_points(target, reference);
    std::vector<XY> xy;
    xy.reserve(out.points.size());
    for (const auto& p : out.points) xy.push_back({static_cast<double>(p.c_ref), static_cast<double>(p.c_target)});
    out.regression = regression(xy);
    out.n_target = target.total();
    out.n_reference = reference.total();
    out.k_exact = static_cast<double>(out.n_target) / static_cast<double>(out.n_reference);
    return out;
}

/// Fraction of occupied bins whose target count lies within +-k sqrt(c_ref) of k * c_ref.
inline double noise_band_coverage(const ComparisonStats& stats) {
    std::size_t occupied = 0, inside = 0;
    for (const auto& p : stats.points) {
        if (p.c_ref + p.c_target == 0) continue;
        ++occupied;
        const double expected = stats.k_exact * static_cast<double>(p.c_ref);
        if (std::fabs(static_cast<double>(p.c_target) - expected) <= noise_band(stats.k_exact, static_cast<double>(p.c_ref))) {
            ++inside;
        }
    }
    if (occupied == 0) throw NoDataError("no occupied bins");
    return static_cast<double>(inside) / static_cast<double>(occupied);
}

/// Angle in degrees of (x, y) from the x-axis, for x, y >= 0 not both zero.
/// Computed from the smaller ratio so that angle(y, x) == 90 - angle(x, y) exactly.
inline double point_angle_deg(double x, double y) {
    constexpr double kDeg = 180.0 / std::numbers::pi;
    if (x == y) return 45.0;
    if (y < x) return std::atan(y / x) * kDeg;
    return 90.0 - std::atan(x / y) * kDeg;
}

inline constexpr std::size_t kAngleBins = 90;

/// 1-degree histogram of per-bin scatter angles over [0, 90].
struct AngleHistogram {
    std::array<std::uint64_t, kAngleBins> bin_counts{};
    std::size_t n_points = 0;
    double mean_deg = 0.0;
    double std_deg = 0.0;  ///< population standard deviation of the raw angles
};

inline std::size_t angle_bin(double deg) {
    if (!(deg >= 0.0)) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(deg), kAngleBins - 1);
}

inline AngleHistogram histogram_of_angles(std::span<const double> angles) {
    if (angles.empty()) throw NoDataError("angle histogram needs at least one occupied bin");
    AngleHistogram h;
    h.n_points = angles.size();
    CompensatedSum sum;
    for (double a : angles) {
        ++h.bin_counts[angle_bin(a)];
        sum.add(a);
    }
    h.mean_deg = sum.value() / static_cast<double>(angles.size());
    CompensatedSum sq;
    for (double a : angles) sq.add((a - h.mean_deg) * (a - h.mean_deg));
    h.std_deg = std::sqrt(sq.value() / static_cast<double>(angles.size()));
    h.mean_deg = std::clamp(h.mean_deg, 0.0, 90.0);
    return h;
}

/// Angles of every bin with c_target + c_ref > 0; (0, 0) bins have no angle and are skipped.
inline std::vector<double> scatter_angles(const CountGrid& target, const CountGrid& reference) {
    std::vector<double> angles;
    for (const auto& p : scatter_points(target, reference)) {
        if (p.c_ref + p.c_target == 0) continue;
        angles.push_back(point_angle_deg(static_cast<double>(p.c_ref), static_cast<double>(p.c_target)));
    }
    return angles;
}

inline AngleHistogram angle_histogram(const CountGrid& target, const CountGrid& reference) {
    const auto angles = scatter_angles(target, reference);
    if (angles.empty()) throw NoDataError("angle histogram: both grids are empty");
    return histogram_of_angles(angles);
}

}  // namespace microgeo
