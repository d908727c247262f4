#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <ranges>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "microgeo/error.hpp"
#include "microgeo/math.hpp"

namespace microgeo {

/// Lon/lat bounding box in degrees. Closed on both ends.
class Extent {
public:
    Extent(double lon_min, double lon_max, double lat_min, double lat_max)
        : lon_min_(lon_min), lon_max_(lon_max), lat_min_(lat_min), lat_max_(lat_max) {
        if (!std::isfinite(lon_min) || !std::isfinite(lon_max) || !std::isfinite(lat_min) ||
            !std::isfinite(lat_max)) {
            throw ConfigError("extent bounds must be finite");
        }
        if (!(lon_min < lon_max)) throw ConfigError("extent requires lon_min < lon_max");
        if (!(lat_min < lat_max)) throw ConfigError("extent requires lat_min < lat_max");
    }

    double lon_min() const noexcept { return lon_min_; }
    double lon_max() const noexcept { return lon_max_; }
    double lat_min() const noexcept { return lat_min_; }
    double lat_max() const noexcept { return lat_max_; }
    double lon_span() const noexcept { return lon_max_ - lon_min_; }
    double lat_span() const noexcept { return lat_max_ - lat_min_; }

    bool contains(double lon, double lat) const noexcept {
        return lon >= lon_min_ && lon <= lon_max_ && lat >= lat_min_ && lat <= lat_max_;
    }

    friend bool operator==(const Extent&, const Extent&) = default;

private:
    double lon_min_, lon_max_, lat_min_, lat_max_;
};

/// Ciudad Autonoma de Buenos Aires, the default analysis region.
inline Extent caba_extent() { return Extent(-58.531725, -58.355148, -34.705446, -34.538162); }

inline constexpr std::size_t kDefaultGridSize = 200;

/// Grid geometry: `n` longitude columns by `m` latitude rows over an extent.
class GridSpec {
public:
    GridSpec(Extent extent, std::size_t n, std::size_t m) : extent_(extent), n_(n), m_(m) {
        if (n == 0 || m == 0) throw ConfigError("grid requires n >= 1 and m >= 1");
        if (!(dx() > 0.0) || !(dy() > 0.0)) throw ConfigError("grid bin size underflows");
    }

    const Extent& extent() const noexcept { return extent_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t size() const noexcept { return n_ * m_; }
    double dx() const noexcept { return extent_.lon_span() / static_cast<double>(n_); }
    double dy() const noexcept { return extent_.lat_span() / static_cast<double>(m_); }

    // Storage is row-major by latitude row: j * n + i.
    std::size_t flat(std::size_t i, std::size_t j) const noexcept { return j * n_ + i; }

    double lon_center(std::size_t i) const noexcept {
        return extent_.lon_min() + (static_cast<double>(i) + 0.5) * dx();
    }
    double lat_center(std::size_t j) const noexcept {
        return extent_.lat_min() + (static_cast<double>(j) + 0.5) * dy();
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    Extent extent_;
    std::size_t n_, m_;
};

/// Column `i` (longitude) and row `j` (latitude, increasing northward).
struct BinIndex {
    std::size_t i = 0;
    std::size_t j = 0;
    friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

namespace detail {

// Bin k covers [lo + k*w, lo + (k+1)*w), the last bin also takes `hi`.
// floor() can be off by one near an edge, so the result is corrected
// against the edges themselves.
inline std::optional<std::size_t> axis_bin(double v, double lo, double hi, std::size_t count) {
    if (!(v >= lo && v <= hi)) return std::nullopt;
    if (v == hi) return count - 1;
    const double width = (hi - lo) / static_cast<double>(count);
    const double raw = std::floor((v - lo) / width);
    std::size_t k = raw <= 0.0 ? 0 : std::min(static_cast<std::size_t>(raw), count - 1);
    const auto edge = [&](std::size_t e) { return e == count ? hi : lo + static_cast<double>(e) * width; };
    if (k > 0 && v < edge(k)) {
        --k;
    } else if (k + 1 < count && v >= edge(k + 1)) {
        ++k;
    }
    return k;
}

inline void require_same_spec(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw SpecMismatchError("grids have different extents or dimensions");
}

}  // namespace detail

/// Bin containing (lon, lat), or nullopt outside the closed extent.
inline std::optional<BinIndex> bin_index(const GridSpec& spec, double lon, double lat) {
    const auto& e = spec.extent();
    const auto i = detail::axis_bin(lon, e.lon_min(), e.lon_max(), spec.n());
    if (!i) return std::nullopt;
    const auto j = detail::axis_bin(lat, e.lat_min(), e.lat_max(), spec.m());
    if (!j) return std::nullopt;
    return BinIndex{*i, *j};
}

/// Anything with numeric `lon` and `lat` members.
template <typename T>
concept GeoPoint = requires(const T& p) {
    { p.lon } -> std::convertible_to<double>;
    { p.lat } -> std::convertible_to<double>;
};

/// Per-bin counts c_ij with their total.
class CountGrid {
public:
    explicit CountGrid(GridSpec spec) : spec_(std::move(spec)), counts_(spec_.size(), 0) {}

    CountGrid(GridSpec spec, std::vector<std::uint64_t> counts)
        : spec_(std::move(spec)), counts_(std::move(counts)) {
        if (counts_.size() != spec_.size()) throw ConfigError("count vector does not match grid size");
        for (auto c : counts_) total_ += c;
    }

    const GridSpec& spec() const noexcept { return spec_; }
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t at(std::size_t i, std::size_t j) const { return counts_.at(spec_.flat(i, j)); }
    std::uint64_t at(BinIndex b) const { return at(b.i, b.j); }
    std::span<const std::uint64_t> values() const noexcept { return counts_; }

    void add(BinIndex b, std::uint64_t count = 1) {
        counts_.at(spec_.flat(b.i, b.j)) += count;
        total_ += count;
    }

    /// Elementwise sum, e.g. for merging per-thread partial grids.
    CountGrid& operator+=(const CountGrid& other) {
        detail::require_same_spec(spec_, other.spec_);
        for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
        total_ += other.total_;
        return *this;
    }

    friend bool operator==(const CountGrid&, const CountGrid&) = default;

private:
    GridSpec spec_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Real-valued surface over a grid. Fractions and relative distributions share this shape.
template <typename Tag>
class ValueGrid {
public:
    ValueGrid(GridSpec spec, std::vector<double> values) : spec_(std::move(spec)), values_(std::move(values)) {
        if (values_.size() != spec_.size()) throw ConfigError("value vector does not match grid size");
    }

    const GridSpec& spec() const noexcept { return spec_; }
    double at(std::size_t i, std::size_t j) const { return values_.at(spec_.flat(i, j)); }
    double at(BinIndex b) const { return at(b.i, b.j); }
    std::span<const double> values() const noexcept { return values_; }
    double sum() const { return compensated_sum(values_); }

    friend bool operator==(const ValueGrid&, const ValueGrid&) = default;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

struct FractionTag {};
struct DeltaTag {};
using FractionGrid = ValueGrid<FractionTag>;  ///< f_ij = c_ij / N
using DeltaGrid = ValueGrid<DeltaTag>;        ///< relative distribution f^T_ij - f^R_ij

/// Counts points per bin; points outside the extent are tallied in `outside`.
template <std::ranges::input_range R>
    requires GeoPoint<std::ranges::range_value_t<R>>
CountGrid bin_counts(R&& points, const GridSpec& spec, std::size_t& outside) {
    CountGrid grid(spec);
    outside = 0;
    for (const auto& p : points) {
        if (auto b = bin_index(spec, p.lon, p.lat)) {
            grid.add(*b);
        } else {
            ++outside;
        }
    }
    return grid;
}

template <std::ranges::input_range R>
    requires GeoPoint<std::ranges::range_value_t<R>>
CountGrid bin_counts(R&& points, const GridSpec& spec) {
    std::size_t outside = 0;
    return bin_counts(std::forward<R>(points), spec, outside);
}

inline FractionGrid normalize(const CountGrid& grid) {
    if (grid.total() == 0) throw EmptyDistributionError("cannot normalize a grid with zero total");
    const double total = static_cast<double>(grid.total());
    std::vector<double> f;
    f.reserve(grid.values().size());
    for (auto c : grid.values()) f.push_back(static_cast<double>(c) / total);
    return FractionGrid(grid.spec(), std::move(f));
}

inline DeltaGrid delta(const CountGrid& target, const CountGrid& reference) {
    detail::require_same_spec(target.spec(), reference.spec());
    const auto ft = normalize(target);
    const auto fr = normalize(reference);
    std::vector<double> d(ft.values().size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = ft.values()[k] - fr.values()[k];
    return DeltaGrid(target.spec(), std::move(d));
}

// ---------------------------------------------------------------------------
// Plain-text grid files.
//
//   microgeo-grid 1
//   kind counts|fractions|delta
//   extent <lon_min> <lon_max> <lat_min> <lat_max>
//   size <n> <m>
//   <m lines, row j = 0 (south) first, each with n values for i = 0..n-1>
//
// Reals are written with 17 significant digits so files round-trip exactly.

using AnyGrid = std::variant<CountGrid, FractionGrid, DeltaGrid>;

namespace detail {

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_header(std::ostream& os, const char* kind, const GridSpec& spec) {
    const auto& e = spec.extent();
    os << "microgeo-grid 1\n"
       << "kind " << kind << '\n'
       << "extent " << format_real(e.lon_min()) << ' ' << format_real(e.lon_max()) << ' '
       << format_real(e.lat_min()) << ' ' << format_real(e.lat_max()) << '\n'
       << "size " << spec.n() << ' ' << spec.m() << '\n';
}

template <typename Values, typename Fmt>
void write_rows(std::ostream& os, const GridSpec& spec, const Values& values, Fmt fmt) {
    for (std::size_t j = 0; j < spec.m(); ++j) {
        for (std::size_t i = 0; i < spec.n(); ++i) {
            if (i) os << ' ';
            os << fmt(values[spec.flat(i, j)]);
        }
        os << '\n';
    }
}

}  // namespace detail

inline void write_grid(std::ostream& os, const CountGrid& g) {
    detail::write_header(os, "counts", g.spec());
    detail::write_rows(os, g.spec(), g.values(), [](std::uint64_t c) { return std::to_string(c); });
}

inline void write_grid(std::ostream& os, const FractionGrid& g) {
    detail::write_header(os, "fractions", g.spec());
    detail::write_rows(os, g.spec(), g.values(), detail::format_real);
}

inline void write_grid(std::ostream& os, const DeltaGrid& g) {
    detail::write_header(os, "delta", g.spec());
    detail::write_rows(os, g.spec(), g.values(), detail::format_real);
}

template <typename G>
std::string grid_to_string(const G& g) {
    std::ostringstream os;
    write_grid(os, g);
    return os.str();
}

inline AnyGrid read_grid(std::istream& is) {
    const auto fail = [](const std::string& what) -> ConfigError {
        return ConfigError("malformed grid file: " + what);
    };
    std::string magic, kind, key;
    int version = 0;
    if (!(is >> magic >> version) || magic != "microgeo-grid" || version != 1) throw fail("bad magic line");
    if (!(is >> key >> kind) || key != "kind") throw fail("missing kind");
    double lon_min, lon_max, lat_min, lat_max;
    if (!(is >> key >> lon_min >> lon_max >> lat_min >> lat_max) || key != "extent") throw fail("missing extent");
    long long n = 0, m = 0;
    if (!(is >> key >> n >> m) || key != "size" || n <= 0 || m <= 0) throw fail("missing or invalid size");
    const GridSpec spec(Extent(lon_min, lon_max, lat_min, lat_max), static_cast<std::size_t>(n),
                        static_cast<std::size_t>(m));

    // Values arrive row by row, which matches flat() ordering.
    if (kind == "counts") {
        std::vector<std::uint64_t> values(spec.size());
        for (auto& v : values) {
            std::string tok;
            if (!(is >> tok)) throw fail("truncated values");
            const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || end != tok.data() + tok.size()) {
                throw fail("count '" + tok + "' is not a non-negative integer");
            }
        }
        std::string extra;
        if (is >> extra) throw fail("trailing data");
        return CountGrid(spec, std::move(values));
    }
    if (kind == "fractions" || kind == "delta") {
        std::vector<double> values(spec.size());
        for (auto& v : values) {
            if (!(is >> v) || !std::isfinite(v)) throw fail("truncated or non-numeric values");
        }
        std::string extra;
        if (is >> extra) throw fail("trailing data");
        if (kind == "fractions") return FractionGrid(spec, std::move(values));
        return DeltaGrid(spec, std::move(values));
    }
    throw fail("unknown kind '" + kind + "'");
}

}  // namespace microgeo
