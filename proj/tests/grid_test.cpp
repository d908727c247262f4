#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "microgeo/grid.hpp"
#include "oracles.hpp"

using namespace microgeo;

namespace {

struct Pt {
    double lon;
    double lat;
};

GridSpec unit_spec(std::size_t n, std::size_t m, double span = 2.0) { return GridSpec(Extent(0, span, 0, span), n, m); }

CountGrid random_grid(const GridSpec& spec, std::mt19937_64& rng, std::uint64_t max_count = 50) {
    std::uniform_int_distribution<std::uint64_t> d(0, max_count);
    std::vector<std::uint64_t> c(spec.size());
    for (auto& v : c) v = d(rng);
    c[rng() % c.size()] += 1;
    return CountGrid(spec, std::move(c));
}

}  // namespace

TEST(Extent, RejectsInvertedBounds) {
    EXPECT_THROW(Extent(1, 0, 0, 1), ConfigError);
    EXPECT_THROW(Extent(0, 1, 1, 1), ConfigError);
    EXPECT_THROW(GridSpec(Extent(0, 1, 0, 1), 0, 3), ConfigError);
}

TEST(BinIndex, LowerCornerIsOrigin) {
    const auto spec = unit_spec(5, 7);
    EXPECT_EQ(bin_index(spec, 0.0, 0.0), (BinIndex{0, 0}));
}

TEST(BinIndex, UpperCornerClampsToLastBin) {
    const auto spec = unit_spec(5, 7);
    EXPECT_EQ(bin_index(spec, 2.0, 2.0), (BinIndex{4, 6}));
    const GridSpec caba(caba_extent(), 200, 200);
    EXPECT_EQ(bin_index(caba, -58.355148, -34.538162), (BinIndex{199, 199}));
}

TEST(BinIndex, FloorFormula) {
    const GridSpec spec(Extent(0, 4, 0, 4), 4, 4);
    EXPECT_EQ(bin_index(spec, 1.5, 0.1)->i, 1u);
}

TEST(BinIndex, OutsideClosedExtent) {
    const auto spec = unit_spec(4, 4);
    EXPECT_FALSE(bin_index(spec, -1e-12, 1.0));
    EXPECT_FALSE(bin_index(spec, 1.0, 2.0 + 1e-12));
    EXPECT_FALSE(bin_index(spec, std::nan(""), 1.0));
}

TEST(BinIndex, AgreesWithEdgeScanNearEdges) {
    const GridSpec spec(caba_extent(), 200, 200);
    const auto& e = spec.extent();
    for (std::size_t k = 0; k <= 200; ++k) {
        const double edge = e.lon_min() + static_cast<double>(k) * spec.dx();
        for (double v : {std::nextafter(edge, -1e9), edge, std::nextafter(edge, 1e9)}) {
            const auto got = bin_index(spec, v, e.lat_min());
            const auto want = oracle::scan_axis(v, e.lon_min(), e.lon_max(), 200);
            ASSERT_EQ(got.has_value(), want.has_value()) << "v=" << v;
            if (got) {
                EXPECT_EQ(got->i, *want) << "v=" << v;
            }
        }
    }
}

TEST(BinCounts, EmptyInput) {
    const auto g = bin_counts(std::vector<Pt>{}, unit_spec(3, 3));
    EXPECT_EQ(g.total(), 0u);
    for (auto c : g.values()) EXPECT_EQ(c, 0u);
}

TEST(BinCounts, RepeatedPointAccumulates) {
    const auto g = bin_counts(std::vector<Pt>{{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}}, unit_spec(2, 2));
    EXPECT_EQ(g.at(0, 0), 3u);
    EXPECT_EQ(g.total(), 3u);
}

TEST(BinCounts, TwoByTwoExample) {
    const auto g = bin_counts(std::vector<Pt>{{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}}, unit_spec(2, 2));
    EXPECT_EQ(g.at(0, 0), 1u);
    EXPECT_EQ(g.at(0, 1), 0u);
    EXPECT_EQ(g.at(1, 0), 1u);
    EXPECT_EQ(g.at(1, 1), 1u);
    EXPECT_EQ(g.total(), 3u);
}

TEST(BinCounts, ConservesPointsWithOutside) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.5, 2.5);
    std::vector<Pt> pts(2000);
    for (auto& p : pts) p = {u(rng), u(rng)};
    std::size_t outside = 0;
    const auto g = bin_counts(pts, unit_spec(6, 4), outside);
    EXPECT_GT(outside, 0u);
    EXPECT_EQ(g.total() + outside, pts.size());
    const auto brute = oracle::brute_force_counts(pts, g.spec());
    EXPECT_TRUE(std::ranges::equal(g.values(), brute));
}

TEST(Normalize, ForcedArithmetic) {
    const CountGrid g(unit_spec(2, 2), {2, 0, 0, 2});
    const auto f = normalize(g);
    EXPECT_DOUBLE_EQ(f.at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(f.at(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(f.at(1, 1), 0.5);
}

TEST(Normalize, SingleBinIsOne) {
    const CountGrid g(unit_spec(2, 2), {0, 0, 7, 0});
    EXPECT_EQ(normalize(g).at(0, 1), 1.0);
}

TEST(Normalize, EmptyThrows) { EXPECT_THROW(normalize(CountGrid(unit_spec(2, 2))), EmptyDistributionError); }

TEST(Delta, IdenticalShapesGiveZero) {
    const CountGrid t(unit_spec(2, 2), {1, 2, 3, 4});
    const CountGrid t3(unit_spec(2, 2), {3, 6, 9, 12});
    const auto same = delta(t, t);
    const auto scaled = delta(t3, t);
    for (double v : same.values()) EXPECT_EQ(v, 0.0);
    for (double v : scaled.values()) EXPECT_EQ(v, 0.0);
}

TEST(Delta, TwoByTwoExample) {
    // target [[2,0],[0,0]], reference [[0,2],[0,0]] indexed [i][j]
    const CountGrid t(unit_spec(2, 2), {2, 0, 0, 0});
    const CountGrid r(unit_spec(2, 2), {0, 0, 2, 0});
    const auto d = delta(t, r);
    EXPECT_EQ(d.at(0, 0), 1.0);
    EXPECT_EQ(d.at(0, 1), -1.0);
    EXPECT_EQ(d.at(1, 0), 0.0);
    EXPECT_EQ(d.at(1, 1), 0.0);
}

TEST(Delta, Errors) {
    const CountGrid a(unit_spec(2, 2), {1, 0, 0, 0});
    EXPECT_THROW(delta(a, CountGrid(unit_spec(2, 2))), EmptyDistributionError);
    EXPECT_THROW(delta(a, CountGrid(unit_spec(2, 3), {1, 0, 0, 0, 0, 0})), SpecMismatchError);
}

TEST(Delta, Properties) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto spec = unit_spec(1 + rng() % 30, 1 + rng() % 30);
        const auto t = random_grid(spec, rng);
        const auto r = random_grid(spec, rng);
        const auto d = delta(t, r);
        const auto back = delta(r, t);
        EXPECT_LE(std::fabs(d.sum()), 1e-12);
        const std::uint64_t k = 1 + rng() % 9;
        std::vector<std::uint64_t> scaled(t.values().begin(), t.values().end());
        for (auto& v : scaled) v *= k;
        const auto ds = delta(CountGrid(spec, scaled), r);
        for (std::size_t b = 0; b < spec.size(); ++b) {
            EXPECT_EQ(d.values()[b], -back.values()[b]);
            EXPECT_NEAR(ds.values()[b], d.values()[b], 1e-15);
            EXPECT_GE(d.values()[b], -1.0);
            EXPECT_LE(d.values()[b], 1.0);
        }
    }
}

TEST(GridFile, RoundTripsEveryKind) {
    std::mt19937_64 rng(3);
    const GridSpec spec(caba_extent(), 7, 5);
    const auto t = random_grid(spec, rng);
    const auto r = random_grid(spec, rng);
    const auto back = [](const auto& g) {
        std::istringstream is(grid_to_string(g));
        return read_grid(is);
    };
    EXPECT_EQ(std::get<CountGrid>(back(t)), t);
    EXPECT_EQ(std::get<FractionGrid>(back(normalize(t))), normalize(t));
    EXPECT_EQ(std::get<DeltaGrid>(back(delta(t, r))), delta(t, r));
}

TEST(GridFile, RejectsMalformedInput) {
    for (const char* text : {"", "microgeo-grid 2\n", "microgeo-grid 1\nkind counts\nextent 0 1 0 1\nsize 2 2\n1 2\n",
                             "microgeo-grid 1\nkind counts\nextent 0 1 0 1\nsize 2 1\n1 x\n",
                             "microgeo-grid 1\nkind blobs\nextent 0 1 0 1\nsize 1 1\n1\n",
                             "microgeo-grid 1\nkind counts\nextent 1 0 0 1\nsize 1 1\n1\n",
                             "microgeo-grid 1\nkind counts\nextent 0 1 0 1\nsize 1 1\n99999999999999999999999\n"}) {
        std::istringstream is(text);
        EXPECT_THROW(read_grid(is), ConfigError) << text;
    }
}
