#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "svbrdf/raster.hpp"

using namespace svbrdf;

namespace {

// Brute-force legal-center test: every pixel of the s x s footprint is
// inside the raster and valid.
bool window_all_valid(const MaskRaster& valid, std::int64_t col, std::int64_t row, std::size_t s) {
    const std::int64_t c0 = col - static_cast<std::int64_t>(s / 2), r0 = row - static_cast<std::int64_t>(s / 2);
    for (std::int64_t r = r0; r < r0 + static_cast<std::int64_t>(s); ++r)
        for (std::int64_t c = c0; c < c0 + static_cast<std::int64_t>(s); ++c) {
            if (c < 0 || r < 0 || c >= static_cast<std::int64_t>(valid.width()) ||
                r >= static_cast<std::int64_t>(valid.height()))
                return false;
            if (!valid(static_cast<std::size_t>(c), static_cast<std::size_t>(r))) return false;
        }
    return true;
}

MaskRaster random_mask(std::size_t w, std::size_t h, double p_valid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution d(p_valid);
    MaskRaster m(w, h);
    for (auto& v : m.values()) v = d(rng) ? 1 : 0;
    return m;
}

} // namespace

TEST(NormalizeCrop, ConstantRasterBecomesZero) {
    FloatRaster r(2, 2, 5.0);
    auto out = normalize_crop(r, {2.0});
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(NormalizeCrop, HandComputedExample) {
    FloatRaster r(2, 2, std::vector<double>{0, 2, 0, 2});
    auto out = normalize_crop(r, {1.0});
    EXPECT_EQ(out.values(), (std::vector<double>{-1, 1, -1, 1}));
}

TEST(NormalizeCrop, ZeroMeanAndAffine) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(1500.0, 40.0);
    FloatRaster r(17, 9);
    for (auto& v : r.values()) v = d(rng);
    auto out = normalize_crop(r, {12.5});
    double mean = 0;
    for (double v : out.values()) mean += v;
    mean /= static_cast<double>(out.size());
    EXPECT_NEAR(mean, 0.0, 1e-6);
    // Affine image: differences are scaled copies.
    for (std::size_t i = 1; i < r.size(); ++i)
        EXPECT_NEAR(out[i] - out[0], (r[i] - r[0]) / 12.5, 1e-9);
    // Normalizing again only rescales.
    auto twice = normalize_crop(out, {2.0});
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(twice[i], out[i] / 2.0, 1e-12);
}

TEST(NormalizeCrop, Errors) {
    FloatRaster r(2, 2, std::vector<double>{0, NAN, 1, 2});
    try {
        normalize_crop(r, {1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
    }
    try {
        normalize_crop(FloatRaster(2, 2, 1.0), {0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_stats);
    }
}

TEST(Footprint, FullScaleCropArea) {
    // 128 px at 5 m/px covers 640 m x 640 m, roughly 0.4 km^2.
    EXPECT_DOUBLE_EQ(footprint_area(128, 5.0), 409600.0);
    EXPECT_NEAR(footprint_area(128, 5.0) / 1e6, 0.41, 0.005);
    EXPECT_DOUBLE_EQ(erosion_radius_m(128, 5.0), 320.0);
    EXPECT_DOUBLE_EQ(erosion_radius_m(128, 5.0) / 5.0, 64.0);
}

TEST(ErodeMask, AllValid256Crop128) {
    MaskRaster valid(256, 256, 1);
    auto er = erode_mask(valid, 128);
    std::size_t count = 0;
    for (std::size_t r = 0; r < 256; ++r)
        for (std::size_t c = 0; c < 256; ++c) {
            const bool inner = c >= 64 && c <= 192 && r >= 64 && r <= 192;
            EXPECT_EQ(static_cast<bool>(er(c, r)), inner) << c << "," << r;
            count += er(c, r);
        }
    EXPECT_EQ(count, 129u * 129u);
}

TEST(ErodeMask, AllInvalidAndOversized) {
    auto er = erode_mask(MaskRaster(40, 40, 0), 8);
    for (auto v : er.values()) EXPECT_EQ(v, 0);
    auto big = erode_mask(MaskRaster(10, 10, 1), 16);
    for (auto v : big.values()) EXPECT_EQ(v, 0);
    EXPECT_THROW(erode_mask(MaskRaster(10, 10, 1), 1), Error);
}

TEST(ErodeMask, MatchesBruteForceOnRandomMasks) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto valid = random_mask(37, 29, 0.97, seed);
        for (std::size_t s : {2u, 3u, 6u, 9u}) {
            auto er = erode_mask(valid, s);
            for (std::size_t r = 0; r < valid.height(); ++r)
                for (std::size_t c = 0; c < valid.width(); ++c)
                    ASSERT_EQ(static_cast<bool>(er(c, r)),
                              window_all_valid(valid, static_cast<std::int64_t>(c), static_cast<std::int64_t>(r), s))
                        << "s=" << s << " at " << c << "," << r;
        }
    }
}

TEST(SampleCropCenters, ExhaustsScarcePositions) {
    MaskRaster er(10, 10, 0);
    er(1, 2) = er(5, 5) = er(9, 0) = 1;
    auto centers = sample_crop_centers(er, 10, 7, 4, 1.0);
    ASSERT_EQ(centers.size(), 3u);
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (const auto& c : centers) {
        EXPECT_TRUE(er(static_cast<std::size_t>(c.center.col), static_cast<std::size_t>(c.center.row)));
        seen.insert({c.center.col, c.center.row});
    }
    EXPECT_EQ(seen.size(), 3u);
}

TEST(SampleCropCenters, DeterministicPerSeed) {
    auto er = erode_mask(MaskRaster(64, 64, 1), 16);
    auto a = sample_crop_centers(er, 50, 99, 16, 5.0);
    auto b = sample_crop_centers(er, 50, 99, 16, 5.0);
    auto c = sample_crop_centers(er, 50, 100, 16, 5.0);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(SampleCropCenters, EveryDrawPassesFullWindowCheck) {
    // Left half valid, right half invalid, plus scattered holes.
    MaskRaster valid(200, 120, 0);
    std::mt19937_64 rng(5);
    for (std::size_t r = 0; r < 120; ++r)
        for (std::size_t c = 0; c < 100; ++c) valid(c, r) = (rng() % 500) ? 1 : 0;
    const std::size_t s = 12;
    auto er = erode_mask(valid, s);
    auto centers = sample_crop_centers(er, 10000, 11, s, 5.0);
    ASSERT_GT(centers.size(), 100u);
    for (const auto& c : centers) {
        ASSERT_TRUE(window_all_valid(valid, c.center.col, c.center.row, s));
        ASSERT_TRUE(c.fits(valid.width(), valid.height()));
    }
}

TEST(AllocateCropBudget, Proportional) {
    EXPECT_EQ(allocate_crop_budget({100, 300}, 4), (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(allocate_crop_budget({1, 1, 1}, 2), (std::vector<std::size_t>{1, 1, 0}));
    EXPECT_EQ(allocate_crop_budget({42.0}, 17), (std::vector<std::size_t>{17}));
    EXPECT_EQ(allocate_crop_budget({0, 5}, 3), (std::vector<std::size_t>{0, 3}));
    EXPECT_THROW(allocate_crop_budget({0, 0}, 3), Error);
    EXPECT_THROW(allocate_crop_budget({-1, 2}, 3), Error);
}

TEST(AllocateCropBudget, AlwaysSumsToTotal) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> area(0.0, 1e6);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> areas(1 + rng() % 12);
        for (auto& a : areas) a = (rng() % 4 == 0) ? 0.0 : area(rng);
        if (std::all_of(areas.begin(), areas.end(), [](double a) { return a == 0; })) areas[0] = 1;
        const std::size_t total = rng() % 1000;
        auto counts = allocate_crop_budget(areas, total);
        std::size_t sum = 0;
        double asum = 0;
        for (double a : areas) asum += a;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            sum += counts[i];
            EXPECT_LE(std::abs(static_cast<double>(counts[i]) - static_cast<double>(total) * areas[i] / asum), 1.0);
        }
        ASSERT_EQ(sum, total);
    }
}

TEST(GeographicSplit, SameTileSameTag) {
    auto tags = assign_geographic_split({{1234.0, 5678.0}, {1235.0, 5678.0}}, 10000.0, {}, 3);
    EXPECT_EQ(tags[0].split, tags[1].split);
    EXPECT_EQ(tags[0].tile_id, tags[1].tile_id);
}

TEST(GeographicSplit, TileFractionsApproachRatios) {
    std::vector<Vec2> centers;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) centers.push_back({i * 10.0 + 5.0, j * 10.0 + 5.0});
    auto tags = assign_geographic_split(centers, 10.0, {0.8, 0.1, 0.1}, 2024);
    std::map<Split, int> counts;
    std::set<std::int64_t> ids;
    for (const auto& t : tags) {
        ++counts[t.split];
        ids.insert(t.tile_id);
    }
    ASSERT_EQ(ids.size(), 10000u);
    EXPECT_NEAR(counts[Split::train] / 10000.0, 0.8, 0.02);
    EXPECT_NEAR(counts[Split::val] / 10000.0, 0.1, 0.02);
    EXPECT_NEAR(counts[Split::test] / 10000.0, 0.1, 0.02);
}

TEST(GeographicSplit, SplitIsAFunctionOfTile) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5000, 5000);
    std::vector<Vec2> centers(5000);
    for (auto& c : centers) c = {u(rng), u(rng)};
    auto tags = assign_geographic_split(centers, 700.0, {}, 17);
    std::map<std::int64_t, Split> by_tile;
    for (const auto& t : tags) {
        auto [it, inserted] = by_tile.emplace(t.tile_id, t.split);
        ASSERT_EQ(it->second, t.split);
    }
}

TEST(GeographicSplit, Errors) {
    EXPECT_THROW(assign_geographic_split({{0, 0}}, 0.0, {}, 1), Error);
    EXPECT_THROW(assign_geographic_split({{0, 0}}, 10.0, {0.5, 0.2, 0.2}, 1), Error);
    EXPECT_THROW(assign_geographic_split({{0, 0}}, 10.0, {1.0, 0.0, 0.0}, 1), Error);
}

TEST(GeographicSplit, ReferenceDatasetProportions) {
    // 83,614 pairs split 66,662 / 8,615 / 8,337.
    const double total = 83614.0;
    EXPECT_NEAR(66662 / total, 0.797, 0.001);
    EXPECT_NEAR(8615 / total, 0.103, 0.001);
    EXPECT_NEAR(8337 / total, 0.100, 0.001);
}

TEST(DemGrid, InvariantsEnforced) {
    EXPECT_THROW(DemGrid(FloatRaster(1, 5), 1.0), Error);
    EXPECT_THROW(DemGrid(FloatRaster(4, 4), 0.0), Error);
    EXPECT_THROW(DemGrid(FloatRaster(4, 4), MaskRaster(3, 4, 1), 1.0), Error);
    FloatRaster z(3, 3, 1.0);
    z(1, 1) = NAN;
    EXPECT_THROW(DemGrid(z, 1.0), Error);
    MaskRaster m(3, 3, 1);
    m(1, 1) = 0;
    EXPECT_NO_THROW(DemGrid(z, m, 1.0));
}

TEST(DemGrid, CropMovesOrigin) {
    FloatRaster z(8, 8);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<double>(i);
    DemGrid dem(z, 2.0, {100, 200});
    CropSpec spec{4, 2.0, {4, 4}};
    auto c = extract_crop(dem, spec);
    EXPECT_EQ(c.width(), 4u);
    EXPECT_EQ(c.origin(), (Vec2{104, 204}));
    EXPECT_EQ(c.z(0, 0), dem.z(2, 2));
    EXPECT_THROW(extract_crop(dem, CropSpec{4, 2.0, {1, 4}}), Error);
}
