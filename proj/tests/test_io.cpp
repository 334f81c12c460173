#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "svbrdf/io.hpp"

using namespace svbrdf;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("svbrdf_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

FloatRaster ramp(std::size_t w, std::size_t h) {
    FloatRaster r(w, h);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.25 * static_cast<double>(i) - 3.0;
    return r;
}

} // namespace

TEST(Sg2r, HeaderBytesFollowTheLayout) {
    TempDir t;
    FloatRaster r(3, 2, 1.5);
    write_raster(t.path / "a.sg2r", r, {{"gsd", 5.0}});
    std::ifstream in(t.path / "a.sg2r", std::ios::binary);
    std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), {});
    ASSERT_EQ(b.size(), 4 + 2 + 1 + 4 + 4 + 6 * 4u);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "SG2R");
    EXPECT_EQ(b[4] | (b[5] << 8), 1);
    EXPECT_EQ(b[6], 1);
    EXPECT_EQ(b[7] | (b[8] << 8), 3);
    EXPECT_EQ(b[11] | (b[12] << 8), 2);
    // 1.5f = 0x3fc00000, little-endian.
    EXPECT_EQ(b[15], 0x00);
    EXPECT_EQ(b[17], 0xc0);
    EXPECT_EQ(b[18], 0x3f);
    const auto meta = read_json(t.path / "a.meta.json");
    EXPECT_EQ(meta.at("gsd").get<double>(), 5.0);
    EXPECT_EQ(meta.at("dtype"), "f32");
}

TEST(Sg2r, RoundTripsAtFloatPrecision) {
    TempDir t;
    std::mt19937_64 rng(1);
    FloatRaster r(17, 9);
    for (auto& v : r.values()) v = detail::gaussian(rng) * 100;
    write_raster(t.path / "r.sg2r", r);
    const auto back = read_raster(t.path / "r.sg2r");
    ASSERT_TRUE(back.same_shape(r));
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(back[i], static_cast<double>(static_cast<float>(r[i])));
}

TEST(Sg2r, MaskUsesByteDtype) {
    TempDir t;
    MaskRaster m(4, 4, 0);
    m[5] = 1;
    m[15] = 1;
    write_mask(t.path / "m.sg2r", m);
    EXPECT_EQ(fs::file_size(t.path / "m.sg2r"), 15 + 16u);
    EXPECT_EQ(read_mask(t.path / "m.sg2r"), m);
}

TEST(Sg2r, RejectsCorruptFiles) {
    TempDir t;
    write_raster(t.path / "r.sg2r", ramp(4, 4));
    auto bytes = detail::slurp(t.path / "r.sg2r");
    detail::spit(t.path / "trunc.sg2r", bytes.substr(0, bytes.size() - 3));
    detail::spit(t.path / "magic.sg2r", "XXXX" + bytes.substr(4));
    auto bad_version = bytes;
    bad_version[4] = 9;
    detail::spit(t.path / "ver.sg2r", bad_version);
    for (const char* f : {"trunc.sg2r", "magic.sg2r", "ver.sg2r", "missing.sg2r"}) {
        try {
            read_raster(t.path / f);
            FAIL() << f;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::io) << f;
        }
    }
}

TEST(Dem, RoundTripKeepsGsdOriginAndMask) {
    TempDir t;
    FloatRaster z = ramp(6, 5);
    MaskRaster v(6, 5, 1);
    v[7] = 0;
    const DemGrid dem(z, v, 2.5, {100, -40});
    write_dem(t.path / "dem.sg2r", dem);
    const auto back = read_dem(t.path / "dem.sg2r");
    EXPECT_EQ(back.gsd(), 2.5);
    EXPECT_EQ(back.origin(), (Vec2{100, -40}));
    EXPECT_EQ(back.valid(), v);
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (v[i]) {
            EXPECT_EQ(back.elevations()[i], z[i]);
        }
    }
}

TEST(CoeffMap, DirectoryRoundTrip) {
    TempDir t;
    CoefficientMap m(ModelKind::M3, 4, 3);
    for (std::size_t j = 0; j < 4; ++j) m.channel(j) = FloatRaster(4, 3, 0.125 * static_cast<double>(j + 1));
    write_coeff_map(t.path / "c", m);
    const auto back = read_coeff_map(t.path / "c");
    EXPECT_EQ(back.model(), ModelKind::M3);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(back.channel(j), m.channel(j));
}

TEST(Png16, ScalingIsRecordedAndInvertible) {
    TempDir t;
    const auto r = ramp(5, 4);
    write_png16(t.path / "img.png", r);
    const auto px = read_png16(t.path / "img.png");
    const auto meta = read_json(t.path / "img.meta.json").at("scale");
    const double lo = meta.at("lo"), hi = meta.at("hi"), maxval = meta.at("maxval");
    EXPECT_EQ(lo, -3.0);
    EXPECT_EQ(hi, 1.75);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(lo + (hi - lo) * px[i] / maxval, r[i], (hi - lo) / 65535);
    EXPECT_EQ(px(0, 0), 0);
    EXPECT_EQ(px(4, 3), 65535);
}

TEST(Pgm, AsciiLayoutTopRowIsNorth) {
    TempDir t;
    FloatRaster r(2, 2);
    r(0, 0) = 0;
    r(1, 0) = 1;
    r(0, 1) = 2;
    r(1, 1) = 3;
    write_pgm(t.path / "g.pgm", r, DisplayScale{0, 3}, 3);
    EXPECT_EQ(detail::slurp(t.path / "g.pgm"), "P2\n2 2\n3\n2 3\n0 1\n");
}

TEST(Checkpoint, RoundTripReproducesPredictions) {
    TempDir t;
    TrainConfig cfg;
    cfg.widths = {4, 8};
    cfg.seed = 5;
    Predictor p(ModelKind::M2, cfg, {12.5});
    std::mt19937_64 rng(2);
    for (auto* prm : p.net.params())
        for (auto& v : prm->value) v = static_cast<double>(static_cast<float>(v + 0.1 * detail::gaussian(rng)));
    for (auto& b : p.net.buffers())
        for (auto& v : *b.data) v = static_cast<double>(static_cast<float>(v + 0.5 + 0.1 * detail::gaussian(rng)));
    save_checkpoint(t.path / "ck.bin", p);
    auto q = load_checkpoint(t.path / "ck.bin");
    EXPECT_EQ(q.model, ModelKind::M2);
    EXPECT_EQ(q.stats.dataset_std, 12.5);
    EXPECT_EQ(q.net.config().widths, cfg.widths);
    FloatRaster crop(16, 16);
    for (auto& v : crop.values()) v = 40 * detail::gaussian(rng);
    const auto a = predict_crop(p, crop), b = predict_crop(q, crop);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a.channel(j), b.channel(j));

    const auto bytes = detail::slurp(t.path / "ck.bin");
    EXPECT_EQ(bytes.substr(0, 4), "SG2C");
    detail::spit(t.path / "short.bin", bytes.substr(0, bytes.size() - 4));
    EXPECT_THROW(load_checkpoint(t.path / "short.bin"), Error);
}
