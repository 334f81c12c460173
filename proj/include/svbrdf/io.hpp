#pragma once

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "brdf.hpp"
#include "infer.hpp"
#include "raster.hpp"

namespace svbrdf {

namespace fs = std::filesystem;

inline constexpr char kRasterMagic[4] = {'S', 'G', '2', 'R'};
inline constexpr std::uint16_t kRasterVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'S', 'G', '2', 'C'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

enum class RasterDtype : std::uint8_t { f32 = 1, u8 = 2 };

namespace detail {

inline void put_u16(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string& b, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
inline void put_f32(std::string& b, double v) { put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

class Reader {
public:
    Reader(std::string data, std::string what) : d_(std::move(data)), what_(std::move(what)) {}
    const char* take(std::size_t n) {
        if (pos_ + n > d_.size()) throw Error(ErrorKind::io, what_ + ": truncated file");
        const char* p = d_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(*take(1)); }
    std::uint16_t u16() {
        const auto* p = reinterpret_cast<const unsigned char*>(take(2));
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint32_t u32() {
        const auto* p = reinterpret_cast<const unsigned char*>(take(4));
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k) v = (v << 8) | p[k];
        return v;
    }
    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
    bool done() const { return pos_ == d_.size(); }

private:
    std::string d_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& data) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + p.string());
}

} // namespace detail

inline nlohmann::json read_json(const fs::path& p) {
    try {
        return nlohmann::json::parse(detail::slurp(p));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::io, p.string() + " is not valid JSON: " + e.what());
    }
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { detail::spit(p, j.dump(2) + "\n"); }

/// `<dir>/<stem>.meta.json` for `<dir>/<stem>.<ext>`.
inline fs::path sidecar_path(const fs::path& p) {
    return p.parent_path() / (p.stem().string() + ".meta.json");
}

// ---------------------------------------------------------------------------
// SG2R raster container

template <class T>
void write_sg2r(const fs::path& path, const Raster<T>& r, RasterDtype dtype, const nlohmann::json& meta = nlohmann::json::object()) {
    if (r.width() > std::numeric_limits<std::uint32_t>::max() || r.height() > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorKind::io, "raster too large for the container");
    std::string b(kRasterMagic, 4);
    detail::put_u16(b, kRasterVersion);
    b.push_back(static_cast<char>(dtype));
    detail::put_u32(b, static_cast<std::uint32_t>(r.width()));
    detail::put_u32(b, static_cast<std::uint32_t>(r.height()));
    for (const auto v : r.values()) {
        if (dtype == RasterDtype::f32)
            detail::put_f32(b, static_cast<double>(v));
        else
            b.push_back(static_cast<char>(static_cast<std::uint8_t>(v)));
    }
    detail::spit(path, b);
    nlohmann::json m = meta.is_object() ? meta : nlohmann::json::object();
    m["dtype"] = dtype == RasterDtype::f32 ? "f32" : "u8";
    m["width"] = r.width();
    m["height"] = r.height();
    write_json(sidecar_path(path), m);
}

inline void write_raster(const fs::path& path, const FloatRaster& r, const nlohmann::json& meta = nlohmann::json::object()) {
    write_sg2r(path, r, RasterDtype::f32, meta);
}

inline void write_mask(const fs::path& path, const MaskRaster& r, const nlohmann::json& meta = nlohmann::json::object()) {
    write_sg2r(path, r, RasterDtype::u8, meta);
}

struct Sg2rData {
    RasterDtype dtype = RasterDtype::f32;
    FloatRaster values;
    nlohmann::json meta;
};

inline Sg2rData read_sg2r(const fs::path& path) {
    detail::Reader rd(detail::slurp(path), path.string());
    if (std::memcmp(rd.take(4), kRasterMagic, 4) != 0) throw Error(ErrorKind::io, path.string() + ": not an SG2R raster");
    const auto version = rd.u16();
    if (version != kRasterVersion) throw Error(ErrorKind::io, path.string() + ": unsupported version " + std::to_string(version));
    const auto tag = rd.u8();
    if (tag != static_cast<std::uint8_t>(RasterDtype::f32) && tag != static_cast<std::uint8_t>(RasterDtype::u8))
        throw Error(ErrorKind::io, path.string() + ": unknown dtype tag");
    Sg2rData out;
    out.dtype = static_cast<RasterDtype>(tag);
    const std::size_t w = rd.u32(), h = rd.u32();
    std::vector<double> v(w * h);
    for (auto& x : v) x = out.dtype == RasterDtype::f32 ? rd.f32() : static_cast<double>(rd.u8());
    if (!rd.done()) throw Error(ErrorKind::io, path.string() + ": trailing bytes after payload");
    out.values = FloatRaster(w, h, std::move(v));
    const auto side = sidecar_path(path);
    out.meta = fs::exists(side) ? read_json(side) : nlohmann::json::object();
    return out;
}

inline FloatRaster read_raster(const fs::path& path) { return read_sg2r(path).values; }

inline MaskRaster read_mask(const fs::path& path) {
    const auto d = read_sg2r(path);
    MaskRaster m(d.values.width(), d.values.height());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = d.values[i] != 0 ? 1 : 0;
    return m;
}

/// Elevations as f32 with NaN on invalid pixels; gsd and origin in the sidecar.
inline void write_dem(const fs::path& path, const DemGrid& dem) {
    FloatRaster z = dem.elevations();
    for (std::size_t i = 0; i < z.size(); ++i)
        if (!dem.valid()[i]) z[i] = std::numeric_limits<double>::quiet_NaN();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (dem.valid()[i]) lo = std::min(lo, z[i]), hi = std::max(hi, z[i]);
    nlohmann::json meta{{"kind", "dem"}, {"gsd", dem.gsd()}, {"origin", {dem.origin().x, dem.origin().y}}};
    if (lo <= hi) meta["statistics"] = {{"min", lo}, {"max", hi}, {"valid", count_set(dem.valid())}};
    write_raster(path, z, meta);
}

inline DemGrid read_dem(const fs::path& path) {
    auto d = read_sg2r(path);
    if (!d.meta.contains("gsd")) throw Error(ErrorKind::io, path.string() + ": DEM sidecar lacks gsd");
    MaskRaster valid(d.values.width(), d.values.height(), 1);
    for (std::size_t i = 0; i < valid.size(); ++i)
        if (!std::isfinite(d.values[i])) valid[i] = 0, d.values[i] = 0;
    const auto o = d.meta.value("origin", std::vector<double>{0, 0});
    return DemGrid(std::move(d.values), std::move(valid), d.meta.at("gsd").get<double>(), {o.at(0), o.at(1)});
}

/// One `c<j>.sg2r` per coefficient plus `model.json`.
inline void write_coeff_map(const fs::path& dir, const CoefficientMap& m) {
    fs::create_directories(dir);
    for (std::size_t j = 0; j < m.n_params(); ++j)
        write_raster(dir / ("c" + std::to_string(j) + ".sg2r"), m.channel(j),
                     {{"kind", "coefficient"}, {"model", to_string(m.model())}, {"index", j}});
    write_json(dir / "model.json", {{"model", to_string(m.model())}, {"n_params", m.n_params()}});
}

inline CoefficientMap read_coeff_map(const fs::path& dir) {
    const auto info = read_json(dir / "model.json");
    const ModelKind model = model_from_string(info.at("model").get<std::string>());
    std::vector<FloatRaster> ch;
    for (std::size_t j = 0; j < n_params(model); ++j) ch.push_back(read_raster(dir / ("c" + std::to_string(j) + ".sg2r")));
    return CoefficientMap(model, std::move(ch));
}

// ---------------------------------------------------------------------------
// Visual exports

/// Linear map of [lo, hi] onto [0, maxval]; NaN maps to 0.
struct DisplayScale {
    double lo = 0, hi = 1;

    static DisplayScale of(const FloatRaster& r) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (double v : r.values())
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
        if (!(lo <= hi)) return {0, 1};
        if (hi == lo) hi = lo + 1;
        return {lo, hi};
    }
    std::uint16_t quantize(double v, std::uint16_t maxval) const {
        if (!std::isfinite(v)) return 0;
        const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        return static_cast<std::uint16_t>(std::lround(t * maxval));
    }
    nlohmann::json to_json(std::uint16_t maxval) const {
        return {{"scale", {{"lo", lo}, {"hi", hi}, {"maxval", maxval}, {"value", "lo + (hi - lo) * pixel / maxval"}}}};
    }
};

inline void write_png16(const fs::path& path, const FloatRaster& r, std::optional<DisplayScale> scale = std::nullopt) {
    const DisplayScale s = scale ? *scale : DisplayScale::of(r);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw Error(ErrorKind::io, "cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::io, "libpng initialisation failed");
    }
    std::vector<png_byte> row(r.width() * 2);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::io, "libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(r.width()), static_cast<png_uint_32>(r.height()), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    // Row 0 is the southern edge (y grows north); images are written top = north.
    for (std::size_t rr = r.height(); rr-- > 0;) {
        for (std::size_t c = 0; c < r.width(); ++c) {
            const auto q = s.quantize(r(c, rr), 65535);
            row[2 * c] = static_cast<png_byte>(q >> 8);
            row[2 * c + 1] = static_cast<png_byte>(q & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    write_json(sidecar_path(path), s.to_json(65535));
}

/// Decodes a 16-bit grayscale PNG back to raster orientation (row 0 = south).
inline Raster<std::uint16_t> read_png16(const fs::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp) throw Error(ErrorKind::io, "cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorKind::io, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::io, "libpng failed reading " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const auto w = png_get_image_width(png, info), h = png_get_image_height(png, info);
    if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::io, path.string() + ": expected 16-bit grayscale");
    }
    Raster<std::uint16_t> out(w, h);
    std::vector<png_byte> row(w * 2);
    for (std::size_t rr = h; rr-- > 0;) {
        png_read_row(png, row.data(), nullptr);
        for (std::size_t c = 0; c < w; ++c) out(c, rr) = static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1]);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

/// ASCII (P2) graymap, top row = north, with the scaling in the sidecar.
inline void write_pgm(const fs::path& path, const FloatRaster& r, std::optional<DisplayScale> scale = std::nullopt,
                      std::uint16_t maxval = 255) {
    const DisplayScale s = scale ? *scale : DisplayScale::of(r);
    std::ostringstream os;
    os << "P2\n" << r.width() << ' ' << r.height() << '\n' << maxval << '\n';
    for (std::size_t rr = r.height(); rr-- > 0;) {
        for (std::size_t c = 0; c < r.width(); ++c) os << (c ? " " : "") << s.quantize(r(c, rr), maxval);
        os << '\n';
    }
    detail::spit(path, os.str());
    write_json(sidecar_path(path), s.to_json(maxval));
}

/// Raster container, 16-bit PNG and PGM side by side: `<base>.sg2r|.png|.pgm`.
inline void export_image(const fs::path& base, const FloatRaster& r, const nlohmann::json& meta = nlohmann::json::object()) {
    write_raster(fs::path(base.string() + ".sg2r"), r, meta);
    write_png16(fs::path(base.string() + ".png"), r);
    write_pgm(fs::path(base.string() + ".pgm"), r);
}

// ---------------------------------------------------------------------------
// Predictor checkpoints

/// Magic "SG2C", u16 version, u32 manifest length, JSON layer manifest, then
/// the little-endian f32 blobs in manifest order.
inline void save_checkpoint(const fs::path& path, Predictor& p) {
    const auto& cfg = p.net.config();
    nlohmann::json layers = nlohmann::json::array();
    std::string blob;
    std::size_t offset = 0;
    auto add = [&](const std::string& name, const std::string& kind, std::vector<std::size_t> shape, const std::vector<double>& v) {
        layers.push_back({{"name", name}, {"kind", kind}, {"shape", shape}, {"offset", offset}, {"count", v.size()}});
        for (double x : v) detail::put_f32(blob, x);
        offset += v.size();
    };
    for (auto* prm : p.net.params()) add(prm->name, "param", prm->shape, prm->value);
    for (auto& b : p.net.buffers()) add(b.name, "buffer", {b.data->size()}, *b.data);
    const nlohmann::json manifest{{"format", "svbrdf-predictor"},
                                  {"version", kCheckpointVersion},
                                  {"model", to_string(p.model)},
                                  {"in_channels", cfg.in_channels},
                                  {"out_channels", cfg.out_channels},
                                  {"widths", cfg.widths},
                                  {"leaky_slope", cfg.leaky_slope},
                                  {"seed", cfg.seed},
                                  {"normalization", {{"dataset_std", p.stats.dataset_std}}},
                                  {"dtype", "f32"},
                                  {"layers", layers}};
    const std::string text = manifest.dump();
    std::string b(kCheckpointMagic, 4);
    detail::put_u16(b, kCheckpointVersion);
    detail::put_u32(b, static_cast<std::uint32_t>(text.size()));
    b += text;
    b += blob;
    detail::spit(path, b);
}

inline Predictor load_checkpoint(const fs::path& path) {
    detail::Reader rd(detail::slurp(path), path.string());
    if (std::memcmp(rd.take(4), kCheckpointMagic, 4) != 0) throw Error(ErrorKind::io, path.string() + ": not a checkpoint");
    const auto version = rd.u16();
    if (version != kCheckpointVersion) throw Error(ErrorKind::io, path.string() + ": unsupported checkpoint version");
    const std::size_t n = rd.u32();
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(std::string(rd.take(n), n));
    } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorKind::io, path.string() + ": corrupt layer manifest");
    }
    TrainConfig tc;
    tc.widths = m.at("widths").get<std::vector<std::size_t>>();
    tc.leaky_slope = m.at("leaky_slope").get<double>();
    tc.seed = m.at("seed").get<std::uint64_t>();
    Predictor p(model_from_string(m.at("model").get<std::string>()), tc,
                {m.at("normalization").at("dataset_std").get<double>()});
    std::map<std::string, std::vector<double>*> slots;
    for (auto* prm : p.net.params()) slots[prm->name] = &prm->value;
    for (auto& b : p.net.buffers()) slots[b.name] = b.data;
    std::size_t filled = 0, offset = 0;
    for (const auto& layer : m.at("layers")) {
        const auto name = layer.at("name").get<std::string>();
        auto it = slots.find(name);
        if (it == slots.end()) throw Error(ErrorKind::io, path.string() + ": unknown layer " + name);
        const std::size_t count = layer.at("count").get<std::size_t>();
        if (layer.at("offset").get<std::size_t>() != offset) throw Error(ErrorKind::io, path.string() + ": layers out of order");
        offset += count;
        if (count != it->second->size()) throw Error(ErrorKind::io, path.string() + ": size mismatch for " + name);
        for (auto& x : *it->second) x = rd.f32();
        ++filled;
    }
    if (filled != slots.size()) throw Error(ErrorKind::io, path.string() + ": checkpoint misses layers");
    if (!rd.done()) throw Error(ErrorKind::io, path.string() + ": trailing bytes after weights");
    return p;
}

} // namespace svbrdf
