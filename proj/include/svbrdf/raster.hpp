#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"

namespace svbrdf {

struct Vec2 {
    double x = 0, y = 0;
    bool operator==(const Vec2&) const = default;
};

struct PixelCoord {
    std::int64_t col = 0, row = 0;
    bool operator==(const PixelCoord&) const = default;
};

/// Elevation raster with ground sample distance and validity mask.
///
/// World coordinates: x grows with the column index (east), y grows with the
/// row index (north), z is elevation. `origin` is the world position of the
/// center of pixel (0, 0).
class DemGrid {
public:
    DemGrid() = default;
    DemGrid(FloatRaster elevations, MaskRaster valid, double gsd, Vec2 origin = {})
        : elevations_(std::move(elevations)), valid_(std::move(valid)), gsd_(gsd), origin_(origin) {
        if (!elevations_.same_shape(valid_))
            throw Error(ErrorKind::invalid_input, "elevation and mask shapes differ");
        if (!(gsd_ > 0) || !std::isfinite(gsd_))
            throw Error(ErrorKind::invalid_input, "gsd must be positive");
        if (elevations_.width() < 2 || elevations_.height() < 2)
            throw Error(ErrorKind::invalid_input, "DEM must be at least 2x2");
        for (std::size_t i = 0; i < elevations_.size(); ++i)
            if (valid_[i] && !std::isfinite(elevations_[i]))
                throw Error(ErrorKind::invalid_input, "valid pixel holds non-finite elevation");
    }
    /// Fully valid DEM.
    DemGrid(FloatRaster elevations, double gsd, Vec2 origin = {})
        : DemGrid(elevations, MaskRaster(elevations.width(), elevations.height(), 1), gsd, origin) {}

    std::size_t width() const noexcept { return elevations_.width(); }
    std::size_t height() const noexcept { return elevations_.height(); }
    double gsd() const noexcept { return gsd_; }
    Vec2 origin() const noexcept { return origin_; }
    const FloatRaster& elevations() const noexcept { return elevations_; }
    const MaskRaster& valid() const noexcept { return valid_; }
    double z(std::size_t col, std::size_t row) const { return elevations_(col, row); }

    Vec3 world_point(std::size_t col, std::size_t row) const {
        return {origin_.x + static_cast<double>(col) * gsd_, origin_.y + static_cast<double>(row) * gsd_,
                elevations_(col, row)};
    }

    /// Sub-grid [col0, col0+w) x [row0, row0+h) with the origin moved accordingly.
    DemGrid crop(std::size_t col0, std::size_t row0, std::size_t w, std::size_t h) const {
        return DemGrid(elevations_.window(col0, row0, w, h), valid_.window(col0, row0, w, h), gsd_,
                       {origin_.x + static_cast<double>(col0) * gsd_, origin_.y + static_cast<double>(row0) * gsd_});
    }

private:
    FloatRaster elevations_;
    MaskRaster valid_;
    double gsd_ = 1.0;
    Vec2 origin_;
};

struct NormalizationStats {
    double dataset_std = 1.0;
};

/// Square crop of `size_px` pixels. For even sizes the window spans
/// [center - s/2, center + s/2 - 1]; in general it starts at center - floor(s/2).
struct CropSpec {
    std::size_t size_px = 0;
    double gsd = 1.0;
    PixelCoord center;

    std::int64_t col0() const { return center.col - static_cast<std::int64_t>(size_px / 2); }
    std::int64_t row0() const { return center.row - static_cast<std::int64_t>(size_px / 2); }
    bool fits(std::size_t width, std::size_t height) const {
        return col0() >= 0 && row0() >= 0 && col0() + static_cast<std::int64_t>(size_px) <= static_cast<std::int64_t>(width) &&
               row0() + static_cast<std::int64_t>(size_px) <= static_cast<std::int64_t>(height);
    }
    bool operator==(const CropSpec&) const = default;
};

inline DemGrid extract_crop(const DemGrid& dem, const CropSpec& crop) {
    if (!crop.fits(dem.width(), dem.height()))
        throw Error(ErrorKind::invalid_input, "crop footprint leaves the parent raster");
    return dem.crop(static_cast<std::size_t>(crop.col0()), static_cast<std::size_t>(crop.row0()), crop.size_px,
                    crop.size_px);
}

template <class T>
Raster<T> extract_crop(const Raster<T>& r, const CropSpec& crop) {
    if (!crop.fits(r.width(), r.height()))
        throw Error(ErrorKind::invalid_input, "crop footprint leaves the parent raster");
    return r.window(static_cast<std::size_t>(crop.col0()), static_cast<std::size_t>(crop.row0()), crop.size_px,
                    crop.size_px);
}

/// Ground area covered by an s x s crop, in square meters.
inline double footprint_area(std::size_t size_px, double gsd) {
    const double side = static_cast<double>(size_px) * gsd;
    return side * side;
}

/// Erosion radius in meters for crop size s: (s * gsd) / 2.
inline double erosion_radius_m(std::size_t size_px, double gsd) { return static_cast<double>(size_px) * gsd / 2.0; }

/// Mean-center the crop and divide by the dataset-wide standard deviation.
inline FloatRaster normalize_crop(const FloatRaster& crop, const NormalizationStats& stats) {
    if (crop.empty()) throw Error(ErrorKind::invalid_input, "empty crop");
    if (!(stats.dataset_std > 0) || !std::isfinite(stats.dataset_std))
        throw Error(ErrorKind::invalid_stats, "dataset_std must be finite and positive");
    double sum = 0;
    for (double v : crop.values()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, "non-finite elevation in crop");
        sum += v;
    }
    const double mean = sum / static_cast<double>(crop.size());
    FloatRaster out(crop.width(), crop.height());
    for (std::size_t i = 0; i < crop.size(); ++i) out[i] = (crop[i] - mean) / stats.dataset_std;
    return out;
}

/// Pooled standard deviation of raw elevations over a set of crops.
inline NormalizationStats dataset_stats(const std::vector<FloatRaster>& crops) {
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& c : crops)
        for (double v : c.values()) {
            sum += v;
            ++n;
        }
    if (n < 2) throw Error(ErrorKind::invalid_stats, "need at least two elevations");
    const double mean = sum / static_cast<double>(n);
    for (const auto& c : crops)
        for (double v : c.values()) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / static_cast<double>(n));
    if (!(sd > 0)) throw Error(ErrorKind::invalid_stats, "elevations have zero spread");
    return {sd};
}

/// Legal crop centers: pixels whose whole s x s footprint is valid and inside
/// the raster. Pixels outside the raster count as invalid.
inline MaskRaster erode_mask(const MaskRaster& valid, std::size_t size_px) {
    if (size_px < 2) throw Error(ErrorKind::invalid_input, "crop size must be >= 2");
    const std::size_t w = valid.width(), h = valid.height();
    MaskRaster out(w, h, 0);
    if (size_px > w || size_px > h) return out;

    // Summed-area table of invalid pixels, (w+1) x (h+1).
    std::vector<std::int64_t> sat((w + 1) * (h + 1), 0);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            sat[(r + 1) * (w + 1) + c + 1] = (valid(c, r) ? 0 : 1) + sat[r * (w + 1) + c + 1] +
                                             sat[(r + 1) * (w + 1) + c] - sat[r * (w + 1) + c];

    const std::size_t lo = size_px / 2;
    for (std::size_t r = lo; r + size_px - lo <= h; ++r)
        for (std::size_t c = lo; c + size_px - lo <= w; ++c) {
            const std::size_t c0 = c - lo, r0 = r - lo, c1 = c0 + size_px, r1 = r0 + size_px;
            const std::int64_t bad =
                sat[r1 * (w + 1) + c1] - sat[r0 * (w + 1) + c1] - sat[r1 * (w + 1) + c0] + sat[r0 * (w + 1) + c0];
            out(c, r) = bad == 0 ? 1 : 0;
        }
    return out;
}

inline MaskRaster erode_mask(const MaskRaster& valid, const CropSpec& crop) { return erode_mask(valid, crop.size_px); }


/// Up to n distinct crop centers drawn uniformly from the eroded mask.
inline std::vector<CropSpec> sample_crop_centers(const MaskRaster& eroded, std::size_t n, std::uint64_t seed,
                                                 std::size_t size_px, double gsd) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < eroded.size(); ++i)
        if (eroded[i]) pool.push_back(i);
    const std::size_t k = std::min(n, pool.size());
    std::mt19937_64 rng(seed);
    std::vector<CropSpec> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(detail::bounded(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
        const std::size_t idx = pool[i];
        out.push_back({size_px, gsd,
                       {static_cast<std::int64_t>(idx % eroded.width()), static_cast<std::int64_t>(idx / eroded.width())}});
    }
    return out;
}

/// Split `total` crops across sources proportionally to their valid areas
/// (largest remainder, ties go to the lower index).
inline std::vector<std::size_t> allocate_crop_budget(const std::vector<double>& valid_areas, std::size_t total) {
    double sum = 0;
    for (double a : valid_areas) {
        if (!(a >= 0) || !std::isfinite(a)) throw Error(ErrorKind::invalid_input, "areas must be finite and >= 0");
        sum += a;
    }
    if (!(sum > 0)) throw Error(ErrorKind::invalid_input, "at least one area must be positive");

    std::vector<std::size_t> counts(valid_areas.size());
    std::vector<double> frac(valid_areas.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < valid_areas.size(); ++i) {
        const double q = static_cast<double>(total) * valid_areas[i] / sum;
        counts[i] = static_cast<std::size_t>(std::floor(q));
        frac[i] = q - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    // Floating-point floors can overshoot by one in pathological cases.
    while (assigned > total) {
        auto it = std::max_element(counts.begin(), counts.end());
        --*it;
        --assigned;
    }
    std::vector<std::size_t> order(valid_areas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
        if (valid_areas[order[i]] > 0) {
            ++counts[order[i]];
            ++assigned;
        }
    }
    return counts;
}

enum class Split { train, val, test };

inline const char* to_string(Split s) {
    switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "train";
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw Error(ErrorKind::invalid_input, "unknown split '" + s + "'");
}

struct SplitRatios {
    double train = 0.8, val = 0.1, test = 0.1;
};

struct SplitAssignment {
    Split split = Split::train;
    std::int64_t tile_id = 0;
};

inline std::int64_t tile_id_of(Vec2 p, double tile_size) {
    const auto tx = static_cast<std::int64_t>(std::floor(p.x / tile_size));
    const auto ty = static_cast<std::int64_t>(std::floor(p.y / tile_size));
    return static_cast<std::int64_t>((static_cast<std::uint64_t>(tx) << 32) ^ (static_cast<std::uint64_t>(ty) & 0xffffffffULL));
}

inline Split split_of_tile(std::int64_t tile_id, const SplitRatios& ratios, std::uint64_t seed) {
    const std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(tile_id)));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    if (u < ratios.train) return Split::train;
    if (u < ratios.train + ratios.val) return Split::val;
    return Split::test;
}

inline void validate_ratios(const SplitRatios& r) {
    if (!(r.train > 0 && r.val > 0 && r.test > 0))
        throw Error(ErrorKind::invalid_input, "split ratios must be positive");
    if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9)
        throw Error(ErrorKind::invalid_input, "split ratios must sum to 1");
}

/// Tile the world plane and tag each center with its tile's split.
inline std::vector<SplitAssignment> assign_geographic_split(const std::vector<Vec2>& centers, double tile_size,
                                                            const SplitRatios& ratios, std::uint64_t seed) {
    if (!(tile_size > 0) || !std::isfinite(tile_size)) throw Error(ErrorKind::invalid_input, "tile_size must be positive");
    validate_ratios(ratios);
    std::vector<SplitAssignment> out;
    out.reserve(centers.size());
    for (const auto& c : centers) {
        const std::int64_t id = tile_id_of(c, tile_size);
        out.push_back({split_of_tile(id, ratios, seed), id});
    }
    return out;
}

} // namespace svbrdf
