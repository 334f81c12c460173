#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "brdf.hpp"
#include "manifest.hpp"
#include "photogeom.hpp"
#include "raster.hpp"
#include "render.hpp"

namespace svbrdf {

struct CoeffFieldSpec {
    double mean = 0;
    double amplitude = 0;
    double correlation_length_m = 50;
};

/// Reasonable per-model coefficient means with 30% relative amplitude.
inline std::vector<CoeffFieldSpec> default_coeff_spec(ModelKind model) {
    std::vector<double> means;
    switch (model) {
    case ModelKind::M1: means = {0.6, 0.2}; break;
    case ModelKind::M2: means = {0.5, 0.2, 0.05}; break;
    case ModelKind::M3:
    case ModelKind::M4:
    case ModelKind::M5: means = {0.5, 0.2, 0.1, 0.05}; break;
    case ModelKind::M6: means = {0.3, 0.3, 0.05, 0.05}; break;
    }
    std::vector<CoeffFieldSpec> out;
    for (double m : means) out.push_back({m, 0.3 * m, 60.0});
    return out;
}

struct SynthSceneConfig {
    std::size_t dem_size = 128;
    double gsd = 5.0;
    double relief_amplitude = 100.0;
    /// Power spectral density falls off as |f|^-spectral_exponent.
    double spectral_exponent = 3.0;
    ModelKind model = ModelKind::M2;
    /// Empty means default_coeff_spec(model).
    std::vector<CoeffFieldSpec> coeff_field_spec;
    /// Weight of smoothed noise against the slope feature.
    double alpha = 0.5;
    std::size_t n_views = 4;
    std::array<double, 2> sun_elevation_range{10.0, 60.0};
    std::array<double, 2> sun_azimuth_range{0.0, 360.0};
    /// Fraction of nadir views; the rest are oblique perspective views.
    double view_mix = 0.7;
    /// Use the tabulated well-conditioned design instead of random draws.
    bool diverse_views = false;
    std::array<double, 2> oblique_tilt_range{20.0, 35.0};
    double oblique_fov_deg = 45.0;
    std::size_t crop_size = 32;
    std::size_t n_crops = 64;
    double tile_size_m = 80.0;
    SplitRatios split_ratios;
    /// Additive Gaussian noise on observed targets; 0 keeps them exact.
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    std::vector<CoeffFieldSpec> coeff_spec() const {
        return coeff_field_spec.empty() ? default_coeff_spec(model) : coeff_field_spec;
    }

    void validate() const {
        auto bad = [](const std::string& what) { throw Error(ErrorKind::config, what); };
        if (dem_size < 2) bad("dem_size must be at least 2");
        if (!(gsd > 0)) bad("gsd must be positive");
        if (!(relief_amplitude >= 0)) bad("relief_amplitude must be >= 0");
        if (!std::isfinite(spectral_exponent)) bad("spectral_exponent must be finite");
        if (n_views < 1) bad("n_views must be >= 1");
        const auto spec = coeff_spec();
        if (spec.size() != n_params(model)) bad("coeff_field_spec length must equal the model's parameter count");
        for (const auto& s : spec)
            if (!(s.correlation_length_m > 0)) bad("correlation lengths must be positive");
        if (!(alpha >= 0 && alpha <= 1)) bad("alpha must lie in [0, 1]");
        const auto [elo, ehi] = sun_elevation_range;
        if (!(elo > 0 && ehi <= 90 && elo <= ehi)) bad("sun elevation range must lie within (0, 90] degrees");
        if (!(sun_azimuth_range[0] <= sun_azimuth_range[1])) bad("sun azimuth range is reversed");
        if (!(view_mix >= 0 && view_mix <= 1)) bad("view_mix must lie in [0, 1]");
        const auto [tlo, thi] = oblique_tilt_range;
        if (!(tlo >= 0 && thi < 90 && tlo <= thi)) bad("oblique tilt range must lie within [0, 90) degrees");
        if (!(oblique_fov_deg > 0 && oblique_fov_deg < 180)) bad("oblique fov must lie in (0, 180)");
        if (crop_size < 2 || crop_size > dem_size) bad("crop_size must lie in [2, dem_size]");
        if (!(tile_size_m > 0)) bad("tile_size_m must be positive");
        if (!(noise_sigma >= 0)) bad("noise_sigma must be >= 0");
        validate_ratios(split_ratios);
    }
};

namespace detail {

using Cplx = std::complex<double>;

/// In-place DFT along rows (stride 1) or columns (stride w) of a w x h grid.
inline void dft_lines(std::vector<Cplx>& a, std::size_t w, std::size_t h, bool along_rows, bool inverse) {
    const std::size_t len = along_rows ? w : h, lines = along_rows ? h : w;
    const std::size_t stride = along_rows ? 1 : w, line_step = along_rows ? w : 1;
    std::vector<Cplx> tw(len), buf(len);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < len; ++k)
        tw[k] = std::polar(1.0, sign * 2 * kPi * static_cast<double>(k) / static_cast<double>(len));
    for (std::size_t l = 0; l < lines; ++l) {
        Cplx* base = a.data() + l * line_step;
        for (std::size_t k = 0; k < len; ++k) {
            Cplx s = 0;
            for (std::size_t n = 0; n < len; ++n) s += base[n * stride] * tw[(k * n) % len];
            buf[k] = s;
        }
        for (std::size_t k = 0; k < len; ++k) base[k * stride] = inverse ? buf[k] / static_cast<double>(len) : buf[k];
    }
}

/// Signed frequency of DFT bin k, in cycles per pixel.
inline double bin_frequency(std::size_t k, std::size_t n) {
    const auto kk = static_cast<double>(k), nn = static_cast<double>(n);
    return k <= n / 2 ? kk / nn : (kk - nn) / nn;
}

/// White Gaussian noise shaped by a radial transfer function H(|f|).
/// Returns the field scaled so that its expected per-pixel variance is 1.
template <class Transfer>
FloatRaster shaped_noise(std::size_t w, std::size_t h, std::uint64_t seed, Transfer&& transfer) {
    std::mt19937_64 rng(seed);
    std::vector<Cplx> a(w * h);
    for (auto& v : a) v = gaussian(rng);
    dft_lines(a, w, h, true, false);
    dft_lines(a, w, h, false, false);
    double power = 0;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            const double fx = bin_frequency(c, w), fy = bin_frequency(r, h);
            const double g = transfer(std::sqrt(fx * fx + fy * fy));
            a[r * w + c] *= g;
            power += g * g;
        }
    dft_lines(a, w, h, true, true);
    dft_lines(a, w, h, false, true);
    const double scale = power > 0 ? 1.0 / std::sqrt(power / static_cast<double>(w * h)) : 0.0;
    FloatRaster out(w, h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i].real() * scale;
    return out;
}

inline FloatRaster standardized(const FloatRaster& x) {
    double mean = 0;
    for (double v : x.values()) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0;
    for (double v : x.values()) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.size()));
    FloatRaster out(x.width(), x.height());
    if (!(sd > 1e-12)) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

inline double uniform_in(std::mt19937_64& rng, const std::array<double, 2>& range) {
    return range[0] + (range[1] - range[0]) * unit(rng);
}

} // namespace detail

/// fBm heightfield by spectral synthesis, rescaled to [0, relief_amplitude].
inline DemGrid generate_dem(const SynthSceneConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.dem_size;
    FloatRaster z(n, n);
    if (cfg.relief_amplitude > 0) {
        const double beta = cfg.spectral_exponent;
        z = detail::shaped_noise(n, n, sub_seed(cfg.seed, "dem"),
                                 [beta](double f) { return f > 0 ? std::pow(f, -beta / 2) : 0.0; });
        const auto [lo, hi] = std::minmax_element(z.values().begin(), z.values().end());
        const double zlo = *lo, span = *hi - *lo;
        for (auto& v : z.values()) v = span > 0 ? (v - zlo) / span * cfg.relief_amplitude : 0.0;
    }
    return DemGrid(std::move(z), cfg.gsd);
}

/// Slope angle (radians) of every DEM pixel.
inline FloatRaster slope_angle(const DemGrid& dem) {
    const auto n = surface_normals(dem);
    FloatRaster out(dem.width(), dem.height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = angle_between(n[i], Vec3{0, 0, 1});
    return out;
}

/// coefficient_j = mean_j + amplitude_j * (alpha * smoothed_noise_j + (1 - alpha) * slope_feature),
/// both features standardized. The noise is Gaussian-filtered with sigma equal
/// to the correlation length.
inline CoefficientMap generate_coeff_field(const SynthSceneConfig& cfg, const DemGrid& dem) {
    cfg.validate();
    const auto spec = cfg.coeff_spec();
    const std::size_t w = dem.width(), h = dem.height();
    const FloatRaster slope = detail::standardized(slope_angle(dem));
    std::vector<FloatRaster> channels;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double sigma_px = spec[j].correlation_length_m / dem.gsd();
        FloatRaster noise(w, h);
        if (cfg.alpha > 0)
            noise = detail::shaped_noise(w, h, mix64(sub_seed(cfg.seed, "coeffs") + j), [sigma_px](double f) {
                return std::exp(-2 * kPi * kPi * sigma_px * sigma_px * f * f);
            });
        FloatRaster ch(w, h);
        for (std::size_t i = 0; i < ch.size(); ++i)
            ch[i] = spec[j].mean + spec[j].amplitude * (cfg.alpha * noise[i] + (1 - cfg.alpha) * slope[i]);
        channels.push_back(std::move(ch));
    }
    return CoefficientMap(cfg.model, std::move(channels));
}

struct SynthView {
    CameraPose camera;
    Vec3 sun_dir;
    RenderedImage image;
};

struct SynthSample {
    SampleManifest manifest;
    /// Exact render of the crop under the manifest geometry.
    FloatRaster target;
    /// Target plus optional Gaussian noise; what estimators see.
    FloatRaster observed;
};

struct GroundTruthBundle {
    DemGrid dem;
    CoefficientMap true_coeffs;
    std::vector<SynthView> views;
    std::vector<SynthSample> samples;

    std::vector<SampleManifest> manifests() const {
        std::vector<SampleManifest> out;
        for (const auto& s : samples) out.push_back(s.manifest);
        return out;
    }
};

/// Oblique camera looking at `target` from a tilt off nadir and a compass
/// azimuth, far enough away that the whole scene fits in the field of view.
inline CameraPose oblique_camera(const Vec3& target, double extent_m, double tilt_deg, double azimuth_deg,
                                 double fov_deg, std::size_t w, std::size_t h) {
    const double dist = 0.75 * extent_m / std::tan(deg2rad(fov_deg) / 2) + extent_m;
    const double t = deg2rad(tilt_deg), az = deg2rad(azimuth_deg);
    const Vec3 offset{std::sin(t) * std::sin(az), std::sin(t) * std::cos(az), std::cos(t)};
    CameraPose cam;
    cam.position = target + dist * offset;
    cam.orientation = look_at(cam.position, target);
    cam.fov_deg = fov_deg;
    cam.image_width = w;
    cam.image_height = h;
    cam.projection = Projection::perspective;
    return cam;
}

/// Renders a manifest's crop from the bundle's truth; used to check targets.
inline FloatRaster rerender(const DemGrid& dem, const CoefficientMap& coeffs, const SampleManifest& m) {
    const auto c0 = static_cast<std::size_t>(m.crop.col0()), r0 = static_cast<std::size_t>(m.crop.row0());
    return render(extract_crop(dem, m.crop), coeffs.window(c0, r0, m.crop.size_px, m.crop.size_px), m.camera, m.sun_dir)
        .radiance;
}

struct ViewGeometry {
    CameraPose camera;
    Vec3 sun_dir;
};

/// Views whose per-pixel M2 systems stay well conditioned: a tabulated
/// four-view design (sun elevation, sun azimuth, camera tilt, camera azimuth)
/// with condition number below ~16 for facets up to 35 degrees of slope.
/// Each block of four is rotated by a random azimuth.
inline std::vector<ViewGeometry> diverse_views(const DemGrid& dem, std::size_t n, std::uint64_t seed) {
    static constexpr double kDesign[4][4] = {{41, 0, 5, 292}, {43, 185, 4, 321}, {84, 1, 31, 121}, {48, 183, 30, 358}};
    const std::size_t w = dem.width(), h = dem.height();
    const double extent = static_cast<double>(std::max(w, h) - 1) * dem.gsd();
    const auto& z = dem.elevations().values();
    const double zmax = *std::max_element(z.begin(), z.end());
    const Vec3 center = dem.world_point(0, 0) + Vec3{extent / 2, extent / 2, 0};
    std::mt19937_64 rng(sub_seed(seed, "diverse-views"));
    std::vector<ViewGeometry> out;
    double rot = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % 4 == 0) rot = 360 * detail::unit(rng);
        const auto& d = kDesign[k % 4];
        out.push_back({oblique_camera({center.x, center.y, zmax}, extent, d[2], d[3] + rot, 45.0, w, h),
                       sun_direction(d[0], d[1] + rot)});
    }
    return out;
}

inline constexpr int kMaxViewRetries = 16;

/// Samples crops per view (budget proportional to the valid crop area),
/// assigns geographic splits and renders each crop's target from `coeffs`.
inline std::vector<SynthSample> sample_crops(const SynthSceneConfig& cfg, const DemGrid& dem, const CoefficientMap& coeffs,
                                             const std::vector<ViewGeometry>& views) {
    cfg.validate();
    const MaskRaster eroded = erode_mask(dem.valid(), cfg.crop_size);
    const double area = static_cast<double>(count_set(eroded));
    if (area == 0) throw Error(ErrorKind::empty_domain, "no legal crop centers");
    const auto budget = allocate_crop_budget(std::vector<double>(views.size(), area), cfg.n_crops);

    std::vector<SynthSample> samples;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const auto crops = sample_crop_centers(eroded, budget[v], mix64(sub_seed(cfg.seed, "crops") + v), cfg.crop_size,
                                               dem.gsd());
        for (const auto& crop : crops) {
            SampleManifest m;
            m.sample_id = samples.size();
            m.view_id = v;
            m.crop = crop;
            m.dem_path = "dem.sg2r";
            m.target_path = "targets/" + std::to_string(m.sample_id) + ".sg2r";
            m.camera = views[v].camera;
            m.camera.image_width = m.camera.image_height = cfg.crop_size;
            m.sun_dir = views[v].sun_dir;
            m.fov_deg = m.camera.fov_deg;
            m.footprint = crop_footprint(crop, dem.origin());
            samples.push_back({m, {}, {}});
        }
    }

    std::vector<Vec2> centers;
    for (const auto& s : samples) centers.push_back(crop_center_world(s.manifest.crop, dem.origin()));
    const auto splits = assign_geographic_split(centers, cfg.tile_size_m, cfg.split_ratios, sub_seed(cfg.seed, "split"));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].manifest.split = splits[i].split;
        samples[i].manifest.tile_id = splits[i].tile_id;
    }

    parallel_for(samples.size(), [&](std::size_t i) {
        auto& s = samples[i];
        const auto& m = s.manifest;
        s.target = rerender(dem, coeffs, m);
        s.observed = s.target;
        if (cfg.noise_sigma > 0) {
            std::mt19937_64 rng(mix64(sub_seed(cfg.seed, "noise") + m.sample_id));
            for (auto& v : s.observed.values()) v += cfg.noise_sigma * detail::gaussian(rng);
        }
    });
    return samples;
}

/// Draws n_views (camera, sun) pairs, renders the full scene for each, then
/// samples crops from them.
inline GroundTruthBundle generate_views(const SynthSceneConfig& cfg, const DemGrid& dem, const CoefficientMap& coeffs) {
    cfg.validate();
    if (coeffs.width() != dem.width() || coeffs.height() != dem.height())
        throw Error(ErrorKind::alignment, "coefficient map is not aligned to the DEM");
    const std::size_t w = dem.width(), h = dem.height();
    const double extent = static_cast<double>(std::max(w, h) - 1) * dem.gsd();
    const auto& z = dem.elevations().values();
    double zmean = 0;
    for (double v : z) zmean += v;
    zmean /= static_cast<double>(z.size());
    const double zmax = *std::max_element(z.begin(), z.end());
    const Vec3 center = dem.world_point(0, 0) + Vec3{extent / 2, extent / 2, 0};

    GroundTruthBundle b{dem, coeffs, std::vector<SynthView>(cfg.n_views), {}};
    if (cfg.diverse_views) {
        const auto geo = diverse_views(dem, cfg.n_views, cfg.seed);
        parallel_for(cfg.n_views, [&](std::size_t v) {
            b.views[v] = {geo[v].camera, geo[v].sun_dir, render(make_context(dem, geo[v].camera, geo[v].sun_dir), coeffs)};
        });
        b.samples = sample_crops(cfg, dem, coeffs, geo);
        return b;
    }
    parallel_for(cfg.n_views, [&](std::size_t v) {
        std::mt19937_64 rng(mix64(sub_seed(cfg.seed, "views") + v));
        for (int attempt = 0;; ++attempt) {
            const bool nadir = detail::unit(rng) < cfg.view_mix;
            const double el = detail::uniform_in(rng, cfg.sun_elevation_range);
            const double az = detail::uniform_in(rng, cfg.sun_azimuth_range);
            const double tilt = detail::uniform_in(rng, cfg.oblique_tilt_range);
            const double cam_az = 360.0 * detail::unit(rng);
            CameraPose cam = nadir ? nadir_camera({center.x, center.y, zmax + extent}, w, h)
                                   : oblique_camera({center.x, center.y, zmean}, extent, tilt, cam_az,
                                                    cfg.oblique_fov_deg, w, h);
            const Vec3 sun = sun_direction(el, az);
            try {
                b.views[v] = {cam, sun, render(make_context(dem, cam, sun), coeffs)};
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::degenerate_geometry || attempt + 1 >= kMaxViewRetries) throw;
            }
        }
    });

    std::vector<ViewGeometry> geo;
    for (const auto& v : b.views) geo.push_back({v.camera, v.sun_dir});
    b.samples = sample_crops(cfg, dem, coeffs, geo);
    return b;
}

inline GroundTruthBundle generate_scene(const SynthSceneConfig& cfg) {
    const DemGrid dem = generate_dem(cfg);
    const CoefficientMap coeffs = generate_coeff_field(cfg, dem);
    return generate_views(cfg, dem, coeffs);
}

} // namespace svbrdf
