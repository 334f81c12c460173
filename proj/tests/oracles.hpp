#pragma once

// Independent reference implementations used only by the test suites.

#include <cmath>
#include <random>
#include <vector>

#include "svbrdf/brdf.hpp"
#include "svbrdf/raster.hpp"
#include "svbrdf/render.hpp"

namespace oracle {

using namespace svbrdf;

inline bool window_all_valid(const MaskRaster& valid, std::int64_t col, std::int64_t row, std::size_t s) {
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

inline double lerp_height(const FloatRaster& z, double fx, double fy) {
    const double ix = std::floor(fx), iy = std::floor(fy);
    std::size_t x0 = static_cast<std::size_t>(ix), y0 = static_cast<std::size_t>(iy);
    if (x0 + 1 >= z.width()) x0 = z.width() - 2;
    if (y0 + 1 >= z.height()) y0 = z.height() - 2;
    const double tx = fx - static_cast<double>(x0), ty = fy - static_cast<double>(y0);
    const double bottom = z(x0, y0) + tx * (z(x0 + 1, y0) - z(x0, y0));
    const double top = z(x0, y0 + 1) + tx * (z(x0 + 1, y0 + 1) - z(x0, y0 + 1));
    return bottom + ty * (top - bottom);
}

/// Exhaustive line-of-sight test: every gsd/2 sample along the sun ray up to
/// the grid boundary, no early exit on elevation.
inline MaskRaster line_of_sight_shadows(const DemGrid& dem, const Vec3& sun) {
    const std::size_t w = dem.width(), h = dem.height();
    MaskRaster out(w, h, 0);
    if (sun.z <= 0) return MaskRaster(w, h, 1);
    const double half = dem.gsd() / 2.0;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            bool blocked = false;
            for (std::size_t k = 1; k < 8 * (w + h) * 1000; ++k) {
                const double s = static_cast<double>(k);
                const double fx = static_cast<double>(c) + s * (half * sun.x / dem.gsd());
                const double fy = static_cast<double>(r) + s * (half * sun.y / dem.gsd());
                if (fx < 0 || fy < 0 || fx > static_cast<double>(w - 1) || fy > static_cast<double>(h - 1)) break;
                const double ray = dem.z(c, r) + s * (half * sun.z);
                if (ray > 1e12) break;
                if (lerp_height(dem.elevations(), fx, fy) > ray) blocked = true;
            }
            out(c, r) = blocked ? 1 : 0;
        }
    return out;
}

/// Gaussian-windowed SSIM at the single 11x11 window whose top-left pixel is
/// (c0, r0), evaluated straight from the definition.
inline double ssim_at(const FloatRaster& a, const FloatRaster& b, std::size_t c0, std::size_t r0, double peak) {
    double wsum = 0, weights[11][11];
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            const double di = i - 5, dj = j - 5;
            weights[i][j] = std::exp(-(di * di + dj * dj) / (2 * 1.5 * 1.5));
            wsum += weights[i][j];
        }
    double mx = 0, my = 0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            const double wgt = weights[i][j] / wsum;
            mx += wgt * a(c0 + j, r0 + i);
            my += wgt * b(c0 + j, r0 + i);
        }
    double vx = 0, vy = 0, cxy = 0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            const double wgt = weights[i][j] / wsum;
            const double dx = a(c0 + j, r0 + i) - mx, dy = b(c0 + j, r0 + i) - my;
            vx += wgt * dx * dx;
            vy += wgt * dy * dy;
            cxy += wgt * dx * dy;
        }
    const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
    return ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

/// Random small scene: rough DEM, random M-model coefficient map, random
/// oblique sun and perspective camera.
struct Scene {
    DemGrid dem;
    CoefficientMap coeffs;
    CameraPose camera;
    Vec3 sun;
    FloatRaster target;
};

inline Scene random_scene(std::uint64_t seed, std::size_t n, ModelKind model) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    FloatRaster z(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            z(c, r) = 6 * std::sin(0.4 * static_cast<double>(c) + u(rng)) + 4 * std::cos(0.3 * static_cast<double>(r)) + u(rng);
    Scene s{DemGrid(z, 2.0), CoefficientMap(model, n, n), {}, {}, FloatRaster(n, n)};
    for (std::size_t j = 0; j < s.coeffs.n_params(); ++j)
        for (auto& v : s.coeffs.channel(j).values()) v = 0.5 + 0.3 * u(rng);
    std::uniform_real_distribution<double> el(25, 70), az(0, 360);
    s.sun = sun_direction(el(rng), az(rng));
    s.camera.position = {static_cast<double>(n) + 10 * u(rng), static_cast<double>(n) + 10 * u(rng), 80};
    s.camera.orientation = look_at(s.camera.position, {static_cast<double>(n), static_cast<double>(n), 0});
    s.camera.projection = Projection::perspective;
    for (auto& v : s.target.values()) v = 0.5 + 0.5 * u(rng);
    return s;
}

} // namespace oracle
