#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "brdf.hpp"
#include "photogeom.hpp"
#include "raster.hpp"

namespace svbrdf {

/// Heightfield sampled at fractional pixel coordinates; clamps to the grid.
inline double bilinear_height(const FloatRaster& z, double fx, double fy) {
    const std::size_t w = z.width(), h = z.height();
    const double cx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
    const double cy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const auto x0 = std::min(static_cast<std::size_t>(cx), w - 2);
    const auto y0 = std::min(static_cast<std::size_t>(cy), h - 2);
    const double tx = cx - static_cast<double>(x0), ty = cy - static_cast<double>(y0);
    return z(x0, y0) * (1 - tx) * (1 - ty) + z(x0 + 1, y0) * tx * (1 - ty) + z(x0, y0 + 1) * (1 - tx) * ty +
           z(x0 + 1, y0 + 1) * tx * ty;
}

/// Sun visibility by ray marching the bilinear heightfield from each pixel's
/// surface point towards the sun in 3D steps of gsd/2. A pixel is shadowed
/// when some sample lies strictly below the terrain before the ray leaves the
/// grid. Returns 1 for shadowed pixels.
inline MaskRaster shadow_mask(const DemGrid& dem, const Vec3& sun_dir) {
    const std::size_t w = dem.width(), h = dem.height();
    if (!(sun_dir.z > 0)) return MaskRaster(w, h, 1);
    MaskRaster out(w, h, 0);
    const FloatRaster& z = dem.elevations();
    const double zmax = *std::max_element(z.values().begin(), z.values().end());
    const double step = dem.gsd() / 2.0;
    const double dx = step * sun_dir.x / dem.gsd(), dy = step * sun_dir.y / dem.gsd(), dz = step * sun_dir.z;
    const double xmax = static_cast<double>(w - 1), ymax = static_cast<double>(h - 1);

    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            const double z0 = z(c, r);
            for (std::size_t k = 1;; ++k) {
                const double kd = static_cast<double>(k);
                const double fx = static_cast<double>(c) + kd * dx;
                const double fy = static_cast<double>(r) + kd * dy;
                const double fz = z0 + kd * dz;
                if (fx < 0 || fy < 0 || fx > xmax || fy > ymax || fz > zmax) break;
                if (bilinear_height(z, fx, fy) > fz) {
                    out(c, r) = 1;
                    break;
                }
            }
        }
    return out;
}

/// Everything about a (crop, camera, sun) triple that does not depend on the
/// coefficients. Shadows are treated as constant with respect to them.
struct ShadingContext {
    std::shared_ptr<const ViewLightGeometry> geometry;
    MaskRaster shadow;

    std::size_t width() const { return shadow.width(); }
    std::size_t height() const { return shadow.height(); }
    std::size_t size() const { return shadow.size(); }
};

inline ShadingContext make_context(const DemGrid& dem, const CameraPose& camera, const Vec3& sun_dir) {
    ShadingContext ctx;
    ctx.geometry = std::make_shared<const ViewLightGeometry>(view_light_field(dem, camera, sun_dir));
    ctx.shadow = shadow_mask(dem, sun_dir);
    return ctx;
}

/// Per-pixel basis vectors for a model, cached for repeated shading.
inline std::vector<Coeffs> basis_field(const ShadingContext& ctx, ModelKind model) {
    std::vector<Coeffs> out(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i) out[i] = basis(model, ctx.geometry->at(i));
    return out;
}

/// A shading context paired with the image it should reproduce.
struct TargetView {
    ShadingContext ctx;
    FloatRaster target;
    MaskRaster valid;
};

struct RenderedImage {
    /// Unclamped radiance factor; exactly 0 on shadowed pixels.
    FloatRaster radiance;
    MaskRaster shadow;
    std::shared_ptr<const ViewLightGeometry> geometry;
};

/// Radiance clamped at zero for display/export.
inline FloatRaster display(const RenderedImage& img) {
    FloatRaster out = img.radiance;
    for (auto& v : out.values()) v = std::max(0.0, v);
    return out;
}

inline RenderedImage render(const ShadingContext& ctx, const CoefficientMap& coeffs) {
    if (coeffs.width() != ctx.width() || coeffs.height() != ctx.height())
        throw Error(ErrorKind::alignment, "coefficient map is not aligned to the crop");
    RenderedImage img{FloatRaster(ctx.width(), ctx.height()), ctx.shadow, ctx.geometry};
    const ModelKind m = coeffs.model();
    for (std::size_t i = 0; i < ctx.size(); ++i)
        img.radiance[i] = ctx.shadow[i] ? 0.0 : eval(m, coeffs.at(i), ctx.geometry->at(i));
    return img;
}

inline RenderedImage render(const DemGrid& dem, const CoefficientMap& coeffs, const CameraPose& camera,
                            const Vec3& sun_dir) {
    if (coeffs.width() != dem.width() || coeffs.height() != dem.height())
        throw Error(ErrorKind::alignment, "coefficient map is not aligned to the crop");
    return render(make_context(dem, camera, sun_dir), coeffs);
}

/// Adjoint of the shading map: per-pixel basis scaled by the incoming image
/// gradient, zero on shadowed pixels.
inline std::vector<FloatRaster> backward(const FloatRaster& image_grad, const ShadingContext& ctx, ModelKind model) {
    if (image_grad.width() != ctx.width() || image_grad.height() != ctx.height())
        throw Error(ErrorKind::alignment, "image gradient is not aligned to the rendered image");
    std::vector<FloatRaster> grads(n_params(model), FloatRaster(ctx.width(), ctx.height()));
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (ctx.shadow[i] || image_grad[i] == 0.0) continue;
        const Coeffs b = basis(model, ctx.geometry->at(i));
        for (std::size_t j = 0; j < b.size(); ++j) grads[j][i] = image_grad[i] * b[j];
    }
    return grads;
}

struct LossReport {
    double mse = 0;
    double sum_sq = 0;
    /// rendered - target on counted pixels, 0 elsewhere.
    FloatRaster residual;
    std::size_t n_pixels = 0;
};

/// MSE over valid (and, when `mask_shadows`, unshadowed) pixels.
inline LossReport photometric_loss(const RenderedImage& rendered, const FloatRaster& target, const MaskRaster& valid,
                                   bool mask_shadows = true) {
    if (!rendered.radiance.same_shape(target) || !target.same_shape(valid))
        throw Error(ErrorKind::shape, "rendered, target and mask shapes differ");
    LossReport rep{0, 0, FloatRaster(target.width(), target.height()), 0};
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (!valid[i] || (mask_shadows && rendered.shadow[i])) continue;
        const double r = rendered.radiance[i] - target[i];
        rep.residual[i] = r;
        rep.sum_sq += r * r;
        ++rep.n_pixels;
    }
    if (rep.n_pixels == 0) throw Error(ErrorKind::empty_domain, "no pixels to compare");
    rep.mse = rep.sum_sq / static_cast<double>(rep.n_pixels);
    return rep;
}

/// d(MSE)/d(rendered) = 2 * residual / n, scaled by an extra normalizer when
/// several losses are pooled.
inline FloatRaster loss_gradient(const LossReport& rep, double normalizer = 0) {
    const double n = normalizer > 0 ? normalizer : static_cast<double>(rep.n_pixels);
    FloatRaster g(rep.residual.width(), rep.residual.height());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * rep.residual[i] / n;
    return g;
}

} // namespace svbrdf
