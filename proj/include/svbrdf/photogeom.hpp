#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "core.hpp"
#include "raster.hpp"

namespace svbrdf {

enum class Projection { perspective, orthographic_nadir };

inline const char* to_string(Projection p) {
    return p == Projection::perspective ? "perspective" : "orthographic-nadir";
}

inline Projection projection_from_string(const std::string& s) {
    if (s == "perspective") return Projection::perspective;
    if (s == "orthographic-nadir") return Projection::orthographic_nadir;
    throw Error(ErrorKind::invalid_input, "unknown projection '" + s + "'");
}

/// Pinhole or orthographic camera. Camera frame: x right, y down, z forward;
/// `orientation` maps world vectors into that frame.
struct CameraPose {
    Vec3 position;
    Mat3 orientation;
    double fov_deg = 45.0;
    std::size_t image_width = 0;
    std::size_t image_height = 0;
    Projection projection = Projection::orthographic_nadir;

    Vec3 forward() const { return orientation.transposed() * Vec3{0, 0, 1}; }

    void validate() const {
        const Mat3 rrt = orientation * orientation.transposed();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (std::abs(rrt(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9)
                    throw Error(ErrorKind::invalid_input, "camera orientation is not orthonormal");
        if (std::abs(orientation.det() - 1.0) > 1e-9)
            throw Error(ErrorKind::invalid_input, "camera orientation must have determinant +1");
        if (projection == Projection::perspective && !(fov_deg > 0 && fov_deg < 180))
            throw Error(ErrorKind::invalid_input, "perspective fov must lie in (0, 180) degrees");
    }
};

/// World-to-camera rotation looking from `eye` towards `target`.
inline Mat3 look_at(const Vec3& eye, const Vec3& target, const Vec3& up_hint = {0, 1, 0}) {
    const Vec3 z = normalize(target - eye);
    Vec3 x = cross(z, up_hint);
    if (norm(x) < 1e-12) x = cross(z, Vec3{1, 0, 0});
    x = normalize(x);
    const Vec3 y = cross(z, x);
    return Mat3::from_rows(x, y, z);
}

inline CameraPose nadir_camera(const Vec3& above, std::size_t w, std::size_t h) {
    CameraPose cam;
    cam.position = above;
    cam.orientation = look_at(above, above - Vec3{0, 0, 1});
    cam.image_width = w;
    cam.image_height = h;
    cam.projection = Projection::orthographic_nadir;
    return cam;
}

/// Sun direction (towards the sun) from elevation above the horizon and
/// azimuth measured clockwise from north (+y) towards east (+x).
inline Vec3 sun_direction(double elevation_deg, double azimuth_deg) {
    const double el = deg2rad(elevation_deg), az = deg2rad(azimuth_deg);
    return {std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el)};
}

/// Angle between two unit vectors, stable near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

struct ClassicalAngles {
    double theta_i = 0, theta_p = 0, theta_o = 0;
};

struct RusinkiewiczAngles {
    double theta_h = 0, phi_h = 0, theta_d = 0, phi_d = 0;
};

/// All angular quantities of one pixel.
struct PixelAngles {
    double theta_i = 0, theta_p = 0, theta_o = 0;
    double theta_h = 0, phi_h = 0, theta_d = 0, phi_d = 0;
};

/// Unit normals from central differences (one-sided at the borders).
inline Vec3Raster surface_normals(const DemGrid& dem) {
    const std::size_t w = dem.width(), h = dem.height();
    const double g = dem.gsd();
    Vec3Raster out(w, h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t cl = c > 0 ? c - 1 : c, cr = c + 1 < w ? c + 1 : c;
            const std::size_t rl = r > 0 ? r - 1 : r, rr = r + 1 < h ? r + 1 : r;
            const double dzdx = (dem.z(cr, r) - dem.z(cl, r)) / (static_cast<double>(cr - cl) * g);
            const double dzdy = (dem.z(c, rr) - dem.z(c, rl)) / (static_cast<double>(rr - rl) * g);
            out(c, r) = normalize(Vec3{-dzdx, -dzdy, 1.0});
        }
    return out;
}

/// North axis projected onto the tangent plane of n.
inline Vec3 north_tangent(const Vec3& n) {
    const Vec3 north{0, 1, 0};
    Vec3 t = north - n * dot(north, n);
    if (norm(t) < 1e-12) t = Vec3{1, 0, 0} - n * n.x;
    return normalize(t);
}

inline ClassicalAngles classical_angles(const Vec3& n, const Vec3& w_i, const Vec3& w_o) {
    return {angle_between(n, w_i), angle_between(w_i, w_o), angle_between(n, w_o)};
}

/// Half-vector / difference-vector angles. Azimuths are right-handed about n,
/// measured from t towards n x t, in [-pi, pi].
inline RusinkiewiczAngles rusinkiewicz_angles(const Vec3& n, const Vec3& t, const Vec3& w_i, const Vec3& w_o) {
    const Vec3 sum = w_i + w_o;
    const double len = norm(sum);
    if (len < 1e-12) throw Error(ErrorKind::degenerate_geometry, "incident and outgoing directions are opposite");
    const Vec3 h = sum / len;
    const Vec3 b = cross(n, t);

    RusinkiewiczAngles out;
    out.theta_h = angle_between(n, h);
    out.phi_h = std::atan2(dot(h, b), dot(h, t));

    // Rotate w_i by the rotation carrying h onto n.
    Vec3 d = w_i;
    const Vec3 axis = cross(h, n);
    const double s = norm(axis);
    if (s > 1e-15) {
        const Vec3 k = axis / s;
        const double c = dot(h, n);
        // Rodrigues with sin = s, cos = c.
        d = w_i * c + cross(k, w_i) * s + k * (dot(k, w_i) * (1 - c));
    }
    out.theta_d = angle_between(n, d);
    out.phi_d = std::atan2(dot(d, b), dot(d, t));
    return out;
}

/// Per-pixel directions and angles for a DEM under a camera and a
/// directional sun.
struct ViewLightGeometry {
    Vec3Raster normal, w_i, w_o, tangent;
    FloatRaster theta_i, theta_p, theta_o, theta_h, phi_h, theta_d, phi_d;

    std::size_t width() const { return normal.width(); }
    std::size_t height() const { return normal.height(); }
    std::size_t size() const { return normal.size(); }

    PixelAngles at(std::size_t i) const {
        return {theta_i[i], theta_p[i], theta_o[i], theta_h[i], phi_h[i], theta_d[i], phi_d[i]};
    }
};

/// Unit vector from a surface point towards the observer.
inline Vec3 view_direction(const CameraPose& camera, const Vec3& p) {
    if (camera.projection == Projection::orthographic_nadir) return -normalize(camera.forward());
    return normalize(camera.position - p);
}

inline ViewLightGeometry view_light_field(const DemGrid& dem, const CameraPose& camera, const Vec3& sun_dir) {
    if (std::abs(norm(sun_dir) - 1.0) > 1e-6) throw Error(ErrorKind::invalid_input, "sun direction must be unit-norm");
    camera.validate();
    const std::size_t w = dem.width(), h = dem.height();
    ViewLightGeometry g;
    g.normal = surface_normals(dem);
    g.w_i = Vec3Raster(w, h, sun_dir);
    g.w_o = Vec3Raster(w, h);
    g.tangent = Vec3Raster(w, h);
    for (auto* r : {&g.theta_i, &g.theta_p, &g.theta_o, &g.theta_h, &g.phi_h, &g.theta_d, &g.phi_d})
        *r = FloatRaster(w, h);

    for (std::size_t row = 0; row < h; ++row)
        for (std::size_t col = 0; col < w; ++col) {
            const std::size_t i = row * w + col;
            const Vec3 p = dem.world_point(col, row);
            if (camera.projection == Projection::perspective && !(camera.position.z > p.z))
                throw Error(ErrorKind::degenerate_geometry, "camera is below the terrain");
            const Vec3 n = g.normal[i];
            const Vec3 wo = view_direction(camera, p);
            const Vec3 t = north_tangent(n);
            g.w_o[i] = wo;
            g.tangent[i] = t;
            const auto ca = classical_angles(n, sun_dir, wo);
            const auto ra = rusinkiewicz_angles(n, t, sun_dir, wo);
            g.theta_i[i] = ca.theta_i;
            g.theta_p[i] = ca.theta_p;
            g.theta_o[i] = ca.theta_o;
            g.theta_h[i] = ra.theta_h;
            g.phi_h[i] = ra.phi_h;
            g.theta_d[i] = ra.theta_d;
            g.phi_d[i] = ra.phi_d;
        }
    return g;
}

} // namespace svbrdf
