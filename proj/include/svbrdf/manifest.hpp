#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "photogeom.hpp"
#include "raster.hpp"

namespace svbrdf {

struct WorldRect {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    bool operator==(const WorldRect&) const = default;
};

/// One dataset record: a DEM crop, its target image and the acquisition
/// geometry, tagged with a geographic split.
struct SampleManifest {
    std::size_t sample_id = 0;
    std::size_t view_id = 0;
    CropSpec crop;
    std::string dem_path;
    std::string target_path;
    CameraPose camera;
    Vec3 sun_dir;
    double fov_deg = 0;
    WorldRect footprint;
    Split split = Split::train;
    std::int64_t tile_id = 0;
};

/// World-space rectangle covered by the crop's pixels (pixel edges, not centers).
inline WorldRect crop_footprint(const CropSpec& crop, Vec2 parent_origin) {
    const double half = crop.gsd / 2;
    const double x0 = parent_origin.x + static_cast<double>(crop.col0()) * crop.gsd - half;
    const double y0 = parent_origin.y + static_cast<double>(crop.row0()) * crop.gsd - half;
    const double side = static_cast<double>(crop.size_px) * crop.gsd;
    return {x0, y0, x0 + side, y0 + side};
}

inline Vec2 crop_center_world(const CropSpec& crop, Vec2 parent_origin) {
    return {parent_origin.x + static_cast<double>(crop.center.col) * crop.gsd,
            parent_origin.y + static_cast<double>(crop.center.row) * crop.gsd};
}

inline nlohmann::json to_json(const CameraPose& c) {
    return {{"position", {c.position.x, c.position.y, c.position.z}},
            {"orientation", c.orientation.m},
            {"fov_deg", c.fov_deg},
            {"image_size", {c.image_width, c.image_height}},
            {"projection", to_string(c.projection)}};
}

inline CameraPose camera_from_json(const nlohmann::json& j) {
    CameraPose c;
    const auto& p = j.at("position");
    c.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    c.orientation.m = j.at("orientation").get<std::array<double, 9>>();
    c.fov_deg = j.at("fov_deg").get<double>();
    c.image_width = j.at("image_size").at(0).get<std::size_t>();
    c.image_height = j.at("image_size").at(1).get<std::size_t>();
    c.projection = projection_from_string(j.at("projection").get<std::string>());
    return c;
}

inline nlohmann::json to_json(const SampleManifest& m) {
    return {{"sample_id", m.sample_id},
            {"view_id", m.view_id},
            {"crop", {{"size_px", m.crop.size_px}, {"gsd", m.crop.gsd}, {"center", {m.crop.center.col, m.crop.center.row}}}},
            {"dem_path", m.dem_path},
            {"target_path", m.target_path},
            {"camera", to_json(m.camera)},
            {"sun_dir", {m.sun_dir.x, m.sun_dir.y, m.sun_dir.z}},
            {"fov_deg", m.fov_deg},
            {"footprint", {m.footprint.xmin, m.footprint.ymin, m.footprint.xmax, m.footprint.ymax}},
            {"split", to_string(m.split)},
            {"tile_id", m.tile_id}};
}

inline SampleManifest manifest_from_json(const nlohmann::json& j) {
    try {
        SampleManifest m;
        m.sample_id = j.at("sample_id").get<std::size_t>();
        m.view_id = j.value("view_id", std::size_t{0});
        const auto& c = j.at("crop");
        m.crop.size_px = c.at("size_px").get<std::size_t>();
        m.crop.gsd = c.at("gsd").get<double>();
        m.crop.center = {c.at("center").at(0).get<std::int64_t>(), c.at("center").at(1).get<std::int64_t>()};
        m.dem_path = j.at("dem_path").get<std::string>();
        m.target_path = j.at("target_path").get<std::string>();
        m.camera = camera_from_json(j.at("camera"));
        const auto& s = j.at("sun_dir");
        m.sun_dir = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
        m.fov_deg = j.at("fov_deg").get<double>();
        const auto& f = j.at("footprint");
        m.footprint = {f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>(), f.at(3).get<double>()};
        m.split = split_from_string(j.at("split").get<std::string>());
        m.tile_id = j.at("tile_id").get<std::int64_t>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed manifest record: ") + e.what());
    }
}

/// One JSON object per line.
inline void write_manifests(std::ostream& os, const std::vector<SampleManifest>& ms) {
    for (const auto& m : ms) os << to_json(m).dump() << '\n';
}

inline std::vector<SampleManifest> read_manifests(std::istream& is) {
    std::vector<SampleManifest> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(manifest_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::io, std::string("manifest line is not JSON: ") + e.what());
        }
    }
    return out;
}

/// Throws if two manifests with different splits share a tile.
inline void check_split_purity(const std::vector<SampleManifest>& ms) {
    std::map<std::int64_t, Split> seen;
    for (const auto& m : ms) {
        auto [it, inserted] = seen.emplace(m.tile_id, m.split);
        if (!inserted && it->second != m.split)
            throw Error(ErrorKind::invalid_input, "tile " + std::to_string(m.tile_id) + " appears in two splits");
    }
}

} // namespace svbrdf
