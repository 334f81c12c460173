#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "manifest.hpp"

namespace svbrdf {

/// On-disk synthetic dataset:
///   dem.sg2r              elevations (+ dem.meta.json)
///   views.jsonl           one record per full-scene view
///   views/<k>.sg2r|png|pgm  full-scene renders
///   manifests.jsonl       every crop; train/val/test.jsonl per split
///   targets/<id>.sg2r     observed crop images
///   truth/                true coefficient map
///   config.json, summary.json
struct ViewRecord {
    std::size_t view_id = 0;
    CameraPose camera;
    Vec3 sun_dir;
    std::string image_path;
};

inline nlohmann::json to_json(const ViewRecord& v) {
    return {{"view_id", v.view_id},
            {"camera", to_json(v.camera)},
            {"sun_dir", {v.sun_dir.x, v.sun_dir.y, v.sun_dir.z}},
            {"image", v.image_path}};
}

inline ViewRecord view_from_json(const nlohmann::json& j) {
    try {
        const auto& s = j.at("sun_dir");
        return {j.at("view_id").get<std::size_t>(), camera_from_json(j.at("camera")),
                {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()}, j.at("image").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed view record: ") + e.what());
    }
}

inline void write_jsonl_file(const fs::path& p, const std::vector<SampleManifest>& ms) {
    std::ostringstream os;
    write_manifests(os, ms);
    detail::spit(p, os.str());
}

inline std::vector<SampleManifest> read_jsonl_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::io, "cannot open " + p.string());
    return read_manifests(in);
}

struct SplitSummary {
    std::size_t samples = 0;
    std::size_t tiles = 0;
};

inline std::map<Split, SplitSummary> summarize_splits(const std::vector<SampleManifest>& ms) {
    std::map<Split, std::set<std::int64_t>> tiles;
    std::map<Split, SplitSummary> out{{Split::train, {}}, {Split::val, {}}, {Split::test, {}}};
    for (const auto& m : ms) {
        ++out[m.split].samples;
        tiles[m.split].insert(m.tile_id);
    }
    for (auto& [s, t] : tiles) out[s].tiles = t.size();
    return out;
}

inline void write_samples(const fs::path& dir, const std::vector<SynthSample>& samples) {
    std::vector<SampleManifest> all;
    std::map<Split, std::vector<SampleManifest>> by_split;
    for (const auto& s : samples) {
        write_raster(dir / s.manifest.target_path, s.observed,
                     {{"kind", "target"}, {"sample_id", s.manifest.sample_id}, {"view_id", s.manifest.view_id}});
        all.push_back(s.manifest);
        by_split[s.manifest.split].push_back(s.manifest);
    }
    check_split_purity(all);
    write_jsonl_file(dir / "manifests.jsonl", all);
    for (Split sp : {Split::train, Split::val, Split::test})
        write_jsonl_file(dir / (std::string(to_string(sp)) + ".jsonl"), by_split[sp]);
    nlohmann::json summary;
    for (const auto& [sp, s] : summarize_splits(all)) summary[to_string(sp)] = {{"samples", s.samples}, {"tiles", s.tiles}};
    write_json(dir / "summary.json", summary);
}

inline void write_dataset(const fs::path& dir, const GroundTruthBundle& b, const ExperimentConfig& cfg) {
    fs::create_directories(dir);
    auto doc = to_json(cfg);
    doc.erase("out");
    write_json(dir / "config.json", doc);
    write_dem(dir / "dem.sg2r", b.dem);
    write_coeff_map(dir / "truth", b.true_coeffs);
    std::ostringstream views;
    for (std::size_t k = 0; k < b.views.size(); ++k) {
        const std::string base = "views/" + std::to_string(k);
        const auto& v = b.views[k];
        export_image(dir / base, v.image.radiance, {{"kind", "view"}, {"view_id", k}});
        views << to_json(ViewRecord{k, v.camera, v.sun_dir, base + ".sg2r"}).dump() << '\n';
    }
    detail::spit(dir / "views.jsonl", views.str());
    write_samples(dir, b.samples);
}

inline std::vector<ViewRecord> read_view_records(const fs::path& dir) {
    std::ifstream in(dir / "views.jsonl");
    if (!in) throw Error(ErrorKind::io, "cannot open " + (dir / "views.jsonl").string());
    std::vector<ViewRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(view_from_json(nlohmann::json::parse(line)));
    return out;
}

inline void require_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "dataset directory " + dir.string() + " does not exist");
    for (const char* f : {"dem.sg2r", "views.jsonl", "manifests.jsonl"})
        if (!fs::exists(dir / f)) throw Error(ErrorKind::io, "dataset " + dir.string() + " lacks " + f);
}

/// Full-scene views as fitting targets, aligned to the DEM.
inline std::vector<TargetView> load_scene_views(const fs::path& dir, const DemGrid& dem) {
    std::vector<TargetView> out;
    for (const auto& r : read_view_records(dir)) {
        auto img = read_raster(dir / r.image_path);
        if (img.width() != dem.width() || img.height() != dem.height())
            throw Error(ErrorKind::alignment, r.image_path + " is not aligned to the DEM");
        out.push_back({make_context(dem, r.camera, r.sun_dir), std::move(img), dem.valid()});
    }
    return out;
}

inline std::vector<TrainingSample> load_training_samples(const fs::path& dir, const DemGrid& dem,
                                                         const std::vector<SampleManifest>& ms) {
    std::vector<TrainingSample> out(ms.size());
    parallel_for(ms.size(), [&](std::size_t i) { out[i] = make_sample(dem, ms[i], read_raster(dir / ms[i].target_path)); });
    std::vector<TrainingSample> lit;
    for (auto& s : out) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < s.valid.size(); ++i) n += (s.valid[i] && !s.ctx.shadow[i]) ? 1 : 0;
        if (n > 0) lit.push_back(std::move(s));
    }
    return lit;
}

inline std::vector<SampleManifest> read_split(const fs::path& dir, Split s) {
    const auto p = dir / (std::string(to_string(s)) + ".jsonl");
    return fs::exists(p) ? read_jsonl_file(p) : std::vector<SampleManifest>{};
}

} // namespace svbrdf
