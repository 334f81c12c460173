#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "infer.hpp"
#include "synth.hpp"

namespace svbrdf {

enum class FitMode { ls, gd };

inline const char* to_string(FitMode m) { return m == FitMode::ls ? "ls" : "gd"; }
inline FitMode fit_mode_from_string(const std::string& s) {
    if (s == "ls") return FitMode::ls;
    if (s == "gd") return FitMode::gd;
    throw Error(ErrorKind::config, "unknown fit mode '" + s + "' (expected ls or gd)");
}

/// Everything one experiment needs, loaded from a JSON document. One root
/// seed feeds every stochastic component through named sub-streams.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string out;
    std::string dataset;
    std::string checkpoint;
    ModelKind model = ModelKind::M2;
    SynthSceneConfig synth;
    TrainConfig train;
    FitMode fit_mode = FitMode::ls;
    GdConfig gd;
    std::vector<ModelKind> compare_models{ModelKind::M1, ModelKind::M2, ModelKind::M6};
    Split eval_split = Split::test;

    /// Pushes the root seed and the model kind into the module configs.
    void propagate() {
        synth.seed = seed;
        train.seed = seed;
        if (synth.model != model) {
            synth.model = model;
            if (!synth.coeff_field_spec.empty() && synth.coeff_field_spec.size() != n_params(model))
                synth.coeff_field_spec.clear();
        }
    }

    void validate() const {
        synth.validate();
        train.validate();
        if (gd.steps < 1) throw Error(ErrorKind::config, "gd.steps must be >= 1");
        if (!(gd.learning_rate > 0)) throw Error(ErrorKind::config, "gd.learning_rate must be positive");
        if (!(gd.lr_decay > 0 && gd.lr_decay <= 1)) throw Error(ErrorKind::config, "gd.lr_decay must lie in (0, 1]");
        if (compare_models.size() < 2) throw Error(ErrorKind::config, "compare.models needs at least two models");
    }
};

namespace detail {

template <class T>
void take(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorKind::config, where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw Error(ErrorKind::config, "unknown key '" + k + "' in " + where);
}

inline void synth_from_json(const nlohmann::json& j, SynthSceneConfig& c) {
    reject_unknown(j, {"dem_size", "gsd", "relief_amplitude", "spectral_exponent", "coeff_field_spec", "alpha", "n_views",
                       "sun_elevation_range", "sun_azimuth_range", "view_mix", "diverse_views", "oblique_tilt_range", "oblique_fov_deg",
                       "crop_size", "n_crops", "tile_size_m", "split_ratios", "noise_sigma"},
                   "synth");
    take(j, "dem_size", c.dem_size);
    take(j, "gsd", c.gsd);
    take(j, "relief_amplitude", c.relief_amplitude);
    take(j, "spectral_exponent", c.spectral_exponent);
    take(j, "alpha", c.alpha);
    take(j, "n_views", c.n_views);
    take(j, "sun_elevation_range", c.sun_elevation_range);
    take(j, "sun_azimuth_range", c.sun_azimuth_range);
    take(j, "view_mix", c.view_mix);
    take(j, "diverse_views", c.diverse_views);
    take(j, "oblique_tilt_range", c.oblique_tilt_range);
    take(j, "oblique_fov_deg", c.oblique_fov_deg);
    take(j, "crop_size", c.crop_size);
    take(j, "n_crops", c.n_crops);
    take(j, "tile_size_m", c.tile_size_m);
    take(j, "noise_sigma", c.noise_sigma);
    if (j.contains("split_ratios")) {
        const auto r = j.at("split_ratios").get<std::array<double, 3>>();
        c.split_ratios = {r[0], r[1], r[2]};
    }
    if (j.contains("coeff_field_spec")) {
        c.coeff_field_spec.clear();
        for (const auto& s : j.at("coeff_field_spec")) {
            reject_unknown(s, {"mean", "amplitude", "correlation_length_m"}, "synth.coeff_field_spec[]");
            CoeffFieldSpec f;
            take(s, "mean", f.mean);
            take(s, "amplitude", f.amplitude);
            take(s, "correlation_length_m", f.correlation_length_m);
            c.coeff_field_spec.push_back(f);
        }
    }
}

inline void train_from_json(const nlohmann::json& j, TrainConfig& c) {
    reject_unknown(j, {"epochs", "batch_size", "learning_rate", "optimizer", "leaky_slope", "max_iterations", "widths",
                       "mask_shadows"},
                   "train");
    take(j, "epochs", c.epochs);
    take(j, "batch_size", c.batch_size);
    take(j, "learning_rate", c.learning_rate);
    take(j, "leaky_slope", c.leaky_slope);
    take(j, "max_iterations", c.max_iterations);
    take(j, "widths", c.widths);
    take(j, "mask_shadows", c.mask_shadows);
    if (j.contains("optimizer")) c.optimizer = nn::optimizer_from_string(j.at("optimizer").get<std::string>());
}

inline void gd_from_json(const nlohmann::json& j, GdConfig& c) {
    reject_unknown(j, {"steps", "learning_rate", "optimizer", "lr_decay", "mask_shadows", "patience"}, "fit.gd");
    take(j, "steps", c.steps);
    take(j, "learning_rate", c.learning_rate);
    take(j, "lr_decay", c.lr_decay);
    take(j, "mask_shadows", c.mask_shadows);
    take(j, "patience", c.patience);
    if (j.contains("optimizer")) c.optimizer = nn::optimizer_from_string(j.at("optimizer").get<std::string>());
}

} // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        detail::reject_unknown(j, {"seed", "out", "dataset", "checkpoint", "model", "synth", "train", "fit", "compare", "eval"},
                               "config");
        detail::take(j, "seed", c.seed);
        detail::take(j, "out", c.out);
        detail::take(j, "dataset", c.dataset);
        detail::take(j, "checkpoint", c.checkpoint);
        if (j.contains("model")) c.model = model_from_string(j.at("model").get<std::string>());
        if (j.contains("synth")) detail::synth_from_json(j.at("synth"), c.synth);
        if (j.contains("train")) detail::train_from_json(j.at("train"), c.train);
        if (j.contains("fit")) {
            const auto& f = j.at("fit");
            detail::reject_unknown(f, {"mode", "gd"}, "fit");
            if (f.contains("mode")) c.fit_mode = fit_mode_from_string(f.at("mode").get<std::string>());
            if (f.contains("gd")) detail::gd_from_json(f.at("gd"), c.gd);
        }
        if (j.contains("compare")) {
            detail::reject_unknown(j.at("compare"), {"models"}, "compare");
            c.compare_models.clear();
            for (const auto& m : j.at("compare").at("models")) c.compare_models.push_back(model_from_string(m.get<std::string>()));
        }
        if (j.contains("eval")) {
            detail::reject_unknown(j.at("eval"), {"split"}, "eval");
            if (j.at("eval").contains("split")) c.eval_split = split_from_string(j.at("eval").at("split").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("bad config value: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        throw Error(ErrorKind::config, e.what());
    }
    c.synth.model = c.model;
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json spec = nlohmann::json::array();
    for (const auto& s : c.synth.coeff_spec())
        spec.push_back({{"mean", s.mean}, {"amplitude", s.amplitude}, {"correlation_length_m", s.correlation_length_m}});
    nlohmann::json models = nlohmann::json::array();
    for (auto m : c.compare_models) models.push_back(to_string(m));
    const auto& s = c.synth;
    return {{"seed", c.seed},
            {"out", c.out},
            {"dataset", c.dataset},
            {"checkpoint", c.checkpoint},
            {"model", to_string(c.model)},
            {"synth",
             {{"dem_size", s.dem_size},
              {"gsd", s.gsd},
              {"relief_amplitude", s.relief_amplitude},
              {"spectral_exponent", s.spectral_exponent},
              {"coeff_field_spec", spec},
              {"alpha", s.alpha},
              {"n_views", s.n_views},
              {"sun_elevation_range", s.sun_elevation_range},
              {"sun_azimuth_range", s.sun_azimuth_range},
              {"view_mix", s.view_mix},
              {"diverse_views", s.diverse_views},
              {"oblique_tilt_range", s.oblique_tilt_range},
              {"oblique_fov_deg", s.oblique_fov_deg},
              {"crop_size", s.crop_size},
              {"n_crops", s.n_crops},
              {"tile_size_m", s.tile_size_m},
              {"split_ratios", {s.split_ratios.train, s.split_ratios.val, s.split_ratios.test}},
              {"noise_sigma", s.noise_sigma}}},
            {"train",
             {{"epochs", c.train.epochs},
              {"batch_size", c.train.batch_size},
              {"learning_rate", c.train.learning_rate},
              {"optimizer", nn::to_string(c.train.optimizer)},
              {"leaky_slope", c.train.leaky_slope},
              {"max_iterations", c.train.max_iterations},
              {"widths", c.train.widths},
              {"mask_shadows", c.train.mask_shadows}}},
            {"fit",
             {{"mode", to_string(c.fit_mode)},
              {"gd",
               {{"steps", c.gd.steps},
                {"learning_rate", c.gd.learning_rate},
                {"optimizer", nn::to_string(c.gd.optimizer)},
                {"lr_decay", c.gd.lr_decay},
                {"mask_shadows", c.gd.mask_shadows},
                {"patience", c.gd.patience}}}}},
            {"compare", {{"models", models}}},
            {"eval", {{"split", to_string(c.eval_split)}}}};
}

inline ExperimentConfig load_config(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::config, "cannot open config " + p.string());
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, p.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace svbrdf
