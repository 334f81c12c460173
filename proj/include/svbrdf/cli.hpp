#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dataset.hpp"

namespace svbrdf::cli {

/// Command-line options; a set optional overrides the config file.
struct Options {
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool force = false;
    std::optional<std::string> dataset;
    std::optional<std::string> checkpoint;
    std::optional<std::string> model;
    std::optional<std::string> mode;
    std::optional<std::string> split;
    std::vector<std::string> models;
    std::optional<std::size_t> views;
    bool nadir_only = false;
    bool diverse = false;
    std::optional<std::size_t> n_crops;
    std::optional<std::size_t> crop_size;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> max_iterations;
    std::optional<std::string> coeffs;
    double sun_elev = 45, sun_az = 135;
    bool nadir = false;
    std::optional<double> tilt;
    double cam_az = 0, fov = 45;
};

/// Exit codes: 0 success, 1 runtime failure, 2 usage, config or refusal.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline ExperimentConfig resolve_config(const Options& o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    try {
        if (o.seed) c.seed = *o.seed;
        if (o.out) c.out = *o.out;
        if (o.dataset) c.dataset = *o.dataset;
        if (o.checkpoint) c.checkpoint = *o.checkpoint;
        if (o.model) {
            c.model = model_from_string(*o.model);
            c.synth.model = c.model;
        }
        if (o.mode) c.fit_mode = fit_mode_from_string(*o.mode);
        if (o.split) c.eval_split = split_from_string(*o.split);
        if (!o.models.empty()) {
            c.compare_models.clear();
            for (const auto& m : o.models) c.compare_models.push_back(model_from_string(m));
        }
        if (o.views) c.synth.n_views = *o.views;
        if (o.nadir_only) {
            c.synth.view_mix = 1.0;
            c.synth.diverse_views = false;
        }
        if (o.diverse) c.synth.diverse_views = true;
        if (o.n_crops) c.synth.n_crops = *o.n_crops;
        if (o.crop_size) c.synth.crop_size = *o.crop_size;
        if (o.epochs) c.train.epochs = *o.epochs;
        if (o.max_iterations) c.train.max_iterations = *o.max_iterations;
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }
    c.propagate();
    c.validate();
    if (c.out.empty()) throw Error(ErrorKind::config, "an output directory is required (--out or \"out\")");
    return c;
}

/// Output directory written through a hidden sibling staging directory, moved
/// into place only when the command succeeds.
class OutputDir {
public:
    OutputDir(const fs::path& target, bool force) : target_(target) {
        if (fs::exists(target_)) {
            if (!fs::is_directory(target_)) throw Error(ErrorKind::config, target_.string() + " exists and is not a directory");
            if (!fs::is_empty(target_) && !force)
                throw Error(ErrorKind::config, "output directory " + target_.string() + " is not empty (use --force)");
        }
        const fs::path abs = fs::absolute(target_).lexically_normal();
        const fs::path leaf = abs.has_filename() ? abs.filename() : abs.parent_path().filename();
        staging_ = (abs.has_filename() ? abs.parent_path() : abs.parent_path().parent_path()) / ("." + leaf.string() + ".partial");
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;
    ~OutputDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }

    const fs::path& path() const { return staging_; }

    void commit() {
        if (fs::exists(target_)) fs::remove_all(target_);
        fs::rename(staging_, target_);
        committed_ = true;
    }

private:
    fs::path target_;
    fs::path staging_;
    bool committed_ = false;
};

inline void write_text(const fs::path& p, const std::string& s) { detail::spit(p, s); }

template <class Fn>
std::string render_to_string(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

inline fs::path require_dataset_path(const ExperimentConfig& c) {
    if (c.dataset.empty()) throw Error(ErrorKind::config, "a dataset directory is required (--dataset or \"dataset\")");
    require_dataset(c.dataset);
    return c.dataset;
}

inline fs::path require_checkpoint_path(const ExperimentConfig& c) {
    if (c.checkpoint.empty()) throw Error(ErrorKind::config, "a checkpoint is required (--checkpoint or \"checkpoint\")");
    fs::path p = c.checkpoint;
    if (fs::is_directory(p)) p /= "checkpoint.bin";
    if (!fs::exists(p)) throw Error(ErrorKind::io, "checkpoint " + p.string() + " does not exist");
    return p;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Commands. Each writes into `out` (the staging directory) and prints a
// human-readable summary.

inline void print_split_summary(std::ostream& log, const std::vector<SampleManifest>& ms) {
    log << "samples: " << ms.size() << '\n';
    for (const auto& [sp, s] : summarize_splits(ms))
        log << "  " << std::left << std::setw(6) << to_string(sp) << std::right << std::setw(7) << s.samples << " samples "
            << std::setw(5) << s.tiles << " tiles\n";
}

inline void cmd_synth_gen(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    const auto b = generate_scene(c.synth);
    write_dataset(out, b, c);
    log << "dataset: " << c.synth.dem_size << "x" << c.synth.dem_size << " DEM, " << b.views.size() << " views, model "
        << to_string(c.model) << '\n';
    print_split_summary(log, b.manifests());
}

struct LoadedScene {
    DemGrid dem;
    std::optional<CoefficientMap> truth;
};

inline LoadedScene load_scene(const fs::path& dir) {
    LoadedScene s{read_dem(dir / "dem.sg2r"), std::nullopt};
    if (fs::exists(dir / "truth" / "model.json")) s.truth = read_coeff_map(dir / "truth");
    return s;
}

inline void cmd_sample_crops(ExperimentConfig c, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    const auto scene = load_scene(src);
    if (!scene.truth) throw Error(ErrorKind::io, "dataset " + src.string() + " has no truth/ coefficient map to render crops from");
    c.synth.dem_size = scene.dem.width();
    c.synth.gsd = scene.dem.gsd();
    c.synth.model = scene.truth->model();
    c.synth.coeff_field_spec.clear();
    c.synth.validate();
    GroundTruthBundle b{scene.dem, *scene.truth, {}, {}};
    std::vector<ViewGeometry> geo;
    for (const auto& r : read_view_records(src)) {
        RenderedImage img;
        img.radiance = read_raster(src / r.image_path);
        b.views.push_back({r.camera, r.sun_dir, std::move(img)});
        geo.push_back({r.camera, r.sun_dir});
    }
    b.samples = sample_crops(c.synth, b.dem, b.true_coeffs, geo);
    write_dataset(out, b, c);
    log << "resampled " << b.samples.size() << " crops of " << c.synth.crop_size << " px from " << src.string() << '\n';
    print_split_summary(log, b.manifests());
}

/// Well-conditioned pixels for the GD/LS agreement check.
inline constexpr double kWellConditioned = 20.0;

inline void cmd_fit(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    const auto scene = load_scene(src);
    const auto views = load_scene_views(src, scene.dem);
    const auto ls = fit_map_ls(views, c.model);
    CoefficientMap coeffs = ls.coeffs;
    nlohmann::json report{{"model", to_string(c.model)}, {"mode", to_string(c.fit_mode)}, {"views", views.size()}};
    if (c.fit_mode == FitMode::gd) {
        const auto gd = fit_map_gd(views, c.model, c.gd);
        double worst = 0;
        std::size_t n_well = 0;
        for (std::size_t i = 0; i < ls.fitted.size(); ++i) {
            if (!ls.fitted[i] || ls.condition[i] > kWellConditioned) continue;
            ++n_well;
            for (std::size_t j = 0; j < n_params(c.model); ++j)
                worst = std::max(worst, std::abs(gd.coeffs.channel(j)[i] - ls.coeffs.channel(j)[i]));
        }
        report["gd_steps"] = gd.trajectory.size();
        report["gd_final_mse"] = gd.trajectory.empty() ? 0.0 : gd.trajectory.back();
        report["well_conditioned_pixels"] = n_well;
        report["gd_vs_ls_max_abs_well_conditioned"] = worst;
        coeffs = gd.coeffs;
    }

    // Pixels the views cannot determine take the uniform fit so renders stay defined.
    const Coeffs uniform = uniform_baseline(views, c.model).coeffs;
    for (std::size_t i = 0; i < ls.fitted.size(); ++i)
        if (!ls.fitted[i])
            for (std::size_t j = 0; j < n_params(c.model); ++j) coeffs.channel(j)[i] = uniform[j];

    const std::size_t n = ls.fitted.size();
    const double coverage = 100.0 * static_cast<double>(n - ls.under_observed) / static_cast<double>(n);
    report["pixels"] = n;
    report["under_observed"] = ls.under_observed;
    report["coverage_pct"] = coverage;
    if (scene.truth && scene.truth->model() == c.model) {
        double ss = 0, worst = 0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!ls.fitted[i]) continue;
            for (std::size_t j = 0; j < n_params(c.model); ++j) {
                const double d = coeffs.channel(j)[i] - scene.truth->channel(j)[i];
                ss += d * d;
                worst = std::max(worst, std::abs(d));
                ++k;
            }
        }
        report["recovery_rmse"] = k ? std::sqrt(ss / static_cast<double>(k)) : 0.0;
        report["recovery_max_abs"] = worst;
    } else {
        report["recovery_rmse"] = nullptr;
    }

    EvalReport fitted{"svbrdf", {}}, base{"uniform-normalized", {}};
    for (std::size_t v = 0; v < views.size(); ++v) {
        const auto id = "view" + std::to_string(v);
        const auto r = render(views[v].ctx, coeffs).radiance;
        const auto u = render(views[v].ctx, CoefficientMap::uniform(c.model, r.width(), r.height(), uniform)).radiance;
        fitted.samples.push_back(score_sample(id, r, views[v].target));
        base.samples.push_back(score_sample(id, range_normalize(u, views[v].target), views[v].target));
    }
    const std::vector<EvalReport> reports{fitted, base};

    write_coeff_map(out / "coeffs", coeffs);
    write_mask(out / "fitted_mask.sg2r", ls.fitted, {{"kind", "fitted_mask"}});
    write_raster(out / "condition.sg2r", ls.condition, {{"kind", "condition"}});
    write_json(out / "fit_report.json", report);
    write_text(out / "eval.csv", render_to_string([&](std::ostream& os) { write_eval_csv(os, reports); }));
    write_text(out / "eval.txt", render_to_string([&](std::ostream& os) { write_eval_table(os, reports); }));

    log << "fit " << to_string(c.model) << " (" << to_string(c.fit_mode) << ") on " << views.size() << " views\n";
    log << "coverage: " << fmt(coverage) << "% (" << ls.under_observed << " under-observed pixels)\n";
    if (!report["recovery_rmse"].is_null()) log << "recovery RMSE vs truth: " << fmt(report["recovery_rmse"].get<double>()) << '\n';
    if (report.contains("gd_vs_ls_max_abs_well_conditioned"))
        log << "max |gd - ls| on " << report["well_conditioned_pixels"].get<std::size_t>() << " well-conditioned pixels: "
            << fmt(report["gd_vs_ls_max_abs_well_conditioned"].get<double>()) << '\n';
    write_eval_table(log, reports);
}

struct SplitData {
    DemGrid dem;
    std::vector<TrainingSample> train, val, eval;
};

inline SplitData load_splits(const ExperimentConfig& c, const fs::path& src, bool with_eval) {
    SplitData d{read_dem(src / "dem.sg2r"), {}, {}, {}};
    d.train = load_training_samples(src, d.dem, read_split(src, Split::train));
    d.val = load_training_samples(src, d.dem, read_split(src, Split::val));
    if (with_eval) d.eval = load_training_samples(src, d.dem, read_split(src, c.eval_split));
    if (d.train.empty()) throw Error(ErrorKind::empty_domain, "dataset has no usable training samples");
    return d;
}

inline void cmd_train(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    const auto d = load_splits(c, src, false);
    if (d.val.empty()) throw Error(ErrorKind::empty_domain, "dataset has no usable validation samples");
    Predictor p(c.model, c.train);
    const auto r = train_predictor(p, d.train, d.val, c.train);
    save_checkpoint(out / "checkpoint.bin", p);
    write_text(out / "loss_curves.csv", render_to_string([&](std::ostream& os) { write_loss_curves_csv(os, r.curves); }));
    write_json(out / "train_summary.json", {{"model", to_string(c.model)},
                                            {"train_samples", d.train.size()},
                                            {"val_samples", d.val.size()},
                                            {"iterations", r.iterations},
                                            {"initial_train_mse", r.initial_train_mse},
                                            {"final_train_mse", r.final_train_mse},
                                            {"initial_val_mse", r.initial_val_mse},
                                            {"final_val_mse", r.final_val_mse},
                                            {"negative_fraction", r.negative_fraction}});
    log << "trained " << to_string(c.model) << " on " << d.train.size() << " crops (" << d.val.size() << " val), "
        << r.iterations << " iterations\n";
    log << "train MSE " << fmt(r.initial_train_mse) << " -> " << fmt(r.final_train_mse) << ", val MSE "
        << fmt(r.initial_val_mse) << " -> " << fmt(r.final_val_mse) << '\n';
}

inline void cmd_predict(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    auto p = load_checkpoint(require_checkpoint_path(c));
    const DemGrid dem = read_dem(src / "dem.sg2r");
    const auto samples = load_training_samples(src, dem, read_split(src, c.eval_split));
    if (samples.empty()) throw Error(ErrorKind::empty_domain, std::string("split ") + to_string(c.eval_split) + " is empty");
    std::ostringstream index;
    double total = 0;
    for (const auto& s : samples) {
        const auto cm = predict_crop(p, s.elevations);
        const auto img = render(s.ctx, cm);
        const double m = photometric_loss(img, s.target, s.valid).mse;
        total += m;
        const fs::path dir = out / "predictions" / s.id;
        write_coeff_map(dir, cm);
        write_raster(dir / "render.sg2r", img.radiance, {{"kind", "render"}, {"sample_id", s.id}});
        index << nlohmann::json{{"sample_id", s.id}, {"split", to_string(s.split)}, {"coeffs", "predictions/" + s.id},
                                {"render", "predictions/" + s.id + "/render.sg2r"}, {"mse", m}}
                     .dump()
              << '\n';
    }
    write_text(out / "predictions.jsonl", index.str());
    log << "predicted " << samples.size() << " " << to_string(c.eval_split) << " crops with " << to_string(p.model)
        << ", mean render MSE " << fmt(total / static_cast<double>(samples.size())) << '\n';
}

inline void cmd_render(const ExperimentConfig& c, const Options& o, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    const DemGrid dem = read_dem(src / "dem.sg2r");
    const fs::path cdir = o.coeffs ? fs::path(*o.coeffs) : src / "truth";
    if (!fs::exists(cdir / "model.json")) throw Error(ErrorKind::io, "no coefficient map at " + cdir.string());
    const auto coeffs = read_coeff_map(cdir);
    if (!(o.sun_elev > 0 && o.sun_elev <= 90)) throw Error(ErrorKind::config, "--sun-elev must lie in (0, 90]");
    const std::size_t w = dem.width(), h = dem.height();
    const double extent = static_cast<double>(std::max(w, h) - 1) * dem.gsd();
    const auto& z = dem.elevations().values();
    const double zmax = *std::max_element(z.begin(), z.end());
    const Vec3 center = dem.world_point(0, 0) + Vec3{extent / 2, extent / 2, 0};
    const bool nadir = o.nadir || !o.tilt;
    const CameraPose cam = nadir ? nadir_camera({center.x, center.y, zmax + extent}, w, h)
                                 : oblique_camera({center.x, center.y, zmax}, extent, *o.tilt, o.cam_az, o.fov, w, h);
    const Vec3 sun = sun_direction(o.sun_elev, o.sun_az);
    const auto img = render(make_context(dem, cam, sun), coeffs);
    const nlohmann::json meta{{"kind", "render"},
                              {"camera", to_json(cam)},
                              {"sun_elevation_deg", o.sun_elev},
                              {"sun_azimuth_deg", o.sun_az},
                              {"coeffs", cdir.string()}};
    export_image(out / "render", img.radiance, meta);
    write_mask(out / "shadow.sg2r", img.shadow, {{"kind", "shadow"}});
    const auto [lo, hi] = std::minmax_element(img.radiance.values().begin(), img.radiance.values().end());
    log << "rendered " << w << "x" << h << " " << (nadir ? "nadir" : "oblique") << " view, sun " << fmt(o.sun_elev) << "/"
        << fmt(o.sun_az) << " deg; radiance range [" << fmt(*lo) << ", " << fmt(*hi) << "], " << count_set(img.shadow)
        << " shadowed pixels\n";
}

inline void cmd_eval(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    auto p = load_checkpoint(require_checkpoint_path(c));
    const auto d = load_splits(c, src, true);
    const auto reports = evaluate_against_uniform(p, d.train, d.eval);
    write_text(out / "eval.csv", render_to_string([&](std::ostream& os) { write_eval_csv(os, reports); }));
    write_text(out / "eval_samples.csv", render_to_string([&](std::ostream& os) { write_eval_samples_csv(os, reports); }));
    write_text(out / "eval.txt", render_to_string([&](std::ostream& os) { write_eval_table(os, reports); }));
    log << "evaluated " << d.eval.size() << " " << to_string(c.eval_split) << " crops\n";
    write_eval_table(log, reports);
}

inline void cmd_compare_models(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    const fs::path src = require_dataset_path(c);
    const auto d = load_splits(c, src, false);
    if (d.val.empty()) throw Error(ErrorKind::empty_domain, "dataset has no usable validation samples");
    const auto views = load_scene_views(src, d.dem);
    const auto rows = compare_models(d.train, d.val, c.compare_models, c.train, &views);
    std::vector<CurvePoint> curves;
    for (const auto& r : rows) curves.insert(curves.end(), r.curves.begin(), r.curves.end());
    write_text(out / "comparison.csv", render_to_string([&](std::ostream& os) { write_comparison_csv(os, rows); }));
    write_text(out / "comparison.txt", render_to_string([&](std::ostream& os) { write_comparison_table(os, rows); }));
    write_text(out / "loss_curves.csv", render_to_string([&](std::ostream& os) { write_loss_curves_csv(os, curves); }));
    write_comparison_table(log, rows);
}

// ---------------------------------------------------------------------------

inline void build_parser(CLI::App& app, Options& o) {
    app.require_subcommand(1);
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "root seed");
        sub->add_option("--out", o.out, "output directory");
        sub->add_flag("--force", o.force, "replace a non-empty output directory");
        sub->add_option("--model", o.model, "BRDF model M1..M6");
        sub->callback([&o, sub] { o.command = sub->get_name(); });
    };
    auto with_dataset = [&](CLI::App* sub) { sub->add_option("--dataset", o.dataset, "dataset directory"); };
    auto with_checkpoint = [&](CLI::App* sub) { sub->add_option("--checkpoint", o.checkpoint, "checkpoint file or train output"); };
    auto with_training = [&](CLI::App* sub) {
        sub->add_option("--epochs", o.epochs);
        sub->add_option("--max-iterations", o.max_iterations);
    };

    auto* gen = app.add_subcommand("synth-gen", "generate a synthetic dataset");
    common(gen);
    gen->add_option("--views", o.views, "number of full-scene views");
    gen->add_flag("--nadir-only", o.nadir_only, "nadir views only");
    gen->add_flag("--diverse-views", o.diverse, "well-conditioned tabulated view design");
    gen->add_option("--crops", o.n_crops, "number of crops");
    gen->add_option("--crop-size", o.crop_size, "crop size in pixels");

    auto* crops = app.add_subcommand("sample-crops", "resample crops of an existing dataset");
    common(crops);
    with_dataset(crops);
    crops->add_option("--crops", o.n_crops, "number of crops");
    crops->add_option("--crop-size", o.crop_size, "crop size in pixels");

    auto* fit = app.add_subcommand("fit", "per-pixel inverse rendering on the full-scene views");
    common(fit);
    with_dataset(fit);
    fit->add_option("--mode", o.mode, "ls or gd");

    auto* train = app.add_subcommand("train", "train the coefficient predictor");
    common(train);
    with_dataset(train);
    with_training(train);

    auto* predict = app.add_subcommand("predict", "predict coefficient maps for a split");
    common(predict);
    with_dataset(predict);
    with_checkpoint(predict);
    predict->add_option("--split", o.split, "train, val or test");

    auto* rend = app.add_subcommand("render", "render a coefficient map under a chosen camera and sun");
    common(rend);
    with_dataset(rend);
    rend->add_option("--coeffs", o.coeffs, "coefficient map directory (default: dataset truth)");
    rend->add_option("--sun-elev", o.sun_elev, "sun elevation in degrees");
    rend->add_option("--sun-az", o.sun_az, "sun azimuth in degrees, clockwise from north");
    rend->add_flag("--nadir", o.nadir, "nadir orthographic camera");
    rend->add_option("--tilt", o.tilt, "oblique camera tilt off nadir in degrees");
    rend->add_option("--cam-az", o.cam_az, "oblique camera azimuth in degrees");
    rend->add_option("--fov", o.fov, "oblique camera field of view in degrees");

    auto* ev = app.add_subcommand("eval", "score the predictor against the uniform baseline");
    common(ev);
    with_dataset(ev);
    with_checkpoint(ev);
    ev->add_option("--split", o.split, "train, val or test");

    auto* cmp = app.add_subcommand("compare-models", "train one predictor per model and compare");
    common(cmp);
    with_dataset(cmp);
    with_training(cmp);
    cmp->add_option("--models", o.models, "models to compare")->expected(2, -1);
}

inline void dispatch(const Options& o, const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    if (o.command == "synth-gen") return cmd_synth_gen(c, out, log);
    if (o.command == "sample-crops") return cmd_sample_crops(c, out, log);
    if (o.command == "fit") return cmd_fit(c, out, log);
    if (o.command == "train") return cmd_train(c, out, log);
    if (o.command == "predict") return cmd_predict(c, out, log);
    if (o.command == "render") return cmd_render(c, o, out, log);
    if (o.command == "eval") return cmd_eval(c, out, log);
    if (o.command == "compare-models") return cmd_compare_models(c, out, log);
    throw Error(ErrorKind::config, "unknown command " + o.command);
}

/// Runs one command; args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"svbrdf: spatially varying reflectance from terrain", "svbrdf"};
    Options o;
    build_parser(app, o);
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::Success&) {
        log << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        const ExperimentConfig c = resolve_config(o);
        OutputDir out(c.out, o.force);
        dispatch(o, c, out.path(), log);
        out.commit();
        log << "wrote " << c.out << '\n';
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::config ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace svbrdf::cli
