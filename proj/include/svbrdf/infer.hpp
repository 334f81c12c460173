#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lsq.hpp"
#include "metrics.hpp"
#include "nn.hpp"
#include "render.hpp"
#include "synth.hpp"

namespace svbrdf {

// ---------------------------------------------------------------------------
// Per-pixel least squares

struct Observation {
    Coeffs basis;
    double target = 0;
    bool shadowed = false;
};

/// Every view's observation of one pixel.
using PixelObservations = std::vector<Observation>;

/// Exact per-pixel solution over the unshadowed observations.
inline LsqSolution fit_pixel_ls(const PixelObservations& obs, ModelKind model) {
    LinearSystem sys(n_params(model));
    for (const auto& o : obs) {
        if (o.basis.size() != n_params(model)) throw Error(ErrorKind::model_arity, "basis length does not match the model");
        if (!o.shadowed) sys.add(o.basis, o.target);
    }
    return solve_least_squares(sys);
}

inline void check_views_aligned(const std::vector<TargetView>& views) {
    if (views.empty()) throw Error(ErrorKind::invalid_input, "at least one view is required");
    for (const auto& v : views) {
        if (v.ctx.width() != views[0].ctx.width() || v.ctx.height() != views[0].ctx.height() ||
            !v.target.same_shape(v.ctx.shadow) || !v.valid.same_shape(v.ctx.shadow))
            throw Error(ErrorKind::alignment, "views are not aligned to one crop");
    }
}

/// Per-pixel observation lists; invalid pixels are left out, shadowed ones flagged.
inline std::vector<PixelObservations> gather_observations(const std::vector<TargetView>& views, ModelKind model) {
    check_views_aligned(views);
    std::vector<PixelObservations> out(views[0].ctx.size());
    for (const auto& v : views)
        for (std::size_t i = 0; i < out.size(); ++i)
            if (v.valid[i]) out[i].push_back({basis(model, v.ctx.geometry->at(i)), v.target[i], v.ctx.shadow[i] != 0});
    return out;
}

struct LsMapFit {
    CoefficientMap coeffs;
    /// 1 where the pixel had a full-rank system.
    MaskRaster fitted;
    FloatRaster condition;
    FloatRaster residual_rmse;
    std::size_t under_observed = 0;
    double sum_sq = 0;
    std::size_t n_obs = 0;

    double mse() const { return n_obs ? sum_sq / static_cast<double>(n_obs) : std::numeric_limits<double>::quiet_NaN(); }
};

/// fit_pixel_ls at every pixel; under-observed pixels get zero coefficients
/// and are reported rather than raised.
inline LsMapFit fit_map_ls(const std::vector<TargetView>& views, ModelKind model) {
    const auto obs = gather_observations(views, model);
    const std::size_t w = views[0].ctx.width(), h = views[0].ctx.height();
    LsMapFit out{CoefficientMap(model, w, h), MaskRaster(w, h, 0), FloatRaster(w, h, std::numeric_limits<double>::infinity()),
                 FloatRaster(w, h), 0, 0, 0};
    for (std::size_t i = 0; i < obs.size(); ++i) {
        try {
            const auto sol = fit_pixel_ls(obs[i], model);
            out.coeffs.set(i, sol.coeffs);
            out.fitted[i] = 1;
            out.condition[i] = sol.condition;
            out.residual_rmse[i] = sol.residual_rmse;
            out.sum_sq += sol.sum_sq;
            for (const auto& o : obs[i]) out.n_obs += o.shadowed ? 0 : 1;
        } catch (const UnderObservedError&) {
            ++out.under_observed;
        }
    }
    return out;
}

/// Pooled per-pixel LS fit MSE of several models over the pixels every model
/// can fit, so nested models are compared on identical observations.
inline std::vector<double> ls_fit_mse(const std::vector<TargetView>& views, const std::vector<ModelKind>& models) {
    std::vector<LsMapFit> fits;
    for (auto m : models) fits.push_back(fit_map_ls(views, m));
    const std::size_t n = views[0].ctx.size();
    std::vector<double> sum(models.size(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool all = true;
        for (const auto& f : fits) all = all && f.fitted[i];
        if (!all) continue;
        std::size_t rows = 0;
        for (const auto& v : views) rows += (v.valid[i] && !v.ctx.shadow[i]) ? 1 : 0;
        for (std::size_t k = 0; k < fits.size(); ++k) {
            const double r = fits[k].residual_rmse[i];
            sum[k] += r * r * static_cast<double>(rows);
        }
        count += rows;
    }
    if (count == 0) throw Error(ErrorKind::empty_domain, "no pixel is fitted by every model");
    for (auto& s : sum) s /= static_cast<double>(count);
    return sum;
}

/// DEM-aligned target views of a generated scene (full-scene renders).
inline std::vector<TargetView> scene_views(const GroundTruthBundle& b) {
    std::vector<TargetView> out;
    for (const auto& v : b.views)
        out.push_back({make_context(b.dem, v.camera, v.sun_dir), v.image.radiance, b.dem.valid()});
    return out;
}

/// Renders `coeffs` under each geometry as DEM-aligned target views.
inline std::vector<TargetView> render_views(const DemGrid& dem, const CoefficientMap& coeffs,
                                            const std::vector<ViewGeometry>& geoms) {
    std::vector<TargetView> out;
    for (const auto& g : geoms) {
        auto ctx = make_context(dem, g.camera, g.sun_dir);
        auto img = render(ctx, coeffs);
        out.push_back({std::move(ctx), std::move(img.radiance), dem.valid()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gradient-descent map fit through the renderer

struct GdConfig {
    std::size_t steps = 500;
    double learning_rate = 1.0;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    /// Multiplicative learning-rate decay applied after every step. Keeps
    /// Adam stable once the gradients fall far below their early scale.
    double lr_decay = 0.998;
    bool mask_shadows = true;
    /// Consecutive loss increases that count as divergence.
    std::size_t patience = 10;
};

struct GdResult {
    CoefficientMap coeffs;
    std::vector<double> trajectory;
};

struct PooledLoss {
    double mse = 0;
    std::vector<FloatRaster> grad;
};

/// MSE pooled over every counted pixel of every view, with its gradient
/// w.r.t. the coefficient map.
inline PooledLoss pooled_loss(const std::vector<TargetView>& views, const CoefficientMap& coeffs, bool mask_shadows = true) {
    std::vector<LossReport> reps;
    std::size_t total = 0;
    double sum_sq = 0;
    for (const auto& v : views) {
        reps.push_back(photometric_loss(render(v.ctx, coeffs), v.target, v.valid, mask_shadows));
        total += reps.back().n_pixels;
        sum_sq += reps.back().sum_sq;
    }
    PooledLoss out{sum_sq / static_cast<double>(total),
                   std::vector<FloatRaster>(coeffs.n_params(), FloatRaster(coeffs.width(), coeffs.height()))};
    for (std::size_t k = 0; k < views.size(); ++k) {
        const auto g = backward(loss_gradient(reps[k], static_cast<double>(total)), views[k].ctx, coeffs.model());
        for (std::size_t j = 0; j < g.size(); ++j)
            for (std::size_t i = 0; i < g[j].size(); ++i) out.grad[j][i] += g[j][i];
    }
    return out;
}

/// Largest per-pixel curvature of the pooled quadratic loss: the maximum over
/// pixels of lambda_max((2/N) sum_v b b^T).
inline double lipschitz_constant(const std::vector<TargetView>& views, ModelKind model, bool mask_shadows = true) {
    check_views_aligned(views);
    const std::size_t n = n_params(model), np = views[0].ctx.size();
    std::size_t total = 0;
    for (const auto& v : views)
        for (std::size_t i = 0; i < np; ++i) total += (v.valid[i] && !(mask_shadows && v.ctx.shadow[i])) ? 1 : 0;
    if (total == 0) throw Error(ErrorKind::empty_domain, "no pixels to compare");
    double best = 0;
    for (std::size_t i = 0; i < np; ++i) {
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (const auto& v : views) {
            if (!v.valid[i] || (mask_shadows && v.ctx.shadow[i])) continue;
            const Coeffs b = basis(model, v.ctx.geometry->at(i));
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    hess(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += b[r] * b[c];
        }
        const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hess, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        best = std::max(best, lmax);
    }
    return 2.0 * best / static_cast<double>(total);
}

/// First-order minimization of the pooled rendering MSE over the coefficient
/// map, starting from `init` (zeros when absent).
inline GdResult fit_map_gd(const std::vector<TargetView>& views, ModelKind model, const GdConfig& cfg,
                           std::optional<CoefficientMap> init = std::nullopt) {
    check_views_aligned(views);
    const std::size_t w = views[0].ctx.width(), h = views[0].ctx.height();
    GdResult res{init ? *init : CoefficientMap(model, w, h), {}};
    if (res.coeffs.model() != model || res.coeffs.width() != w || res.coeffs.height() != h)
        throw Error(ErrorKind::alignment, "initial coefficient map does not match the model or crop");
    nn::Optimizer opt(cfg.optimizer, cfg.learning_rate);
    std::vector<std::vector<double>> params(n_params(model));
    for (std::size_t j = 0; j < params.size(); ++j) params[j] = res.coeffs.channel(j).values();

    std::size_t rising = 0;
    for (std::size_t step = 0;; ++step) {
        const CoefficientMap cur(model, [&] {
            std::vector<FloatRaster> ch;
            for (auto& p : params) ch.emplace_back(w, h, p);
            return ch;
        }());
        const auto pl = pooled_loss(views, cur, cfg.mask_shadows);
        if (!std::isfinite(pl.mse)) throw DivergenceError(res.trajectory, "loss became non-finite");
        if (!res.trajectory.empty() && pl.mse > res.trajectory.back()) {
            if (++rising >= cfg.patience)
                throw DivergenceError(res.trajectory, "loss increased " + std::to_string(rising) + " consecutive steps");
        } else {
            rising = 0;
        }
        res.trajectory.push_back(pl.mse);
        res.coeffs = cur;
        if (step == cfg.steps) break;
        opt.begin_step();
        for (std::size_t j = 0; j < params.size(); ++j) opt.update(j, params[j], pl.grad[j].values());
        opt.set_lr(opt.lr() * cfg.lr_decay);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Geometry-to-reflectance predictor

inline constexpr std::size_t kDivergencePatience = 10;

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 8;
    double learning_rate = 3e-3;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    std::uint64_t seed = 0;
    double leaky_slope = 0.01;
    /// Stops after this many optimizer steps when nonzero.
    std::size_t max_iterations = 0;
    std::vector<std::size_t> widths{8, 16, 32, 64};
    bool mask_shadows = true;

    void validate() const {
        if (!(learning_rate > 0)) throw Error(ErrorKind::config, "learning_rate must be positive");
        if (batch_size < 1) throw Error(ErrorKind::config, "batch_size must be >= 1");
        if (epochs < 1) throw Error(ErrorKind::config, "epochs must be >= 1");
        if (widths.empty()) throw Error(ErrorKind::config, "widths must list at least one stage");
    }
};

/// One crop ready for training or evaluation.
struct TrainingSample {
    std::string id;
    Split split = Split::train;
    std::int64_t tile_id = 0;
    FloatRaster elevations;
    ShadingContext ctx;
    FloatRaster target;
    MaskRaster valid;
};

inline TrainingSample make_sample(const DemGrid& parent, const SampleManifest& m, FloatRaster target) {
    const DemGrid crop = extract_crop(parent, m.crop);
    TrainingSample s{std::to_string(m.sample_id), m.split, m.tile_id, crop.elevations(),
                     make_context(crop, m.camera, m.sun_dir), std::move(target), crop.valid()};
    if (!s.target.same_shape(s.elevations)) throw Error(ErrorKind::shape, "target does not match the crop size");
    return s;
}

/// Samples with at least one unshadowed valid pixel, split by manifest tag.
inline std::vector<TrainingSample> samples_from_bundle(const GroundTruthBundle& b) {
    std::vector<TrainingSample> out;
    for (const auto& s : b.samples) {
        auto ts = make_sample(b.dem, s.manifest, s.observed);
        std::size_t lit = 0;
        for (std::size_t i = 0; i < ts.valid.size(); ++i) lit += (ts.valid[i] && !ts.ctx.shadow[i]) ? 1 : 0;
        if (lit > 0) out.push_back(std::move(ts));
    }
    return out;
}

inline std::vector<TrainingSample> select_split(const std::vector<TrainingSample>& all, Split split) {
    std::vector<TrainingSample> out;
    for (const auto& s : all)
        if (s.split == split) out.push_back(s);
    return out;
}

/// Throws unless no tile id occurs in both sets.
inline void check_tile_disjoint(const std::vector<TrainingSample>& a, const std::vector<TrainingSample>& b) {
    std::set<std::int64_t> tiles;
    for (const auto& s : a) tiles.insert(s.tile_id);
    for (const auto& s : b)
        if (tiles.count(s.tile_id))
            throw Error(ErrorKind::invalid_input, "tile " + std::to_string(s.tile_id) + " is shared between splits");
}

inline NormalizationStats training_stats(const std::vector<TrainingSample>& train) {
    std::vector<FloatRaster> crops;
    for (const auto& s : train) crops.push_back(s.elevations);
    return dataset_stats(crops);
}

struct Predictor {
    ModelKind model;
    NormalizationStats stats;
    nn::UNet net;

    Predictor(ModelKind m, const TrainConfig& cfg, NormalizationStats st = {})
        : model(m), stats(st), net(nn::UNetConfig{1, n_params(m), cfg.widths, cfg.leaky_slope, cfg.seed}) {}
};

inline nn::Tensor input_batch(const std::vector<const FloatRaster*>& normalized) {
    const std::size_t w = normalized[0]->width(), h = normalized[0]->height();
    nn::Tensor x(normalized.size(), 1, h, w);
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        if (normalized[i]->width() != w || normalized[i]->height() != h) throw Error(ErrorKind::shape, "batch crops differ in size");
        std::copy(normalized[i]->values().begin(), normalized[i]->values().end(), x.sample(i));
    }
    return x;
}

inline CoefficientMap coeff_map_of(const nn::Tensor& y, std::size_t i, ModelKind model) {
    std::vector<FloatRaster> ch;
    for (std::size_t j = 0; j < y.c; ++j) {
        const double* p = y.sample(i) + j * y.plane();
        ch.emplace_back(y.w, y.h, std::vector<double>(p, p + y.plane()));
    }
    return CoefficientMap(model, std::move(ch));
}

/// Inference-mode prediction from an already normalized crop.
inline CoefficientMap predictor_forward(Predictor& p, const FloatRaster& normalized_crop) {
    const nn::Tensor y = p.net.forward(input_batch({&normalized_crop}), false);
    return coeff_map_of(y, 0, p.model);
}

/// Mean-centres and scales a raw elevation crop, then predicts.
inline CoefficientMap predict_crop(Predictor& p, const FloatRaster& elevations) {
    return predictor_forward(p, normalize_crop(elevations, p.stats));
}

/// Mean per-sample rendering MSE of a batch; with `train` set, runs the
/// network in training mode and accumulates parameter gradients.
inline double batch_loss(Predictor& p, const std::vector<const TrainingSample*>& batch, bool train, bool mask_shadows = true) {
    std::vector<FloatRaster> inputs;
    for (const auto* s : batch) inputs.push_back(normalize_crop(s->elevations, p.stats));
    std::vector<const FloatRaster*> ptrs;
    for (const auto& x : inputs) ptrs.push_back(&x);
    const nn::Tensor y = p.net.forward(input_batch(ptrs), train);
    const double bsz = static_cast<double>(batch.size());
    nn::Tensor dy(y.n, y.c, y.h, y.w);
    std::vector<double> losses(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        const auto& s = *batch[i];
        const CoefficientMap cm = coeff_map_of(y, i, p.model);
        const auto rep = photometric_loss(render(s.ctx, cm), s.target, s.valid, mask_shadows);
        losses[i] = rep.mse;
        if (!train) return;
        const auto g = backward(loss_gradient(rep, static_cast<double>(rep.n_pixels) * bsz), s.ctx, p.model);
        for (std::size_t j = 0; j < g.size(); ++j) std::copy(g[j].values().begin(), g[j].values().end(), dy.sample(i) + j * dy.plane());
    });
    if (train) p.net.backward(dy);
    return std::accumulate(losses.begin(), losses.end(), 0.0) / bsz;
}

/// Mean per-sample MSE in inference mode.
inline double evaluate_mse(Predictor& p, const std::vector<TrainingSample>& samples, std::size_t batch_size = 16,
                           bool mask_shadows = true) {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0;
    for (std::size_t k = 0; k < samples.size(); k += batch_size) {
        std::vector<const TrainingSample*> b;
        for (std::size_t i = k; i < std::min(samples.size(), k + batch_size); ++i) b.push_back(&samples[i]);
        total += batch_loss(p, b, false, mask_shadows) * static_cast<double>(b.size());
    }
    return total / static_cast<double>(samples.size());
}

struct CurvePoint {
    std::size_t epoch = 0;
    Split split = Split::train;
    std::string model;
    double mse = 0;
};

struct TrainResult {
    std::vector<CurvePoint> curves;
    std::vector<double> batch_losses;
    double initial_train_mse = 0, final_train_mse = 0;
    double initial_val_mse = 0, final_val_mse = 0;
    std::size_t iterations = 0;
    /// Fraction of predicted training coefficients below zero (logged, not constrained).
    double negative_fraction = 0;
};

/// Fits the predictor by backpropagating the rendering MSE through the
/// renderer and the network. Epoch 0 of the curves is the untrained network.
inline TrainResult train_predictor(Predictor& p, const std::vector<TrainingSample>& train,
                                   const std::vector<TrainingSample>& val, const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty() || val.empty()) throw Error(ErrorKind::invalid_input, "train and val splits must be non-empty");
    check_tile_disjoint(train, val);
    p.stats = training_stats(train);
    const std::string tag = to_string(p.model);

    TrainResult res;
    auto record = [&](std::size_t epoch) {
        const double tr = evaluate_mse(p, train, 16, cfg.mask_shadows), va = evaluate_mse(p, val, 16, cfg.mask_shadows);
        res.curves.push_back({epoch, Split::train, tag, tr});
        res.curves.push_back({epoch, Split::val, tag, va});
        return std::pair{tr, va};
    };
    std::tie(res.initial_train_mse, res.initial_val_mse) = record(0);

    nn::Optimizer opt(cfg.optimizer, cfg.learning_rate);
    const auto params = p.net.params();
    std::mt19937_64 rng(sub_seed(cfg.seed, "batches"));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    bool done = false;
    std::vector<double> epoch_train{res.initial_train_mse};
    std::size_t rising = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs && !done; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(detail::bounded(rng, i))]);
        for (std::size_t k = 0; k < order.size(); k += cfg.batch_size) {
            std::vector<const TrainingSample*> b;
            for (std::size_t i = k; i < std::min(order.size(), k + cfg.batch_size); ++i) b.push_back(&train[order[i]]);
            p.net.zero_grad();
            const double loss = batch_loss(p, b, true, cfg.mask_shadows);
            if (!std::isfinite(loss))
                throw TrainingInstabilityError(res.iterations, "non-finite loss at batch " + std::to_string(res.iterations));
            res.batch_losses.push_back(loss);
            opt.step(params);
            ++res.iterations;
            if (cfg.max_iterations && res.iterations >= cfg.max_iterations) {
                done = true;
                break;
            }
        }
        std::tie(res.final_train_mse, res.final_val_mse) = record(epoch);
        rising = res.final_train_mse > epoch_train.back() ? rising + 1 : 0;
        epoch_train.push_back(res.final_train_mse);
        if (rising >= kDivergencePatience)
            throw DivergenceError(epoch_train, "training loss increased " + std::to_string(rising) + " consecutive epochs");
    }

    std::size_t neg = 0, total = 0;
    for (const auto& s : train) {
        const auto cm = predict_crop(p, s.elevations);
        for (const auto& ch : cm.channels())
            for (double v : ch.values()) {
                neg += v < 0 ? 1 : 0;
                ++total;
            }
    }
    res.negative_fraction = total ? static_cast<double>(neg) / static_cast<double>(total) : 0.0;
    return res;
}

inline void write_loss_curves_csv(std::ostream& os, const std::vector<CurvePoint>& curves) {
    os << "epoch,split,model,mse\n" << std::setprecision(10);
    for (const auto& c : curves) os << c.epoch << ',' << to_string(c.split) << ',' << c.model << ',' << c.mse << '\n';
}

// ---------------------------------------------------------------------------
// Model comparison

struct ModelComparisonRow {
    ModelKind model;
    std::vector<CurvePoint> curves;
    double final_train_mse = 0, final_val_mse = 0;
    /// Exact per-pixel LS fit MSE on the scene views; NaN when unavailable.
    double ls_fit_mse = std::numeric_limits<double>::quiet_NaN();
};

/// Trains one predictor per listed model on identical data and seeds.
inline std::vector<ModelComparisonRow> compare_models(const std::vector<TrainingSample>& train,
                                                      const std::vector<TrainingSample>& val,
                                                      const std::vector<ModelKind>& models, const TrainConfig& cfg,
                                                      const std::vector<TargetView>* scene_views = nullptr) {
    if (models.size() < 2) throw Error(ErrorKind::invalid_input, "compare_models needs at least two models");
    std::vector<double> ls(models.size(), std::numeric_limits<double>::quiet_NaN());
    if (scene_views) ls = ls_fit_mse(*scene_views, models);
    std::vector<ModelComparisonRow> rows;
    for (std::size_t k = 0; k < models.size(); ++k) {
        Predictor p(models[k], cfg);
        const auto r = train_predictor(p, train, val, cfg);
        rows.push_back({models[k], r.curves, r.final_train_mse, r.final_val_mse, ls[k]});
    }
    return rows;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ModelComparisonRow>& rows) {
    os << "model,final_train_mse,final_val_mse,ls_fit_mse\n" << std::setprecision(10);
    for (const auto& r : rows)
        os << to_string(r.model) << ',' << r.final_train_mse << ',' << r.final_val_mse << ',' << r.ls_fit_mse << '\n';
}

inline void write_comparison_table(std::ostream& os, const std::vector<ModelComparisonRow>& rows) {
    auto sci = [](double v) {
        std::ostringstream s;
        if (std::isnan(v)) return std::string("n/a");
        s << std::scientific << std::setprecision(4) << v;
        return s.str();
    };
    os << std::left << std::setw(8) << "Model" << std::right << std::setw(16) << "Train MSE" << std::setw(16) << "Val MSE"
       << std::setw(16) << "LS fit MSE" << '\n';
    for (const auto& r : rows)
        os << std::left << std::setw(8) << to_string(r.model) << std::right << std::setw(16) << sci(r.final_train_mse)
           << std::setw(16) << sci(r.final_val_mse) << std::setw(16) << sci(r.ls_fit_mse) << '\n';
}

// ---------------------------------------------------------------------------
// Evaluation against the uniform baseline

inline std::vector<TargetView> as_target_views(const std::vector<TrainingSample>& samples) {
    std::vector<TargetView> out;
    for (const auto& s : samples) out.push_back({s.ctx, s.target, s.valid});
    return out;
}

/// Scores predictor renders ("svbrdf") and a single uniform reflectance fitted
/// on `fit_set`, rendered and range-normalized to each target
/// ("uniform-normalized"), on the crops of `eval_set`.
inline std::vector<EvalReport> evaluate_against_uniform(Predictor& p, const std::vector<TrainingSample>& fit_set,
                                                        const std::vector<TrainingSample>& eval_set) {
    if (eval_set.empty()) throw Error(ErrorKind::empty_domain, "no samples to evaluate");
    const Coeffs uniform = uniform_baseline(as_target_views(fit_set), p.model).coeffs;
    EvalReport svbrdf{"svbrdf", {}}, base{"uniform-normalized", {}};
    for (const auto& s : eval_set) {
        const auto pred = render(s.ctx, predict_crop(p, s.elevations)).radiance;
        const auto uni = render(s.ctx, CoefficientMap::uniform(p.model, s.target.width(), s.target.height(), uniform)).radiance;
        svbrdf.samples.push_back(score_sample(s.id, pred, s.target));
        base.samples.push_back(score_sample(s.id, range_normalize(uni, s.target), s.target));
    }
    return {svbrdf, base};
}

} // namespace svbrdf
