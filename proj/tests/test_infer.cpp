#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "svbrdf/infer.hpp"

using namespace svbrdf;

namespace {

struct Scene {
    DemGrid dem;
    CoefficientMap truth;
};

Scene make_scene(std::size_t size, std::uint64_t seed, ModelKind model = ModelKind::M2, double relief = 30) {
    SynthSceneConfig c;
    c.dem_size = size;
    c.crop_size = std::min<std::size_t>(size, 8);
    c.relief_amplitude = relief;
    c.model = model;
    c.seed = seed;
    auto dem = generate_dem(c);
    auto truth = generate_coeff_field(c, dem);
    return {std::move(dem), std::move(truth)};
}

double max_abs_diff(const CoefficientMap& a, const CoefficientMap& b, const MaskRaster* only = nullptr) {
    double m = 0;
    for (std::size_t i = 0; i < a.width() * a.height(); ++i) {
        if (only && !(*only)[i]) continue;
        for (std::size_t j = 0; j < a.n_params(); ++j) m = std::max(m, std::abs(a.at(i)[j] - b.at(i)[j]));
    }
    return m;
}

CoefficientMap random_map(ModelKind model, std::size_t w, std::size_t h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 1.0);
    CoefficientMap m(model, w, h);
    for (std::size_t i = 0; i < w * h; ++i) {
        Coeffs c = Coeffs::zeros(n_params(model));
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = u(rng);
        m.set(i, c);
    }
    return m;
}

} // namespace

TEST(FitPixelLs, RecoversNoiseFreeCoefficients) {
    const auto sc = make_scene(16, 1);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 8, 2));
    const auto obs = gather_observations(views, ModelKind::M2);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto sol = fit_pixel_ls(obs[i], ModelKind::M2);
        if (sol.condition >= 1e6) continue;
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(sol.coeffs[j], sc.truth.at(i)[j], 1e-9);
        EXPECT_LT(sol.residual_rmse, 1e-12);
        ++checked;
    }
    EXPECT_EQ(checked, obs.size());
}

TEST(FitPixelLs, TwoObservationsForThreeParamsIsUnderObserved) {
    PixelObservations obs{{{0.5, 0.9, 1.0}, 0.3, false}, {{0.2, 0.8, 1.0}, 0.2, false}, {{0.7, 0.1, 1.0}, 0.4, true}};
    try {
        fit_pixel_ls(obs, ModelKind::M2);
        FAIL();
    } catch (const UnderObservedError& e) {
        EXPECT_EQ(e.needed(), 3u);
        EXPECT_EQ(e.rank(), 2u);
    }
}

TEST(FitPixelLs, NearlyConstantPhaseAngleIsIllConditioned) {
    // One far-away camera: the phase-angle column is almost a multiple of the constant column.
    const auto sc = make_scene(16, 3, ModelKind::M2, 20);
    CameraPose cam;
    cam.position = {37.5, 37.5, 1e10};
    cam.orientation = look_at(cam.position, {37.5, 37.5, 0});
    cam.projection = Projection::perspective;
    cam.image_width = cam.image_height = 16;
    const auto views = render_views(sc.dem, sc.truth, {{cam, sun_direction(40, 30)}});
    PixelObservations pooled;
    for (std::size_t i = 0; i < views[0].ctx.size(); ++i)
        pooled.push_back({basis(ModelKind::M2, views[0].ctx.geometry->at(i)), views[0].target[i], views[0].ctx.shadow[i] != 0});
    const auto sol = fit_pixel_ls(pooled, ModelKind::M2);
    EXPECT_GT(sol.condition, 1e8);
    EXPECT_TRUE(sol.used_qr);

    // An orthographic nadir view makes the two columns exactly collinear.
    const auto nadir = render_views(sc.dem, sc.truth, {{nadir_camera({37.5, 37.5, 100}, 16, 16), sun_direction(40, 30)}});
    PixelObservations exact;
    for (std::size_t i = 0; i < nadir[0].ctx.size(); ++i)
        exact.push_back({basis(ModelKind::M2, nadir[0].ctx.geometry->at(i)), nadir[0].target[i], nadir[0].ctx.shadow[i] != 0});
    try {
        fit_pixel_ls(exact, ModelKind::M2);
        FAIL();
    } catch (const UnderObservedError& e) {
        EXPECT_EQ(e.rank(), 2u);
    }
}

TEST(FitMapLs, ReportsUnderObservedPixelsInsteadOfThrowing) {
    const auto sc = make_scene(16, 4);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 2, 5));
    const auto fit = fit_map_ls(views, ModelKind::M2);
    EXPECT_EQ(fit.under_observed, 256u);
    EXPECT_EQ(count_set(fit.fitted), 0u);
}

TEST(PooledLoss, GradientMatchesFiniteDifferences) {
    const auto sc = make_scene(16, 6);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 3, 7));
    auto map = random_map(ModelKind::M2, 16, 16, 8);
    const auto pl = pooled_loss(views, map);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 40; ++t) {
        const std::size_t i = detail::bounded(rng, 256), j = detail::bounded(rng, 3);
        auto bump = [&](double d) {
            auto m = map;
            Coeffs c = m.at(i);
            c[j] += d;
            m.set(i, c);
            return pooled_loss(views, m).mse;
        };
        const double h = 1e-5, fd = (bump(h) - bump(-h)) / (2 * h), an = pl.grad[j][i];
        EXPECT_NEAR(an, fd, 1e-5 * std::max(std::abs(fd), 1e-8)) << i << "," << j;
    }
}

TEST(FitMapGd, TruthIsStationary) {
    const auto sc = make_scene(16, 10);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 3, 11));
    GdConfig cfg;
    cfg.steps = 50;
    const auto r = fit_map_gd(views, ModelKind::M2, cfg, sc.truth);
    EXPECT_LT(r.trajectory.front(), 1e-28);
    EXPECT_LT(r.trajectory.back(), 1e-28);
    EXPECT_LT(max_abs_diff(r.coeffs, sc.truth), 1e-9);
}

TEST(FitMapGd, AdamConvergesFromRandomInit) {
    const auto sc = make_scene(32, 12);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 4, 13));
    const auto ls = fit_map_ls(views, ModelKind::M2);
    MaskRaster well(32, 32, 0);
    for (std::size_t i = 0; i < well.size(); ++i) well[i] = ls.fitted[i] && ls.condition[i] <= 20;
    ASSERT_GT(count_set(well), 0.95 * 1024);
    GdConfig cfg;
    cfg.steps = 500;
    const auto r = fit_map_gd(views, ModelKind::M2, cfg, random_map(ModelKind::M2, 32, 32, 14));
    EXPECT_EQ(r.trajectory.size(), 501u);
    EXPECT_LT(max_abs_diff(r.coeffs, sc.truth, &well), 1e-3);
}

TEST(FitMapGd, SgdBelowInverseLipschitzIsMonotone) {
    const auto sc = make_scene(16, 15);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 4, 16));
    const double L = lipschitz_constant(views, ModelKind::M2);
    GdConfig cfg;
    cfg.optimizer = nn::OptimizerKind::sgd;
    cfg.learning_rate = 1.0 / L;
    cfg.steps = 300;
    const auto r = fit_map_gd(views, ModelKind::M2, cfg, random_map(ModelKind::M2, 16, 16, 17));
    for (std::size_t k = 1; k < r.trajectory.size(); ++k) EXPECT_LE(r.trajectory[k], r.trajectory[k - 1] * (1 + 1e-12));
    EXPECT_LT(r.trajectory.back(), 0.1 * r.trajectory.front());
}

TEST(FitMapGd, OversizedStepRaisesDivergenceWithTrajectory) {
    const auto sc = make_scene(16, 18);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 4, 19));
    GdConfig cfg;
    cfg.optimizer = nn::OptimizerKind::sgd;
    cfg.learning_rate = 3.0 / lipschitz_constant(views, ModelKind::M2);
    cfg.steps = 500;
    try {
        fit_map_gd(views, ModelKind::M2, cfg, random_map(ModelKind::M2, 16, 16, 20));
        FAIL();
    } catch (const DivergenceError& e) {
        EXPECT_GE(e.trajectory().size(), 10u);
        EXPECT_GT(e.trajectory().back(), e.trajectory().front());
    }
}

TEST(FitMapGd, AgreesWithPixelLeastSquares) {
    const auto sc = make_scene(16, 21);
    const auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 8, 22));
    const auto ls = fit_map_ls(views, ModelKind::M2);
    MaskRaster well(16, 16, 0);
    for (std::size_t i = 0; i < 256; ++i) well[i] = ls.fitted[i] && ls.condition[i] <= 20;
    ASSERT_GT(count_set(well), 200u);
    GdConfig cfg;
    cfg.steps = 3000;
    const auto r = fit_map_gd(views, ModelKind::M2, cfg);
    EXPECT_LT(max_abs_diff(r.coeffs, ls.coeffs, &well), 1e-6);
}

TEST(LsFitMse, NestedModelsAreOrdered) {
    for (auto truth_model : {ModelKind::M2, ModelKind::M3, ModelKind::M5, ModelKind::M6}) {
        const auto sc = make_scene(16, 23, truth_model);
        auto views = render_views(sc.dem, sc.truth, diverse_views(sc.dem, 8, 24));
        std::mt19937_64 rng(25);
        for (auto& v : views)
            for (auto& t : v.target.values()) t += 0.01 * detail::gaussian(rng);
        double mean = 0, var = 0;
        std::size_t n = 0;
        for (const auto& v : views)
            for (double t : v.target.values()) mean += t, ++n;
        mean /= double(n);
        for (const auto& v : views)
            for (double t : v.target.values()) var += (t - mean) * (t - mean);
        const double eps = 1e-6 * var / double(n);
        const auto m = ls_fit_mse(views, {ModelKind::M1, ModelKind::M2, ModelKind::M3, ModelKind::M4, ModelKind::M5});
        EXPECT_LE(m[1], m[0] + eps);
        for (std::size_t k = 2; k < 5; ++k) EXPECT_LE(m[k], m[1] + eps);
    }
}

namespace {

TrainConfig tiny_config(std::uint64_t seed = 0) {
    TrainConfig t;
    t.widths = {4, 8};
    t.batch_size = 4;
    t.epochs = 2;
    t.seed = seed;
    return t;
}

std::vector<TrainingSample> tiny_samples(std::uint64_t seed, double alpha = 0.0, std::size_t n = 24, double noise = 0.0,
                                         double amp = -1) {
    SynthSceneConfig c;
    c.dem_size = 64;
    c.crop_size = 16;
    c.n_crops = n;
    c.n_views = 4;
    c.alpha = alpha;
    c.tile_size_m = 40;
    c.noise_sigma = noise;
    c.seed = seed;
    if (amp >= 0) {
        c.coeff_field_spec = default_coeff_spec(ModelKind::M2);
        for (auto& s : c.coeff_field_spec) s.amplitude = amp;
    }
    return samples_from_bundle(generate_scene(c));
}

} // namespace

TEST(Predictor, ZeroHeadPredictsZeroMaps) {
    Predictor p(ModelKind::M3, TrainConfig{});
    std::mt19937_64 rng(1);
    FloatRaster crop(32, 32);
    for (auto& v : crop.values()) v = detail::gaussian(rng);
    const auto cm = predictor_forward(p, crop);
    EXPECT_EQ(cm.n_params(), 4u);
    for (const auto& ch : cm.channels())
        for (double v : ch.values()) EXPECT_EQ(v, 0.0);
}

TEST(Predictor, OutputMatchesInputSize) {
    Predictor p(ModelKind::M2, TrainConfig{});
    for (std::size_t s : {64u, 128u}) {
        const auto cm = predictor_forward(p, FloatRaster(s, s, 0.5));
        EXPECT_EQ(cm.width(), s);
        EXPECT_EQ(cm.height(), s);
    }
    try {
        predictor_forward(p, FloatRaster(24, 24));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::shape);
    }
}

TEST(Predictor, ConstantElevationShiftDoesNotChangeOutput) {
    auto samples = tiny_samples(30);
    TrainConfig cfg = tiny_config();
    Predictor p(ModelKind::M2, cfg, {50.0});
    for (auto* prm : p.net.params())
        if (prm->name.rfind("head", 0) == 0)
            for (std::size_t k = 0; k < prm->size(); ++k) prm->value[k] = 0.1 * std::sin(double(k) + 1);
    const auto& e = samples[0].elevations;
    FloatRaster shifted = e;
    for (auto& v : shifted.values()) v += 1234.5;
    const auto a = predict_crop(p, e), b = predict_crop(p, shifted);
    EXPECT_LT(max_abs_diff(a, b), 1e-9);
    EXPECT_GT(std::abs(a.at(0)[0]), 0.0);
}

TEST(Predictor, EndToEndGradientThroughRendererMatchesFiniteDifferences) {
    auto samples = tiny_samples(31);
    TrainConfig cfg = tiny_config(3);
    Predictor p(ModelKind::M2, cfg, training_stats(samples));
    std::mt19937_64 rng(4);
    for (auto* prm : p.net.params())
        if (prm->name.rfind("head", 0) == 0)
            for (auto& v : prm->value) v = 0.3 * detail::gaussian(rng);
    p.net.set_update_running(false);
    std::vector<const TrainingSample*> batch{&samples[0], &samples[1], &samples[2]};
    p.net.zero_grad();
    batch_loss(p, batch, true);
    std::vector<std::vector<double>> grads;
    for (auto* prm : p.net.params()) grads.push_back(prm->grad);
    std::size_t pi = 0;
    for (auto* prm : p.net.params()) {
        const auto& grad = grads[pi++];
        double num = 0, den = 0;
        for (std::size_t t = 0; t < std::min<std::size_t>(6, prm->size()); ++t) {
            const std::size_t k = detail::bounded(rng, prm->size());
            const double keep = prm->value[k], h = 1e-6;
            prm->value[k] = keep + h;
            const double lp = batch_loss(p, batch, true);
            prm->value[k] = keep - h;
            const double lm = batch_loss(p, batch, true);
            prm->value[k] = keep;
            const double fd = (lp - lm) / (2 * h);
            num += (fd - grad[k]) * (fd - grad[k]);
            den += std::max(fd * fd, grad[k] * grad[k]);
        }
        EXPECT_LT(den > 0 ? std::sqrt(num / den) : 0.0, 1e-3) << prm->name;
    }
}

TEST(TrainPredictor, LossDropsAndCurvesAreRecorded) {
    const auto all = tiny_samples(32, 0.0, 40);
    const auto train = select_split(all, Split::train), val = select_split(all, Split::val);
    ASSERT_FALSE(train.empty());
    ASSERT_FALSE(val.empty());
    TrainConfig cfg = tiny_config();
    cfg.epochs = 6;
    Predictor p(ModelKind::M2, cfg);
    const auto r = train_predictor(p, train, val, cfg);
    EXPECT_EQ(r.curves.size(), 2 * (cfg.epochs + 1));
    EXPECT_LT(r.final_train_mse, r.initial_train_mse);
    EXPECT_GT(p.stats.dataset_std, 0.0);
    std::ostringstream os;
    write_loss_curves_csv(os, r.curves);
    EXPECT_EQ(os.str().rfind("epoch,split,model,mse\n0,train,M2,", 0), 0u);
}

TEST(TrainPredictor, SharedTileIsRejected) {
    auto all = tiny_samples(33);
    auto train = select_split(all, Split::train);
    auto val = train;
    val.resize(1);
    val[0].split = Split::val;
    TrainConfig cfg = tiny_config();
    Predictor p(ModelKind::M2, cfg);
    EXPECT_THROW(train_predictor(p, train, val, cfg), Error);
}

TEST(TrainPredictor, NanLossRaisesInstabilityWithBatchId) {
    auto all = tiny_samples(34, 0.0, 40);
    auto train = select_split(all, Split::train);
    std::vector<TrainingSample> val;
    for (auto s : all)
        if (s.split != Split::train) val.push_back(std::move(s));
    ASSERT_FALSE(val.empty());
    for (auto& s : train) s.target[0] = std::numeric_limits<double>::quiet_NaN();
    for (auto& s : train) s.ctx.shadow[0] = 0;
    TrainConfig cfg = tiny_config();
    Predictor p(ModelKind::M2, cfg);
    try {
        train_predictor(p, train, val, cfg);
        FAIL();
    } catch (const TrainingInstabilityError& e) {
        EXPECT_EQ(e.batch_id(), 0u);
    }
}

TEST(TrainPredictor, UniformTruthCannotBeatFittedUniformBaseline) {
    const double sigma = 0.01;
    const auto all = tiny_samples(35, 0.5, 40, sigma, 0.0);
    const auto train = select_split(all, Split::train), val = select_split(all, Split::val);
    TrainConfig cfg = tiny_config();
    cfg.epochs = 4;
    Predictor p(ModelKind::M2, cfg);
    train_predictor(p, train, val, cfg);
    for (const auto& s : val) {
        const auto base = uniform_baseline({{s.ctx, s.target, s.valid}}, ModelKind::M2);
        const auto pred = photometric_loss(render(s.ctx, predict_crop(p, s.elevations)), s.target, s.valid);
        const auto uni = photometric_loss(render(s.ctx, CoefficientMap::uniform(ModelKind::M2, 16, 16, base.coeffs)),
                                          s.target, s.valid);
        EXPECT_GE(pred.mse, uni.mse - 3 * sigma * sigma);
    }
}

TEST(CompareModels, DuplicateModelsGiveIdenticalRows) {
    const auto all = tiny_samples(36, 0.0, 30);
    const auto train = select_split(all, Split::train), val = select_split(all, Split::val);
    TrainConfig cfg = tiny_config();
    cfg.epochs = 1;
    const auto rows = compare_models(train, val, {ModelKind::M2, ModelKind::M2, ModelKind::M1}, cfg);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].final_train_mse, rows[1].final_train_mse);
    EXPECT_EQ(rows[0].final_val_mse, rows[1].final_val_mse);
    EXPECT_THROW(compare_models(train, val, {ModelKind::M2}, cfg), Error);
    std::ostringstream csv, table;
    write_comparison_csv(csv, rows);
    write_comparison_table(table, rows);
    EXPECT_NE(csv.str().find("model,final_train_mse,final_val_mse,ls_fit_mse"), std::string::npos);
    EXPECT_NE(table.str().find("n/a"), std::string::npos);
}
