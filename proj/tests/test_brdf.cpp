#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "svbrdf/brdf.hpp"

using namespace svbrdf;

namespace {

PixelAngles random_angles(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> half(0, kPi / 2), full(-kPi, kPi), phase(0, kPi);
    return {half(rng), phase(rng), half(rng), half(rng), full(rng), half(rng), full(rng)};
}

Coeffs random_coeffs(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-2, 2);
    Coeffs c = Coeffs::zeros(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = u(rng);
    return c;
}

PixelAngles ip(double ti_deg, double tp_deg) {
    PixelAngles a;
    a.theta_i = deg2rad(ti_deg);
    a.theta_p = deg2rad(tp_deg);
    return a;
}

} // namespace

TEST(BrdfModel, ArityMatchesTable) {
    EXPECT_EQ(n_params(ModelKind::M1), 2u);
    EXPECT_EQ(n_params(ModelKind::M2), 3u);
    for (auto m : {ModelKind::M3, ModelKind::M4, ModelKind::M5, ModelKind::M6}) EXPECT_EQ(n_params(m), 4u);
    for (auto m : kAllModels) EXPECT_EQ(model_from_string(to_string(m)), m);
    EXPECT_THROW(model_from_string("M7"), Error);
}

TEST(BrdfEval, Examples) {
    std::mt19937_64 rng(1);
    EXPECT_DOUBLE_EQ(eval(ModelKind::M2, Coeffs{0, 0, 0.7}, random_angles(rng)), 0.7);
    EXPECT_DOUBLE_EQ(eval(ModelKind::M1, Coeffs{1, 1}, ip(0, 0)), 2.0);
    EXPECT_NEAR(eval(ModelKind::M3, Coeffs{0.5, 0.25, 0.1, 0.05}, ip(60, 90)), 0.30, 1e-12);
}

TEST(BrdfEval, ArityMismatchThrows) {
    try {
        eval(ModelKind::M2, Coeffs{1, 2}, ip(0, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::model_arity);
    }
}

TEST(BrdfEval, M6UsesHalfAndDifferenceAngles) {
    PixelAngles a;
    a.theta_h = deg2rad(60);
    a.theta_d = 0;
    a.phi_h = kPi;
    a.phi_d = -kPi / 2;
    EXPECT_NEAR(eval(ModelKind::M6, Coeffs{1, 2, 3, 4}, a), 0.5 + 2 - 3 + 0, 1e-12);
}

TEST(GradCoeffs, Examples) {
    auto g = grad_coeffs(ModelKind::M2, ip(0, 0));
    EXPECT_EQ(g, (Coeffs{1, 1, 1}));
    auto g5 = grad_coeffs(ModelKind::M5, ip(60, 60));
    EXPECT_NEAR(g5[0], 0.5, 1e-12);
    EXPECT_NEAR(g5[1], 0.5, 1e-12);
    EXPECT_NEAR(g5[2], 0.25, 1e-12);
    EXPECT_EQ(g5[3], 1.0);
}

TEST(GradCoeffs, MatchesCentralFiniteDifferences) {
    std::mt19937_64 rng(2);
    for (auto m : kAllModels)
        for (int trial = 0; trial < 200; ++trial) {
            const auto a = random_angles(rng);
            const auto c = random_coeffs(rng, n_params(m));
            const auto g = grad_coeffs(m, a);
            for (std::size_t j = 0; j < c.size(); ++j) {
                const double h = 1e-5;
                Coeffs p = c, q = c;
                p[j] += h;
                q[j] -= h;
                const double fd = (eval(m, p, a) - eval(m, q, a)) / (2 * h);
                EXPECT_LE(std::abs(fd - g[j]), 1e-8 * std::max(1.0, std::abs(g[j]))) << to_string(m) << " j=" << j;
            }
        }
}

TEST(BrdfEval, LinearInCoefficients) {
    std::mt19937_64 rng(3);
    for (auto m : kAllModels)
        for (int trial = 0; trial < 100; ++trial) {
            const auto a = random_angles(rng);
            const auto u = random_coeffs(rng, n_params(m)), v = random_coeffs(rng, n_params(m));
            const double alpha = 0.7, beta = -1.3;
            Coeffs w = Coeffs::zeros(n_params(m));
            for (std::size_t j = 0; j < w.size(); ++j) w[j] = alpha * u[j] + beta * v[j];
            EXPECT_NEAR(eval(m, w, a), alpha * eval(m, u, a) + beta * eval(m, v, a), 1e-12);
            EXPECT_EQ(eval(m, Coeffs::zeros(n_params(m)), a), 0.0);
            // Gradient does not depend on the coefficients.
            EXPECT_EQ(grad_coeffs(m, a), basis(m, a));
        }
}

TEST(NestedOf, Structure) {
    EXPECT_EQ(nested_of(ModelKind::M2), ModelKind::M1);
    EXPECT_EQ(nested_of(ModelKind::M3), ModelKind::M2);
    EXPECT_EQ(nested_of(ModelKind::M4), ModelKind::M2);
    EXPECT_EQ(nested_of(ModelKind::M5), ModelKind::M2);
    EXPECT_FALSE(nested_of(ModelKind::M1).has_value());
    EXPECT_FALSE(nested_of(ModelKind::M6).has_value());
}

TEST(NestedOf, EmbeddedSubModelEvaluatesIdentically) {
    std::mt19937_64 rng(4);
    for (auto super : {ModelKind::M2, ModelKind::M3, ModelKind::M4, ModelKind::M5}) {
        const ModelKind sub = *nested_of(super);
        for (int trial = 0; trial < 100; ++trial) {
            const auto a = random_angles(rng);
            const auto c = random_coeffs(rng, n_params(sub));
            EXPECT_NEAR(eval(super, embed_coeffs(sub, c, super), a), eval(sub, c, a), 1e-12);
        }
    }
}

TEST(CoefficientMap, ArityAndFiniteness) {
    EXPECT_THROW(CoefficientMap(ModelKind::M2, std::vector<FloatRaster>(2, FloatRaster(2, 2))), Error);
    std::vector<FloatRaster> ch(3, FloatRaster(2, 2));
    ch[1][0] = INFINITY;
    EXPECT_THROW(CoefficientMap(ModelKind::M2, ch), Error);
    auto u = CoefficientMap::uniform(ModelKind::M1, 3, 2, Coeffs{0.5, 0.25});
    EXPECT_EQ(u.at(4), (Coeffs{0.5, 0.25}));
}
