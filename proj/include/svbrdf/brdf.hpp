#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "photogeom.hpp"

namespace svbrdf {

/// Cosine-polynomial reflectance models. Every model is linear in its
/// coefficients:
///   M1  a cos(ti) + b cos(tp)
///   M2  a cos(ti) + b cos(tp) + c
///   M3  a cos(ti) + b cos(tp) + c cos(ti) cos(tp) + d
///   M4  a cos(ti) + b cos(tp) + c cos^2(ti) + d
///   M5  a cos(ti) + b cos(tp) + c cos^2(tp) + d
///   M6  a cos(th) + b cos(td) + c cos(ph) + d cos(pd)
enum class ModelKind { M1, M2, M3, M4, M5, M6 };

inline constexpr std::size_t kMaxParams = 4;

inline constexpr std::size_t n_params(ModelKind k) {
    switch (k) {
    case ModelKind::M1: return 2;
    case ModelKind::M2: return 3;
    default: return 4;
    }
}

inline const char* to_string(ModelKind k) {
    constexpr const char* names[] = {"M1", "M2", "M3", "M4", "M5", "M6"};
    return names[static_cast<int>(k)];
}

inline ModelKind model_from_string(const std::string& s) {
    for (int i = 0; i < 6; ++i)
        if (s == to_string(static_cast<ModelKind>(i))) return static_cast<ModelKind>(i);
    throw Error(ErrorKind::invalid_input, "unknown BRDF model '" + s + "'");
}

inline constexpr std::array<ModelKind, 6> kAllModels{ModelKind::M1, ModelKind::M2, ModelKind::M3,
                                                     ModelKind::M4, ModelKind::M5, ModelKind::M6};

/// Fixed-capacity coefficient / basis vector.
struct Coeffs {
    std::array<double, kMaxParams> v{};
    std::size_t n = 0;

    Coeffs() = default;
    Coeffs(std::initializer_list<double> init) : n(init.size()) {
        if (init.size() > kMaxParams) throw Error(ErrorKind::model_arity, "too many coefficients");
        std::size_t i = 0;
        for (double x : init) v[i++] = x;
    }
    static Coeffs zeros(std::size_t n) {
        Coeffs c;
        c.n = n;
        return c;
    }
    double operator[](std::size_t i) const { return v[i]; }
    double& operator[](std::size_t i) { return v[i]; }
    std::size_t size() const { return n; }
    std::span<const double> span() const { return {v.data(), n}; }
    bool operator==(const Coeffs&) const = default;
};

/// Basis functions of the model at one pixel; also the gradient of the
/// reflectance with respect to the coefficients.
inline Coeffs basis(ModelKind k, const PixelAngles& a) {
    const double ci = std::cos(a.theta_i), cp = std::cos(a.theta_p);
    switch (k) {
    case ModelKind::M1: return {ci, cp};
    case ModelKind::M2: return {ci, cp, 1.0};
    case ModelKind::M3: return {ci, cp, ci * cp, 1.0};
    case ModelKind::M4: return {ci, cp, ci * ci, 1.0};
    case ModelKind::M5: return {ci, cp, cp * cp, 1.0};
    case ModelKind::M6:
        return {std::cos(a.theta_h), std::cos(a.theta_d), std::cos(a.phi_h), std::cos(a.phi_d)};
    }
    return {};
}

inline Coeffs grad_coeffs(ModelKind k, const PixelAngles& a) { return basis(k, a); }

inline double eval(ModelKind k, std::span<const double> coeffs, const PixelAngles& a) {
    if (coeffs.size() != n_params(k))
        throw Error(ErrorKind::model_arity, std::string(to_string(k)) + " expects " + std::to_string(n_params(k)) +
                                                " coefficients, got " + std::to_string(coeffs.size()));
    const Coeffs b = basis(k, a);
    double r = 0;
    for (std::size_t j = 0; j < b.n; ++j) r += coeffs[j] * b[j];
    return r;
}

inline double eval(ModelKind k, const Coeffs& c, const PixelAngles& a) { return eval(k, c.span(), a); }

/// Largest strict sub-model reachable by zeroing trailing coefficients.
inline std::optional<ModelKind> nested_of(ModelKind k) {
    switch (k) {
    case ModelKind::M2: return ModelKind::M1;
    case ModelKind::M3:
    case ModelKind::M4:
    case ModelKind::M5: return ModelKind::M2;
    default: return std::nullopt;
    }
}

/// Embed sub-model coefficients into the super-model's layout (M1/M2 -> M2..M5).
inline Coeffs embed_coeffs(ModelKind sub, const Coeffs& c, ModelKind super) {
    Coeffs out = Coeffs::zeros(n_params(super));
    out[0] = c[0];
    out[1] = c[1];
    if (sub == ModelKind::M2 && super != ModelKind::M2) out[3] = c[2];
    if (sub == ModelKind::M2 && super == ModelKind::M2) out[2] = c[2];
    return out;
}

/// Per-pixel coefficient rasters, one channel per model parameter.
class CoefficientMap {
public:
    CoefficientMap() = default;
    CoefficientMap(ModelKind model, std::size_t width, std::size_t height)
        : model_(model), channels_(svbrdf::n_params(model), FloatRaster(width, height)) {}
    CoefficientMap(ModelKind model, std::vector<FloatRaster> channels) : model_(model), channels_(std::move(channels)) {
        if (channels_.size() != svbrdf::n_params(model))
            throw Error(ErrorKind::model_arity, "channel count does not match model arity");
        for (const auto& c : channels_) {
            if (!c.same_shape(channels_.front())) throw Error(ErrorKind::shape, "coefficient channels differ in shape");
            for (double v : c.values())
                if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, "non-finite coefficient");
        }
    }
    static CoefficientMap uniform(ModelKind model, std::size_t width, std::size_t height, const Coeffs& c) {
        if (c.size() != svbrdf::n_params(model)) throw Error(ErrorKind::model_arity, "uniform coefficients have wrong arity");
        CoefficientMap m(model, width, height);
        for (std::size_t j = 0; j < c.size(); ++j) m.channels_[j] = FloatRaster(width, height, c[j]);
        return m;
    }

    ModelKind model() const noexcept { return model_; }
    std::size_t n_params() const noexcept { return channels_.size(); }
    std::size_t width() const { return channels_.empty() ? 0 : channels_.front().width(); }
    std::size_t height() const { return channels_.empty() ? 0 : channels_.front().height(); }
    FloatRaster& channel(std::size_t j) { return channels_.at(j); }
    const FloatRaster& channel(std::size_t j) const { return channels_.at(j); }
    const std::vector<FloatRaster>& channels() const { return channels_; }

    Coeffs at(std::size_t i) const {
        Coeffs c = Coeffs::zeros(channels_.size());
        for (std::size_t j = 0; j < channels_.size(); ++j) c[j] = channels_[j][i];
        return c;
    }
    void set(std::size_t i, const Coeffs& c) {
        for (std::size_t j = 0; j < channels_.size(); ++j) channels_[j][i] = c[j];
    }

    CoefficientMap window(std::size_t col0, std::size_t row0, std::size_t w, std::size_t h) const {
        std::vector<FloatRaster> ch;
        for (const auto& c : channels_) ch.push_back(c.window(col0, row0, w, h));
        return CoefficientMap(model_, std::move(ch));
    }

    bool operator==(const CoefficientMap&) const = default;

private:
    ModelKind model_ = ModelKind::M2;
    std::vector<FloatRaster> channels_;
};

} // namespace svbrdf
