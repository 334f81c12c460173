#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lsq.hpp"
#include "render.hpp"

namespace svbrdf {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

inline double mse(const FloatRaster& a, const FloatRaster& b, const MaskRaster* valid = nullptr) {
    if (!a.same_shape(b)) throw Error(ErrorKind::shape, "image shapes differ");
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (valid && !(*valid)[i]) continue;
        const double d = a[i] - b[i];
        s += d * d;
        ++n;
    }
    if (n == 0) throw Error(ErrorKind::empty_domain, "no pixels to compare");
    return s / static_cast<double>(n);
}

/// Peak signal-to-noise ratio in dB. Identical images give +infinity, the
/// "exact" sentinel.
inline double psnr(const FloatRaster& a, const FloatRaster& b, double peak, const MaskRaster* valid = nullptr) {
    if (!(peak > 0)) throw Error(ErrorKind::invalid_input, "peak must be positive");
    const double m = mse(a, b, valid);
    if (m == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / m);
}

inline bool is_exact(double psnr_db) { return std::isinf(psnr_db) && psnr_db > 0; }

/// Peak used for float radiance images: the ground-truth maximum.
inline double peak_of(const FloatRaster& target) {
    const double p = *std::max_element(target.values().begin(), target.values().end());
    if (!(p > 0)) throw Error(ErrorKind::invalid_input, "ground-truth image has no positive values");
    return p;
}

namespace detail {

inline std::vector<double> gaussian_kernel() {
    std::vector<double> k(kSsimWindow);
    double s = 0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
        s += k[static_cast<std::size_t>(i)];
    }
    for (auto& v : k) v /= s;
    return k;
}

/// Separable Gaussian filter, "valid" region only.
inline FloatRaster filter_valid(const FloatRaster& in, const std::vector<double>& k) {
    const std::size_t win = k.size();
    const std::size_t ow = in.width() - win + 1, oh = in.height() - win + 1;
    FloatRaster tmp(ow, in.height());
    for (std::size_t r = 0; r < in.height(); ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0;
            for (std::size_t j = 0; j < win; ++j) s += k[j] * in(c + j, r);
            tmp(c, r) = s;
        }
    FloatRaster out(ow, oh);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0;
            for (std::size_t i = 0; i < win; ++i) s += k[i] * tmp(c, r + i);
            out(c, r) = s;
        }
    return out;
}

} // namespace detail

/// Local SSIM map over every full 11x11 Gaussian (sigma 1.5) window.
inline FloatRaster ssim_map(const FloatRaster& a, const FloatRaster& b, double peak) {
    if (!a.same_shape(b)) throw Error(ErrorKind::shape, "image shapes differ");
    if (a.width() < kSsimWindow || a.height() < kSsimWindow)
        throw Error(ErrorKind::invalid_input, "image smaller than the 11x11 SSIM window");
    if (!(peak > 0)) throw Error(ErrorKind::invalid_input, "peak must be positive");
    const auto k = detail::gaussian_kernel();
    FloatRaster aa(a.width(), a.height()), bb(a.width(), a.height()), ab(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = detail::filter_valid(a, k), mu_b = detail::filter_valid(b, k);
    const auto e_aa = detail::filter_valid(aa, k), e_bb = detail::filter_valid(bb, k), e_ab = detail::filter_valid(ab, k);
    const double c1 = (kSsimK1 * peak) * (kSsimK1 * peak), c2 = (kSsimK2 * peak) * (kSsimK2 * peak);
    FloatRaster out(mu_a.width(), mu_a.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
        out[i] = ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return out;
}

inline double ssim(const FloatRaster& a, const FloatRaster& b, double peak) {
    const auto m = ssim_map(a, b, peak);
    double s = 0;
    for (double v : m.values()) s += v;
    return s / static_cast<double>(m.size());
}

/// Affine map sending [min, max] of `rendered` onto [min, max] of `target`.
/// A constant rendering maps to the target mean.
inline FloatRaster range_normalize(const FloatRaster& rendered, const FloatRaster& target) {
    if (rendered.empty() || target.empty()) throw Error(ErrorKind::invalid_input, "empty image");
    const auto [rlo, rhi] = std::minmax_element(rendered.values().begin(), rendered.values().end());
    const auto [tlo, thi] = std::minmax_element(target.values().begin(), target.values().end());
    FloatRaster out(rendered.width(), rendered.height());
    if (*rhi == *rlo) {
        double mean = 0;
        for (double v : target.values()) mean += v;
        mean /= static_cast<double>(target.size());
        for (auto& v : out.values()) v = mean;
        return out;
    }
    const double scale = (*thi - *tlo) / (*rhi - *rlo);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = *tlo + (rendered[i] - *rlo) * scale;
    return out;
}

/// One coefficient vector fitted by least squares to every unshadowed valid
/// pixel of every view: the best spatially uniform reflectance.
inline LsqSolution uniform_baseline(const std::vector<TargetView>& views, ModelKind model) {
    LinearSystem sys(n_params(model));
    for (const auto& v : views)
        for (std::size_t i = 0; i < v.ctx.size(); ++i) {
            if (v.ctx.shadow[i] || !v.valid[i]) continue;
            sys.add(basis(model, v.ctx.geometry->at(i)), v.target[i]);
        }
    return solve_least_squares(sys);
}

struct SampleMetrics {
    std::string sample;
    double mse = 0, psnr = 0, ssim = 0;
};

/// Per-sample and aggregate photometric scores for one method.
struct EvalReport {
    std::string method;
    std::vector<SampleMetrics> samples;

    std::size_t count() const { return samples.size(); }
    double mean_mse() const { return mean_of(&SampleMetrics::mse); }
    double mean_psnr() const { return mean_of(&SampleMetrics::psnr); }
    double mean_ssim() const { return mean_of(&SampleMetrics::ssim); }

private:
    double mean_of(double SampleMetrics::*field) const {
        if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0;
        for (const auto& m : samples) s += m.*field;
        return s / static_cast<double>(samples.size());
    }
};

inline SampleMetrics score_sample(const std::string& id, const FloatRaster& rendered, const FloatRaster& target) {
    const double peak = peak_of(target);
    return {id, mse(rendered, target), psnr(rendered, target, peak), ssim(rendered, target, peak)};
}

inline std::string format_db(double v) {
    if (is_exact(v)) return "exact";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

/// Header records the SSIM settings, then one row per method: MSE, PSNR, SSIM.
inline void write_eval_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    os << "# ssim window=11 gaussian sigma=1.5 K1=0.01 K2=0.03; peak=max(ground truth)\n";
    os << "method,n,mse,psnr_db,ssim\n";
    os << std::setprecision(10);
    for (const auto& r : reports)
        os << r.method << ',' << r.count() << ',' << r.mean_mse() << ',' << format_db(r.mean_psnr()) << ','
           << r.mean_ssim() << '\n';
}

inline void write_eval_samples_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    os << "method,sample,mse,psnr_db,ssim\n" << std::setprecision(10);
    for (const auto& r : reports)
        for (const auto& s : r.samples)
            os << r.method << ',' << s.sample << ',' << s.mse << ',' << format_db(s.psnr) << ',' << s.ssim << '\n';
}

inline void write_eval_table(std::ostream& os, const std::vector<EvalReport>& reports) {
    os << std::left << std::setw(22) << "Method" << std::right << std::setw(8) << "N" << std::setw(14) << "MSE"
       << std::setw(12) << "PSNR" << std::setw(10) << "SSIM" << '\n';
    for (const auto& r : reports) {
        std::ostringstream mse_s, ssim_s;
        mse_s << std::scientific << std::setprecision(4) << r.mean_mse();
        ssim_s << std::fixed << std::setprecision(4) << r.mean_ssim();
        os << std::left << std::setw(22) << r.method << std::right << std::setw(8) << r.count() << std::setw(14)
           << mse_s.str() << std::setw(12) << format_db(r.mean_psnr()) << std::setw(10) << ssim_s.str() << '\n';
    }
}

} // namespace svbrdf
