#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace svbrdf::nn {

/// Dense NCHW tensor of doubles.
struct Tensor {
    std::size_t n = 0, c = 0, h = 0, w = 0;
    std::vector<double> d;

    Tensor() = default;
    Tensor(std::size_t n_, std::size_t c_, std::size_t h_, std::size_t w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_), d(n_ * c_ * h_ * w_, fill) {}

    std::size_t size() const { return d.size(); }
    std::size_t plane() const { return h * w; }
    double& operator()(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) {
        return d[((i * c + ch) * h + y) * w + x];
    }
    double operator()(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) const {
        return d[((i * c + ch) * h + y) * w + x];
    }
    double* sample(std::size_t i) { return d.data() + i * c * h * w; }
    const double* sample(std::size_t i) const { return d.data() + i * c * h * w; }
    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

/// Trainable array with its accumulated gradient.
struct Param {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> value, grad;

    Param() = default;
    Param(std::string name_, std::vector<std::size_t> shape_) : name(std::move(name_)), shape(std::move(shape_)) {
        std::size_t k = 1;
        for (auto s : shape) k *= s;
        value.assign(k, 0.0);
        grad.assign(k, 0.0);
    }
    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// Non-trainable state saved with checkpoints (batch-norm running moments).
struct Buffer {
    std::string name;
    std::vector<double>* data = nullptr;
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

/// Square convolution (kernel 1 or 3), stride 1, zero "same" padding.
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(const std::string& name, std::size_t in, std::size_t out, std::size_t k, bool bias = true)
        : in_(in), out_(out), k_(k), has_bias_(bias), weight_(name + ".weight", {out, in, k, k}),
          bias_(name + ".bias", {bias ? out : 0}) {
        if (k != 1 && k != 3) throw Error(ErrorKind::invalid_input, "only 1x1 and 3x3 kernels are supported");
    }

    /// Kaiming fan-in initialization for a leaky-ReLU of slope `a`.
    void init_kaiming(std::mt19937_64& rng, double a) {
        const double fan_in = static_cast<double>(in_ * k_ * k_);
        const double sd = std::sqrt(2.0 / ((1 + a * a) * fan_in));
        for (auto& v : weight_.value) v = sd * detail::gaussian(rng);
        std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
    }
    void init_zero() {
        std::fill(weight_.value.begin(), weight_.value.end(), 0.0);
        std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
    }

    Tensor forward(const Tensor& x, bool keep) {
        if (x.c != in_) throw Error(ErrorKind::shape, "conv input has " + std::to_string(x.c) + " channels, expected " + std::to_string(in_));
        const std::size_t hw = x.plane(), kk = in_ * k_ * k_;
        Tensor y(x.n, out_, x.h, x.w);
        if (keep) cols_.assign(x.n, {});
        const ConstMatMap wm(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(kk));
        for (std::size_t i = 0; i < x.n; ++i) {
            RowMat cols = im2col(x, i);
            MatMap ym(y.sample(i), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(hw));
            ym.noalias() = wm * cols;
            if (has_bias_)
                for (std::size_t o = 0; o < out_; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += bias_.value[o];
            if (keep) cols_[i] = std::move(cols);
        }
        return y;
    }

    Tensor backward(const Tensor& dy) {
        if (cols_.size() != dy.n) throw Error(ErrorKind::shape, "conv backward without a matching forward");
        const std::size_t hw = dy.plane(), kk = in_ * k_ * k_;
        const ConstMatMap wm(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(kk));
        MatMap gw(weight_.grad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(kk));
        Tensor dx(dy.n, in_, dy.h, dy.w);
        for (std::size_t i = 0; i < dy.n; ++i) {
            const ConstMatMap g(dy.sample(i), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(hw));
            gw.noalias() += g * cols_[i].transpose();
            if (has_bias_)
                for (std::size_t o = 0; o < out_; ++o) bias_.grad[o] += g.row(static_cast<Eigen::Index>(o)).sum();
            const RowMat dcols = wm.transpose() * g;
            col2im(dcols, dx, i);
        }
        return dx;
    }

    std::vector<Param*> params() {
        if (has_bias_) return {&weight_, &bias_};
        return {&weight_};
    }
    Param& weight() { return weight_; }
    Param& bias() { return bias_; }

private:
    RowMat im2col(const Tensor& x, std::size_t i) const {
        const auto H = static_cast<std::ptrdiff_t>(x.h), W = static_cast<std::ptrdiff_t>(x.w);
        const auto pad = static_cast<std::ptrdiff_t>(k_ / 2);
        RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(in_ * k_ * k_), static_cast<Eigen::Index>(x.plane()));
        for (std::size_t ch = 0; ch < in_; ++ch)
            for (std::size_t ky = 0; ky < k_; ++ky)
                for (std::size_t kx = 0; kx < k_; ++kx) {
                    double* row = cols.row(static_cast<Eigen::Index>((ch * k_ + ky) * k_ + kx)).data();
                    const auto oy = static_cast<std::ptrdiff_t>(ky) - pad, ox = static_cast<std::ptrdiff_t>(kx) - pad;
                    for (std::ptrdiff_t y = 0; y < H; ++y) {
                        const std::ptrdiff_t sy = y + oy;
                        if (sy < 0 || sy >= H) continue;
                        for (std::ptrdiff_t xx = 0; xx < W; ++xx) {
                            const std::ptrdiff_t sx = xx + ox;
                            if (sx < 0 || sx >= W) continue;
                            row[y * W + xx] = x(i, ch, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                        }
                    }
                }
        return cols;
    }

    void col2im(const RowMat& cols, Tensor& dx, std::size_t i) const {
        const auto H = static_cast<std::ptrdiff_t>(dx.h), W = static_cast<std::ptrdiff_t>(dx.w);
        const auto pad = static_cast<std::ptrdiff_t>(k_ / 2);
        for (std::size_t ch = 0; ch < in_; ++ch)
            for (std::size_t ky = 0; ky < k_; ++ky)
                for (std::size_t kx = 0; kx < k_; ++kx) {
                    const double* row = cols.row(static_cast<Eigen::Index>((ch * k_ + ky) * k_ + kx)).data();
                    const auto oy = static_cast<std::ptrdiff_t>(ky) - pad, ox = static_cast<std::ptrdiff_t>(kx) - pad;
                    for (std::ptrdiff_t y = 0; y < H; ++y) {
                        const std::ptrdiff_t sy = y + oy;
                        if (sy < 0 || sy >= H) continue;
                        for (std::ptrdiff_t xx = 0; xx < W; ++xx) {
                            const std::ptrdiff_t sx = xx + ox;
                            if (sx < 0 || sx >= W) continue;
                            dx(i, ch, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx)) += row[y * W + xx];
                        }
                    }
                }
    }

    std::size_t in_ = 0, out_ = 0, k_ = 3;
    bool has_bias_ = true;
    Param weight_, bias_;
    std::vector<RowMat> cols_;
};

/// Per-channel batch normalization. Training uses batch moments (biased
/// variance) and updates running moments with momentum 0.9; inference uses
/// the running moments.
class BatchNorm2d {
public:
    static constexpr double kEps = 1e-5;

    BatchNorm2d() = default;
    BatchNorm2d(const std::string& name, std::size_t channels, double momentum = 0.9)
        : c_(channels), momentum_(momentum), gamma_(name + ".gamma", {channels}), beta_(name + ".beta", {channels}),
          running_mean_(channels, 0.0), running_var_(channels, 1.0), name_(name) {
        std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0);
    }

    Tensor forward(const Tensor& x, bool training) {
        if (x.c != c_) throw Error(ErrorKind::shape, "batch-norm channel mismatch");
        Tensor y(x.n, x.c, x.h, x.w);
        const std::size_t hw = x.plane();
        const double m = static_cast<double>(x.n * hw);
        if (training) {
            xhat_ = Tensor(x.n, x.c, x.h, x.w);
            inv_std_.assign(c_, 0.0);
        }
        for (std::size_t ch = 0; ch < c_; ++ch) {
            double mean, var;
            if (training) {
                double s = 0;
                for (std::size_t i = 0; i < x.n; ++i)
                    for (std::size_t p = 0; p < hw; ++p) s += x.sample(i)[ch * hw + p];
                mean = s / m;
                double v = 0;
                for (std::size_t i = 0; i < x.n; ++i)
                    for (std::size_t p = 0; p < hw; ++p) {
                        const double dlt = x.sample(i)[ch * hw + p] - mean;
                        v += dlt * dlt;
                    }
                var = v / m;
                if (update_running_) {
                    running_mean_[ch] = momentum_ * running_mean_[ch] + (1 - momentum_) * mean;
                    running_var_[ch] = momentum_ * running_var_[ch] + (1 - momentum_) * var;
                }
            } else {
                mean = running_mean_[ch];
                var = running_var_[ch];
            }
            const double inv = 1.0 / std::sqrt(var + kEps);
            if (training) inv_std_[ch] = inv;
            for (std::size_t i = 0; i < x.n; ++i)
                for (std::size_t p = 0; p < hw; ++p) {
                    const std::size_t k = ch * hw + p;
                    const double xh = (x.sample(i)[k] - mean) * inv;
                    if (training) xhat_.sample(i)[k] = xh;
                    y.sample(i)[k] = gamma_.value[ch] * xh + beta_.value[ch];
                }
        }
        return y;
    }

    Tensor backward(const Tensor& dy) {
        if (!xhat_.same_shape(dy)) throw Error(ErrorKind::shape, "batch-norm backward without a matching training forward");
        Tensor dx(dy.n, dy.c, dy.h, dy.w);
        const std::size_t hw = dy.plane();
        const double m = static_cast<double>(dy.n * hw);
        for (std::size_t ch = 0; ch < c_; ++ch) {
            double sdy = 0, sdyx = 0;
            for (std::size_t i = 0; i < dy.n; ++i)
                for (std::size_t p = 0; p < hw; ++p) {
                    const std::size_t k = ch * hw + p;
                    sdy += dy.sample(i)[k];
                    sdyx += dy.sample(i)[k] * xhat_.sample(i)[k];
                }
            gamma_.grad[ch] += sdyx;
            beta_.grad[ch] += sdy;
            const double scale = gamma_.value[ch] * inv_std_[ch] / m;
            for (std::size_t i = 0; i < dy.n; ++i)
                for (std::size_t p = 0; p < hw; ++p) {
                    const std::size_t k = ch * hw + p;
                    dx.sample(i)[k] = scale * (m * dy.sample(i)[k] - sdy - xhat_.sample(i)[k] * sdyx);
                }
        }
        return dx;
    }

    /// Finite-difference checks re-run the forward pass many times; freezing
    /// the running moments keeps those passes side-effect free.
    void set_update_running(bool on) { update_running_ = on; }

    std::vector<Param*> params() { return {&gamma_, &beta_}; }
    std::vector<Buffer> buffers() { return {{name_ + ".running_mean", &running_mean_}, {name_ + ".running_var", &running_var_}}; }
    const std::vector<double>& running_mean() const { return running_mean_; }
    const std::vector<double>& running_var() const { return running_var_; }

private:
    std::size_t c_ = 0;
    double momentum_ = 0.9;
    bool update_running_ = true;
    Param gamma_, beta_;
    std::vector<double> running_mean_, running_var_;
    std::string name_;
    Tensor xhat_;
    std::vector<double> inv_std_;
};

class LeakyReLU {
public:
    explicit LeakyReLU(double slope = 0.01) : slope_(slope) {}

    Tensor forward(const Tensor& x, bool keep) {
        Tensor y = x;
        for (auto& v : y.d)
            if (v < 0) v *= slope_;
        if (keep) x_ = x;
        return y;
    }
    Tensor backward(const Tensor& dy) const {
        if (!x_.same_shape(dy)) throw Error(ErrorKind::shape, "leaky-ReLU backward without a matching forward");
        Tensor dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i)
            if (x_.d[i] < 0) dx.d[i] *= slope_;
        return dx;
    }

private:
    double slope_;
    Tensor x_;
};

/// 2x2 max-pool, stride 2.
class MaxPool2 {
public:
    Tensor forward(const Tensor& x, bool keep) {
        if (x.h % 2 || x.w % 2) throw Error(ErrorKind::shape, "max-pool needs even spatial dimensions");
        Tensor y(x.n, x.c, x.h / 2, x.w / 2);
        if (keep) {
            argmax_.assign(y.size(), 0);
            in_shape_ = {x.n, x.c, x.h, x.w};
        }
        std::size_t o = 0;
        for (std::size_t i = 0; i < x.n; ++i)
            for (std::size_t ch = 0; ch < x.c; ++ch)
                for (std::size_t yy = 0; yy < y.h; ++yy)
                    for (std::size_t xx = 0; xx < y.w; ++xx, ++o) {
                        std::size_t best = ((i * x.c + ch) * x.h + 2 * yy) * x.w + 2 * xx;
                        for (std::size_t dy = 0; dy < 2; ++dy)
                            for (std::size_t dx = 0; dx < 2; ++dx) {
                                const std::size_t k = ((i * x.c + ch) * x.h + 2 * yy + dy) * x.w + 2 * xx + dx;
                                if (x.d[k] > x.d[best]) best = k;
                            }
                        y.d[o] = x.d[best];
                        if (keep) argmax_[o] = best;
                    }
        return y;
    }
    Tensor backward(const Tensor& dy) const {
        if (argmax_.size() != dy.size()) throw Error(ErrorKind::shape, "max-pool backward without a matching forward");
        Tensor dx(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
        for (std::size_t o = 0; o < dy.size(); ++o) dx.d[argmax_[o]] += dy.d[o];
        return dx;
    }

private:
    std::vector<std::size_t> argmax_;
    std::array<std::size_t, 4> in_shape_{};
};

/// Nearest-neighbour 2x upsampling.
inline Tensor upsample2(const Tensor& x) {
    Tensor y(x.n, x.c, x.h * 2, x.w * 2);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t ch = 0; ch < x.c; ++ch)
            for (std::size_t yy = 0; yy < y.h; ++yy)
                for (std::size_t xx = 0; xx < y.w; ++xx) y(i, ch, yy, xx) = x(i, ch, yy / 2, xx / 2);
    return y;
}

inline Tensor upsample2_backward(const Tensor& dy) {
    Tensor dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
    for (std::size_t i = 0; i < dy.n; ++i)
        for (std::size_t ch = 0; ch < dy.c; ++ch)
            for (std::size_t yy = 0; yy < dy.h; ++yy)
                for (std::size_t xx = 0; xx < dy.w; ++xx) dx(i, ch, yy / 2, xx / 2) += dy(i, ch, yy, xx);
    return dx;
}

/// Channel concatenation [a, b].
inline Tensor concat(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w) throw Error(ErrorKind::shape, "concat operands differ in shape");
    Tensor y(a.n, a.c + b.c, a.h, a.w);
    const std::size_t sa = a.c * a.plane(), sb = b.c * b.plane();
    for (std::size_t i = 0; i < a.n; ++i) {
        std::copy(a.sample(i), a.sample(i) + sa, y.sample(i));
        std::copy(b.sample(i), b.sample(i) + sb, y.sample(i) + sa);
    }
    return y;
}

/// Gradient of concat: the first `ca` channels, then the rest.
inline std::pair<Tensor, Tensor> split_channels(const Tensor& dy, std::size_t ca) {
    Tensor a(dy.n, ca, dy.h, dy.w), b(dy.n, dy.c - ca, dy.h, dy.w);
    const std::size_t sa = a.c * a.plane(), sb = b.c * b.plane();
    for (std::size_t i = 0; i < dy.n; ++i) {
        std::copy(dy.sample(i), dy.sample(i) + sa, a.sample(i));
        std::copy(dy.sample(i) + sa, dy.sample(i) + sa + sb, b.sample(i));
    }
    return {std::move(a), std::move(b)};
}

/// conv3x3 -> batch-norm -> leaky-ReLU.
class ConvBnAct {
public:
    ConvBnAct() = default;
    ConvBnAct(const std::string& name, std::size_t in, std::size_t out, double slope)
        : conv_(name + ".conv", in, out, 3, false), bn_(name + ".bn", out), act_(slope) {}

    Tensor forward(const Tensor& x, bool training) {
        return act_.forward(bn_.forward(conv_.forward(x, training), training), training);
    }
    Tensor backward(const Tensor& dy) { return conv_.backward(bn_.backward(act_.backward(dy))); }

    Conv2d& conv() { return conv_; }
    BatchNorm2d& bn() { return bn_; }
    std::vector<Param*> params() {
        auto p = conv_.params();
        for (auto* q : bn_.params()) p.push_back(q);
        return p;
    }

private:
    Conv2d conv_;
    BatchNorm2d bn_;
    LeakyReLU act_;
};

struct UNetConfig {
    std::size_t in_channels = 1;
    std::size_t out_channels = 3;
    /// One width per encoder stage; the stage count is widths.size().
    std::vector<std::size_t> widths{8, 16, 32, 64};
    double leaky_slope = 0.01;
    std::uint64_t seed = 0;
};

/// Encoder-decoder with max-pool downsampling, nearest upsampling followed by
/// convolution, and concatenated skips. Encoder stage k: CBR then pool.
/// Decoder stage k: upsample, CBR, concatenate encoder stage k's output.
/// A zero-initialized 1x1 convolution maps to the output channels.
class UNet {
public:
    explicit UNet(const UNetConfig& cfg) : cfg_(cfg) {
        const std::size_t s = cfg.widths.size();
        if (s == 0) throw Error(ErrorKind::config, "U-Net needs at least one stage");
        std::mt19937_64 rng(sub_seed(cfg.seed, "init"));
        std::size_t in = cfg.in_channels;
        for (std::size_t k = 0; k < s; ++k) {
            enc_.emplace_back("enc" + std::to_string(k), in, cfg.widths[k], cfg.leaky_slope);
            in = cfg.widths[k];
        }
        pools_.resize(s);
        dec_.resize(s);
        for (std::size_t k = s; k-- > 0;) {
            const std::size_t din = k == s - 1 ? cfg.widths[k] : 2 * cfg.widths[k + 1];
            dec_[k] = ConvBnAct("dec" + std::to_string(k), din, cfg.widths[k], cfg.leaky_slope);
        }
        head_ = Conv2d("head", 2 * cfg.widths[0], cfg.out_channels, 1, true);
        for (auto& e : enc_) e.conv().init_kaiming(rng, cfg.leaky_slope);
        for (auto& d : dec_) d.conv().init_kaiming(rng, cfg.leaky_slope);
        head_.init_zero();
    }

    const UNetConfig& config() const { return cfg_; }
    std::size_t stages() const { return cfg_.widths.size(); }
    std::size_t divisor() const { return std::size_t{1} << stages(); }

    Tensor forward(const Tensor& x, bool training) {
        if (x.c != cfg_.in_channels) throw Error(ErrorKind::shape, "network input channel mismatch");
        if (x.h == 0 || x.w == 0 || x.h % divisor() || x.w % divisor())
            throw Error(ErrorKind::shape, "input size " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                                              " is not divisible by " + std::to_string(divisor()));
        const std::size_t s = stages();
        std::vector<Tensor> skips(s);
        Tensor cur = x;
        for (std::size_t k = 0; k < s; ++k) {
            skips[k] = enc_[k].forward(cur, training);
            cur = pools_[k].forward(skips[k], training);
        }
        for (std::size_t k = s; k-- > 0;) {
            Tensor d = dec_[k].forward(upsample2(cur), training);
            cur = concat(d, skips[k]);
        }
        return head_.forward(cur, training);
    }

    /// Accumulates parameter gradients; returns the gradient w.r.t. the input.
    Tensor backward(const Tensor& dout) {
        const std::size_t s = stages();
        Tensor g = head_.backward(dout);
        std::vector<Tensor> skip_grads(s);
        for (std::size_t k = 0; k < s; ++k) {
            auto [gd, ge] = split_channels(g, cfg_.widths[k]);
            skip_grads[k] = std::move(ge);
            g = upsample2_backward(dec_[k].backward(gd));
        }
        for (std::size_t k = s; k-- > 0;) {
            Tensor ge = pools_[k].backward(g);
            for (std::size_t i = 0; i < ge.size(); ++i) ge.d[i] += skip_grads[k].d[i];
            g = enc_[k].backward(ge);
        }
        return g;
    }

    std::vector<Param*> params() {
        std::vector<Param*> p;
        for (auto& e : enc_)
            for (auto* q : e.params()) p.push_back(q);
        for (auto& d : dec_)
            for (auto* q : d.params()) p.push_back(q);
        for (auto* q : head_.params()) p.push_back(q);
        return p;
    }
    std::vector<Buffer> buffers() {
        std::vector<Buffer> b;
        for (auto& e : enc_)
            for (auto& q : e.bn().buffers()) b.push_back(q);
        for (auto& d : dec_)
            for (auto& q : d.bn().buffers()) b.push_back(q);
        return b;
    }
    std::size_t parameter_count() {
        std::size_t n = 0;
        for (auto* p : params()) n += p->size();
        return n;
    }
    void zero_grad() {
        for (auto* p : params()) p->zero_grad();
    }
    void set_update_running(bool on) {
        for (auto& e : enc_) e.bn().set_update_running(on);
        for (auto& d : dec_) d.bn().set_update_running(on);
    }

private:
    UNetConfig cfg_;
    std::vector<ConvBnAct> enc_, dec_;
    std::vector<MaxPool2> pools_;
    Conv2d head_;
};

enum class OptimizerKind { adam, sgd };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }
inline OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "sgd") return OptimizerKind::sgd;
    throw Error(ErrorKind::config, "unknown optimizer '" + s + "'");
}

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) or plain SGD over flat arrays.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
        if (!(lr > 0)) throw Error(ErrorKind::config, "learning rate must be positive");
    }

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

    /// One update of `value` given `grad`; `slot` identifies the array's moment buffers.
    void update(std::size_t slot, std::vector<double>& value, const std::vector<double>& grad) {
        if (kind_ == OptimizerKind::sgd) {
            for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr_ * grad[i];
            return;
        }
        if (slot >= m_.size()) {
            m_.resize(slot + 1);
            v_.resize(slot + 1);
        }
        if (m_[slot].size() != value.size()) {
            m_[slot].assign(value.size(), 0.0);
            v_[slot].assign(value.size(), 0.0);
        }
        const double bc1 = 1 - std::pow(kBeta1, static_cast<double>(t_)), bc2 = 1 - std::pow(kBeta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < value.size(); ++i) {
            m_[slot][i] = kBeta1 * m_[slot][i] + (1 - kBeta1) * grad[i];
            v_[slot][i] = kBeta2 * v_[slot][i] + (1 - kBeta2) * grad[i] * grad[i];
            value[i] -= lr_ * (m_[slot][i] / bc1) / (std::sqrt(v_[slot][i] / bc2) + kEps);
        }
    }

    /// Call once per step before the per-array updates.
    void begin_step() { ++t_; }

    void step(const std::vector<Param*>& params) {
        begin_step();
        for (std::size_t k = 0; k < params.size(); ++k) update(k, params[k]->value, params[k]->grad);
    }

private:
    static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    OptimizerKind kind_;
    double lr_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

} // namespace svbrdf::nn
