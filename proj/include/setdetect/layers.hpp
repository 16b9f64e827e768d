#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "setdetect/rng.hpp"
#include "setdetect/tensor.hpp"

namespace setdetect {

enum class LayerKind { batchnorm, conv1d, maxpool1d, dropout, flatten, dense, relu, sigmoid, capped_relu };

/// Declarative layer description; the unit networks are built from a list of
/// these and the same list is what the model manifest stores.
struct LayerSpec {
    LayerKind kind;
    int filters = 0;      // conv1d
    int kernel_size = 0;  // conv1d
    int pool = 0;         // maxpool1d
    int units = 0;        // dense
    double rate = 0.0;    // dropout
    double cap = 0.0;     // capped_relu
};

inline std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::batchnorm: return "batchnorm";
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::maxpool1d: return "maxpool1d";
        case LayerKind::dropout: return "dropout";
        case LayerKind::flatten: return "flatten";
        case LayerKind::dense: return "dense";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::capped_relu: return "capped_relu";
    }
    return "?";
}

inline std::string spec_to_string(const LayerSpec& s) {
    std::ostringstream os;
    os << layer_kind_name(s.kind);
    switch (s.kind) {
        case LayerKind::conv1d: os << " filters=" << s.filters << " kernel_size=" << s.kernel_size; break;
        case LayerKind::maxpool1d: os << " pool=" << s.pool; break;
        case LayerKind::dropout: os << " rate=" << s.rate; break;
        case LayerKind::dense: os << " units=" << s.units; break;
        case LayerKind::capped_relu: os << " cap=" << s.cap; break;
        default: break;
    }
    return os.str();
}

inline LayerSpec spec_from_string(const std::string& text) {
    std::istringstream is(text);
    std::string kind;
    is >> kind;
    LayerSpec s;
    if (kind == "batchnorm") s.kind = LayerKind::batchnorm;
    else if (kind == "conv1d") s.kind = LayerKind::conv1d;
    else if (kind == "maxpool1d") s.kind = LayerKind::maxpool1d;
    else if (kind == "dropout") s.kind = LayerKind::dropout;
    else if (kind == "flatten") s.kind = LayerKind::flatten;
    else if (kind == "dense") s.kind = LayerKind::dense;
    else if (kind == "relu") s.kind = LayerKind::relu;
    else if (kind == "sigmoid") s.kind = LayerKind::sigmoid;
    else if (kind == "capped_relu") s.kind = LayerKind::capped_relu;
    else throw IoError("unknown layer kind: " + kind);
    std::string kv;
    while (is >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw IoError("bad layer spec token: " + kv);
        std::string key = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        if (key == "filters") s.filters = std::stoi(val);
        else if (key == "kernel_size") s.kernel_size = std::stoi(val);
        else if (key == "pool") s.pool = std::stoi(val);
        else if (key == "units") s.units = std::stoi(val);
        else if (key == "rate") s.rate = std::stod(val);
        else if (key == "cap") s.cap = std::stod(val);
        else throw IoError("unknown layer spec key: " + key);
    }
    return s;
}

enum class Mode { train, infer };

/// Named view of one state array of a layer. Trainable entries take part in
/// the optimizer update; all entries (including batch-norm running stats) are
/// serialized in declaration order.
template <typename T>
struct ParamView {
    std::string name;
    std::vector<T>* value;
    std::vector<T>* grad;  ///< nullptr for non-trainable state
    bool trainable;
};

struct Shape2 {
    std::size_t time;
    std::size_t channels;
};

template <typename T>
class Layer {
  public:
    virtual ~Layer() = default;
    virtual LayerSpec spec() const = 0;
    /// Allocates parameters for the given input shape; returns output shape.
    virtual Shape2 init(Shape2 in, Rng& init_rng) = 0;
    virtual Tensor3<T> forward(const Tensor3<T>& x, Mode mode) = 0;
    /// Gradient of the loss w.r.t. this layer's input; also fills the layer's
    /// parameter gradients. Must follow a forward call.
    virtual Tensor3<T> backward(const Tensor3<T>& grad_out) = 0;
    virtual std::vector<ParamView<T>> params() { return {}; }
    /// Hash of the piecewise-linear branch taken by the last forward (relu
    /// signs, pool argmaxes). Finite differencing is only valid while this
    /// stays constant; smooth layers report 0.
    virtual std::uint64_t decision_hash() const { return 0; }
};

namespace layers {

/// Eight-lane dot product with a fixed combine order. The explicit lane
/// accumulators let the compiler vectorize the reduction without relaxed
/// floating-point flags, and the summation order is pinned in source.
template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
    T acc0 = T(0), acc1 = T(0), acc2 = T(0), acc3 = T(0);
    T acc4 = T(0), acc5 = T(0), acc6 = T(0), acc7 = T(0);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
        acc4 += a[i + 4] * b[i + 4];
        acc5 += a[i + 5] * b[i + 5];
        acc6 += a[i + 6] * b[i + 6];
        acc7 += a[i + 7] * b[i + 7];
    }
    T tail = T(0);
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc0 + acc1) + (acc2 + acc3)) + ((acc4 + acc5) + (acc6 + acc7)) + tail;
}

/// Same lane structure as dot(), for plain sums.
template <typename T>
inline T sum(const T* a, std::size_t n) {
    T acc0 = T(0), acc1 = T(0), acc2 = T(0), acc3 = T(0);
    T acc4 = T(0), acc5 = T(0), acc6 = T(0), acc7 = T(0);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 += a[i];
        acc1 += a[i + 1];
        acc2 += a[i + 2];
        acc3 += a[i + 3];
        acc4 += a[i + 4];
        acc5 += a[i + 5];
        acc6 += a[i + 6];
        acc7 += a[i + 7];
    }
    T tail = T(0);
    for (; i < n; ++i) tail += a[i];
    return ((acc0 + acc1) + (acc2 + acc3)) + ((acc4 + acc5) + (acc6 + acc7)) + tail;
}

template <typename T>
class Conv1d final : public Layer<T> {
  public:
    Conv1d(int filters, int kernel_size) : filters_(filters), kernel_(kernel_size) {}

    LayerSpec spec() const override {
        LayerSpec s;
        s.kind = LayerKind::conv1d;
        s.filters = filters_;
        s.kernel_size = kernel_;
        return s;
    }

    Shape2 init(Shape2 in, Rng& rng) override {
        in_ch_ = in.channels;
        time_ = in.time;
        pad_left_ = (kernel_ - 1) / 2;  // total pad = kernel-1, extra zero on the right
        weight_.resize(static_cast<std::size_t>(filters_) * in_ch_ * kernel_);
        bias_.assign(filters_, T(0));
        const double limit = std::sqrt(6.0 / static_cast<double>(in_ch_ * kernel_));
        for (auto& w : weight_) w = static_cast<T>(rng.uniform(-limit, limit));
        d_weight_.assign(weight_.size(), T(0));
        d_bias_.assign(bias_.size(), T(0));
        return {in.time, static_cast<std::size_t>(filters_)};
    }

    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        if (x.channels() != in_ch_ || x.time() != time_)
            throw ShapeMismatch("conv1d: expected " + std::to_string(time_) + "x" + std::to_string(in_ch_) +
                                ", got " + std::to_string(x.time()) + "x" + std::to_string(x.channels()));
        const std::size_t B = x.batch(), Tn = x.time(), C = in_ch_;
        const std::size_t padded = Tn + kernel_ - 1;
        batch_ = B;
        xpad_.assign(B * C * padded, T(0));
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c) {
                const T* src = x.row(b, c);
                T* dst = xpad_.data() + (b * C + c) * padded + pad_left_;
                std::copy(src, src + Tn, dst);
            }

        Tensor3<T> out(B, Tn, static_cast<std::size_t>(filters_));
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t oc = 0; oc < static_cast<std::size_t>(filters_); ++oc) {
                T* orow = out.row(b, oc);
                std::fill(orow, orow + Tn, bias_[oc]);
                for (std::size_t ic = 0; ic < C; ++ic) {
                    const T* xp = xpad_.data() + (b * C + ic) * padded;
                    const T* w = weight_.data() + (oc * C + ic) * kernel_;
                    for (int k = 0; k < kernel_; ++k) {
                        const T wv = w[k];
                        const T* xk = xp + k;
                        for (std::size_t t = 0; t < Tn; ++t) orow[t] += wv * xk[t];
                    }
                }
            }
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        const std::size_t B = batch_, Tn = time_, C = in_ch_;
        const std::size_t padded = Tn + kernel_ - 1;
        std::fill(d_weight_.begin(), d_weight_.end(), T(0));
        std::fill(d_bias_.begin(), d_bias_.end(), T(0));

        for (std::size_t oc = 0; oc < static_cast<std::size_t>(filters_); ++oc) {
            T acc = T(0);
            for (std::size_t b = 0; b < B; ++b) acc += sum(g.row(b, oc), Tn);
            d_bias_[oc] = acc;
        }

        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t oc = 0; oc < static_cast<std::size_t>(filters_); ++oc) {
                const T* grow = g.row(b, oc);
                for (std::size_t ic = 0; ic < C; ++ic) {
                    const T* xp = xpad_.data() + (b * C + ic) * padded;
                    T* dw = d_weight_.data() + (oc * C + ic) * kernel_;
                    for (int k = 0; k < kernel_; ++k) dw[k] += dot(grow, xp + k, Tn);
                }
            }

        Tensor3<T> dx(B, Tn, C);
        std::vector<T> dxpad(padded);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t ic = 0; ic < C; ++ic) {
                std::fill(dxpad.begin(), dxpad.end(), T(0));
                for (std::size_t oc = 0; oc < static_cast<std::size_t>(filters_); ++oc) {
                    const T* grow = g.row(b, oc);
                    const T* w = weight_.data() + (oc * C + ic) * kernel_;
                    for (int k = 0; k < kernel_; ++k) {
                        const T wv = w[k];
                        T* dk = dxpad.data() + k;
                        for (std::size_t t = 0; t < Tn; ++t) dk[t] += wv * grow[t];
                    }
                }
                std::copy(dxpad.begin() + pad_left_, dxpad.begin() + pad_left_ + Tn, dx.row(b, ic));
            }
        return dx;
    }

    std::vector<ParamView<T>> params() override {
        return {{"weight", &weight_, &d_weight_, true}, {"bias", &bias_, &d_bias_, true}};
    }

  private:
    int filters_, kernel_;
    std::size_t in_ch_ = 0, time_ = 0, batch_ = 0;
    int pad_left_ = 0;
    std::vector<T> weight_, bias_, d_weight_, d_bias_;
    std::vector<T> xpad_;
};

template <typename T>
class MaxPool1d final : public Layer<T> {
  public:
    explicit MaxPool1d(int pool) : pool_(pool) {}

    LayerSpec spec() const override {
        LayerSpec s;
        s.kind = LayerKind::maxpool1d;
        s.pool = pool_;
        return s;
    }

    Shape2 init(Shape2 in, Rng&) override {
        if (in.time < static_cast<std::size_t>(pool_))
            throw ShapeMismatch("maxpool1d: time length " + std::to_string(in.time) + " < pool " + std::to_string(pool_));
        in_time_ = in.time;
        channels_ = in.channels;
        out_time_ = in.time / pool_;
        return {out_time_, in.channels};
    }

    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        if (x.time() != in_time_ || x.channels() != channels_)
            throw ShapeMismatch("maxpool1d: unexpected input shape");
        const std::size_t B = x.batch();
        batch_ = B;
        Tensor3<T> out(B, out_time_, channels_);
        argmax_.assign(B * channels_ * out_time_, 0);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < channels_; ++c) {
                const T* xr = x.row(b, c);
                T* orow = out.row(b, c);
                std::uint32_t* am = argmax_.data() + (b * channels_ + c) * out_time_;
                for (std::size_t t = 0; t < out_time_; ++t) {
                    std::size_t base = t * pool_;
                    T best = xr[base];
                    std::uint32_t besti = 0;
                    for (int k = 1; k < pool_; ++k)
                        if (xr[base + k] > best) {  // strict: ties keep the first index
                            best = xr[base + k];
                            besti = static_cast<std::uint32_t>(k);
                        }
                    orow[t] = best;
                    am[t] = besti;
                }
            }
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        Tensor3<T> dx(batch_, in_time_, channels_);
        for (std::size_t b = 0; b < batch_; ++b)
            for (std::size_t c = 0; c < channels_; ++c) {
                const T* grow = g.row(b, c);
                T* dxr = dx.row(b, c);
                const std::uint32_t* am = argmax_.data() + (b * channels_ + c) * out_time_;
                for (std::size_t t = 0; t < out_time_; ++t) dxr[t * pool_ + am[t]] = grow[t];
            }
        return dx;
    }

    std::uint64_t decision_hash() const override {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint32_t a : argmax_) {
            h ^= a;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

  private:
    int pool_;
    std::size_t in_time_ = 0, out_time_ = 0, channels_ = 0, batch_ = 0;
    std::vector<std::uint32_t> argmax_;
};

template <typename T>
class BatchNorm final : public Layer<T> {
  public:
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.9;

    LayerSpec spec() const override { return {LayerKind::batchnorm}; }

    Shape2 init(Shape2 in, Rng&) override {
        time_ = in.time;
        channels_ = in.channels;
        gamma_.assign(channels_, T(1));
        beta_.assign(channels_, T(0));
        running_mean_.assign(channels_, T(0));
        running_var_.assign(channels_, T(1));
        d_gamma_.assign(channels_, T(0));
        d_beta_.assign(channels_, T(0));
        return in;
    }

    Tensor3<T> forward(const Tensor3<T>& x, Mode mode) override {
        if (x.channels() != channels_ || x.time() != time_)
            throw ShapeMismatch("batchnorm: unexpected input shape");
        const std::size_t B = x.batch(), Tn = x.time();
        mode_ = mode;
        batch_ = B;
        Tensor3<T> out(B, Tn, channels_);

        if (mode == Mode::train) {
            if (B < 2) throw DegenerateBatch("batchnorm: train mode needs batch size >= 2");
            const double n = static_cast<double>(B * Tn);
            xhat_ = Tensor3<T>(B, Tn, channels_);
            inv_std_.assign(channels_, T(0));
            for (std::size_t c = 0; c < channels_; ++c) {
                double sum = 0.0, sq = 0.0;
                for (std::size_t b = 0; b < B; ++b) {
                    const T* xr = x.row(b, c);
                    for (std::size_t t = 0; t < Tn; ++t) {
                        sum += static_cast<double>(xr[t]);
                        sq += static_cast<double>(xr[t]) * static_cast<double>(xr[t]);
                    }
                }
                const double mean = sum / n;
                const double var = std::max(0.0, sq / n - mean * mean);
                const double istd = 1.0 / std::sqrt(var + kEps);
                inv_std_[c] = static_cast<T>(istd);
                running_mean_[c] = static_cast<T>(kMomentum * static_cast<double>(running_mean_[c]) + (1.0 - kMomentum) * mean);
                running_var_[c] = static_cast<T>(kMomentum * static_cast<double>(running_var_[c]) + (1.0 - kMomentum) * var);
                const T g = gamma_[c], be = beta_[c], mu = static_cast<T>(mean), is = static_cast<T>(istd);
                for (std::size_t b = 0; b < B; ++b) {
                    const T* xr = x.row(b, c);
                    T* hr = xhat_.row(b, c);
                    T* orow = out.row(b, c);
                    for (std::size_t t = 0; t < Tn; ++t) {
                        hr[t] = (xr[t] - mu) * is;
                        orow[t] = g * hr[t] + be;
                    }
                }
            }
        } else {
            for (std::size_t c = 0; c < channels_; ++c) {
                const T is = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var_[c]) + kEps));
                const T g = gamma_[c], be = beta_[c], mu = running_mean_[c];
                for (std::size_t b = 0; b < B; ++b) {
                    const T* xr = x.row(b, c);
                    T* orow = out.row(b, c);
                    for (std::size_t t = 0; t < Tn; ++t) orow[t] = g * (xr[t] - mu) * is + be;
                }
            }
        }
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        const std::size_t B = batch_, Tn = time_;
        Tensor3<T> dx(B, Tn, channels_);
        if (mode_ == Mode::infer) {
            for (std::size_t c = 0; c < channels_; ++c) {
                const T f = static_cast<T>(static_cast<double>(gamma_[c]) /
                                           std::sqrt(static_cast<double>(running_var_[c]) + kEps));
                for (std::size_t b = 0; b < B; ++b) {
                    const T* grow = g.row(b, c);
                    T* dxr = dx.row(b, c);
                    for (std::size_t t = 0; t < Tn; ++t) dxr[t] = f * grow[t];
                }
            }
            return dx;
        }
        const double n = static_cast<double>(B * Tn);
        for (std::size_t c = 0; c < channels_; ++c) {
            double sum_g = 0.0, sum_gh = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                const T* grow = g.row(b, c);
                const T* hr = xhat_.row(b, c);
                for (std::size_t t = 0; t < Tn; ++t) {
                    sum_g += static_cast<double>(grow[t]);
                    sum_gh += static_cast<double>(grow[t]) * static_cast<double>(hr[t]);
                }
            }
            d_gamma_[c] = static_cast<T>(sum_gh);
            d_beta_[c] = static_cast<T>(sum_g);
            const double ga = static_cast<double>(gamma_[c]);
            const double is = static_cast<double>(inv_std_[c]);
            for (std::size_t b = 0; b < B; ++b) {
                const T* grow = g.row(b, c);
                const T* hr = xhat_.row(b, c);
                T* dxr = dx.row(b, c);
                for (std::size_t t = 0; t < Tn; ++t) {
                    const double gd = static_cast<double>(grow[t]);
                    const double hd = static_cast<double>(hr[t]);
                    dxr[t] = static_cast<T>(ga * is * (gd - sum_g / n - hd * sum_gh / n));
                }
            }
        }
        return dx;
    }

    std::vector<ParamView<T>> params() override {
        return {{"gamma", &gamma_, &d_gamma_, true},
                {"beta", &beta_, &d_beta_, true},
                {"running_mean", &running_mean_, nullptr, false},
                {"running_var", &running_var_, nullptr, false}};
    }

  private:
    std::size_t time_ = 0, channels_ = 0, batch_ = 0;
    Mode mode_ = Mode::infer;
    std::vector<T> gamma_, beta_, running_mean_, running_var_, d_gamma_, d_beta_;
    std::vector<T> inv_std_;
    Tensor3<T> xhat_;
};

template <typename T>
class Dropout final : public Layer<T> {
  public:
    explicit Dropout(double rate) : rate_(rate), rng_(0) {}

    LayerSpec spec() const override {
        LayerSpec s;
        s.kind = LayerKind::dropout;
        s.rate = rate_;
        return s;
    }

    Shape2 init(Shape2 in, Rng&) override { return in; }

    void seed(std::uint64_t s) { rng_ = Rng(s); }

    /// Gradient checking perturbs inputs between forwards; freezing the last
    /// mask keeps the function differentiable during that probing.
    void set_reuse_mask(bool reuse) { reuse_mask_ = reuse; }

    Tensor3<T> forward(const Tensor3<T>& x, Mode mode) override {
        train_pass_ = (mode == Mode::train) && rate_ > 0.0;
        if (!train_pass_) return x;
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        if (!(reuse_mask_ && mask_.size() == x.size())) {
            mask_.resize(x.size());
            for (std::size_t i = 0; i < mask_.size(); ++i)
                mask_[i] = rng_.uniform01() < rate_ ? T(0) : scale;
        }
        Tensor3<T> out = x;
        auto& d = out.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask_[i];
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        if (!train_pass_) return g;
        Tensor3<T> dx = g;
        auto& d = dx.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask_[i];
        return dx;
    }

  private:
    double rate_;
    Rng rng_;
    bool reuse_mask_ = false;
    bool train_pass_ = false;
    std::vector<T> mask_;
};

template <typename T>
class Flatten final : public Layer<T> {
  public:
    LayerSpec spec() const override { return {LayerKind::flatten}; }

    Shape2 init(Shape2 in, Rng&) override {
        in_time_ = in.time;
        in_ch_ = in.channels;
        return {1, in.time * in.channels};
    }

    // storage is [b][c][t], so the flattened feature index is c*time + t and
    // both directions are plain reshapes of the same bytes
    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        batch_ = x.batch();
        Tensor3<T> out(batch_, 1, in_time_ * in_ch_);
        out.data() = x.data();
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        Tensor3<T> dx(batch_, in_time_, in_ch_);
        dx.data() = g.data();
        return dx;
    }

  private:
    std::size_t in_time_ = 0, in_ch_ = 0, batch_ = 0;
};

template <typename T>
class Dense final : public Layer<T> {
  public:
    explicit Dense(int units) : units_(units) {}

    LayerSpec spec() const override {
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.units = units_;
        return s;
    }

    Shape2 init(Shape2 in, Rng& rng) override {
        if (in.time != 1) throw ShapeMismatch("dense: expects flattened input (time == 1)");
        in_features_ = in.channels;
        weight_.resize(static_cast<std::size_t>(units_) * in_features_);
        bias_.assign(units_, T(0));
        const double limit = std::sqrt(6.0 / static_cast<double>(in_features_));
        for (auto& w : weight_) w = static_cast<T>(rng.uniform(-limit, limit));
        d_weight_.assign(weight_.size(), T(0));
        d_bias_.assign(bias_.size(), T(0));
        return {1, static_cast<std::size_t>(units_)};
    }

    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        if (x.time() != 1 || x.channels() != in_features_)
            throw ShapeMismatch("dense: expected " + std::to_string(in_features_) + " features, got " +
                                std::to_string(x.channels()));
        const std::size_t B = x.batch();
        batch_ = B;
        x_ = x;
        Tensor3<T> out(B, 1, static_cast<std::size_t>(units_));
        for (std::size_t b = 0; b < B; ++b) {
            const T* xr = x.data().data() + b * in_features_;
            T* orow = out.data().data() + b * units_;
            for (std::size_t j = 0; j < static_cast<std::size_t>(units_); ++j)
                orow[j] = bias_[j] + dot(weight_.data() + j * in_features_, xr, in_features_);
        }
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        const std::size_t B = batch_;
        std::fill(d_weight_.begin(), d_weight_.end(), T(0));
        std::fill(d_bias_.begin(), d_bias_.end(), T(0));
        Tensor3<T> dx(B, 1, in_features_);
        for (std::size_t b = 0; b < B; ++b) {
            const T* xr = x_.data().data() + b * in_features_;
            const T* grow = g.data().data() + b * units_;
            T* dxr = dx.data().data() + b * in_features_;
            for (std::size_t j = 0; j < static_cast<std::size_t>(units_); ++j) {
                const T gj = grow[j];
                d_bias_[j] += gj;
                T* dw = d_weight_.data() + j * in_features_;
                const T* w = weight_.data() + j * in_features_;
                for (std::size_t i = 0; i < in_features_; ++i) {
                    dw[i] += gj * xr[i];
                    dxr[i] += gj * w[i];
                }
            }
        }
        return dx;
    }

    std::vector<ParamView<T>> params() override {
        return {{"weight", &weight_, &d_weight_, true}, {"bias", &bias_, &d_bias_, true}};
    }

  private:
    int units_;
    std::size_t in_features_ = 0, batch_ = 0;
    std::vector<T> weight_, bias_, d_weight_, d_bias_;
    Tensor3<T> x_;
};

template <typename T>
class Relu final : public Layer<T> {
  public:
    LayerSpec spec() const override { return {LayerKind::relu}; }
    Shape2 init(Shape2 in, Rng&) override { return in; }

    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        x_ = x;
        Tensor3<T> out = x;
        for (auto& v : out.data()) v = v > T(0) ? v : T(0);
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        Tensor3<T> dx = g;
        const auto& xd = x_.data();
        auto& d = dx.data();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (xd[i] <= T(0)) d[i] = T(0);
        return dx;
    }

    std::uint64_t decision_hash() const override {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const T& v : x_.data()) {
            h ^= (v > T(0)) ? 1u : 0u;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

  private:
    Tensor3<T> x_;
};

template <typename T>
class Sigmoid final : public Layer<T> {
  public:
    LayerSpec spec() const override { return {LayerKind::sigmoid}; }
    Shape2 init(Shape2 in, Rng&) override { return in; }

    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        y_ = x;
        for (auto& v : y_.data()) {
            const double z = static_cast<double>(v);
            v = static_cast<T>(z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)));
        }
        return y_;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        Tensor3<T> dx = g;
        const auto& yd = y_.data();
        auto& d = dx.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= yd[i] * (T(1) - yd[i]);
        return dx;
    }

  private:
    Tensor3<T> y_;
};

template <typename T>
class CappedRelu final : public Layer<T> {
  public:
    explicit CappedRelu(double cap) : cap_(cap) {}

    LayerSpec spec() const override {
        LayerSpec s;
        s.kind = LayerKind::capped_relu;
        s.cap = cap_;
        return s;
    }
    Shape2 init(Shape2 in, Rng&) override { return in; }

    Tensor3<T> forward(const Tensor3<T>& x, Mode) override {
        x_ = x;
        Tensor3<T> out = x;
        const T cap = static_cast<T>(cap_);
        for (auto& v : out.data()) v = std::min(std::max(v, T(0)), cap);
        return out;
    }

    Tensor3<T> backward(const Tensor3<T>& g) override {
        Tensor3<T> dx = g;
        const auto& xd = x_.data();
        auto& d = dx.data();
        const T cap = static_cast<T>(cap_);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (xd[i] <= T(0) || xd[i] >= cap) d[i] = T(0);
        return dx;
    }

    std::uint64_t decision_hash() const override {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        const T cap = static_cast<T>(cap_);
        for (const T& v : x_.data()) {
            h ^= (v <= T(0)) ? 0u : (v >= cap ? 2u : 1u);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

  private:
    double cap_;
    Tensor3<T> x_;
};

}  // namespace layers

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& s) {
    switch (s.kind) {
        case LayerKind::batchnorm: return std::make_unique<layers::BatchNorm<T>>();
        case LayerKind::conv1d: return std::make_unique<layers::Conv1d<T>>(s.filters, s.kernel_size);
        case LayerKind::maxpool1d: return std::make_unique<layers::MaxPool1d<T>>(s.pool);
        case LayerKind::dropout: return std::make_unique<layers::Dropout<T>>(s.rate);
        case LayerKind::flatten: return std::make_unique<layers::Flatten<T>>();
        case LayerKind::dense: return std::make_unique<layers::Dense<T>>(s.units);
        case LayerKind::relu: return std::make_unique<layers::Relu<T>>();
        case LayerKind::sigmoid: return std::make_unique<layers::Sigmoid<T>>();
        case LayerKind::capped_relu: return std::make_unique<layers::CappedRelu<T>>(s.cap);
    }
    throw InvalidArch("unknown layer kind");
}

}  // namespace setdetect
