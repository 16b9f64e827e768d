#pragma once

#include <memory>
#include <string>
#include <vector>

#include "setdetect/layers.hpp"

namespace setdetect {

/// A named parameter entry of a materialized network, plus the adaptive-moment
/// state the optimizer keeps for it. Entries appear exactly once, in layer
/// order, which is also the serialization order.
template <typename T>
struct ParamEntry {
    std::string name;  ///< e.g. "L03.conv1d.weight"
    std::vector<T>* value;
    std::vector<T>* grad;  ///< nullptr for running statistics
    bool trainable;
    std::vector<T> m, v;  ///< optimizer moments (trainable entries only)
};

/// Sequential network materialized from a LayerSpec list. Holds the layers,
/// their parameters and the derived RNG streams; forward in infer mode is a
/// pure function of (parameters, input).
template <typename T>
class Network {
  public:
    Network(std::vector<LayerSpec> specs, Shape2 input, std::uint64_t seed)
        : specs_(std::move(specs)), input_(input), seed_(seed) {
        Rng init_rng = stream_rng(seed, "init");
        Shape2 shape = input;
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            auto layer = make_layer<T>(specs_[i]);
            shape = layer->init(shape, init_rng);
            if (auto* drop = dynamic_cast<layers::Dropout<T>*>(layer.get()))
                drop->seed(derive_seed(seed, "dropout", i));
            layers_.push_back(std::move(layer));
        }
        output_ = shape;
        build_param_table();
    }

    const std::vector<LayerSpec>& specs() const { return specs_; }
    Shape2 input_shape() const { return input_; }
    Shape2 output_shape() const { return output_; }
    std::uint64_t seed() const { return seed_; }

    Tensor3<T> forward(const Tensor3<T>& x, Mode mode) {
        Tensor3<T> a = x;
        for (auto& layer : layers_) a = layer->forward(a, mode);
        return a;
    }

    /// Backward through the whole stack; fills every layer's parameter
    /// gradients and returns the gradient w.r.t. the network input.
    Tensor3<T> backward(const Tensor3<T>& grad_out) {
        Tensor3<T> g = grad_out;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<ParamEntry<T>>& param_store() { return entries_; }
    const std::vector<ParamEntry<T>>& param_store() const { return entries_; }

    std::size_t num_parameters() const {
        std::size_t n = 0;
        for (const auto& e : entries_)
            if (e.trainable) n += e.value->size();
        return n;
    }

    /// Copies values (and running stats) from a network of another scalar
    /// type with identical specs; used by the double-precision shadow.
    template <typename U>
    void copy_params_from(const Network<U>& other) {
        const auto& src = other.param_store();
        if (src.size() != entries_.size()) throw ShapeMismatch("copy_params_from: different layer stacks");
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            auto& dst = *entries_[i].value;
            const auto& s = *src[i].value;
            if (dst.size() != s.size()) throw ShapeMismatch("copy_params_from: size mismatch at " + entries_[i].name);
            for (std::size_t j = 0; j < s.size(); ++j) dst[j] = static_cast<T>(s[j]);
        }
    }

    /// Flat snapshot of all state arrays (values incl. running stats), used
    /// for checkpointing the best-validation epoch.
    std::vector<std::vector<T>> snapshot() const {
        std::vector<std::vector<T>> snap;
        snap.reserve(entries_.size());
        for (const auto& e : entries_) snap.push_back(*e.value);
        return snap;
    }

    void restore(const std::vector<std::vector<T>>& snap) {
        if (snap.size() != entries_.size()) throw ShapeMismatch("restore: snapshot layout mismatch");
        for (std::size_t i = 0; i < entries_.size(); ++i) *entries_[i].value = snap[i];
    }

    void set_reuse_dropout_masks(bool reuse) {
        for (auto& layer : layers_)
            if (auto* drop = dynamic_cast<layers::Dropout<T>*>(layer.get())) drop->set_reuse_mask(reuse);
    }

    /// Combined hash of all piecewise-linear branch decisions of the last
    /// forward pass; see Layer::decision_hash.
    std::uint64_t decision_signature() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (const auto& layer : layers_) {
            h ^= layer->decision_hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

  private:
    void build_param_table() {
        char buf[16];
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "L%02zu.", i);
            for (auto view : layers_[i]->params()) {
                ParamEntry<T> e;
                e.name = std::string(buf) + layer_kind_name(specs_[i].kind) + "." + view.name;
                e.value = view.value;
                e.grad = view.grad;
                e.trainable = view.trainable;
                if (e.trainable) {
                    e.m.assign(view.value->size(), T(0));
                    e.v.assign(view.value->size(), T(0));
                }
                entries_.push_back(std::move(e));
            }
        }
    }

    std::vector<LayerSpec> specs_;
    Shape2 input_, output_{};
    std::uint64_t seed_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<ParamEntry<T>> entries_;
};

}  // namespace setdetect
