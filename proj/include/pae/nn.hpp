#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pae/errors.hpp"
#include "pae/rng.hpp"
#include "pae/tensor.hpp"

// Fully-connected networks (SELU hidden layers, affine output) and the Adam
// optimizer with explicit zero_grad / accumulate-then-step semantics.

namespace pae {

template <typename T>
struct DenseLayer {
    Tensor<T> weight;  // [in, out]
    Tensor<T> bias;    // [out]
};

template <typename T>
class Fcnn {
public:
    Fcnn() = default;

    // hidden_count hidden layers of hidden_width, so hidden_count + 1 affine
    // layers in total. hidden_count == 0 is a single affine map.
    Fcnn(std::size_t input_dim, std::size_t output_dim, std::size_t hidden_count,
         std::size_t hidden_width)
        : input_dim_(input_dim), output_dim_(output_dim), hidden_count_(hidden_count),
          hidden_width_(hidden_width) {
        if (input_dim == 0 || output_dim == 0 || (hidden_count > 0 && hidden_width == 0))
            throw ConfigError("Fcnn: dimensions must be positive");
        std::size_t in = input_dim;
        for (std::size_t i = 0; i < hidden_count; ++i) {
            layers_.push_back({Tensor<T>::zeros({in, hidden_width}, true),
                               Tensor<T>::zeros({hidden_width}, true)});
            in = hidden_width;
        }
        layers_.push_back(
            {Tensor<T>::zeros({in, output_dim}, true), Tensor<T>::zeros({output_dim}, true)});
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return output_dim_; }
    std::size_t hidden_count() const { return hidden_count_; }
    std::size_t hidden_width() const { return hidden_width_; }

    std::vector<DenseLayer<T>>& layers() { return layers_; }
    const std::vector<DenseLayer<T>>& layers() const { return layers_; }

    // x: [..., input_dim] -> [..., output_dim]; no activation on the output.
    Tensor<T> forward(const Tensor<T>& x) const {
        if (x.ndim() < 1 || x.shape().back() != input_dim_)
            throw DimensionError("fcnn: input " + shape_str(x.shape()) +
                                 " does not end in input_dim " + std::to_string(input_dim_));
        Tensor<T> h = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            h = add_bias(matmul(h, layers_[i].weight), layers_[i].bias);
            if (i + 1 < layers_.size()) h = selu(h);
        }
        return h;
    }

    // Zero-mean uniform weights with std 1/sqrt(fan_in), zero biases.
    void init_weights(std::uint64_t seed) {
        Rng rng(seed);
        for (auto& layer : layers_) {
            const std::size_t fan_in = layer.weight.shape()[0];
            const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (auto& w : layer.weight.data()) w = static_cast<T>(dist(rng));
            for (auto& b : layer.bias.data()) b = T(0);
        }
    }

    void collect_params(std::vector<Tensor<T>>& out) const {
        for (const auto& layer : layers_) {
            out.push_back(layer.weight);
            out.push_back(layer.bias);
        }
    }

private:
    std::vector<DenseLayer<T>> layers_;
    std::size_t input_dim_ = 0, output_dim_ = 0, hidden_count_ = 0, hidden_width_ = 0;
};

template <typename T>
void zero_grads(std::vector<Tensor<T>>& params) {
    for (auto& p : params) p.zero_grad();
}

template <typename T>
void set_requires_grad(std::vector<Tensor<T>>& params, bool on) {
    for (auto& p : params) p.set_requires_grad(on);
}

// Adam with bias correction. Parameters keep accumulating gradients between
// zero_grad() and step(), which is what gradient accumulation over
// micro-batches relies on.
template <typename T>
class Adam {
public:
    Adam() = default;

    Adam(std::vector<Tensor<T>> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (lr <= 0.0) throw ConfigError("adam: learning rate must be positive");
        for (const auto& p : params_) {
            m_.emplace_back(p.numel(), T(0));
            v_.emplace_back(p.numel(), T(0));
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    void step() {
        ++t_;
        const T bc1 = T(1) - static_cast<T>(std::pow(beta1_, t_));
        const T bc2 = T(1) - static_cast<T>(std::pow(beta2_, t_));
        const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
        const T lr = static_cast<T>(lr_), eps = static_cast<T>(eps_);
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            auto& p = params_[pi];
            if (!p.has_grad()) continue;
            const auto& g = p.grad();
            auto& m = m_[pi];
            auto& v = v_[pi];
            auto& w = p.data();
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = b1 * m[i] + (T(1) - b1) * g[i];
                v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
                const T mhat = m[i] / bc1;
                const T vhat = v[i] / bc2;
                w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    const std::vector<Tensor<T>>& params() const { return params_; }
    std::int64_t step_count() const { return t_; }
    double lr() const { return lr_; }
    double beta1() const { return beta1_; }
    double beta2() const { return beta2_; }
    double eps() const { return eps_; }

    std::vector<std::vector<T>>& moment1() { return m_; }
    std::vector<std::vector<T>>& moment2() { return v_; }
    const std::vector<std::vector<T>>& moment1() const { return m_; }
    const std::vector<std::vector<T>>& moment2() const { return v_; }
    void set_step_count(std::int64_t t) { t_ = t; }

private:
    std::vector<Tensor<T>> params_;
    std::vector<std::vector<T>> m_, v_;
    std::int64_t t_ = 0;
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

}  // namespace pae
