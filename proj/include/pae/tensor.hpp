#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pae/errors.hpp"
#include "pae/kernels.hpp"

// Dense n-dimensional tensors with define-by-run reverse-mode autodiff.
// Each op materializes its output and, when the tape is active, records the
// parent handles plus a closure implementing its backward rule. backward()
// walks the reachable graph once in reverse creation order (creation order
// is a topological order because inputs always exist before outputs).
//
// Gradient semantics: leaf gradients accumulate (+=) across backward calls
// until zero_grad(); intermediate gradients are scratch and are cleared at
// the start of every backward pass.

namespace pae {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

namespace detail {

// Creation order doubles as the topological order for backward. A taped
// graph stays on one thread, but no-grad evaluation may build tensors from
// many threads at once, so the counter is atomic.
inline std::uint64_t next_node_id() {
    static std::atomic<std::uint64_t> counter{0};
    return counter.fetch_add(1, std::memory_order_relaxed) + 1;
}

inline bool& grad_mode_flag() {
    thread_local bool enabled = true;
    return enabled;
}

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until first needed
    bool requires_grad = false;
    std::uint64_t id = 0;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // pushes this->grad into parents

    bool leaf() const { return !backprop; }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
};

}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode_flag(); }

// RAII tape switch; forward passes under the guard record no graph.
class NoGradGuard {
public:
    NoGradGuard() : prev_(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
    ~NoGradGuard() { detail::grad_mode_flag() = prev_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

template <typename T>
class Tensor {
public:
    using Scalar = T;

    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return from(std::move(shape), {}, requires_grad);
    }

    static Tensor full(Shape shape, T value, bool requires_grad = false) {
        std::vector<T> data(shape_numel(shape), value);
        return from(std::move(shape), std::move(data), requires_grad);
    }

    static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false) {
        const std::size_t n = shape_numel(shape);
        if (data.empty())
            data.assign(n, T(0));
        else if (data.size() != n)
            throw DimensionError("tensor: " + std::to_string(data.size()) +
                                 " values do not fill shape " + shape_str(shape));
        auto node = std::make_shared<detail::Node<T>>();
        node->shape = std::move(shape);
        node->data = std::move(data);
        node->requires_grad = requires_grad;
        node->id = detail::next_node_id();
        return Tensor(std::move(node));
    }

    static Tensor scalar(T value, bool requires_grad = false) {
        return from({}, {value}, requires_grad);
    }

    static Tensor wrap(std::shared_ptr<detail::Node<T>> node) { return Tensor(std::move(node)); }

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t ndim() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t numel() const { return node_->data.size(); }

    std::vector<T>& data() { return node_->data; }
    const std::vector<T>& data() const { return node_->data; }

    T value() const {
        if (numel() != 1)
            throw ContractError("value(): tensor has " + std::to_string(numel()) + " elements");
        return node_->data[0];
    }

    bool requires_grad() const { return node_->requires_grad; }
    Tensor& set_requires_grad(bool on) {
        node_->requires_grad = on;
        return *this;
    }

    bool has_grad() const { return node_->grad.size() == node_->data.size(); }
    const std::vector<T>& grad() const {
        if (!has_grad()) throw ContractError("grad(): no gradient computed for this tensor");
        return node_->grad;
    }
    std::vector<T>& grad() {
        if (!has_grad()) throw ContractError("grad(): no gradient computed for this tensor");
        return node_->grad;
    }

    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }

    // Deep copy of the data; no tape, no grad.
    Tensor clone() const {
        return from(node_->shape, node_->data, false);
    }

    void backward() const {
        if (!node_) throw ContractError("backward: undefined tensor");
        if (numel() != 1)
            throw ContractError("backward: loss must be scalar, got shape " + shape_str(shape()));

        std::vector<detail::Node<T>*> order;
        std::unordered_set<detail::Node<T>*> seen;
        std::vector<detail::Node<T>*> stack{node_.get()};
        seen.insert(node_.get());
        while (!stack.empty()) {
            auto* n = stack.back();
            stack.pop_back();
            order.push_back(n);
            for (const auto& p : n->parents)
                if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
        }
        for (auto* n : order) {
            n->ensure_grad();
            if (!n->leaf()) std::fill(n->grad.begin(), n->grad.end(), T(0));
        }
        node_->grad[0] += T(1);
        std::sort(order.begin(), order.end(),
                  [](const auto* a, const auto* b) { return a->id > b->id; });
        for (auto* n : order)
            if (n->backprop) n->backprop(*n);
    }

    std::shared_ptr<detail::Node<T>> node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node<T>> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node<T>> node_;
};

// Builds an op result node. Records parents and the backward rule only when
// the tape is active and some input needs gradients.
template <typename T>
Tensor<T> make_op(Shape out_shape, std::vector<T> out_data,
                  const std::vector<Tensor<T>>& inputs,
                  std::function<void(detail::Node<T>&)> backprop) {
    auto out = Tensor<T>::from(std::move(out_shape), std::move(out_data), false);
    if (grad_enabled()) {
        bool needs = false;
        for (const auto& in : inputs) needs = needs || in.requires_grad();
        if (needs) {
            auto node = out.node();
            node->requires_grad = true;
            node->parents.reserve(inputs.size());
            for (const auto& in : inputs) node->parents.push_back(in.node());
            node->backprop = std::move(backprop);
        }
    }
    return out;
}

namespace detail {

// (outer, axis_len, inner) decomposition for single-axis ops
inline void axis_split(const Shape& s, std::size_t axis, std::size_t& outer,
                       std::size_t& len, std::size_t& inner) {
    outer = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    len = s[axis];
    inner = 1;
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

template <typename T>
void check_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shapes differ: " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
}

}  // namespace detail

// ---- elementwise arithmetic ------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape("add", a, b);
    std::vector<T> out(a.numel());
    kernels::zip(a.data().data(), b.data().data(), out.data(), out.size(),
                 [](T x, T y) { return x + y; });
    auto an = a.node();
    auto bn = b.node();
    return make_op<T>(a.shape(), std::move(out), {a, b}, [an, bn](detail::Node<T>& o) {
        if (an->requires_grad) {
            an->ensure_grad();
            kernels::map_accum(o.grad.data(), an->grad.data(), o.grad.size(),
                               [](T g) { return g; });
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            kernels::map_accum(o.grad.data(), bn->grad.data(), o.grad.size(),
                               [](T g) { return g; });
        }
    });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape("sub", a, b);
    std::vector<T> out(a.numel());
    kernels::zip(a.data().data(), b.data().data(), out.data(), out.size(),
                 [](T x, T y) { return x - y; });
    auto an = a.node();
    auto bn = b.node();
    return make_op<T>(a.shape(), std::move(out), {a, b}, [an, bn](detail::Node<T>& o) {
        if (an->requires_grad) {
            an->ensure_grad();
            kernels::map_accum(o.grad.data(), an->grad.data(), o.grad.size(),
                               [](T g) { return g; });
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            kernels::map_accum(o.grad.data(), bn->grad.data(), o.grad.size(),
                               [](T g) { return -g; });
        }
    });
}

template <typename T>
Tensor<T> scalar_mul(const Tensor<T>& a, T s) {
    std::vector<T> out(a.numel());
    kernels::map(a.data().data(), out.data(), out.size(), [s](T x) { return s * x; });
    auto an = a.node();
    return make_op<T>(a.shape(), std::move(out), {a}, [an, s](detail::Node<T>& o) {
        if (an->requires_grad) {
            an->ensure_grad();
            kernels::map_accum(o.grad.data(), an->grad.data(), o.grad.size(),
                               [s](T g) { return s * g; });
        }
    });
}

// ---- dense algebra ----------------------------------------------------------

// a: [..., p, q] (leading dims batched), b: [q, r]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.ndim() < 2 || b.ndim() != 2)
        throw DimensionError("matmul: need a[...,p,q] and b[q,r], got " + shape_str(a.shape()) +
                             " and " + shape_str(b.shape()));
    const std::size_t q = a.shape()[a.ndim() - 1];
    const std::size_t p = a.shape()[a.ndim() - 2];
    if (b.shape()[0] != q)
        throw DimensionError("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    const std::size_t r = b.shape()[1];
    std::size_t batch = 1;
    for (std::size_t i = 0; i + 2 < a.ndim(); ++i) batch *= a.shape()[i];

    Shape out_shape = a.shape();
    out_shape.back() = r;
    std::vector<T> out(batch * p * r, T(0));
    kernels::gemm_nn(a.data().data(), b.data().data(), out.data(), batch, p, q, r);

    auto an = a.node();
    auto bn = b.node();
    return make_op<T>(std::move(out_shape), std::move(out), {a, b},
                      [an, bn, batch, p, q, r](detail::Node<T>& o) {
                          if (an->requires_grad) {
                              an->ensure_grad();
                              // dA = g * B^T
                              kernels::gemm_nt(o.grad.data(), bn->data.data(), an->grad.data(),
                                               batch, p, r, q);
                          }
                          if (bn->requires_grad) {
                              bn->ensure_grad();
                              // dB = sum_batch A^T * g
                              kernels::gemm_tn_reduce(an->data.data(), o.grad.data(),
                                                      bn->grad.data(), batch, p, q, r);
                          }
                      });
}

// x: [..., m] plus bias[m] broadcast over the leading dims
template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
    if (x.ndim() < 1 || bias.ndim() != 1 || bias.shape()[0] != x.shape().back())
        throw DimensionError("add_bias: bias " + shape_str(bias.shape()) +
                             " does not match trailing dim of " + shape_str(x.shape()));
    const std::size_t m = bias.shape()[0];
    const std::size_t rows = x.numel() / m;
    std::vector<T> out(x.numel());
    const T* xd = x.data().data();
    const T* bd = bias.data().data();
    for (std::size_t row = 0; row < rows; ++row)
        for (std::size_t j = 0; j < m; ++j) out[row * m + j] = xd[row * m + j] + bd[j];

    auto xn = x.node();
    auto bn = bias.node();
    return make_op<T>(x.shape(), std::move(out), {x, bias},
                      [xn, bn, rows, m](detail::Node<T>& o) {
                          if (xn->requires_grad) {
                              xn->ensure_grad();
                              kernels::map_accum(o.grad.data(), xn->grad.data(), o.grad.size(),
                                                 [](T g) { return g; });
                          }
                          if (bn->requires_grad) {
                              bn->ensure_grad();
                              for (std::size_t row = 0; row < rows; ++row)
                                  for (std::size_t j = 0; j < m; ++j)
                                      bn->grad[j] += o.grad[row * m + j];
                          }
                      });
}

// ---- activations and loss ----------------------------------------------------

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

template <typename T>
Tensor<T> selu(const Tensor<T>& x) {
    const T lam = static_cast<T>(kSeluLambda);
    const T alpha = static_cast<T>(kSeluAlpha);
    std::vector<T> out(x.numel());
    kernels::map(x.data().data(), out.data(), out.size(), [lam, alpha](T v) {
        return v > T(0) ? lam * v : lam * alpha * (std::exp(v) - T(1));
    });
    auto xn = x.node();
    return make_op<T>(x.shape(), std::move(out), {x}, [xn, lam, alpha](detail::Node<T>& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        kernels::zip_accum(o.grad.data(), xn->data.data(), xn->grad.data(), o.grad.size(),
                           [lam, alpha](T g, T v) {
                               return v > T(0) ? lam * g : lam * alpha * std::exp(v) * g;
                           });
    });
}

// Mean over all elements of max(z,0) - z*t + log(1 + exp(-|z|)).
// Gradient w.r.t. z is (sigmoid(z) - t) / count.
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& targets) {
    detail::check_same_shape("bce_with_logits", logits, targets);
    const std::size_t n = logits.numel();
    if (n == 0) throw ContractError("bce_with_logits: empty input");
    const T* z = logits.data().data();
    const T* t = targets.data().data();
    T total = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] != T(0) && t[i] != T(1))
            throw ContractError("bce_with_logits: targets must be 0/1");
        total += std::max(z[i], T(0)) - z[i] * t[i] + std::log1p(std::exp(-std::abs(z[i])));
    }
    auto zn = logits.node();
    auto tn = targets.node();
    const T inv_n = T(1) / static_cast<T>(n);
    return make_op<T>({}, {total * inv_n}, {logits, targets},
                      [zn, tn, inv_n](detail::Node<T>& o) {
                          if (!zn->requires_grad) return;
                          zn->ensure_grad();
                          const T g = o.grad[0] * inv_n;
                          kernels::zip_accum(zn->data.data(), tn->data.data(), zn->grad.data(),
                                             zn->data.size(), [g](T zi, T ti) {
                                                 const T s = T(1) / (T(1) + std::exp(-zi));
                                                 return g * (s - ti);
                                             });
                      });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T total = T(0);
    for (T v : x.data()) total += v;
    auto xn = x.node();
    return make_op<T>({}, {total}, {x}, [xn](detail::Node<T>& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const T g = o.grad[0];
        for (T& v : xn->grad) v += g;
    });
}

// ---- shape ops ----------------------------------------------------------------

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape new_shape) {
    if (shape_numel(new_shape) != x.numel())
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                             shape_str(new_shape));
    auto xn = x.node();
    std::vector<T> out = x.data();
    return make_op<T>(std::move(new_shape), std::move(out), {x}, [xn](detail::Node<T>& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        kernels::map_accum(o.grad.data(), xn->grad.data(), o.grad.size(), [](T g) { return g; });
    });
}

namespace detail {

// copy with axes a<b swapped: in [outer, da, mid, db, inner] -> out [outer, db, mid, da, inner]
template <typename T>
void transpose_copy(const T* in, T* out, std::size_t outer, std::size_t da, std::size_t mid,
                    std::size_t db, std::size_t inner) {
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t ia = 0; ia < da; ++ia)
            for (std::size_t m = 0; m < mid; ++m)
                for (std::size_t ib = 0; ib < db; ++ib) {
                    const T* src = in + (((o * da + ia) * mid + m) * db + ib) * inner;
                    T* dst = out + (((o * db + ib) * mid + m) * da + ia) * inner;
                    for (std::size_t i = 0; i < inner; ++i) dst[i] = src[i];
                }
}

template <typename T>
void transpose_accum(const T* in, T* out, std::size_t outer, std::size_t da, std::size_t mid,
                     std::size_t db, std::size_t inner) {
    // in laid out [outer, db, mid, da, inner]; accumulated into [outer, da, mid, db, inner]
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t ia = 0; ia < da; ++ia)
            for (std::size_t m = 0; m < mid; ++m)
                for (std::size_t ib = 0; ib < db; ++ib) {
                    const T* src = in + (((o * db + ib) * mid + m) * da + ia) * inner;
                    T* dst = out + (((o * da + ia) * mid + m) * db + ib) * inner;
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
                }
}

}  // namespace detail

template <typename T>
Tensor<T> transpose(const Tensor<T>& x, std::size_t axis0, std::size_t axis1) {
    if (axis0 >= x.ndim() || axis1 >= x.ndim())
        throw DimensionError("transpose: axes (" + std::to_string(axis0) + "," +
                             std::to_string(axis1) + ") out of range for " +
                             shape_str(x.shape()));
    if (axis0 == axis1) return reshape(x, x.shape());
    const std::size_t a = std::min(axis0, axis1);
    const std::size_t b = std::max(axis0, axis1);
    const Shape& s = x.shape();
    std::size_t outer = 1, mid = 1, inner = 1;
    for (std::size_t i = 0; i < a; ++i) outer *= s[i];
    for (std::size_t i = a + 1; i < b; ++i) mid *= s[i];
    for (std::size_t i = b + 1; i < s.size(); ++i) inner *= s[i];
    const std::size_t da = s[a], db = s[b];

    Shape out_shape = s;
    std::swap(out_shape[a], out_shape[b]);
    std::vector<T> out(x.numel());
    detail::transpose_copy(x.data().data(), out.data(), outer, da, mid, db, inner);

    auto xn = x.node();
    return make_op<T>(std::move(out_shape), std::move(out), {x},
                      [xn, outer, da, mid, db, inner](detail::Node<T>& o) {
                          if (!xn->requires_grad) return;
                          xn->ensure_grad();
                          detail::transpose_accum(o.grad.data(), xn->grad.data(), outer, da, mid,
                                                  db, inner);
                      });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t start, std::size_t len) {
    if (axis >= x.ndim())
        throw DimensionError("slice: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(x.shape()));
    if (start + len > x.shape()[axis])
        throw DimensionError("slice: range [" + std::to_string(start) + "," +
                             std::to_string(start + len) + ") exceeds axis " +
                             std::to_string(axis) + " of " + shape_str(x.shape()));
    std::size_t outer, alen, inner;
    detail::axis_split(x.shape(), axis, outer, alen, inner);

    Shape out_shape = x.shape();
    out_shape[axis] = len;
    std::vector<T> out(outer * len * inner);
    const T* xd = x.data().data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t k = 0; k < len; ++k) {
            const T* src = xd + (o * alen + start + k) * inner;
            T* dst = out.data() + (o * len + k) * inner;
            std::copy(src, src + inner, dst);
        }

    auto xn = x.node();
    return make_op<T>(std::move(out_shape), std::move(out), {x},
                      [xn, outer, alen, inner, start, len](detail::Node<T>& o) {
                          if (!xn->requires_grad) return;
                          xn->ensure_grad();
                          for (std::size_t ot = 0; ot < outer; ++ot)
                              for (std::size_t k = 0; k < len; ++k) {
                                  const T* src = o.grad.data() + (ot * len + k) * inner;
                                  T* dst = xn->grad.data() + (ot * alen + start + k) * inner;
                                  for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
                              }
                      });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
    if (parts.empty()) throw ContractError("concat: no inputs");
    const Shape& base = parts[0].shape();
    if (axis >= base.size())
        throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(base));
    std::size_t total_axis = 0;
    for (const auto& p : parts) {
        if (p.ndim() != base.size())
            throw DimensionError("concat: rank mismatch: " + shape_str(base) + " vs " +
                                 shape_str(p.shape()));
        for (std::size_t i = 0; i < base.size(); ++i)
            if (i != axis && p.shape()[i] != base[i])
                throw DimensionError("concat: shapes incompatible off axis " +
                                     std::to_string(axis) + ": " + shape_str(base) + " vs " +
                                     shape_str(p.shape()));
        total_axis += p.shape()[axis];
    }

    Shape out_shape = base;
    out_shape[axis] = total_axis;
    std::size_t outer, _len, inner;
    detail::axis_split(out_shape, axis, outer, _len, inner);

    std::vector<T> out(shape_numel(out_shape));
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const std::size_t plen = p.shape()[axis];
        const T* pd = p.data().data();
        for (std::size_t o = 0; o < outer; ++o) {
            const T* src = pd + o * plen * inner;
            T* dst = out.data() + (o * total_axis + offset) * inner;
            std::copy(src, src + plen * inner, dst);
        }
        offset += plen;
    }

    std::vector<std::shared_ptr<detail::Node<T>>> pnodes;
    std::vector<std::size_t> plens;
    for (const auto& p : parts) {
        pnodes.push_back(p.node());
        plens.push_back(p.shape()[axis]);
    }
    return make_op<T>(std::move(out_shape), std::move(out), parts,
                      [pnodes, plens, outer, inner, total_axis](detail::Node<T>& o) {
                          std::size_t off = 0;
                          for (std::size_t pi = 0; pi < pnodes.size(); ++pi) {
                              const std::size_t plen = plens[pi];
                              auto& pn = *pnodes[pi];
                              if (pn.requires_grad) {
                                  pn.ensure_grad();
                                  for (std::size_t ot = 0; ot < outer; ++ot) {
                                      const T* src =
                                          o.grad.data() + (ot * total_axis + off) * inner;
                                      T* dst = pn.grad.data() + ot * plen * inner;
                                      for (std::size_t i = 0; i < plen * inner; ++i)
                                          dst[i] += src[i];
                                  }
                              }
                              off += plen;
                          }
                      });
}

// ---- reductions -----------------------------------------------------------------

// Euclidean norm along one axis (axis removed from the output shape).
template <typename T>
Tensor<T> l2_norm(const Tensor<T>& x, std::size_t axis) {
    if (axis >= x.ndim())
        throw DimensionError("l2_norm: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(x.shape()));
    std::size_t outer, len, inner;
    detail::axis_split(x.shape(), axis, outer, len, inner);

    Shape out_shape;
    for (std::size_t i = 0; i < x.ndim(); ++i)
        if (i != axis) out_shape.push_back(x.shape()[i]);

    std::vector<T> out(outer * inner);
    const T* xd = x.data().data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) {
            T acc = T(0);
            for (std::size_t k = 0; k < len; ++k) {
                const T v = xd[(o * len + k) * inner + i];
                acc += v * v;
            }
            out[o * inner + i] = std::sqrt(acc);
        }

    auto xn = x.node();
    const T eps = static_cast<T>(1e-12);
    return make_op<T>(std::move(out_shape), std::move(out), {x},
                      [xn, outer, len, inner, eps](detail::Node<T>& o) {
                          if (!xn->requires_grad) return;
                          xn->ensure_grad();
                          for (std::size_t ot = 0; ot < outer; ++ot)
                              for (std::size_t i = 0; i < inner; ++i) {
                                  const T g = o.grad[ot * inner + i];
                                  const T inv = g / (o.data[ot * inner + i] + eps);
                                  for (std::size_t k = 0; k < len; ++k) {
                                      const std::size_t idx = (ot * len + k) * inner + i;
                                      xn->grad[idx] += inv * xn->data[idx];
                                  }
                              }
                      });
}

}  // namespace pae
