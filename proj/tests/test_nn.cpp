#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pae/fdcheck.hpp"
#include "pae/nn.hpp"

using namespace pae;
using TensorD = Tensor<double>;

namespace {

TensorD random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data) v = dist(rng);
    return TensorD::from(std::move(shape), std::move(data));
}

std::vector<double> snapshot(const std::vector<Tensor<double>>& params) {
    std::vector<double> flat;
    for (const auto& p : params) flat.insert(flat.end(), p.data().begin(), p.data().end());
    return flat;
}

}  // namespace

TEST_CASE("zero-hidden fcnn with identity weights is the identity map") {
    Fcnn<double> net(3, 3, 0, 0);
    for (std::size_t i = 0; i < 3; ++i) net.layers()[0].weight.data()[i * 3 + i] = 1.0;
    auto x = TensorD::from({2, 3}, {1, -2, 3, 0.5, 0, -1});
    CHECK(net.forward(x).data() == x.data());
}

TEST_CASE("fcnn maps [B, k2, k1] batches to [B, k2, n1]") {
    // encoder-1 geometry of the (15,10)^2 reference model
    Fcnn<double> net(10, 15, 2, 16);
    net.init_weights(1);
    Rng rng(2);
    auto u = random_tensor({4, 10, 10}, rng);
    auto out = net.forward(u);
    CHECK(out.shape() == Shape{4, 10, 15});

    CHECK_THROWS_AS(net.forward(random_tensor({4, 10, 9}, rng)), DimensionError);
}

TEST_CASE("fcnn gradients match finite differences on a 4-16-3 net") {
    Fcnn<double> net(4, 3, 1, 16);
    net.init_weights(7);
    Rng rng(8);
    auto x = random_tensor({5, 4}, rng);

    std::vector<Tensor<double>> params;
    net.collect_params(params);
    auto res = fd::check_gradients<double>(
        params, [&] { return sum(selu(net.forward(x))); }, 1e-5, 20, 3);
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("init_weights is deterministic per seed and seed-sensitive") {
    Fcnn<double> a(6, 4, 2, 8), b(6, 4, 2, 8), c(6, 4, 2, 8);
    a.init_weights(123);
    b.init_weights(123);
    c.init_weights(124);

    std::vector<Tensor<double>> pa, pb, pc;
    a.collect_params(pa);
    b.collect_params(pb);
    c.collect_params(pc);
    CHECK(snapshot(pa) == snapshot(pb));
    CHECK(snapshot(pa) != snapshot(pc));
}

TEST_CASE("init_weights std is close to 1/sqrt(fan_in)") {
    Fcnn<double> net(100, 100, 0, 0);
    net.init_weights(99);
    const auto& w = net.layers()[0].weight.data();
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());
    const double target = 1.0 / std::sqrt(100.0);
    CHECK(std::sqrt(var) == doctest::Approx(target).epsilon(0.2));
    for (double b : net.layers()[0].bias.data()) CHECK(b == 0.0);
}

TEST_CASE("first adam step moves a unit-gradient parameter by about lr") {
    auto p = TensorD::scalar(1.0, true);
    Adam<double> opt({p}, 2e-4);
    p.node()->ensure_grad();
    p.node()->grad[0] = 1.0;
    opt.step();
    // bias-corrected first step: lr * 1 / (1 + eps)
    CHECK(1.0 - p.value() == doctest::Approx(2e-4).epsilon(1e-6));
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    auto p = TensorD::from({3}, {1.0, -2.0, 0.5}, true);
    Adam<double> opt({p}, 1e-2);
    opt.zero_grad();
    p.node()->ensure_grad();
    opt.step();
    CHECK(p.data() == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("parameters with equal gradients update identically") {
    auto p = TensorD::from({2}, {0.3, 0.3}, true);
    Adam<double> opt({p}, 1e-3);
    for (int step = 0; step < 5; ++step) {
        opt.zero_grad();
        p.node()->ensure_grad();
        p.node()->grad[0] = 0.7;
        p.node()->grad[1] = 0.7;
        opt.step();
    }
    CHECK(p.data()[0] == p.data()[1]);
}

TEST_CASE("adam rejects non-positive learning rates") {
    auto p = TensorD::scalar(0.0, true);
    CHECK_THROWS_AS(Adam<double>({p}, 0.0), ConfigError);
    CHECK_THROWS_AS(Adam<double>({p}, -1e-3), ConfigError);
}

TEST_CASE("micro-batch accumulation equals one large batch") {
    // loss scaled by 1/l per micro-batch must reproduce the full-batch mean
    Fcnn<double> net(6, 2, 1, 8);
    net.init_weights(31);
    std::vector<Tensor<double>> params;
    net.collect_params(params);

    Rng rng(32);
    // randomized (l, B_s) pairs with l * B_s <= 64
    std::vector<std::pair<std::size_t, std::size_t>> splits = {{1, 32}, {2, 16}, {4, 8}, {8, 4}};
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t bs = 1 + rng() % 8;
        const std::size_t l = 1 + rng() % (64 / bs);
        splits.emplace_back(l, bs);
    }

    for (auto [l, bs] : splits) {
        const std::size_t big = l * bs;
        auto x = random_tensor({big, 6}, rng);
        std::vector<double> tb(big * 2);
        for (auto& v : tb) v = static_cast<double>(rng() & 1u);
        auto t = TensorD::from({big, 2}, tb);

        zero_grads(params);
        bce_with_logits(net.forward(x), t).backward();
        std::vector<std::vector<double>> full_grads;
        for (auto& p : params) full_grads.push_back(p.grad());

        zero_grads(params);
        for (std::size_t m = 0; m < l; ++m) {
            std::vector<double> xd(x.data().begin() + m * bs * 6,
                                   x.data().begin() + (m + 1) * bs * 6);
            std::vector<double> td(tb.begin() + m * bs * 2, tb.begin() + (m + 1) * bs * 2);
            auto loss = scalar_mul(
                bce_with_logits(net.forward(TensorD::from({bs, 6}, std::move(xd))),
                                TensorD::from({bs, 2}, std::move(td))),
                1.0 / static_cast<double>(l));
            loss.backward();
        }
        for (std::size_t pi = 0; pi < params.size(); ++pi)
            for (std::size_t i = 0; i < full_grads[pi].size(); ++i)
                CHECK(params[pi].grad()[i] ==
                      doctest::Approx(full_grads[pi][i]).epsilon(1e-10));
    }
}

TEST_CASE("fcnn forward is deterministic") {
    Fcnn<double> net(5, 5, 2, 12);
    net.init_weights(64);
    Rng rng(65);
    auto x = random_tensor({7, 5}, rng);
    CHECK(net.forward(x).data() == net.forward(x).data());
}
