#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pae/fdcheck.hpp"
#include "pae/tensor.hpp"

using namespace pae;
using TensorD = Tensor<double>;

namespace {

TensorD random_tensor(Shape shape, Rng& rng, bool requires_grad = true, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data) v = dist(rng);
    return TensorD::from(std::move(shape), std::move(data), requires_grad);
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
    auto id = TensorD::from({2, 2}, {1, 0, 0, 1});
    auto m = TensorD::from({2, 2}, {2.5, -1, 3, 4});
    CHECK(matmul(id, m).data() == m.data());

    auto a = TensorD::from({1, 2}, {1, 2});
    auto b = TensorD::from({2, 1}, {3, 4});
    auto c = matmul(a, b);
    CHECK(c.shape() == Shape{1, 1});
    CHECK(c.data()[0] == doctest::Approx(11.0));
}

TEST_CASE("matmul rejects mismatched inner dimensions naming both shapes") {
    auto a = TensorD::zeros({3, 4});
    auto b = TensorD::zeros({5, 2});
    CHECK_THROWS_WITH_AS(matmul(a, b),
                         doctest::Contains("[3,4]"), DimensionError);
}

TEST_CASE("matmul gradient matches central finite differences") {
    Rng rng(42);
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 2}, rng);
    auto result = fd::check_gradients<double>(
        {a, b}, [&] { return sum(matmul(a, b)); }, 1e-5);
    CHECK(result.checked == 20);
    CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("batched matmul broadcasts the shared right-hand matrix") {
    Rng rng(7);
    auto a = random_tensor({2, 3, 5, 4}, rng);
    auto b = random_tensor({4, 6}, rng);
    auto c = matmul(a, b);
    CHECK(c.shape() == Shape{2, 3, 5, 6});
    auto result = fd::check_gradients<double>(
        {a, b}, [&] { return sum(matmul(a, b)); }, 1e-5, 12, 1);
    CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("selu fixed points and derivative") {
    auto x = TensorD::from({3}, {0.0, 1.0, -1.0});
    auto y = selu(x);
    CHECK(y.data()[0] == doctest::Approx(0.0));
    CHECK(y.data()[1] == doctest::Approx(1.0507009873554805));

    auto xg = TensorD::from({1}, {-1.0}, true);
    auto result = fd::check_gradients<double>({xg}, [&] { return sum(selu(xg)); }, 1e-5);
    CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("bce_with_logits frozen values and stability") {
    auto z0 = TensorD::scalar(0.0);
    auto t0 = TensorD::scalar(0.0);
    CHECK(bce_with_logits(z0, t0).value() == doctest::Approx(0.6931471805599453));

    auto z = TensorD::scalar(20.0);
    auto t = TensorD::scalar(1.0);
    CHECK(bce_with_logits(z, t).value() == doctest::Approx(2.061153620314381e-09));
    CHECK(std::isfinite(bce_with_logits(z, t).value()));
}

TEST_CASE("bce_with_logits gradient is (sigmoid(z) - t) / count") {
    Rng rng(3);
    auto z = random_tensor({2, 3}, rng, true, 2.0);
    std::vector<double> tbits = {1, 0, 1, 1, 0, 0};
    auto t = TensorD::from({2, 3}, tbits);

    auto loss = bce_with_logits(z, t);
    loss.backward();
    for (std::size_t i = 0; i < 6; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-z.data()[i]));
        CHECK(z.grad()[i] == doctest::Approx((s - tbits[i]) / 6.0));
    }

    auto result = fd::check_gradients<double>({z}, [&] { return bce_with_logits(z, t); }, 1e-5);
    CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("bce_with_logits validates shapes and targets") {
    CHECK_THROWS_AS(bce_with_logits(TensorD::zeros({2}), TensorD::zeros({3})), DimensionError);
    CHECK_THROWS_AS(bce_with_logits(TensorD::scalar(0.0), TensorD::scalar(0.5)), ContractError);
}

TEST_CASE("concat joins along an axis") {
    auto a = TensorD::from({2, 1}, {1, 2});
    auto b = TensorD::from({2, 1}, {3, 4});
    auto c = concat<double>({a, b}, 1);
    CHECK(c.shape() == Shape{2, 2});
    CHECK(c.data() == std::vector<double>{1, 3, 2, 4});

    CHECK_THROWS_AS(concat<double>({a, TensorD::zeros({3, 1})}, 1), DimensionError);
}

TEST_CASE("reshape round trip is the identity") {
    Rng rng(5);
    auto x = random_tensor({3, 4}, rng, false);
    auto y = reshape(reshape(x, {2, 6}), {3, 4});
    CHECK(y.data() == x.data());
    CHECK_THROWS_AS(reshape(x, {5, 5}), DimensionError);
}

TEST_CASE("l2_norm of a 3-4-5 triangle") {
    auto x = TensorD::from({2}, {3, 4});
    CHECK(l2_norm(x, 0).value() == doctest::Approx(5.0));

    auto m = TensorD::from({2, 2}, {3, 4, 6, 8});
    auto n = l2_norm(m, 1);
    CHECK(n.shape() == Shape{2});
    CHECK(n.data()[0] == doctest::Approx(5.0));
    CHECK(n.data()[1] == doctest::Approx(10.0));
}

TEST_CASE("slice and transpose are exact inverses where expected") {
    Rng rng(9);
    auto x = random_tensor({2, 3, 4}, rng, false);
    auto t = transpose(x, 1, 2);
    CHECK(t.shape() == Shape{2, 4, 3});
    auto back = transpose(t, 1, 2);
    CHECK(back.data() == x.data());

    auto s = slice(x, 1, 1, 2);
    CHECK(s.shape() == Shape{2, 2, 4});
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(s.data()[(b * 2 + i) * 4 + j] == x.data()[(b * 3 + i + 1) * 4 + j]);

    CHECK_THROWS_AS(slice(x, 1, 2, 2), DimensionError);
    CHECK_THROWS_AS(transpose(x, 0, 3), DimensionError);
}

TEST_CASE("backward of sum gives all-ones and accumulates across calls") {
    auto x = TensorD::full({2, 2}, 3.0, true);
    auto loss = sum(x);
    loss.backward();
    CHECK(x.grad() == std::vector<double>(4, 1.0));
    loss.backward();
    CHECK(x.grad() == std::vector<double>(4, 2.0));
    x.zero_grad();
    loss.backward();
    CHECK(x.grad() == std::vector<double>(4, 1.0));
}

TEST_CASE("two backward passes double every gradient exactly") {
    Rng rng(11);
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 2}, rng);
    auto loss = bce_with_logits(matmul(a, b), TensorD::zeros({3, 2}));
    loss.backward();
    auto once = a.grad();
    loss.backward();
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(a.grad()[i] == 2.0 * once[i]);
}

TEST_CASE("backward rejects non-scalar losses") {
    auto x = TensorD::zeros({2, 2}, true);
    CHECK_THROWS_AS(add(x, x).backward(), ContractError);
}

TEST_CASE("diamond graphs accumulate through both paths") {
    auto x = TensorD::scalar(1.5, true);
    auto y = add(x, x);  // dy/dx = 2
    auto loss = sum(scalar_mul(y, 3.0));
    loss.backward();
    CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("no-grad mode records no graph") {
    auto x = TensorD::full({2}, 1.0, true);
    NoGradGuard guard;
    auto y = selu(x);
    CHECK_FALSE(y.requires_grad());
    CHECK(y.node()->parents.empty());
}

TEST_CASE("every differentiable op passes randomized finite-difference checks") {
    Rng rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        const std::uint64_t seed = rng();

        SUBCASE("") {}  // keep one loop, doctest-friendly
        {
            Rng r(seed);
            auto a = random_tensor({2, 3, 4}, r);
            auto b = random_tensor({4, 3}, r);
            auto res = fd::check_gradients<double>(
                {a, b}, [&] { return sum(matmul(a, b)); }, 1e-5, 6, seed);
            CHECK(res.max_rel_err < 1e-4);
        }
        {
            Rng r(seed + 1);
            auto x = random_tensor({3, 5}, r, true, 2.0);
            auto res =
                fd::check_gradients<double>({x}, [&] { return sum(selu(x)); }, 1e-5, 6, seed);
            CHECK(res.max_rel_err < 1e-4);
        }
        {
            Rng r(seed + 2);
            auto a = random_tensor({2, 4}, r);
            auto b = random_tensor({2, 4}, r);
            auto res = fd::check_gradients<double>(
                {a, b},
                [&] {
                    auto joined = concat<double>({a, sub(a, b)}, 1);
                    auto moved = transpose(slice(joined, 1, 1, 6), 0, 1);
                    return sum(l2_norm(scalar_mul(moved, 1.7), 0));
                },
                1e-5, 6, seed);
            CHECK(res.max_rel_err < 1e-4);
        }
        {
            Rng r(seed + 3);
            auto x = random_tensor({4, 3}, r);
            auto bias = random_tensor({3}, r);
            std::vector<double> tb(12);
            for (auto& v : tb) v = static_cast<double>(r() & 1u);
            auto t = TensorD::from({4, 3}, tb);
            auto res = fd::check_gradients<double>(
                {x, bias},
                [&] { return bce_with_logits(reshape(add_bias(x, bias), {2, 6}), reshape(t, {2, 6})); },
                1e-5, 6, seed);
            CHECK(res.max_rel_err < 1e-4);
        }
    }
}

TEST_CASE("extreme logits stay finite through loss and gradients") {
    auto z = TensorD::from({4}, {30.0, -30.0, 29.5, -29.5}, true);
    auto t = TensorD::from({4}, {0.0, 1.0, 1.0, 0.0});
    auto loss = bce_with_logits(z, t);
    CHECK(std::isfinite(loss.value()));
    loss.backward();
    CHECK(all_finite(z.grad()));

    auto s = selu(z);
    CHECK(all_finite(s.data()));
}
