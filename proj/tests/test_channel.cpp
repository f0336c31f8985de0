#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "pae/channel.hpp"
#include "pae/fdcheck.hpp"

using namespace pae;
using namespace pae::channel;
using TensorD = Tensor<double>;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("power_normalize leaves unit-power codewords untouched") {
    auto c = TensorD::from({1, 4}, {1, 1, 1, 1});
    auto out = power_normalize(c);
    for (double v : out.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power_normalize of (3,4) at n=2") {
    auto c = TensorD::from({1, 2}, {3, 4});
    auto out = power_normalize(c);
    CHECK(out.data()[0] == doctest::Approx(0.848528137423857).epsilon(1e-12));
    CHECK(out.data()[1] == doctest::Approx(1.131370849898476).epsilon(1e-12));
}

TEST_CASE("normalized codewords have squared norm n") {
    Rng rng(5);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    const std::size_t n = 49, rows = 200;
    std::vector<double> data(rows * n);
    for (auto& v : data) v = dist(rng);
    auto out = power_normalize(TensorD::from({rows, n}, std::move(data)));
    for (std::size_t row = 0; row < rows; ++row) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            double v = out.data()[row * n + j];
            acc += v * v;
        }
        CHECK(std::abs(acc - double(n)) < 1e-9 * n);
    }
}

TEST_CASE("power_normalize is scale invariant for positive scales") {
    auto c = TensorD::from({1, 3}, {0.2, -1.4, 0.7});
    auto scaled = TensorD::from({1, 3}, {0.2 * 37.5, -1.4 * 37.5, 0.7 * 37.5});
    auto a = power_normalize(c);
    auto b = power_normalize(scaled);
    for (int i = 0; i < 3; ++i) CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-12));
}

TEST_CASE("power_normalize survives the all-zero codeword") {
    auto z = TensorD::zeros({1, 4});
    auto out = power_normalize(z);
    for (double v : out.data()) CHECK(std::isfinite(v));
}

TEST_CASE("power_normalize gradient matches finite differences") {
    Rng rng(6);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> data(2 * 5);
    for (auto& v : data) v = dist(rng);
    auto c = TensorD::from({2, 5}, std::move(data), true);
    auto target = TensorD::from({2, 5}, {1, 0, 1, 1, 0, 0, 1, 0, 1, 1});
    auto res = fd::check_gradients<double>(
        {c}, [&] { return bce_with_logits(power_normalize(c), target); }, 1e-5);
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("noiseless channel returns the input exactly") {
    Rng rng(7);
    auto c = TensorD::from({2, 3}, {1, -1, 0.5, 2, -2, 0});
    auto y = add_noise(c, noise_sigma2_from_snr_db(kInf), rng);
    CHECK(y.data() == c.data());
}

TEST_CASE("noise statistics at 0 dB") {
    Rng rng(8);
    const std::size_t n = 1'000'000;
    auto zero = TensorD::zeros({n});
    auto y = add_noise(zero, noise_sigma2_from_snr_db(0.0), rng);
    double mean = 0;
    for (double v : y.data()) mean += v;
    mean /= n;
    double var = 0;
    for (double v : y.data()) var += (v - mean) * (v - mean);
    var /= n;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("same seed reproduces the identical noise tensor") {
    auto c = TensorD::zeros({100});
    Rng a(99), b(99);
    auto ya = add_noise(c, 0.5, a);
    auto yb = add_noise(c, 0.5, b);
    CHECK(ya.data() == yb.data());
}

TEST_CASE("per-row noise variances differ across the batch") {
    Rng rng(10);
    auto c = TensorD::zeros({3, 1000});
    std::vector<double> sigma2 = {0.01, 1.0, 4.0};
    auto y = add_noise_per_row(c, sigma2, rng);
    std::vector<double> emp(3, 0.0);
    for (std::size_t row = 0; row < 3; ++row) {
        for (std::size_t j = 0; j < 1000; ++j) {
            double v = y.data()[row * 1000 + j];
            emp[row] += v * v;
        }
        emp[row] /= 1000;
        CHECK(emp[row] == doctest::Approx(sigma2[row]).epsilon(0.15));
    }
    CHECK_THROWS_AS(add_noise_per_row(c, {0.1, 0.2}, rng), DimensionError);
}

TEST_CASE("Eb/N0 conversion") {
    CHECK(ebn0_db_from_snr_db(2.5, 1.0) == doctest::Approx(2.5));
    CHECK(ebn0_db_from_snr_db(3.0, 4.0 / 9.0) ==
          doctest::Approx(3.0 + 3.5218251811136247).epsilon(1e-12));
    const double snr = -1.25;
    CHECK(snr_db_from_ebn0_db(ebn0_db_from_snr_db(snr, 0.37), 0.37) ==
          doctest::Approx(snr).epsilon(1e-12));
    CHECK_THROWS_AS(ebn0_db_from_snr_db(0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(ebn0_db_from_snr_db(0.0, 1.5), ConfigError);
}

TEST_CASE("Q function values and symmetry") {
    CHECK(q_function(0.0) == doctest::Approx(0.5));
    CHECK(q_function(1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-12));
    for (double x : {0.3, 1.7, 2.9})
        CHECK(q_function(-x) == doctest::Approx(1.0 - q_function(x)).epsilon(1e-12));
}

TEST_CASE("SNR to sigma^2 convention") {
    CHECK(noise_sigma2_from_snr_db(0.0) == doctest::Approx(1.0));
    CHECK(noise_sigma2_from_snr_db(10.0) == doctest::Approx(0.1));
    CHECK(noise_sigma2_from_snr_db(kInf) == 0.0);
    auto p = ChannelParams::from_snr_db(3.0, 4.0 / 9.0, 1);
    CHECK(p.sigma2 == doctest::Approx(std::pow(10.0, -0.3)));
    CHECK(p.ebn0_db() == doctest::Approx(3.0 + 3.5218251811136247));
}
