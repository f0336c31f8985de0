#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pae/fdcheck.hpp"
#include "pae/gf2.hpp"
#include "pae/model.hpp"

using namespace pae;
using TensorD = Tensor<double>;

namespace {

const CodeGeometry kTiny{2, 2, 3, 3};
const ModelHyper kTinyHyper{2, 2, 1, 8, 1, 8, 1};

ProductAe<double> tiny_model(std::uint64_t seed) {
    ProductAe<double> model(kTiny, kTinyHyper);
    model.init_weights(seed);
    return model;
}

TensorD fixed_noise(const Shape& shape, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> n(shape_numel(shape));
    for (auto& v : n) v = dist(rng);
    return TensorD::from(shape, std::move(n));
}

std::vector<Tensor<double>> all_params(const ProductAe<double>& model) {
    auto params = model.encoder_params();
    auto dec = model.decoder_params();
    params.insert(params.end(), dec.begin(), dec.end());
    return params;
}

// The all-zero message maps to the all-zero codeword under zero-bias
// initialization, where normalization is degenerate; force one set bit.
TensorD nonzero_messages(std::size_t batch, const CodeGeometry& geo, Rng& rng) {
    auto u = random_message_tensor<double>(batch, geo, rng);
    const std::size_t k = geo.k();
    for (std::size_t b = 0; b < batch; ++b) {
        bool any = false;
        for (std::size_t i = 0; i < k; ++i) any = any || u.data()[b * k + i] != 0.0;
        if (!any) u.data()[b * k] = 1.0;
    }
    return u;
}

}  // namespace

TEST_CASE("encode produces normalized [B, n2, n1] codewords") {
    auto model = tiny_model(1);
    Rng rng(2);
    auto u = nonzero_messages(5, kTiny, rng);
    auto c = model.encode(u);
    CHECK(c.shape() == Shape{5, 3, 3});
    for (std::size_t b = 0; b < 5; ++b) {
        double power = 0;
        for (std::size_t j = 0; j < 9; ++j) {
            const double v = c.data()[b * 9 + j];
            power += v * v;
        }
        CHECK(std::abs(power - 9.0) < 1e-9 * 9.0);
    }

    CHECK_THROWS_AS(model.encode(TensorD::zeros({5, 2, 3})), DimensionError);
    CHECK_THROWS_AS(model.encode(TensorD::full({5, 2, 2}, 0.5)), ContractError);
}

TEST_CASE("the all-zero message stays finite through the degenerate normalization") {
    auto model = tiny_model(1);
    auto c = model.encode(TensorD::zeros({1, 2, 2}));
    for (double v : c.data()) CHECK(std::isfinite(v));
}

TEST_CASE("linear encoder instantiation reproduces the GF(2) product code") {
    // zero-hidden-layer encoders whose weights are the component generator
    // matrices; integer outputs reduced mod 2 must equal the exact encoding
    auto spc = gf2::single_parity_check_code(3);
    CodeGeometry geo{2, 2, 3, 3};
    ProductEncoder<double> enc(geo, 0, 0);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            enc.enc1().layers()[0].weight.data()[i * 3 + j] = spc.generator.at(i, j);
            enc.enc2().layers()[0].weight.data()[i * 3 + j] = spc.generator.at(i, j);
        }

    std::vector<gf2::LinearCode> codes{spc, spc};
    for (std::uint64_t msg = 0; msg < 16; ++msg) {
        gf2::NdArray u = gf2::NdArray::zeros({2, 2});
        std::vector<double> ud(4);
        for (std::size_t i = 0; i < 4; ++i) {
            u.bits[i] = (msg >> i) & 1u;
            ud[i] = u.bits[i];
        }
        auto real_cw = enc.encode_raw(TensorD::from({1, 2, 2}, std::move(ud)));
        auto exact_cw = gf2::encode_product(codes, u);
        for (std::size_t i = 0; i < 9; ++i) {
            const long rounded = std::lround(real_cw.data()[i]);
            CHECK(static_cast<std::uint8_t>(rounded & 1) == exact_cw.bits[i]);
        }
    }
}

TEST_CASE("decode yields [B, k2, k1] logits for any iteration and feature count") {
    Rng rng(3);
    for (std::size_t iters : {1ul, 2ul, 3ul}) {
        for (std::size_t feat : {1ul, 3ul}) {
            ModelHyper hyper{iters, feat, 1, 8, 1, 8, 2};
            ProductAe<double> model(kTiny, hyper);
            model.init_weights(17 * iters + feat);
            auto u = random_message_tensor<double>(4, kTiny, rng);
            auto logits = model.decode(model.encode(u));
            CHECK(logits.shape() == Shape{4, 2, 2});
        }
    }
}

TEST_CASE("decode rejects wrongly shaped channel output") {
    auto model = tiny_model(4);
    CHECK_THROWS_AS(model.decode(TensorD::zeros({2, 3, 4})), DimensionError);
}

TEST_CASE("the reference I=4 F=3 instantiation builds eight decoders per the sizing rules") {
    CodeGeometry geo{10, 10, 15, 15};
    ModelHyper hyper{4, 3, 7, 200, 7, 250, 9};
    ProductDecoder<double> dec(geo, hyper);

    CHECK(dec.stage_count() == 8);
    // D2^(1): channel columns only
    CHECK(dec.net(1).input_dim() == 15);
    CHECK(dec.net(1).output_dim() == 3 * 15);
    // intermediate stages: (F+1) vectors in, F out
    for (std::size_t t = 2; t <= 6; ++t) {
        CHECK(dec.net(t).input_dim() == 4 * 15);
        CHECK(dec.net(t).output_dim() == 3 * 15);
    }
    // D2^(4) reduces n2 -> k2, channel still injected
    CHECK(dec.net(7).input_dim() == 4 * 15);
    CHECK(dec.net(7).output_dim() == 3 * 10);
    // D1^(4): soft input only, single feature of logits
    CHECK(dec.net(8).input_dim() == 3 * 15);
    CHECK(dec.net(8).output_dim() == 10);

    // last pair gets the deeper hidden stack
    CHECK(dec.net(6).hidden_count() == 7);
    CHECK(dec.net(7).hidden_count() == 9);
    CHECK(dec.net(8).hidden_count() == 9);
    CHECK(dec.net(1).hidden_width() == 250);
}

TEST_CASE("pipeline is deterministic given parameters, input, and noise") {
    auto model = tiny_model(5);
    Rng rng(6);
    auto u = random_message_tensor<double>(3, kTiny, rng);
    auto y = add(model.encode(u), fixed_noise({3, 3, 3}, 0.4, 7));
    auto a = model.decode(y);
    auto b = model.decode(y);
    CHECK(a.data() == b.data());
}

TEST_CASE("recording hooks expose channel injection and subtraction bookkeeping") {
    ModelHyper hyper{3, 2, 1, 8, 1, 8, 1};  // 6 stages
    ProductAe<double> model(kTiny, hyper);
    model.init_weights(8);
    Rng rng(9);
    auto u = random_message_tensor<double>(2, kTiny, rng);
    auto y = add(model.encode(u), fixed_noise({2, 3, 3}, 0.7, 10));
    auto y_cols = transpose(y, 1, 2);

    DecodeTrace<double> trace;
    model.decode(y, &trace);
    const std::size_t stages = 6, F = 2;
    REQUIRE(trace.stages.size() == stages);

    // first decoder consumes the raw channel columns and nothing else
    CHECK(trace.stages[0].soft_in.empty());
    CHECK(trace.stages[0].input.data() == y_cols.data());

    for (std::size_t t = 1; t <= stages; ++t) {
        const auto& st = trace.stages[t - 1];
        // channel block is the unmodified channel slice in the stage's orientation
        if (t == stages) {
            CHECK_FALSE(st.has_channel);
        } else {
            REQUIRE(st.has_channel);
            CHECK(st.channel.data() == ((t % 2 == 1) ? y_cols.data() : y.data()));
        }
        // feature-block consistency: F soft vectors in (plus channel), F out
        if (t > 1 && t < stages) {
            CHECK(st.soft_in.size() == F);
            CHECK(st.input.shape().back() ==
                  (F + 1) * st.channel.shape().back());
            CHECK(st.raw_out.shape().back() % F == 0);
        }
    }

    // stage 2 receives stage 1's output directly (no soft input to subtract)
    for (std::size_t f = 0; f < F; ++f) {
        auto block = transpose(slice(trace.stages[0].raw_out, 2, f * 3, 3), 1, 2);
        CHECK(trace.stages[1].soft_in[f].data() == block.data());
    }

    // stages 3..2I-1 receive increments: out_{t-1} minus what t-1 consumed
    for (std::size_t t = 3; t <= stages - 1; ++t) {
        const auto& prev = trace.stages[t - 2];
        const std::size_t block_len = prev.raw_out.shape().back() / F;
        for (std::size_t f = 0; f < F; ++f) {
            auto increment = transpose(
                sub(slice(prev.raw_out, 2, f * block_len, block_len), prev.soft_in[f]), 1, 2);
            CHECK(trace.stages[t - 1].soft_in[f].data() == increment.data());
        }
    }

    // last stage takes the previous output only, with no subtraction
    {
        const auto& prev = trace.stages[stages - 2];
        const std::size_t block_len = prev.raw_out.shape().back() / F;  // k2
        for (std::size_t f = 0; f < F; ++f) {
            auto block = transpose(slice(prev.raw_out, 2, f * block_len, block_len), 1, 2);
            CHECK(trace.stages[stages - 1].soft_in[f].data() == block.data());
        }
    }
}

TEST_CASE("scaling the second encoder's output layer leaves the codeword unchanged") {
    // single-codeword case: normalization divides the uniform scale away
    auto model = tiny_model(11);
    Rng rng(12);
    auto u = random_message_tensor<double>(1, kTiny, rng);
    auto before = model.encode(u);

    const double alpha = 3.7;
    auto& last = model.encoder.enc2().layers().back();
    for (auto& w : last.weight.data()) w *= alpha;
    for (auto& b : last.bias.data()) b *= alpha;
    auto after = model.encode(u);

    for (std::size_t i = 0; i < before.numel(); ++i)
        CHECK(after.data()[i] == doctest::Approx(before.data()[i]).epsilon(1e-12));
}

TEST_CASE("end-to-end gradient of the full pipeline matches finite differences") {
    auto model = tiny_model(13);
    auto params = all_params(model);
    fd::jitter_params(params, 999);

    Rng rng(14);
    auto u = random_message_tensor<double>(3, kTiny, rng);
    auto noise = fixed_noise({3, 3, 3}, 0.5, 15);

    auto loss_fn = [&] {
        auto y = add(model.encode(u), noise);
        return bce_with_logits(model.decode(y), u);
    };

    auto res = fd::check_gradients<double>(params, loss_fn, 1e-5, 5, 16);
    CHECK(res.checked >= 100);
    CHECK(res.max_rel_err < 1e-3);
}

TEST_CASE("hard decisions threshold logits at zero") {
    auto logits = TensorD::from({2, 2}, {0.1, -0.1, 0.0, 27.0});
    CHECK(hard_bits(logits) == std::vector<std::uint8_t>{1, 0, 0, 1});
}
