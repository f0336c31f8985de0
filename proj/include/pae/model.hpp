#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pae/channel.hpp"
#include "pae/errors.hpp"
#include "pae/nn.hpp"
#include "pae/tensor.hpp"

// The neural product autoencoder: two per-dimension FCNN encoders and a
// chain of 2I FCNN decoders that alternate between column and row
// orientation, exchanging F soft-information vectors per step.

namespace pae {

struct CodeGeometry {
    std::size_t k1 = 0, k2 = 0, n1 = 0, n2 = 0;

    std::size_t k() const { return k1 * k2; }
    std::size_t n() const { return n1 * n2; }
    double rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }

    void validate() const {
        if (k1 == 0 || k2 == 0 || n1 == 0 || n2 == 0)
            throw ConfigError("code geometry: k1,k2,n1,n2 must be positive");
        if (k1 > n1 || k2 > n2)
            throw ConfigError("code geometry: component dimension exceeds blocklength");
    }

    bool operator==(const CodeGeometry&) const = default;
};

struct ModelHyper {
    std::size_t iterations = 2;    // I
    std::size_t feature_size = 2;  // F
    std::size_t enc_hidden_layers = 3;
    std::size_t enc_hidden_width = 64;
    std::size_t dec_hidden_layers = 3;
    std::size_t dec_hidden_width = 64;
    std::size_t dec_last_pair_hidden_layers = 4;

    void validate() const {
        if (iterations == 0 || feature_size == 0)
            throw ConfigError("model: iterations and feature_size must be positive");
    }

    bool operator==(const ModelHyper&) const = default;
};

template <typename T>
class ProductEncoder {
public:
    ProductEncoder() = default;

    ProductEncoder(CodeGeometry geo, std::size_t hidden_layers, std::size_t hidden_width)
        : geo_(geo),
          enc1_(geo.k1, geo.n1, hidden_layers, hidden_width),
          enc2_(geo.k2, geo.n2, hidden_layers, hidden_width) {}

    // u: [B, k2, k1] -> real codewords [B, n2, n1], no normalization.
    // enc1 maps each length-k1 row, enc2 each length-k2 column.
    Tensor<T> encode_raw(const Tensor<T>& u) const {
        check_input(u);
        Tensor<T> rows = enc1_.forward(u);                   // [B, k2, n1]
        Tensor<T> cols = transpose(rows, 1, 2);              // [B, n1, k2]
        Tensor<T> enc = enc2_.forward(cols);                 // [B, n1, n2]
        return transpose(enc, 1, 2);                         // [B, n2, n1]
    }

    // Full encoder: per-codeword power normalization over all n = n1*n2
    // symbols, returned as [B, n2, n1].
    Tensor<T> encode(const Tensor<T>& u) const {
        const std::size_t batch = u.shape()[0];
        Tensor<T> c = encode_raw(u);
        Tensor<T> flat = reshape(c, {batch, geo_.n()});
        Tensor<T> normed = channel::power_normalize(flat);
        return reshape(normed, {batch, geo_.n2, geo_.n1});
    }

    void init_weights(std::uint64_t seed) {
        enc1_.init_weights(derive_seed(seed, 0));
        enc2_.init_weights(derive_seed(seed, 1));
    }

    void collect_params(std::vector<Tensor<T>>& out) const {
        enc1_.collect_params(out);
        enc2_.collect_params(out);
    }

    Fcnn<T>& enc1() { return enc1_; }
    Fcnn<T>& enc2() { return enc2_; }
    const Fcnn<T>& enc1() const { return enc1_; }
    const Fcnn<T>& enc2() const { return enc2_; }
    const CodeGeometry& geometry() const { return geo_; }

private:
    void check_input(const Tensor<T>& u) const {
        if (u.ndim() != 3 || u.shape()[1] != geo_.k2 || u.shape()[2] != geo_.k1)
            throw DimensionError("encode: expected [B," + std::to_string(geo_.k2) + "," +
                                 std::to_string(geo_.k1) + "], got " + shape_str(u.shape()));
        for (T v : u.data())
            if (v != T(0) && v != T(1)) throw ContractError("encode: message bits must be 0/1");
    }

    CodeGeometry geo_;
    Fcnn<T> enc1_, enc2_;
};

// Per-stage record of what each decoder consumed and produced; used by the
// bookkeeping tests.
template <typename T>
struct DecodeTrace {
    struct Stage {
        std::vector<Tensor<T>> soft_in;  // F feature blocks, this stage's orientation
        Tensor<T> channel;               // injected channel block, if any
        bool has_channel = false;
        Tensor<T> input;                 // concatenated network input
        Tensor<T> raw_out;               // network output before reshaping
    };
    std::vector<Stage> stages;
};

template <typename T>
class ProductDecoder {
public:
    ProductDecoder() = default;

    ProductDecoder(CodeGeometry geo, ModelHyper hyper) : geo_(geo), hyper_(hyper) {
        geo.validate();
        hyper.validate();
        const std::size_t stages = 2 * hyper_.iterations;
        nets_.reserve(stages);
        for (std::size_t t = 1; t <= stages; ++t) {
            const std::size_t layers = (t >= stages - 1) ? hyper_.dec_last_pair_hidden_layers
                                                         : hyper_.dec_hidden_layers;
            nets_.emplace_back(stage_input_dim(t), stage_output_dim(t), layers,
                               hyper_.dec_hidden_width);
        }
    }

    std::size_t stage_count() const { return nets_.size(); }
    const Fcnn<T>& net(std::size_t t) const { return nets_.at(t - 1); }  // t is 1-based
    Fcnn<T>& net(std::size_t t) { return nets_.at(t - 1); }

    // Vector length processed at stage t: odd stages run on columns (n2),
    // even stages on rows (n1).
    std::size_t stage_vector_len(std::size_t t) const { return (t % 2 == 1) ? geo_.n2 : geo_.n1; }

    std::size_t stage_input_dim(std::size_t t) const {
        const std::size_t stages = 2 * hyper_.iterations;
        if (t == 1) return geo_.n2;                            // channel only
        if (t == stages) return hyper_.feature_size * geo_.n1;  // soft input only
        return (hyper_.feature_size + 1) * stage_vector_len(t);
    }

    std::size_t stage_output_dim(std::size_t t) const {
        const std::size_t stages = 2 * hyper_.iterations;
        if (t == stages) return geo_.k1;                        // logits per row
        if (t == stages - 1) return hyper_.feature_size * geo_.k2;
        return hyper_.feature_size * stage_vector_len(t);
    }

    // y: [B, n2, n1] -> logits [B, k2, k1].
    Tensor<T> decode(const Tensor<T>& y, DecodeTrace<T>* trace = nullptr) const {
        if (y.ndim() != 3 || y.shape()[1] != geo_.n2 || y.shape()[2] != geo_.n1)
            throw DimensionError("decode: expected [B," + std::to_string(geo_.n2) + "," +
                                 std::to_string(geo_.n1) + "], got " + shape_str(y.shape()));
        const std::size_t stages = 2 * hyper_.iterations;
        const std::size_t F = hyper_.feature_size;

        Tensor<T> y_rows = y;                    // [B, n2, n1]
        Tensor<T> y_cols = transpose(y, 1, 2);   // [B, n1, n2]

        Tensor<T> prev_raw;                      // previous stage's network output
        std::vector<Tensor<T>> prev_soft_in;     // blocks fed to the previous stage
        std::size_t prev_block_len = 0;          // per-feature vector length of prev_raw

        for (std::size_t t = 1; t <= stages; ++t) {
            const bool columns = (t % 2 == 1);
            Tensor<T> chan = columns ? y_cols : y_rows;

            Tensor<T> input;
            std::vector<Tensor<T>> soft_in;
            if (t == 1) {
                input = chan;
            } else {
                soft_in.reserve(F);
                std::vector<Tensor<T>> parts;
                parts.reserve(F + 1);
                for (std::size_t f = 0; f < F; ++f) {
                    Tensor<T> block = slice(prev_raw, 2, f * prev_block_len, prev_block_len);
                    // stages 3..2I-1 receive soft increments; stage 2 receives
                    // the first decoder's output directly, the last stage the
                    // previous output with no channel and no subtraction
                    if (t >= 3 && t <= stages - 1) block = sub(block, prev_soft_in[f]);
                    Tensor<T> oriented = transpose(block, 1, 2);
                    soft_in.push_back(oriented);
                    parts.push_back(oriented);
                }
                if (t != stages) parts.push_back(chan);
                input = concat(parts, 2);
            }

            if (input.shape().back() != nets_[t - 1].input_dim())
                throw DimensionError("decoder stage t=" + std::to_string(t) + ": input " +
                                     shape_str(input.shape()) + " does not match network input " +
                                     std::to_string(nets_[t - 1].input_dim()));

            Tensor<T> raw = nets_[t - 1].forward(input);

            if (trace) {
                typename DecodeTrace<T>::Stage rec;
                rec.soft_in = soft_in;
                rec.has_channel = (t != stages);
                if (rec.has_channel) rec.channel = chan;
                rec.input = input;
                rec.raw_out = raw;
                trace->stages.push_back(std::move(rec));
            }

            prev_soft_in = std::move(soft_in);
            prev_block_len = stage_output_dim(t) / (t == stages ? 1 : F);
            prev_raw = std::move(raw);
        }
        // the final stage consumed k2 rows of F*n1 values, so its output is
        // already the [B, k2, k1] logit array
        return prev_raw;
    }

    void init_weights(std::uint64_t seed) {
        for (std::size_t i = 0; i < nets_.size(); ++i)
            nets_[i].init_weights(derive_seed(seed, 100 + i));
    }

    void collect_params(std::vector<Tensor<T>>& out) const {
        for (const auto& net : nets_) net.collect_params(out);
    }

    const CodeGeometry& geometry() const { return geo_; }
    const ModelHyper& hyper() const { return hyper_; }

private:
    CodeGeometry geo_;
    ModelHyper hyper_;
    std::vector<Fcnn<T>> nets_;
};

template <typename T>
struct ProductAe {
    CodeGeometry geometry;
    ModelHyper hyper;
    ProductEncoder<T> encoder;
    ProductDecoder<T> decoder;

    ProductAe(CodeGeometry geo, ModelHyper hy)
        : geometry(geo), hyper(hy),
          encoder(geo, hy.enc_hidden_layers, hy.enc_hidden_width),
          decoder(geo, hy) {
        geo.validate();
        hy.validate();
    }

    void init_weights(std::uint64_t seed) {
        encoder.init_weights(derive_seed(seed, 10));
        decoder.init_weights(derive_seed(seed, 20));
    }

    std::vector<Tensor<T>> encoder_params() const {
        std::vector<Tensor<T>> out;
        encoder.collect_params(out);
        return out;
    }

    std::vector<Tensor<T>> decoder_params() const {
        std::vector<Tensor<T>> out;
        decoder.collect_params(out);
        return out;
    }

    Tensor<T> encode(const Tensor<T>& u) const { return encoder.encode(u); }
    Tensor<T> decode(const Tensor<T>& y, DecodeTrace<T>* trace = nullptr) const {
        return decoder.decode(y, trace);
    }
};

// Hard decision: bit 1 iff logit > 0 (sigmoid above one half).
template <typename T>
std::vector<std::uint8_t> hard_bits(const Tensor<T>& logits) {
    std::vector<std::uint8_t> bits(logits.numel());
    const auto& d = logits.data();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = d[i] > T(0) ? 1 : 0;
    return bits;
}

// Uniform random information arrays as a [batch, k2, k1] tensor of 0/1.
template <typename T>
Tensor<T> random_message_tensor(std::size_t batch, const CodeGeometry& geo, Rng& rng) {
    std::vector<T> bits(batch * geo.k2 * geo.k1);
    for (auto& b : bits) b = static_cast<T>(rng() & 1u);
    return Tensor<T>::from({batch, geo.k2, geo.k1}, std::move(bits));
}

}  // namespace pae
