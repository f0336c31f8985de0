#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "pae/channel.hpp"
#include "pae/model.hpp"
#include "pae/rng.hpp"

// Monte-Carlo BER/BLER measurement. Workers own independent derived RNG
// streams and process one batch per round; counters merge in worker order
// after each round, so a run is reproducible given (seed, worker count).
// A sweep stops per point once min_block_errors blocks have failed or
// max_blocks have been simulated.

namespace pae::eval {

struct EvalStop {
    std::uint64_t min_block_errors = 100;
    std::uint64_t max_blocks = 1'000'000;
    std::size_t batch_blocks = 256;  // blocks per worker per round
};

struct EvalResult {
    double snr_db = 0.0;
    double ebn0_db = 0.0;
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t blocks_sent = 0;
    std::uint64_t block_errors = 0;
    double ber = 0.0;
    double bler = 0.0;
    double ber_ci95 = 0.0;   // 95% confidence half-width
    double bler_ci95 = 0.0;
};

// Anything that maps k message bits to n real symbols and back.
class Codec {
public:
    virtual ~Codec() = default;
    virtual std::size_t message_bits() const = 0;   // k
    virtual std::size_t coded_symbols() const = 0;  // n
    virtual void encode_blocks(const std::uint8_t* u, std::size_t blocks, double* c) const = 0;
    virtual void decode_blocks(const double* y, std::size_t blocks, std::uint8_t* u_hat) const = 0;
};

// k = n reference harness: bit b maps to the BPSK symbol 1 - 2b, decisions
// by sign. Doubles as the identity codec at sigma^2 = 0.
class UncodedBpskCodec : public Codec {
public:
    explicit UncodedBpskCodec(std::size_t block_len) : len_(block_len) {}
    std::size_t message_bits() const override { return len_; }
    std::size_t coded_symbols() const override { return len_; }
    void encode_blocks(const std::uint8_t* u, std::size_t blocks, double* c) const override;
    void decode_blocks(const double* y, std::size_t blocks, std::uint8_t* u_hat) const override;

private:
    std::size_t len_;
};

// No-grad wrapper around a trained (or untrained) model.
template <typename T>
class ProductAeCodec : public Codec {
public:
    explicit ProductAeCodec(const ProductAe<T>& model) : model_(&model) {}

    std::size_t message_bits() const override { return model_->geometry.k(); }
    std::size_t coded_symbols() const override { return model_->geometry.n(); }

    void encode_blocks(const std::uint8_t* u, std::size_t blocks, double* c) const override {
        NoGradGuard ng;
        const auto& geo = model_->geometry;
        std::vector<T> bits(blocks * geo.k());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<T>(u[i]);
        auto code = model_->encode(Tensor<T>::from({blocks, geo.k2, geo.k1}, std::move(bits)));
        const auto& data = code.data();
        for (std::size_t i = 0; i < data.size(); ++i) c[i] = static_cast<double>(data[i]);
    }

    void decode_blocks(const double* y, std::size_t blocks, std::uint8_t* u_hat) const override {
        NoGradGuard ng;
        const auto& geo = model_->geometry;
        std::vector<T> symbols(blocks * geo.n());
        for (std::size_t i = 0; i < symbols.size(); ++i) symbols[i] = static_cast<T>(y[i]);
        auto logits =
            model_->decode(Tensor<T>::from({blocks, geo.n2, geo.n1}, std::move(symbols)));
        const auto bits = hard_bits(logits);
        std::copy(bits.begin(), bits.end(), u_hat);
    }

private:
    const ProductAe<T>* model_;
};

// 95% binomial half-width: normal approximation, switching to the Wilson
// interval below 30 errors where the normal approximation is poor.
double binomial_ci95_halfwidth(std::uint64_t errors, std::uint64_t trials);

// Analytic baseline: Q(sqrt(SNR)) for BPSK over the unit-power channel.
double uncoded_bpsk_ber(double snr_db);

EvalResult monte_carlo_eval(const Codec& codec, double snr_db, double rate_for_ebn0,
                            const EvalStop& stop, std::uint64_t seed, std::size_t workers = 1);

std::vector<EvalResult> sweep(const Codec& codec, const std::vector<double>& snrs_db,
                              double rate_for_ebn0, const EvalStop& stop, std::uint64_t seed,
                              std::size_t workers = 1);

// CSV columns: snr_db,ebn0_db,ber,bler,ber_ci,bler_ci,bits,blocks
void write_csv(std::ostream& os, const std::vector<EvalResult>& results);

}  // namespace pae::eval
