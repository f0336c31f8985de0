#include "pae/evaluation.hpp"

#include <cmath>
#include <random>

namespace pae::eval {

void UncodedBpskCodec::encode_blocks(const std::uint8_t* u, std::size_t blocks,
                                     double* c) const {
    for (std::size_t i = 0; i < blocks * len_; ++i) c[i] = 1.0 - 2.0 * u[i];
}

void UncodedBpskCodec::decode_blocks(const double* y, std::size_t blocks,
                                     std::uint8_t* u_hat) const {
    for (std::size_t i = 0; i < blocks * len_; ++i) u_hat[i] = y[i] < 0.0 ? 1 : 0;
}

double binomial_ci95_halfwidth(std::uint64_t errors, std::uint64_t trials) {
    if (trials == 0) return 0.0;
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    if (errors >= 30) return z * std::sqrt(p * (1.0 - p) / n);
    const double z2 = z * z;
    return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

double uncoded_bpsk_ber(double snr_db) {
    return channel::q_function(std::sqrt(std::pow(10.0, snr_db / 10.0)));
}

namespace {

struct Worker {
    Rng rng;
    std::vector<std::uint8_t> u, u_hat;
    std::vector<double> c;
    std::uint64_t bit_errors = 0, block_errors = 0, blocks = 0;

    Worker(std::uint64_t seed, std::size_t batch_blocks, std::size_t k, std::size_t n)
        : rng(seed), u(batch_blocks * k), u_hat(batch_blocks * k), c(batch_blocks * n) {}
};

void run_round(const Codec& codec, Worker& w, double sigma, std::size_t blocks) {
    const std::size_t k = codec.message_bits();
    const std::size_t n = codec.coded_symbols();
    for (std::size_t i = 0; i < blocks * k; ++i) w.u[i] = w.rng() & 1u;
    codec.encode_blocks(w.u.data(), blocks, w.c.data());
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (std::size_t i = 0; i < blocks * n; ++i) w.c[i] += noise(w.rng);
    }
    codec.decode_blocks(w.c.data(), blocks, w.u_hat.data());
    for (std::size_t b = 0; b < blocks; ++b) {
        std::uint64_t errs = 0;
        for (std::size_t i = 0; i < k; ++i) errs += w.u[b * k + i] != w.u_hat[b * k + i];
        w.bit_errors += errs;
        w.block_errors += errs != 0;
    }
    w.blocks += blocks;
}

}  // namespace

EvalResult monte_carlo_eval(const Codec& codec, double snr_db, double rate_for_ebn0,
                            const EvalStop& stop, std::uint64_t seed, std::size_t workers) {
    if (workers == 0) workers = 1;
    const double sigma2 = channel::noise_sigma2_from_snr_db(snr_db);
    const double sigma = sigma2 > 0.0 ? std::sqrt(sigma2) : 0.0;
    const std::size_t k = codec.message_bits();

    std::vector<Worker> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(derive_seed(seed, w), stop.batch_blocks, k, codec.coded_symbols());

    EvalResult result;
    result.snr_db = snr_db;
    result.ebn0_db = channel::ebn0_db_from_snr_db(snr_db, rate_for_ebn0);

    while (result.block_errors < stop.min_block_errors && result.blocks_sent < stop.max_blocks) {
        const std::uint64_t remaining = stop.max_blocks - result.blocks_sent;
        const std::size_t per_worker = static_cast<std::size_t>(
            std::min<std::uint64_t>(stop.batch_blocks, (remaining + workers - 1) / workers));

#pragma omp parallel for schedule(static, 1)
        for (std::int64_t w = 0; w < static_cast<std::int64_t>(workers); ++w)
            run_round(codec, pool[w], sigma, per_worker);

        result.bit_errors = result.block_errors = result.blocks_sent = 0;
        for (const auto& w : pool) {
            result.bit_errors += w.bit_errors;
            result.block_errors += w.block_errors;
            result.blocks_sent += w.blocks;
        }
    }

    result.bits_sent = result.blocks_sent * k;
    result.ber = result.bits_sent ? static_cast<double>(result.bit_errors) / result.bits_sent : 0.0;
    result.bler =
        result.blocks_sent ? static_cast<double>(result.block_errors) / result.blocks_sent : 0.0;
    result.ber_ci95 = binomial_ci95_halfwidth(result.bit_errors, result.bits_sent);
    result.bler_ci95 = binomial_ci95_halfwidth(result.block_errors, result.blocks_sent);
    return result;
}

std::vector<EvalResult> sweep(const Codec& codec, const std::vector<double>& snrs_db,
                              double rate_for_ebn0, const EvalStop& stop, std::uint64_t seed,
                              std::size_t workers) {
    std::vector<EvalResult> results;
    results.reserve(snrs_db.size());
    for (std::size_t i = 0; i < snrs_db.size(); ++i)
        results.push_back(
            monte_carlo_eval(codec, snrs_db[i], rate_for_ebn0, stop, derive_seed(seed, 1000 + i),
                             workers));
    return results;
}

void write_csv(std::ostream& os, const std::vector<EvalResult>& results) {
    os << "snr_db,ebn0_db,ber,bler,ber_ci,bler_ci,bits,blocks\n";
    os.precision(12);
    for (const auto& r : results)
        os << r.snr_db << ',' << r.ebn0_db << ',' << r.ber << ',' << r.bler << ',' << r.ber_ci95
           << ',' << r.bler_ci95 << ',' << r.bits_sent << ',' << r.blocks_sent << '\n';
}

}  // namespace pae::eval
