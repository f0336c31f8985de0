#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "pae/rng.hpp"
#include "pae/tensor.hpp"

// Real-valued AWGN channel with SNR = 1/sigma^2, codeword power
// normalization, and the dB conventions used throughout evaluation.

namespace pae::channel {

// sigma^2 = 10^(-snr_db/10); +inf dB maps to a noiseless channel.
double noise_sigma2_from_snr_db(double snr_db);

// Eb/N0 [dB] = SNR [dB] + 10*log10(1/R), 0 < R <= 1.
double ebn0_db_from_snr_db(double snr_db, double rate);
double snr_db_from_ebn0_db(double ebn0_db, double rate);

// Q(x) = P(N(0,1) > x) = erfc(x / sqrt(2)) / 2.
double q_function(double x);

struct ChannelParams {
    double snr_db = 0.0;
    double sigma2 = 1.0;
    double rate = 1.0;
    std::uint64_t seed = 0;

    static ChannelParams from_snr_db(double snr_db, double rate = 1.0, std::uint64_t seed = 0);
    double ebn0_db() const { return ebn0_db_from_snr_db(snr_db, rate); }
};

// Scales each trailing-axis codeword c to c' = sqrt(n) * c / ||c||_2, so the
// per-symbol average power is exactly one. The op is differentiable; a
// 1e-12 guard on the norm keeps degenerate all-zero codewords finite.
template <typename T>
Tensor<T> power_normalize(const Tensor<T>& c) {
    if (c.ndim() < 1) throw DimensionError("power_normalize: need at least one axis");
    const std::size_t n = c.shape().back();
    const std::size_t rows = c.numel() / n;
    const T eps = static_cast<T>(1e-12);
    const T sqrt_n = std::sqrt(static_cast<T>(n));

    std::vector<T> out(c.numel());
    std::vector<T> norms(rows);
    const T* cd = c.data().data();
    for (std::size_t row = 0; row < rows; ++row) {
        T acc = T(0);
        const T* src = cd + row * n;
        for (std::size_t j = 0; j < n; ++j) acc += src[j] * src[j];
        const T norm = std::sqrt(acc);
        norms[row] = norm;
        const T s = sqrt_n / (norm + eps);
        T* dst = out.data() + row * n;
        for (std::size_t j = 0; j < n; ++j) dst[j] = s * src[j];
    }

    auto cn = c.node();
    return make_op<T>(c.shape(), std::move(out), {c},
                      [cn, norms, rows, n, sqrt_n, eps](detail::Node<T>& o) {
                          if (!cn->requires_grad) return;
                          cn->ensure_grad();
                          // d c'_j / d c_i = s * (delta_ij - c_i c_j / m^2), s = sqrt(n)/m
                          for (std::size_t row = 0; row < rows; ++row) {
                              const T m = norms[row] + eps;
                              const T s = sqrt_n / m;
                              const T* cv = cn->data.data() + row * n;
                              const T* gv = o.grad.data() + row * n;
                              T dot = T(0);
                              for (std::size_t j = 0; j < n; ++j) dot += gv[j] * cv[j];
                              const T coeff = s * dot / (m * m);
                              T* dst = cn->grad.data() + row * n;
                              for (std::size_t j = 0; j < n; ++j)
                                  dst[j] += s * gv[j] - coeff * cv[j];
                          }
                      });
}

// y = c + n with i.i.d. N(0, sigma^2) noise. The noise tensor enters the
// tape as a constant, so gradients pass through to c unchanged.
template <typename T>
Tensor<T> add_noise(const Tensor<T>& c, double sigma2, Rng& rng) {
    if (sigma2 <= 0.0) return add(c, Tensor<T>::zeros(c.shape()));
    std::normal_distribution<double> dist(0.0, std::sqrt(sigma2));
    std::vector<T> noise(c.numel());
    for (auto& v : noise) v = static_cast<T>(dist(rng));
    return add(c, Tensor<T>::from(c.shape(), std::move(noise)));
}

// Per-codeword noise variances: row i of c (leading axis) gets sigma2[i].
template <typename T>
Tensor<T> add_noise_per_row(const Tensor<T>& c, const std::vector<double>& sigma2, Rng& rng) {
    if (c.ndim() < 1 || c.shape()[0] != sigma2.size())
        throw DimensionError("add_noise_per_row: " + std::to_string(sigma2.size()) +
                             " variances for leading axis of " + shape_str(c.shape()));
    const std::size_t row_len = c.numel() / c.shape()[0];
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<T> noise(c.numel());
    for (std::size_t row = 0; row < sigma2.size(); ++row) {
        const double sd = sigma2[row] > 0.0 ? std::sqrt(sigma2[row]) : 0.0;
        for (std::size_t j = 0; j < row_len; ++j)
            noise[row * row_len + j] = static_cast<T>(sd * unit(rng));
    }
    return add(c, Tensor<T>::from(c.shape(), std::move(noise)));
}

}  // namespace pae::channel
