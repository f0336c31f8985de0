#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pae/rng.hpp"
#include "pae/tensor.hpp"

// Finite-difference gradient verification. Numeric derivatives come from
// central differences of forward evaluations only, so they are independent
// of the backward rules they check. Exposed both to the test suites and to
// the `gradcheck` CLI command.

namespace pae::fd {

inline double rel_err(double analytic, double numeric, double floor = 1e-6) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

// Moves parameters to a generic point before a finite-difference check.
// Freshly initialized models have all-zero biases, which parks SELU
// preactivations of all-zero input rows exactly on the activation kink
// where central differences measure the two-branch average instead of a
// one-sided derivative.
template <typename T>
void jitter_params(std::vector<Tensor<T>>& params, std::uint64_t seed, double scale = 0.05) {
    Rng rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& p : params)
        for (auto& v : p.data()) v += static_cast<T>(dist(rng));
}

struct CheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

// loss_fn: () -> Tensor<T> scalar, evaluated on the current parameter data.
// Checks d loss / d params[i][j] for up to per_tensor sampled entries of
// each parameter tensor (all entries when per_tensor == 0).
template <typename T, typename LossFn>
CheckResult check_gradients(std::vector<Tensor<T>> params, LossFn loss_fn, double step = 1e-5,
                            std::size_t per_tensor = 0, std::uint64_t seed = 0) {
    for (auto& p : params) p.zero_grad();
    Tensor<T> loss = loss_fn();
    loss.backward();

    std::vector<std::vector<T>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params)
        analytic.push_back(p.has_grad() ? p.grad() : std::vector<T>(p.numel(), T(0)));

    Rng rng(seed);
    CheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = params[pi];
        std::vector<std::size_t> idx(p.numel());
        std::iota(idx.begin(), idx.end(), 0);
        if (per_tensor != 0 && per_tensor < idx.size()) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(per_tensor);
        }
        for (std::size_t j : idx) {
            const T saved = p.data()[j];
            double plus, minus;
            {
                NoGradGuard ng;
                p.data()[j] = saved + static_cast<T>(step);
                plus = static_cast<double>(loss_fn().value());
                p.data()[j] = saved - static_cast<T>(step);
                minus = static_cast<double>(loss_fn().value());
            }
            p.data()[j] = saved;
            const double numeric = (plus - minus) / (2.0 * step);
            result.max_rel_err =
                std::max(result.max_rel_err, rel_err(static_cast<double>(analytic[pi][j]), numeric));
            ++result.checked;
        }
    }
    return result;
}

}  // namespace pae::fd
