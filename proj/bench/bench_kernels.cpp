// Throughput comparison of the serial reference kernels against the OpenMP
// versions, at the shapes the training loop actually produces.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pae/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Case {
    const char* name;
    std::size_t batch, p, q, r;
};

template <typename F>
double time_best_of(F fn, int reps) {
    double best = 1e30;
    for (int i = 0; i < reps; ++i) {
        auto t0 = Clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

void run_case(const Case& c) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> a(c.batch * c.p * c.q), b(c.q * c.r), out(c.batch * c.p * c.r, 0.0);
    for (auto& v : a) v = dist(rng);
    for (auto& v : b) v = dist(rng);

    const double flops = 2.0 * c.batch * c.p * c.q * c.r;
    const int reps = std::max(1, static_cast<int>(2e9 / flops));

    const double t_serial = time_best_of(
        [&] { pae::kernels::serial::gemm_nn(a.data(), b.data(), out.data(), c.batch, c.p, c.q, c.r); },
        reps);
    const double t_par = time_best_of(
        [&] { pae::kernels::par::gemm_nn(a.data(), b.data(), out.data(), c.batch, c.p, c.q, c.r); },
        reps);

    std::printf("%-28s serial %8.2f GFLOP/s   omp %8.2f GFLOP/s   speedup %.2fx\n", c.name,
                flops / t_serial / 1e9, flops / t_par / 1e9, t_serial / t_par);
}

}  // namespace

int main() {
    const Case cases[] = {
        {"gemm 3500x21 * 21x64", 1, 3500, 21, 64},
        {"gemm 3500x64 * 64x64", 1, 3500, 64, 64},
        {"gemm 5000x10 * 10x200", 1, 5000, 10, 200},
        {"gemm 50000x200 * 200x250", 1, 50000, 200, 250},
        {"gemm batch=500 7x64 * 64x64", 500, 7, 64, 64},
    };
    std::printf("threads: OMP default\n");
    for (const auto& c : cases) run_case(c);
    return 0;
}
