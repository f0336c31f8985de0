#pragma once

#include <cstddef>
#include <cstdint>

// Dense kernels behind the tensor ops. Every kernel exists twice: a serial
// reference in kernels::serial and an OpenMP version in kernels::par. The
// dispatch wrappers pick between them at runtime based on problem size and
// the global switch. Parallel loops split only the independent output
// index space and never reorder per-element reductions, so serial and
// parallel results are bitwise identical for any thread count.

namespace pae::kernels {

bool parallel_enabled();
void set_parallel_enabled(bool on);

// below this many scalar ops the fork/join overhead dominates
inline constexpr std::size_t kParallelGrain = 1u << 15;

namespace serial {

// c[bat,p,r] += a[bat,p,q] * b[q,r]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c,
             std::size_t batch, std::size_t p, std::size_t q, std::size_t r) {
    const std::size_t rows = batch * p;
    for (std::size_t row = 0; row < rows; ++row) {
        const T* arow = a + row * q;
        T* crow = c + row * r;
        for (std::size_t k = 0; k < q; ++k) {
            const T av = arow[k];
            const T* brow = b + k * r;
            for (std::size_t j = 0; j < r; ++j) crow[j] += av * brow[j];
        }
    }
}

// c[bat,p,m] += a[bat,p,k] * b^T, with b stored [m,k]
template <typename T>
void gemm_nt(const T* a, const T* b, T* c,
             std::size_t batch, std::size_t p, std::size_t k, std::size_t m) {
    const std::size_t rows = batch * p;
    for (std::size_t row = 0; row < rows; ++row) {
        const T* arow = a + row * k;
        T* crow = c + row * m;
        for (std::size_t j = 0; j < m; ++j) {
            const T* brow = b + j * k;
            T acc = T(0);
            for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
            crow[j] += acc;
        }
    }
}

// c[q,r] += sum over batches of a[bat,p,q]^T * g[bat,p,r]
template <typename T>
void gemm_tn_reduce(const T* a, const T* g, T* c,
                    std::size_t batch, std::size_t p, std::size_t q, std::size_t r) {
    const std::size_t rows = batch * p;
    for (std::size_t k = 0; k < q; ++k) {
        T* crow = c + k * r;
        for (std::size_t row = 0; row < rows; ++row) {
            const T av = a[row * q + k];
            const T* grow = g + row * r;
            for (std::size_t j = 0; j < r; ++j) crow[j] += av * grow[j];
        }
    }
}

}  // namespace serial

namespace par {

template <typename T>
void gemm_nn(const T* a, const T* b, T* c,
             std::size_t batch, std::size_t p, std::size_t q, std::size_t r) {
    const std::int64_t rows = static_cast<std::int64_t>(batch * p);
#pragma omp parallel for schedule(static)
    for (std::int64_t row = 0; row < rows; ++row) {
        const T* arow = a + row * q;
        T* crow = c + row * r;
        for (std::size_t k = 0; k < q; ++k) {
            const T av = arow[k];
            const T* brow = b + k * r;
            for (std::size_t j = 0; j < r; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c,
             std::size_t batch, std::size_t p, std::size_t k, std::size_t m) {
    const std::int64_t rows = static_cast<std::int64_t>(batch * p);
#pragma omp parallel for schedule(static)
    for (std::int64_t row = 0; row < rows; ++row) {
        const T* arow = a + row * k;
        T* crow = c + row * m;
        for (std::size_t j = 0; j < m; ++j) {
            const T* brow = b + j * k;
            T acc = T(0);
            for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
            crow[j] += acc;
        }
    }
}

template <typename T>
void gemm_tn_reduce(const T* a, const T* g, T* c,
                    std::size_t batch, std::size_t p, std::size_t q, std::size_t r) {
    const std::size_t rows = batch * p;
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(q); ++k) {
        T* crow = c + k * r;
        for (std::size_t row = 0; row < rows; ++row) {
            const T av = a[row * q + k];
            const T* grow = g + row * r;
            for (std::size_t j = 0; j < r; ++j) crow[j] += av * grow[j];
        }
    }
}

}  // namespace par

template <typename T>
void gemm_nn(const T* a, const T* b, T* c,
             std::size_t batch, std::size_t p, std::size_t q, std::size_t r) {
    if (parallel_enabled() && batch * p * q * r >= kParallelGrain)
        par::gemm_nn(a, b, c, batch, p, q, r);
    else
        serial::gemm_nn(a, b, c, batch, p, q, r);
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c,
             std::size_t batch, std::size_t p, std::size_t k, std::size_t m) {
    if (parallel_enabled() && batch * p * k * m >= kParallelGrain)
        par::gemm_nt(a, b, c, batch, p, k, m);
    else
        serial::gemm_nt(a, b, c, batch, p, k, m);
}

template <typename T>
void gemm_tn_reduce(const T* a, const T* g, T* c,
                    std::size_t batch, std::size_t p, std::size_t q, std::size_t r) {
    if (parallel_enabled() && batch * p * q * r >= kParallelGrain)
        par::gemm_tn_reduce(a, g, c, batch, p, q, r);
    else
        serial::gemm_tn_reduce(a, g, c, batch, p, q, r);
}

// elementwise maps; y[i] = f(x[i]) etc. Accumulating variants add in place.
template <typename T, typename F>
void map(const T* x, T* y, std::size_t n, F f) {
    if (parallel_enabled() && n >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) y[i] = f(x[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = f(x[i]);
    }
}

template <typename T, typename F>
void map_accum(const T* x, T* y, std::size_t n, F f) {
    if (parallel_enabled() && n >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) y[i] += f(x[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] += f(x[i]);
    }
}

template <typename T, typename F>
void zip(const T* a, const T* b, T* y, std::size_t n, F f) {
    if (parallel_enabled() && n >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) y[i] = f(a[i], b[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = f(a[i], b[i]);
    }
}

template <typename T, typename F>
void zip_accum(const T* a, const T* b, T* y, std::size_t n, F f) {
    if (parallel_enabled() && n >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) y[i] += f(a[i], b[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] += f(a[i], b[i]);
    }
}

}  // namespace pae::kernels
