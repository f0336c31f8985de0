#include "pae/gf2.hpp"

#include <string>

#include "pae/errors.hpp"

namespace pae::gf2 {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
    if (bits_.size() != rows * cols)
        throw DimensionError("gf2: " + std::to_string(bits_.size()) + " bits do not fill a " +
                             std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    for (auto& b : bits_) b &= 1u;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

Matrix Matrix::mul(const Matrix& other) const {
    if (cols_ != other.rows_)
        throw DimensionError("gf2 mul: " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                             " times " + std::to_string(other.rows_) + "x" +
                             std::to_string(other.cols_));
    Matrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            if (!at(i, k)) continue;
            for (std::size_t j = 0; j < other.cols_; ++j)
                out.bits_[i * other.cols_ + j] ^= other.at(k, j);
        }
    return out;
}

std::size_t Matrix::rank() const {
    Matrix work = *this;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols_ && rank < rows_; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows_ && !work.at(pivot, col)) ++pivot;
        if (pivot == rows_) continue;
        if (pivot != rank)
            for (std::size_t j = 0; j < cols_; ++j) {
                std::uint8_t t = work.at(rank, j);
                work.set(rank, j, work.at(pivot, j));
                work.set(pivot, j, t);
            }
        for (std::size_t i = 0; i < rows_; ++i)
            if (i != rank && work.at(i, col))
                for (std::size_t j = 0; j < cols_; ++j)
                    work.set(i, j, work.at(i, j) ^ work.at(rank, j));
        ++rank;
    }
    return rank;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            if (!a.at(ia, ja)) continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    out.set(ia * b.rows() + ib, ja * b.cols() + jb, b.at(ib, jb));
        }
    return out;
}

LinearCode::LinearCode(Matrix g) : n(g.cols()), k(g.rows()), generator(std::move(g)) {
    if (k > n)
        throw ContractError("LinearCode: k=" + std::to_string(k) + " exceeds n=" +
                            std::to_string(n));
    if (generator.rank() != k)
        throw ContractError("LinearCode: generator matrix is not full row rank (rank " +
                            std::to_string(generator.rank()) + " of " + std::to_string(k) + ")");
}

std::vector<std::uint8_t> LinearCode::encode(const std::vector<std::uint8_t>& u) const {
    if (u.size() != k)
        throw DimensionError("encode: message has " + std::to_string(u.size()) +
                             " bits, code dimension is " + std::to_string(k));
    std::vector<std::uint8_t> c(n, 0);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(u[i] & 1u)) continue;
        for (std::size_t j = 0; j < n; ++j) c[j] ^= generator.at(i, j);
    }
    return c;
}

LinearCode repetition_code(std::size_t n) {
    Matrix g(1, n);
    for (std::size_t j = 0; j < n; ++j) g.set(0, j, 1);
    return LinearCode(std::move(g));
}

LinearCode single_parity_check_code(std::size_t n) {
    if (n < 2) throw ContractError("single_parity_check_code: need n >= 2");
    Matrix g(n - 1, n);
    for (std::size_t i = 0; i < n - 1; ++i) {
        g.set(i, i, 1);
        g.set(i, n - 1, 1);
    }
    return LinearCode(std::move(g));
}

LinearCode hamming_7_4() {
    // systematic [I4 | P]
    const std::uint8_t p[4][3] = {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
    Matrix g(4, 7);
    for (std::size_t i = 0; i < 4; ++i) {
        g.set(i, i, 1);
        for (std::size_t j = 0; j < 3; ++j) g.set(i, 4 + j, p[i][j]);
    }
    return LinearCode(std::move(g));
}

std::size_t ProductCodeParams::n() const {
    std::size_t v = 1;
    for (const auto& c : components) v *= c.first;
    return v;
}

std::size_t ProductCodeParams::k() const {
    std::size_t v = 1;
    for (const auto& c : components) v *= c.second;
    return v;
}

ProductCodeParams product_params(const std::vector<LinearCode>& codes) {
    ProductCodeParams p;
    for (const auto& c : codes) p.components.emplace_back(c.n, c.k);
    return p;
}

NdArray NdArray::zeros(std::vector<std::size_t> shape) {
    NdArray a;
    a.shape = std::move(shape);
    std::size_t n = 1;
    for (std::size_t d : a.shape) n *= d;
    a.bits.assign(n, 0);
    return a;
}

std::size_t NdArray::numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

NdArray encode_dimension(const NdArray& u, std::size_t m, const LinearCode& code) {
    const std::size_t dims = u.shape.size();
    if (m == 0 || m > dims)
        throw DimensionError("encode_dimension: dimension " + std::to_string(m) +
                             " out of range for a " + std::to_string(dims) + "-dim array");
    // dimension m counts from the fastest axis: axis = dims - m
    const std::size_t axis = dims - m;
    if (u.shape[axis] != code.k)
        throw DimensionError("encode_dimension: dimension " + std::to_string(m) + " has length " +
                             std::to_string(u.shape[axis]) + ", code dimension is " +
                             std::to_string(code.k));

    std::vector<std::size_t> out_shape = u.shape;
    out_shape[axis] = code.n;
    NdArray out = NdArray::zeros(out_shape);

    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= u.shape[i];
    for (std::size_t i = axis + 1; i < dims; ++i) inner *= u.shape[i];

    std::vector<std::uint8_t> fiber(code.k);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) {
            for (std::size_t t = 0; t < code.k; ++t)
                fiber[t] = u.bits[(o * code.k + t) * inner + i];
            const auto enc = code.encode(fiber);
            for (std::size_t t = 0; t < code.n; ++t)
                out.bits[(o * code.n + t) * inner + i] = enc[t];
        }
    return out;
}

NdArray encode_product_order(const std::vector<LinearCode>& codes, const NdArray& u,
                             const std::vector<std::size_t>& order) {
    if (order.size() != codes.size())
        throw ContractError("encode_product_order: order must list every dimension once");
    NdArray a = u;
    for (std::size_t m : order) a = encode_dimension(a, m, codes[m - 1]);
    return a;
}

NdArray encode_product(const std::vector<LinearCode>& codes, const NdArray& u) {
    std::vector<std::size_t> order(codes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
    return encode_product_order(codes, u, order);
}

Matrix product_generator_2d(const LinearCode& c1, const LinearCode& c2) {
    return kronecker(c1.generator, c2.generator);
}

std::vector<std::uint8_t> vec_column_major(const NdArray& a) {
    if (a.shape.size() != 2) throw ContractError("vec_column_major: need a 2-dim array");
    const std::size_t rows = a.shape[0], cols = a.shape[1];
    std::vector<std::uint8_t> v(rows * cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r) v[c * rows + r] = a.bits[r * cols + c];
    return v;
}

namespace {

std::size_t weight(const std::vector<std::uint8_t>& bits) {
    std::size_t w = 0;
    for (auto b : bits) w += b & 1u;
    return w;
}

}  // namespace

std::size_t min_distance_bruteforce(const LinearCode& code) {
    if (code.k > 20)
        throw ContractError("min_distance_bruteforce: k=" + std::to_string(code.k) +
                            " exceeds the enumeration bound of 20");
    std::size_t best = code.n + 1;
    std::vector<std::uint8_t> u(code.k);
    for (std::uint64_t msg = 1; msg < (1ull << code.k); ++msg) {
        for (std::size_t i = 0; i < code.k; ++i) u[i] = (msg >> i) & 1u;
        best = std::min(best, weight(code.encode(u)));
    }
    return best;
}

std::size_t min_distance_bruteforce_product(const std::vector<LinearCode>& codes) {
    Matrix g = codes.front().generator;
    for (std::size_t i = 1; i < codes.size(); ++i) g = kronecker(g, codes[i].generator);
    return min_distance_bruteforce(LinearCode(std::move(g)));
}

}  // namespace pae::gf2
