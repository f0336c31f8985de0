#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

// Exact GF(2) product-code arithmetic. Serves as the structural oracle the
// neural construction is checked against: component generator matrices,
// Kronecker products, per-dimension encoding of M-dimensional arrays, and
// brute-force minimum distance.

namespace pae::gf2 {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::uint8_t at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, std::uint8_t v) { bits_[r * cols_ + c] = v & 1u; }

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    // mod-2 matrix product
    Matrix mul(const Matrix& other) const;
    std::size_t rank() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

Matrix kronecker(const Matrix& a, const Matrix& b);

// (n, k) linear block code given by a full-row-rank k x n generator matrix.
struct LinearCode {
    std::size_t n = 0;
    std::size_t k = 0;
    Matrix generator;

    explicit LinearCode(Matrix g);

    // c = u * G over GF(2); u has k bits.
    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& u) const;
};

LinearCode repetition_code(std::size_t n);
LinearCode single_parity_check_code(std::size_t n);  // (n, n-1)
LinearCode hamming_7_4();

// Parameters of the M-dimensional product of component codes; every
// parameter is the product of the per-dimension ones.
struct ProductCodeParams {
    std::vector<std::pair<std::size_t, std::size_t>> components;  // (n_m, k_m)

    std::size_t dims() const { return components.size(); }
    std::size_t n() const;
    std::size_t k() const;
    double rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }
};

ProductCodeParams product_params(const std::vector<LinearCode>& codes);

// Binary M-dimensional array, row-major, shape ordered [d_M, ..., d_2, d_1]
// so that the 2D information array is the paper's k2 x k1 matrix U.
struct NdArray {
    std::vector<std::size_t> shape;
    std::vector<std::uint8_t> bits;

    static NdArray zeros(std::vector<std::size_t> shape);
    std::size_t numel() const;
};

// Encodes every length-k_m fiber along dimension m (1-based; dimension 1 is
// the fastest-varying axis) with the given component code.
NdArray encode_dimension(const NdArray& u, std::size_t m, const LinearCode& code);

// Full product encoding, dimensions processed in the given order
// (default 1..M). The result is independent of the order.
NdArray encode_product(const std::vector<LinearCode>& codes, const NdArray& u);
NdArray encode_product_order(const std::vector<LinearCode>& codes, const NdArray& u,
                             const std::vector<std::size_t>& order);

// Generator of the 2D product code in the form G1 (x) G2 of the Kronecker
// construction. This pairs with column-stacked vectorization of U: message
// index r + c*k2 for entry (r, c), codeword index r + c*n2.
Matrix product_generator_2d(const LinearCode& c1, const LinearCode& c2);

std::vector<std::uint8_t> vec_column_major(const NdArray& a);

// Minimum Hamming weight over all 2^k - 1 nonzero codewords; refuses k > 20.
std::size_t min_distance_bruteforce(const LinearCode& code);
std::size_t min_distance_bruteforce_product(const std::vector<LinearCode>& codes);

}  // namespace pae::gf2
