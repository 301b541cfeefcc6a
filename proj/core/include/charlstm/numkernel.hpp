#pragma once

// Dense kernels, stable nonlinearities and a seeded PRNG. Everything here is
// plain 64-bit arithmetic with a fixed evaluation order, so results are
// reproducible on a given machine. No BLAS, no SIMD intrinsics.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace charlstm {

using Vector = std::vector<double>;

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  void fill(double v) { data.assign(data.size(), v); }
};

// out = m . v
Vector matvec(const Matrix& m, const Vector& v);
// out += m . v
void matvec_add(Vector& out, const Matrix& m, const Vector& v);
// out += m^T . v
void matvec_transpose_add(Vector& out, const Matrix& m, const Vector& v);
// m += a (x) b  (rank-1 update)
void add_outer(Matrix& m, const Vector& a, const Vector& b);
// out += m[:, col]
void add_column(Vector& out, const Matrix& m, std::size_t col);
// m[:, col] += v
void add_to_column(Matrix& m, std::size_t col, const Vector& v);
// y += a * x
void axpy(double a, const Vector& x, Vector& y);

// Probabilities via exp(x - max(x)); entries positive, sum 1 within 1e-12.
Vector softmax(const Vector& logits);
void softmax_into(Vector& out, const Vector& logits);

double sigmoid(double x);

bool all_finite(std::span<const double> xs);

// xoshiro256** seeded through splitmix64. Fixed algorithm, so a seed yields
// the same stream on every platform. Single-owner: never share across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  // Uniform on [lo, hi], both ends inclusive. Rejection sampling, unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform on [0, 1), 53-bit resolution.
  double uniform_real();

  // Uniform on [lo, hi).
  double uniform_real(double lo, double hi);

 private:
  std::array<std::uint64_t, 4> state_;
};

// One step of the splitmix64 sequence; also used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace charlstm
