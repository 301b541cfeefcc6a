#include "charlstm/numkernel.hpp"

#include <cmath>
#include <limits>

#include "charlstm/error.hpp"

namespace charlstm {

Vector matvec(const Matrix& m, const Vector& v) {
  Vector out(m.rows, 0.0);
  matvec_add(out, m, v);
  return out;
}

void matvec_add(Vector& out, const Matrix& m, const Vector& v) {
  require(m.cols == v.size(), "matvec: matrix has " + std::to_string(m.cols) +
                                  " cols, vector has " + std::to_string(v.size()));
  require(out.size() == m.rows, "matvec: output size mismatch");
  const double* vp = v.data();
  const std::size_t n = m.cols;
  const std::size_t n4 = n - n % 4;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * n;
    // Four independent accumulators; the summation order is fixed, so the
    // result is reproducible, and the dot product is not latency-bound.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t c = 0;
    for (; c < n4; c += 4) {
      s0 += row[c] * vp[c];
      s1 += row[c + 1] * vp[c + 1];
      s2 += row[c + 2] * vp[c + 2];
      s3 += row[c + 3] * vp[c + 3];
    }
    double tail = 0.0;
    for (; c < n; ++c) tail += row[c] * vp[c];
    out[r] += ((s0 + s1) + (s2 + s3)) + tail;
  }
}

void matvec_transpose_add(Vector& out, const Matrix& m, const Vector& v) {
  require(m.rows == v.size(), "matvec_transpose: dimension mismatch");
  require(out.size() == m.cols, "matvec_transpose: output size mismatch");
  double* op = out.data();
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double a = v[r];
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) op[c] += a * row[c];
  }
}

void add_outer(Matrix& m, const Vector& a, const Vector& b) {
  require(m.rows == a.size() && m.cols == b.size(), "add_outer: dimension mismatch");
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double ar = a[r];
    double* row = m.data.data() + r * m.cols;
    const double* bp = b.data();
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += ar * bp[c];
  }
}

void add_column(Vector& out, const Matrix& m, std::size_t col) {
  require(col < m.cols, "add_column: column out of range");
  require(out.size() == m.rows, "add_column: output size mismatch");
  const double* p = m.data.data() + col;
  for (std::size_t r = 0; r < m.rows; ++r) out[r] += p[r * m.cols];
}

void add_to_column(Matrix& m, std::size_t col, const Vector& v) {
  require(col < m.cols, "add_to_column: column out of range");
  require(v.size() == m.rows, "add_to_column: vector size mismatch");
  double* p = m.data.data() + col;
  for (std::size_t r = 0; r < m.rows; ++r) p[r * m.cols] += v[r];
}

void axpy(double a, const Vector& x, Vector& y) {
  require(x.size() == y.size(), "axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Vector softmax(const Vector& logits) {
  Vector out(logits.size());
  softmax_into(out, logits);
  return out;
}

void softmax_into(Vector& out, const Vector& logits) {
  require(!logits.empty(), "softmax: empty input");
  require(all_finite(logits), "softmax: non-finite input");
  out.resize(logits.size());
  double mx = logits[0];
  for (double x : logits)
    if (x > mx) mx = x;
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  const double inv = 1.0 / sum;
  for (double& x : out) x *= inv;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
  // Seed expansion per the xoshiro authors' recommendation.
  std::uint64_t s = seed;
  for (auto& w : state_) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    w = z ^ (z >> 31);
  }
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  require(lo <= hi, "uniform_int: lo > hi");
  const std::uint64_t span =
      static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
  const std::uint64_t reject_below = (0 - span) % span;     // 2^64 mod span
  std::uint64_t x;
  do {
    x = next();
  } while (x < reject_below);
  return lo + static_cast<std::int64_t>(x % span);
}

double Rng::uniform_real() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform_real(double lo, double hi) {
  return lo + (hi - lo) * uniform_real();
}

}  // namespace charlstm
