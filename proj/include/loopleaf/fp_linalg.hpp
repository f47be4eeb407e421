#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace loopleaf {

/// Dense matrix over the prime field F_p, row-major.
class FpMatrix {
 public:
  FpMatrix(std::uint32_t p, std::size_t rows, std::size_t cols)
      : p_(p), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::uint32_t p() const { return p_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint32_t& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::uint32_t at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void add_to(std::size_t r, std::size_t c, std::uint64_t v) {
    auto& slot = at(r, c);
    slot = static_cast<std::uint32_t>((slot + v % p_) % p_);
  }

 private:
  std::uint32_t p_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint32_t> data_;
};

/// Solution set {particular + span(kernel)} of a linear system over F_p.
struct FpAffineSpace {
  std::vector<std::uint32_t> particular;
  std::vector<std::vector<std::uint32_t>> kernel;
};

namespace detail {

inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
  // Fermat; p is prime.
  std::uint64_t result = 1;
  std::uint64_t base = a % p;
  std::uint64_t e = p - 2;
  while (e > 0) {
    if (e & 1) result = result * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

}  // namespace detail

/// Solves A x = b over F_p. Free variables are set to zero in the particular
/// solution; returns nullopt when the system is inconsistent.
inline std::optional<FpAffineSpace> solve_fp(FpMatrix a, std::vector<std::uint32_t> b) {
  const std::uint32_t p = a.p();
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (b.size() != rows) throw std::invalid_argument("solve_fp: rhs length mismatch");

  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = rows;
    for (std::size_t i = r; i < rows; ++i) {
      if (a.at(i, c) != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot == rows) continue;
    if (pivot != r) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(a.at(r, j), a.at(pivot, j));
      std::swap(b[r], b[pivot]);
    }
    const std::uint64_t inv = detail::inv_mod(a.at(r, c), p);
    for (std::size_t j = c; j < cols; ++j) a.at(r, j) = static_cast<std::uint32_t>(a.at(r, j) * inv % p);
    b[r] = static_cast<std::uint32_t>(b[r] * inv % p);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a.at(i, c) == 0) continue;
      const std::uint64_t factor = a.at(i, c);
      for (std::size_t j = c; j < cols; ++j) {
        if (a.at(r, j) == 0) continue;
        a.at(i, j) = static_cast<std::uint32_t>((a.at(i, j) + (p - factor) * a.at(r, j)) % p);
      }
      b[i] = static_cast<std::uint32_t>((b[i] + (p - factor) * b[r]) % p);
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i) {
    if (b[i] != 0) return std::nullopt;
  }

  FpAffineSpace space;
  space.particular.assign(cols, 0);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t i = 0; i < pivot_col.size(); ++i) {
    space.particular[pivot_col[i]] = b[i];
    is_pivot[pivot_col[i]] = true;
  }
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<std::uint32_t> v(cols, 0);
    v[free] = 1;
    for (std::size_t i = 0; i < pivot_col.size(); ++i) {
      v[pivot_col[i]] = (p - a.at(i, free)) % p;
    }
    space.kernel.push_back(std::move(v));
  }
  return space;
}

}  // namespace loopleaf
