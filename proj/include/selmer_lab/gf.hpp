#pragma once

// Dense linear algebra over the prime field F_p.
//
// Subspaces are always held in reduced row echelon form with unit pivots, so
// two subspaces are equal exactly when their bases are equal element-wise.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "selmer_lab/error.hpp"

namespace selmer_lab {

using Residue = std::uint32_t;
using FpVector = std::vector<Residue>;

class FieldPrime {
 public:
  static constexpr std::uint32_t kMaxPrime = 65535;

  explicit FieldPrime(std::uint32_t p) : p_(p) {
    if (p < 3 || p > kMaxPrime || p % 2 == 0 || !is_prime(p)) {
      throw Error(ErrorCode::InvalidArgument,
                  "field characteristic must be an odd prime in [3, 65535], got " + std::to_string(p));
    }
  }

  std::uint32_t value() const noexcept { return p_; }

  Residue add(Residue a, Residue b) const noexcept {
    const Residue s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  Residue sub(Residue a, Residue b) const noexcept { return a >= b ? a - b : a + p_ - b; }
  Residue neg(Residue a) const noexcept { return a == 0 ? 0 : p_ - a; }
  Residue mul(Residue a, Residue b) const noexcept {
    return static_cast<Residue>((static_cast<std::uint64_t>(a) * b) % p_);
  }
  Residue pow(Residue a, std::uint64_t e) const noexcept {
    Residue r = 1;
    while (e != 0) {
      if (e & 1U) r = mul(r, a);
      a = mul(a, a);
      e >>= 1U;
    }
    return r;
  }
  // a must be nonzero.
  Residue inv(Residue a) const noexcept { return pow(a, p_ - 2); }

  Residue reduce(std::int64_t x) const noexcept {
    const auto p = static_cast<std::int64_t>(p_);
    const std::int64_t r = x % p;
    return static_cast<Residue>(r < 0 ? r + p : r);
  }

  friend bool operator==(const FieldPrime&, const FieldPrime&) = default;

  static constexpr bool is_prime(std::uint32_t n) noexcept {
    if (n < 2) return false;
    for (std::uint32_t d = 2; d * d <= n; ++d) {
      if (n % d == 0) return false;
    }
    return true;
  }

 private:
  std::uint32_t p_;
};

// ---------------------------------------------------------------------------
// vector helpers

inline bool is_zero(std::span<const Residue> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](Residue x) { return x == 0; });
}

inline FpVector unit_vector(std::size_t n, std::size_t i) {
  FpVector v(n, 0);
  v.at(i) = 1;
  return v;
}

// v += c * w
inline void add_scaled(const FieldPrime& f, FpVector& v, std::span<const Residue> w, Residue c) {
  if (c == 0) return;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (w[i] != 0) v[i] = f.add(v[i], f.mul(c, w[i]));
  }
}

inline FpVector scaled(const FieldPrime& f, std::span<const Residue> v, Residue c) {
  FpVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f.mul(c, v[i]);
  return out;
}

inline Residue dot(const FieldPrime& f, std::span<const Residue> a, std::span<const Residue> b) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<std::uint64_t>(a[i]) * b[i];
    // each product is < 2^32, so 256 of them fit in 64 bits
    if ((i & 0xFFU) == 0xFFU) acc %= f.value();
  }
  return static_cast<Residue>(acc % f.value());
}

namespace detail {

inline void check_rows(const FieldPrime& f, std::size_t n, std::span<const FpVector> rows) {
  for (const auto& r : rows) {
    if (r.size() != n) {
      throw Error(ErrorCode::LengthMismatch,
                  "row of length " + std::to_string(r.size()) + " in a matrix with " + std::to_string(n) +
                      " columns");
    }
    for (Residue x : r) {
      if (x >= f.value()) throw Error(ErrorCode::InvalidArgument, "coordinate out of range [0, p)");
    }
  }
}

// Gauss-Jordan elimination in place. Only the first `pivot_cols` columns are
// eligible as pivots. Returns the pivot column of each leading row; rows past
// the returned size are zero on the pivot columns.
inline std::vector<std::size_t> row_reduce(const FieldPrime& f, std::vector<FpVector>& rows,
                                           std::size_t pivot_cols) {
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < pivot_cols && rank < rows.size(); ++col) {
    std::size_t sel = rank;
    while (sel < rows.size() && rows[sel][col] == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[rank], rows[sel]);
    const Residue scale = f.inv(rows[rank][col]);
    for (auto& x : rows[rank]) x = f.mul(x, scale);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && rows[r][col] != 0) add_scaled(f, rows[r], rows[rank], f.neg(rows[r][col]));
    }
    pivots.push_back(col);
    ++rank;
  }
  return pivots;
}

}  // namespace detail

// ---------------------------------------------------------------------------

class FpSubspace {
 public:
  // The zero subspace of F_p^n.
  FpSubspace(FieldPrime field, std::size_t ambient_dim) : field_(field), n_(ambient_dim) {}

  static FpSubspace full(FieldPrime field, std::size_t n) {
    FpSubspace s(field, n);
    for (std::size_t i = 0; i < n; ++i) {
      s.basis_.push_back(unit_vector(n, i));
      s.pivots_.push_back(i);
    }
    return s;
  }

  // Row space of `rows` in canonical form.
  static FpSubspace span(FieldPrime field, std::size_t n, std::span<const FpVector> rows) {
    detail::check_rows(field, n, rows);
    std::vector<FpVector> work(rows.begin(), rows.end());
    auto pivots = detail::row_reduce(field, work, n);
    work.resize(pivots.size());
    FpSubspace s(field, n);
    s.basis_ = std::move(work);
    s.pivots_ = std::move(pivots);
    return s;
  }

  const FieldPrime& field() const noexcept { return field_; }
  std::size_t ambient_dim() const noexcept { return n_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  const std::vector<FpVector>& basis() const noexcept { return basis_; }
  const std::vector<std::size_t>& pivots() const noexcept { return pivots_; }
  bool is_zero() const noexcept { return basis_.empty(); }

  bool contains(std::span<const Residue> v) const {
    if (v.size() != n_) throw Error(ErrorCode::LengthMismatch, "vector length differs from ambient dimension");
    FpVector r(v.begin(), v.end());
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Residue c = r[pivots_[i]];
      if (c != 0) add_scaled(field_, r, basis_[i], field_.neg(c));
    }
    return selmer_lab::is_zero(r);
  }

  bool contains(const FpSubspace& other) const {
    check_compatible(other);
    return std::all_of(other.basis_.begin(), other.basis_.end(),
                       [&](const FpVector& v) { return contains(v); });
  }

  void check_compatible(const FpSubspace& other) const {
    if (other.n_ != n_ || !(other.field_ == field_)) {
      throw Error(ErrorCode::AmbientMismatch, "subspaces live in different ambient spaces");
    }
  }

  friend bool operator==(const FpSubspace& a, const FpSubspace& b) {
    return a.field_ == b.field_ && a.n_ == b.n_ && a.basis_ == b.basis_;
  }

 private:
  FieldPrime field_;
  std::size_t n_;
  std::vector<FpVector> basis_;
  std::vector<std::size_t> pivots_;
};

inline FpSubspace rref(const FieldPrime& f, std::size_t n, std::span<const FpVector> rows) {
  return FpSubspace::span(f, n, rows);
}

// Kernel of the map F_p^n -> F_p^k whose matrix has the given k rows.
inline FpSubspace kernel(const FieldPrime& f, std::size_t n, std::span<const FpVector> matrix) {
  detail::check_rows(f, n, matrix);
  std::vector<FpVector> work(matrix.begin(), matrix.end());
  const auto pivots = detail::row_reduce(f, work, n);
  std::vector<bool> is_pivot(n, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<FpVector> generators;
  for (std::size_t free_col = 0; free_col < n; ++free_col) {
    if (is_pivot[free_col]) continue;
    FpVector v(n, 0);
    v[free_col] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = f.neg(work[r][free_col]);
    generators.push_back(std::move(v));
  }
  return FpSubspace::span(f, n, generators);
}

// Annihilator under the standard dot product.
inline FpSubspace annihilator(const FpSubspace& s) { return kernel(s.field(), s.ambient_dim(), s.basis()); }

inline FpSubspace sum(const FpSubspace& a, const FpSubspace& b) {
  a.check_compatible(b);
  std::vector<FpVector> rows = a.basis();
  rows.insert(rows.end(), b.basis().begin(), b.basis().end());
  return FpSubspace::span(a.field(), a.ambient_dim(), rows);
}

// A ∩ B = (ann A + ann B)^ann.
inline FpSubspace intersect(const FpSubspace& a, const FpSubspace& b) {
  a.check_compatible(b);
  const FpSubspace ann = sum(annihilator(a), annihilator(b));
  return kernel(a.field(), a.ambient_dim(), ann.basis());
}

inline bool contains(const FpSubspace& a, std::span<const Residue> v) { return a.contains(v); }

inline FpVector apply(const FieldPrime& f, std::span<const FpVector> matrix, std::span<const Residue> x) {
  FpVector out;
  out.reserve(matrix.size());
  for (const auto& row : matrix) {
    if (row.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "matrix/vector size mismatch");
    out.push_back(dot(f, row, x));
  }
  return out;
}

// Some x with M x = b, or nullopt when the system is inconsistent.
inline std::optional<FpVector> solve(const FieldPrime& f, std::size_t n, std::span<const FpVector> matrix,
                                     std::span<const Residue> b) {
  detail::check_rows(f, n, matrix);
  if (b.size() != matrix.size()) throw Error(ErrorCode::LengthMismatch, "right-hand side has wrong length");
  std::vector<FpVector> aug;
  aug.reserve(matrix.size());
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    FpVector row = matrix[r];
    if (b[r] >= f.value()) throw Error(ErrorCode::InvalidArgument, "coordinate out of range [0, p)");
    row.push_back(b[r]);
    aug.push_back(std::move(row));
  }
  const auto pivots = detail::row_reduce(f, aug, n);
  for (std::size_t r = pivots.size(); r < aug.size(); ++r) {
    if (aug[r][n] != 0) return std::nullopt;
  }
  FpVector x(n, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug[r][n];
  return x;
}

}  // namespace selmer_lab
