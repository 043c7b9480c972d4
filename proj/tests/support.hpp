#pragma once

// Enumeration oracles for the tests. Everything here works on raw integer
// vectors and never calls into the row-reduction code.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Vec = std::vector<std::uint32_t>;
using Rows = std::vector<Vec>;

inline std::uint64_t power(std::uint64_t base, std::size_t e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

inline void for_each_vector(std::uint32_t p, std::size_t n, const std::function<void(const Vec&)>& fn) {
  Vec v(n, 0);
  const auto total = power(p, n);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rest = idx;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = static_cast<std::uint32_t>(rest % p);
      rest /= p;
    }
    fn(v);
  }
}

// Every F_p-linear combination of the rows.
inline std::set<Vec> span_set(std::uint32_t p, std::size_t n, const Rows& rows) {
  std::set<Vec> out;
  for_each_vector(p, rows.size(), [&](const Vec& coeffs) {
    Vec v(n, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint32_t>((v[i] + coeffs[r] * rows[r][i]) % p);
    }
    out.insert(v);
  });
  return out;
}

// log_p of a count that must be a power of p; returns -1 otherwise.
inline int log_p(std::uint64_t count, std::uint32_t p) {
  int d = 0;
  while (count > 1) {
    if (count % p != 0) return -1;
    count /= p;
    ++d;
  }
  return count == 1 ? d : -1;
}

inline std::uint32_t dot(std::uint32_t p, const Vec& a, const Vec& b) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::uint64_t{a[i]} * b[i];
  return static_cast<std::uint32_t>(acc % p);
}

// <au + bt, a'u + b't> = ab' + ba', summed over planes.
inline std::uint32_t pair(std::uint32_t p, const Vec& a, const Vec& b) {
  std::uint64_t acc = 0;
  for (std::size_t k = 0; 2 * k < a.size(); ++k) {
    acc += std::uint64_t{a[2 * k]} * b[2 * k + 1] + std::uint64_t{a[2 * k + 1]} * b[2 * k];
  }
  return static_cast<std::uint32_t>(acc % p);
}

inline Rows random_rows(std::mt19937_64& rng, std::uint32_t p, std::size_t k, std::size_t n) {
  std::uniform_int_distribution<std::uint32_t> d(0, p - 1);
  Rows out(k, Vec(n));
  for (auto& r : out) {
    for (auto& x : r) x = d(rng);
  }
  return out;
}

// Plane shapes: which of the u and t coordinates are nonzero.
enum class Local { Unramified, Transverse, Strict, Relaxed };

inline bool local_ok(const Vec& v, std::size_t plane, Local c) {
  const bool u = v[2 * plane] != 0;
  const bool t = v[2 * plane + 1] != 0;
  switch (c) {
    case Local::Unramified: return !t;
    case Local::Transverse: return !u;
    case Local::Strict: return !u && !t;
    case Local::Relaxed: return true;
  }
  return false;
}

// dim of {v in span(g) : v satisfies the profile}, by enumeration.
inline int selmer_dim(std::uint32_t p, const Rows& g, const std::vector<Local>& profile) {
  const std::size_t n = 2 * profile.size();
  std::uint64_t count = 0;
  for (const auto& v : span_set(p, n, g)) {
    bool ok = true;
    for (std::size_t k = 0; k < profile.size() && ok; ++k) ok = local_ok(v, k, profile[k]);
    count += ok ? 1 : 0;
  }
  return log_p(count, p);
}

// Transverse on the primes in `mask`, unramified elsewhere.
inline std::vector<Local> selmer_profile(std::size_t m, std::uint64_t mask) {
  std::vector<Local> out(m, Local::Unramified);
  for (std::size_t k = 0; k < m; ++k) {
    if ((mask >> k) & 1u) out[k] = Local::Transverse;
  }
  return out;
}

}  // namespace oracle
