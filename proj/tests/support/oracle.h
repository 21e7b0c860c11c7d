#pragma once

// Test-side reference arithmetic. Deliberately independent of coop::Exact:
// a small normalized fraction over __int128, and the scoring formulas written
// out directly from their definitions.

#include "coop/exact.h"

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using i128 = __int128;

inline i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  if (neg) v = -v;
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return neg ? "-" + s : s;
}

struct Frac {
  i128 n = 0;
  i128 d = 1;

  Frac() = default;
  Frac(long long v) : n(v), d(1) {}
  Frac(i128 num, i128 den) : n(num), d(den) {
    if (d == 0) throw std::domain_error("zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const i128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
  }

  friend Frac operator+(Frac a, Frac b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
  friend Frac operator-(Frac a, Frac b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
  friend Frac operator*(Frac a, Frac b) { return {a.n * b.n, a.d * b.d}; }
  friend Frac operator/(Frac a, Frac b) { return {a.n * b.d, a.d * b.n}; }
  friend bool operator==(Frac a, Frac b) { return a.n == b.n && a.d == b.d; }
  friend bool operator<(Frac a, Frac b) { return a.n * b.d < b.n * a.d; }

  coop::Exact exact() const { return coop::parse_ratio_string(to_string(n) + "/" + to_string(d)); }
  std::string str() const { return to_string(n) + "/" + to_string(d); }
};

inline Frac tenths(long long k) {
  return Frac(k, 10);
}

inline Frac clamp0(Frac v) {
  return v < Frac(0) ? Frac(0) : v;
}

// MS = l (b (1 + q/50) - p), times ten with at least one external module,
// zero on failure.
inline Frac milestone(bool success, Frac b, Frac l, Frac q, Frac p, long long external_modules) {
  if (!success) return Frac(0);
  Frac ms = l * (b * (Frac(1) + q / Frac(50)) - p);
  return external_modules > 0 ? Frac(10) * ms : ms;
}

struct MilestoneTerms {
  Frac ms;
  std::vector<Frac> rates;  // r_k of the counted modules
};

// S_task = T * sum_n (1 - sum_k r_k / M_n) max(0, MS_n)
inline Frac task(Frac t, const std::vector<MilestoneTerms>& milestones) {
  Frac total(0);
  for (const auto& m : milestones) {
    Frac retention(1);
    if (!m.rates.empty()) {
      Frac sum(0);
      for (auto r : m.rates) sum = sum + r;
      retention = Frac(1) - sum / Frac(static_cast<long long>(m.rates.size()));
    }
    total = total + retention * clamp0(m.ms);
  }
  return t * total;
}

// Royalty from one module to one developer: (1/M)(r/T_k) max(0, MS).
inline Frac royalty(Frac ms, long long m_n, Frac r, long long t_k) {
  return Frac(1) / Frac(m_n) * (r / Frac(t_k)) * clamp0(ms);
}

// Hand-rolled generator over mt19937_64.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  long long range(long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng_);
  }
  bool coin() { return range(0, 1) == 1; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<long long>(v.size()) - 1))];
  }
  // q in [0, 10] with one decimal place.
  Frac q() { return tenths(range(0, 100)); }
  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
