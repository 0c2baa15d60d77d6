#pragma once

#include <cstdint>
#include <numeric>

namespace pirhdy {

/// Exact non-negative-denominator rational, used for score time in whole-note units.
struct Rational {
  int64_t num{0};
  int64_t den{1};

  constexpr Rational() = default;
  constexpr Rational(int64_t n) : num(n), den(1) {}
  Rational(int64_t n, int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  double toDouble() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a.num * b.den <= b.num * a.den;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }
};

/// Nearest multiple of 1/32 (ties round up). Input and result are in whole-note units.
inline Rational snapToGrid32(const Rational& t) {
  // floor(t*32 + 1/2) / 32
  const int64_t n = t.num * 32 * 2 + t.den;
  const int64_t d = t.den * 2;
  int64_t q = n / d;
  if (n < 0 && q * d != n) --q;  // floor for negatives
  return Rational(q, 32);
}

}  // namespace pirhdy
