#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace ergostab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exact conversion; every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite value");
  return Rational(x);
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline BigInt floor_to_int(const Rational& q) {
  BigInt n = numerator(q), d = denominator(q);
  BigInt r = n / d;
  if (r * d > n) --r;
  return r;
}

// Least integer >= q.
inline BigInt ceil_to_int(const Rational& q) {
  BigInt n = numerator(q), d = denominator(q);
  BigInt r = n / d;
  if (r * d < n) ++r;
  return r;
}

// Least nonnegative integer e with e*e >= q. Requires q >= 0.
inline BigInt ceil_sqrt(const Rational& q) {
  if (q < 0) throw std::invalid_argument("ceil_sqrt: negative argument");
  BigInt e = boost::multiprecision::sqrt(ceil_to_int(q));
  while (Rational(e * e) < q) ++e;
  while (e > 0 && Rational((e - 1) * (e - 1)) >= q) --e;
  return e;
}

inline BigInt ipow(const BigInt& base, unsigned exp) {
  return boost::multiprecision::pow(base, exp);
}

inline Rational rpow(const Rational& base, unsigned exp) {
  return Rational(ipow(numerator(base), exp), ipow(denominator(base), exp));
}

// Cheap upper estimate of the decimal digit count, for budget checks.
inline std::size_t decimal_digits(const BigInt& v) {
  if (v == 0) return 1;
  std::size_t bits = boost::multiprecision::msb(boost::multiprecision::abs(v)) + 1;
  return static_cast<std::size_t>(static_cast<double>(bits) * 0.30103) + 1;
}

// Exact decimal digit count, for report fields (one base conversion).
inline std::size_t decimal_digits_exact(const BigInt& v) {
  return BigInt(boost::multiprecision::abs(v)).str().size();
}

// Kahan compensated accumulator; keeps averaging error O(1) in the number of terms.
struct KahanAccumulator {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace ergostab
