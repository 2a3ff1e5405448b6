#pragma once

#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "ergostab/numeric.hpp"

namespace ergostab {

// Values past the budget abort the evaluation rather than the process.
struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(std::string what) : std::runtime_error(std::move(what)) {}
};

inline std::size_t default_digit_budget() {
  if (const char* env = std::getenv("ES_DIGIT_BUDGET")) {
    long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1'000'000;
}

// Nondecreasing integer function with K(n) >= n, over big integers.
struct GrowthFunction {
  std::string name;
  std::function<BigInt(const BigInt&)> fn;

  BigInt operator()(const BigInt& n) const { return fn(n); }
};

inline GrowthFunction growth_identity() {
  return {"n", [](const BigInt& n) { return n; }};
}

// K(n) = max(n, c*n + d).
inline GrowthFunction growth_affine(BigInt c, BigInt d) {
  std::string name = c.str() + "*n+" + d.str();
  return {std::move(name), [c = std::move(c), d = std::move(d)](const BigInt& n) {
            BigInt v = c * n + d;
            return v >= n ? v : n;
          }};
}

// K(n) = max(n, n^deg).
inline GrowthFunction growth_polynomial(unsigned deg) {
  return {"n^" + std::to_string(deg), [deg](const BigInt& n) {
            if (n < 0) return n;
            BigInt v = ipow(n, deg);
            return v >= n ? v : n;
          }};
}

// K(n) = 2^n; guarded so the result stays representable.
inline GrowthFunction growth_exponential(std::size_t max_exponent_bits = 1u << 27) {
  return {"2^n", [max_exponent_bits](const BigInt& n) -> BigInt {
            if (n < 0) return 1;
            if (n > BigInt(max_exponent_bits))
              throw BudgetExceeded("growth 2^n: exponent too large for the digit budget");
            return BigInt(1) << n.convert_to<std::size_t>();
          }};
}

// Repeated application K^count(start) under a decimal-digit budget.
struct IterationResult {
  BigInt value;          // final value, or last value reached
  BigInt iterations;     // applications performed
  bool complete = true;  // false when the budget stopped the iteration
};

inline IterationResult iterate_growth(const GrowthFunction& K, BigInt start, const BigInt& count,
                                      std::size_t digit_budget) {
  IterationResult r{std::move(start), 0, true};
  while (r.iterations < count) {
    BigInt next;
    try {
      next = K(r.value);
    } catch (const BudgetExceeded&) {
      r.complete = false;
      return r;
    }
    if (decimal_digits(next) > digit_budget) {
      r.complete = false;
      return r;
    }
    r.value = std::move(next);
    ++r.iterations;
  }
  return r;
}

}  // namespace ergostab
