#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergostab/growth.hpp"
#include "ergostab/hilbert.hpp"
#include "ergostab/numeric.hpp"
#include "ergostab/pointwise.hpp"

namespace ergostab {

// Greedy two-state scan: number of times the series passes from below alpha
// to above beta (strict comparisons). This equals the maximum k such that
// indices m_1 < n_1 <= ... exist with s[m_j] < alpha and s[n_j] > beta.
template <typename Series, typename Value>
std::size_t count_upcrossings(const Series& s, const Value& alpha, const Value& beta) {
  if (!(alpha < beta)) throw std::invalid_argument("count_upcrossings: need alpha < beta");
  std::size_t count = 0;
  bool below = false;
  for (const auto& v : s) {
    if (!below) {
      if (v < alpha) below = true;
    } else if (v > beta) {
      below = false;
      ++count;
    }
  }
  return count;
}

template <typename Series, typename Value>
std::size_t count_downcrossings(const Series& s, const Value& alpha, const Value& beta) {
  if (!(alpha < beta)) throw std::invalid_argument("count_downcrossings: need alpha < beta");
  std::size_t count = 0;
  bool above = false;
  for (const auto& v : s) {
    if (!above) {
      if (v > beta) above = true;
    } else if (v < alpha) {
      above = false;
      ++count;
    }
  }
  return count;
}

struct FluctuationResult {
  std::size_t count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> witnesses;  // (m_j, n_j), 0-based
};

// Greedy earliest-n count of gamma-fluctuations: pairs m_1 < n_1 <= m_2 < n_2 <= ...
// with |s[n_j] - s[m_j]| > gamma. The greedy scan is maximal.
template <typename Series, typename Value>
FluctuationResult count_fluctuations(const Series& s, const Value& gamma) {
  if (!(gamma > Value(0))) throw std::invalid_argument("count_fluctuations: gamma > 0");
  FluctuationResult out;
  std::size_t n = s.size();
  if (n == 0) return out;
  // Window starts at the end of the previous pair. Track the running min and
  // max inside the window; the first index whose value deviates by more than
  // gamma from either extremum closes a pair with that extremum's index.
  std::size_t start = 0;
  std::size_t imin = 0, imax = 0;
  for (std::size_t j = start + 1; j < n; ++j) {
    if (s[j] < s[imin]) imin = j;
    if (s[j] > s[imax]) imax = j;
    std::size_t anchor = n;
    if (s[j] - s[imin] > gamma && imin < j) anchor = imin;
    if (s[imax] - s[j] > gamma && imax < j && (anchor == n || imax < anchor)) anchor = imax;
    if (anchor < j) {
      out.witnesses.emplace_back(anchor, j);
      ++out.count;
      imin = imax = j;
    }
  }
  return out;
}

struct BishopCheck {
  Rational lhs;  // integral of upcrossing counts
  Rational rhs;  // ||max(f - alpha, 0)||_1 / (beta - alpha)
  bool holds = false;
  std::vector<std::size_t> counts;  // per atom
};

// int omega(f, alpha, beta, N)(x) dmu <= || (f - alpha)^+ ||_1 / (beta - alpha),
// where omega counts upcrossings of the average sequence A_1 f(x), ..., A_N f(x).
inline BishopCheck bishop_check(const Operator& T, const Element& f, const Rational& alpha,
                                const Rational& beta, std::size_t N) {
  if (!(alpha < beta)) throw std::invalid_argument("bishop_check: alpha < beta");
  if (N < 1) throw std::invalid_argument("bishop_check: N >= 1");
  PointwiseEngine eng(T, f);
  BishopCheck out;
  out.lhs = 0;
  out.rhs = 0;
  for (std::size_t x = 0; x < eng.atoms(); ++x) {
    std::vector<Rational> avgs;
    avgs.reserve(N);
    for (std::size_t i = 1; i <= N; ++i) avgs.push_back(eng.average(x, i));
    std::size_t c = count_upcrossings(avgs, alpha, beta);
    out.counts.push_back(c);
    out.lhs += Rational(c) * eng.space().weight(x);
    Rational pos = eng.value(x) - alpha;
    if (pos > 0) out.rhs += pos * eng.space().weight(x);
  }
  out.rhs /= (beta - alpha);
  out.holds = (out.lhs <= out.rhs);
  return out;
}

struct IvanovCheck {
  Rational measure;  // mu{ x : omega(x) >= k }
  Rational bound;    // (alpha/beta)^k
  bool holds = false;
};

// For f >= 0 and 0 < alpha < beta:
// mu{ x : the average sequence makes >= k upcrossings of (alpha, beta) } <= (alpha/beta)^k.
inline IvanovCheck ivanov_check(const Operator& T, const Element& f, const Rational& alpha,
                                const Rational& beta, std::size_t k, std::size_t N) {
  if (!(Rational(0) < alpha && alpha < beta))
    throw std::invalid_argument("ivanov_check: 0 < alpha < beta");
  if (k < 1 || N < 1) throw std::invalid_argument("ivanov_check: k, N >= 1");
  for (double v : f.coords)
    if (v < 0.0) throw std::invalid_argument("ivanov_check: f must be nonnegative");
  PointwiseEngine eng(T, f);
  IvanovCheck out;
  out.measure = 0;
  for (std::size_t x = 0; x < eng.atoms(); ++x) {
    std::vector<Rational> avgs;
    avgs.reserve(N);
    for (std::size_t i = 1; i <= N; ++i) avgs.push_back(eng.average(x, i));
    if (count_upcrossings(avgs, alpha, beta) >= k) out.measure += eng.space().weight(x);
  }
  out.bound = rpow(alpha / beta, k);
  out.holds = (out.measure <= out.bound);
  return out;
}

struct BishopPetResult {
  BigInt e;  // ceil(16 ||f||_inf^2 / (lambda1^2 lambda2))
  std::optional<BigInt> bound;  // K^e(1)
  BigInt iterations_done;
  std::size_t digits = 0;
  BigInt last_value;
};

// Bound for bounded functions via upcrossing counting: e = ceil(2^4 ||f||_inf^2
// / (lambda1^2 lambda2)) iterations of K starting at 1.
inline BishopPetResult bishop_pet_bound(double norm_f_inf, double lambda1, double lambda2,
                                        const GrowthFunction& K,
                                        std::size_t digit_budget = default_digit_budget()) {
  if (norm_f_inf <= 0 || lambda1 <= 0 || lambda2 <= 0)
    throw std::invalid_argument("bishop_pet_bound: positive arguments required");
  Rational nf = rational_from_double(norm_f_inf);
  Rational l1 = rational_from_double(lambda1);
  Rational l2 = rational_from_double(lambda2);
  BishopPetResult r;
  r.e = ceil_to_int(16 * nf * nf / (l1 * l1 * l2));
  if (r.e < 1) r.e = 1;
  IterationResult it = iterate_growth(K, 1, r.e, digit_budget);
  r.iterations_done = it.iterations;
  r.digits = decimal_digits_exact(it.value);
  r.last_value = it.value;
  if (it.complete) r.bound = it.value;
  return r;
}

struct KachurovskiiBound {
  Rational ratio;  // ||f||_inf / eps
  BigInt bound;    // ceil(C ratio^4 (1 + ln ratio)), C = 1
};

// Number of eps-fluctuations of the ergodic averages of a bounded function is
// O((||f||_inf/eps)^4 (1 + ln(||f||_inf/eps))).
inline KachurovskiiBound kachurovskii_bound(double norm_f_inf, double eps) {
  if (norm_f_inf <= 0 || eps <= 0)
    throw std::invalid_argument("kachurovskii_bound: positive arguments required");
  KachurovskiiBound out;
  out.ratio = rational_from_double(norm_f_inf) / rational_from_double(eps);
  double rd = to_double(out.ratio);
  double lg = rd > 1.0 ? std::log(rd) : 0.0;
  Rational val = rpow(out.ratio, 4) * rational_from_double(1.0 + lg);
  out.bound = ceil_to_int(val);
  if (out.bound < 1) out.bound = 1;
  return out;
}

struct CompareBounds {
  std::string mode;  // "lambda" or "eps"
  BigInt first_e;
  BigInt second_e;
  Rational ratio;  // first_e / second_e
};

// lambda mode: iteration count of the mean-metastability route (2^7 ||f||^2 /
// (lambda1 sqrt(lambda2)) vs the upcrossing route (2^4 ||f||_inf^2 /
// (lambda1^2 lambda2)) for the same thresholds.
inline CompareBounds compare_bounds_lambda(double norm_f2, double norm_f_inf, double lambda1,
                                           double lambda2) {
  CompareBounds out;
  out.mode = "lambda";
  out.first_e = pointwise_params(norm_f2, lambda1, lambda2).e;
  Rational nf = rational_from_double(norm_f_inf);
  Rational l1 = rational_from_double(lambda1);
  Rational l2 = rational_from_double(lambda2);
  out.second_e = ceil_to_int(16 * nf * nf / (l1 * l1 * l2));
  if (out.second_e < 1) out.second_e = 1;
  out.ratio = Rational(out.first_e) / Rational(out.second_e);
  return out;
}

}  // namespace ergostab
