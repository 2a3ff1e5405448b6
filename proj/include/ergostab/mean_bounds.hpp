#pragma once

#include <limits>
#include <optional>
#include <string>
#include <stdexcept>
#include <vector>

#include "ergostab/growth.hpp"
#include "ergostab/hilbert.hpp"
#include "ergostab/projection.hpp"

namespace ergostab {

enum class OperatorMode { Isometry, Nonexpansive };

// d(eps)      = ceil(32 ||f||^4 / eps^4)
// d'(n)       = ceil(2 n^4 ||f||^4 / eps^4)
// d''(m)      = ceil(32 m^4 ||f||^4 / eps^4)
// d'''(m)     = ceil(2^9 m^4 ||f||^4 / eps^4)
// d^(m)       = d'''(m) * ceil(2^7 ||f||^2 / eps^2)
// Exact rational ceilings; inputs are dyadic (doubles), so no rounding occurs.
class DeviationBoundFns {
 public:
  DeviationBoundFns(double norm_f, double eps) {
    if (eps <= 0) throw std::invalid_argument("DeviationBoundFns: eps > 0");
    if (norm_f <= 0) throw std::invalid_argument("DeviationBoundFns: f must be nonzero");
    Rational nf = rational_from_double(norm_f);
    Rational e = rational_from_double(eps);
    ratio4_ = rpow(nf, 4) / rpow(e, 4);
    ratio2_ = rpow(nf, 2) / rpow(e, 2);
  }

  BigInt d() const { return ceil_to_int(32 * ratio4_); }
  BigInt d_prime(const BigInt& n) const { return ceil_to_int(2 * ipow(n, 4) * ratio4_); }
  BigInt d_double_prime(const BigInt& m) const { return ceil_to_int(32 * ipow(m, 4) * ratio4_); }
  BigInt d_triple_prime(const BigInt& m) const { return ceil_to_int(512 * ipow(m, 4) * ratio4_); }
  BigInt e_window() const { return ceil_to_int(128 * ratio2_); }
  BigInt d_hat(const BigInt& m) const { return d_triple_prime(m) * e_window(); }
  // d'''(m, eps/2) = ceil(2^13 m^4 ||f||^4 / eps^4), the i_k recursion increment.
  BigInt recursion_increment(const BigInt& m) const { return ceil_to_int(8192 * ipow(m, 4) * ratio4_); }

 private:
  Rational ratio4_;
  Rational ratio2_;
};

struct MeanBoundParams {
  BigInt rho;  // ceil(||f|| / eps)
  BigInt e;    // 2^9 rho^2
  OperatorMode mode = OperatorMode::Isometry;
};

inline MeanBoundParams mean_bound_params(double norm_f, double eps, OperatorMode mode) {
  if (eps <= 0) throw std::invalid_argument("mean_bound_params: eps > 0");
  if (norm_f <= 0) throw std::invalid_argument("mean_bound_params: f must be nonzero");
  BigInt rho = ceil_to_int(rational_from_double(norm_f) / rational_from_double(eps));
  if (rho < 1) rho = 1;
  return {rho, 512 * rho * rho, mode};
}

// Khat(i) = i + 2^13 rho^4 K((i+1) K(1) rho^2)   (isometry case)
inline GrowthFunction khat_isometry(const GrowthFunction& K, const BigInt& rho) {
  if (rho < 1) throw std::invalid_argument("khat_isometry: rho >= 1");
  BigInt rho2 = rho * rho, factor = 8192 * ipow(rho, 4);
  BigInt k1 = K(1);
  return {"Khat[" + K.name + "]", [K, rho2, factor, k1](const BigInt& i) {
            return i + factor * K((i + 1) * k1 * rho2);
          }};
}

// Kbar(i) = i + 2^13 rho^4 K((i+1) K(2 i rho) rho^2)   (nonexpansive case)
inline GrowthFunction kbar_nonexpansive(const GrowthFunction& K, const BigInt& rho) {
  if (rho < 1) throw std::invalid_argument("kbar_nonexpansive: rho >= 1");
  BigInt rho2 = rho * rho, factor = 8192 * ipow(rho, 4);
  return {"Kbar[" + K.name + "]", [K, rho2, factor, rho](const BigInt& i) {
            return i + factor * K((i + 1) * K(2 * i * rho) * rho2);
          }};
}

struct MetBoundResult {
  MeanBoundParams params;
  std::optional<BigInt> bound;  // Khat^e(1) / Kbar^e(1) when within budget
  BigInt iterations_done;
  std::size_t digits = 0;  // digits of the bound or of the last value reached
  BigInt last_value;
};

// Iterates the appropriate growth function e times from 1 in exact arithmetic.
inline MetBoundResult met_bound(double norm_f, double eps, const GrowthFunction& K,
                                OperatorMode mode, std::size_t digit_budget = default_digit_budget()) {
  MeanBoundParams p = mean_bound_params(norm_f, eps, mode);
  GrowthFunction lifted =
      mode == OperatorMode::Isometry ? khat_isometry(K, p.rho) : kbar_nonexpansive(K, p.rho);
  IterationResult it = iterate_growth(lifted, 1, p.e, digit_budget);
  MetBoundResult r;
  r.params = p;
  r.iterations_done = it.iterations;
  r.digits = decimal_digits_exact(it.value);
  r.last_value = it.value;
  if (it.complete) r.bound = it.value;
  return r;
}

struct StabilityWitness {
  bool found = false;
  std::size_t n = 0;
  std::size_t interval_end = 0;  // K(n)
  double max_deviation = 0.0;
  std::size_t argmax_m = 0;
  std::optional<BigInt> theoretical_bound;
  std::size_t best_n = 0;  // smallest max-deviation seen when not found
  double best_deviation = std::numeric_limits<double>::infinity();
};

// Least n <= horizon with max_{m in [n,K(n)]} ||A_m f - A_n f|| <= eps.
inline StabilityWitness find_stable_n(const Operator& T, const Element& f, double eps,
                                      const GrowthFunction& K, std::size_t horizon,
                                      std::size_t max_interval = 10'000'000) {
  if (horizon < 1) throw std::invalid_argument("find_stable_n: horizon >= 1");
  AveragesCache cache(T, f);
  StabilityWitness w;
  for (std::size_t n = 1; n <= horizon; ++n) {
    BigInt kn = K(BigInt(n));
    if (kn > BigInt(max_interval)) break;  // cache would not be materializable
    std::size_t end = kn.convert_to<std::size_t>();
    const Element an = cache.average(n);
    double dev = 0.0;
    std::size_t argmax = n;
    for (std::size_t m = n; m <= end; ++m) {
      double d = norm2(sub(cache.average(m), an));
      if (d > dev) {
        dev = d;
        argmax = m;
      }
    }
    if (dev < w.best_deviation) {
      w.best_deviation = dev;
      w.best_n = n;
    }
    if (dev <= eps) {
      w.found = true;
      w.n = n;
      w.interval_end = end;
      w.max_deviation = dev;
      w.argmax_m = argmax;
      return w;
    }
  }
  return w;
}

struct ScheduleStep {
  BigInt i_k;
  BigInt n_k;
  double norm_u = 0.0;    // ||u_{i_k}|| when the trace index was materializable
  bool materialized = false;
  bool witness = false;   // n_k verified stable on [n_k, M(n_k)]
  double deviation = 0.0;
};

struct ScheduleResult {
  std::vector<ScheduleStep> steps;
  bool capped = false;
  std::optional<std::size_t> witness_n;
};

// The recursion i_0 = 1, n_k = max(ceil(2||u_{i_k}||/eps), 1),
// i_{k+1} = i_k + ceil(2^13 M(n_k)^4 ||f||^4 / eps^4), materialized while
// i_k <= cap. Demonstration-scale: increments are >= 2^13.
inline ScheduleResult iterate_witness_schedule(const Operator& T, const Element& f,
                                                    double eps, const GrowthFunction& M,
                                                    std::size_t cap,
                                                    std::size_t max_interval = 1'000'000) {
  ScheduleResult out;
  double nf = norm2(f);
  if (nf == 0.0) throw std::invalid_argument("iterate_witness_schedule: f must be nonzero");
  DeviationBoundFns dfns(nf, eps);
  ProjectionTrace trace(T, f);
  AveragesCache cache(T, f);
  BigInt ik = 1;
  BigInt e = mean_bound_params(nf, eps, OperatorMode::Isometry).e;
  for (BigInt k = 0; k < e; ++k) {
    ScheduleStep step;
    step.i_k = ik;
    if (ik > BigInt(cap)) {
      out.capped = true;
      out.steps.push_back(std::move(step));
      break;
    }
    std::size_t idx = ik.convert_to<std::size_t>();
    step.materialized = true;
    step.norm_u = norm2(trace.at(idx).u);
    BigInt nk = ceil_to_int(2 * rational_from_double(step.norm_u) / rational_from_double(eps));
    if (nk < 1) nk = 1;
    step.n_k = nk;
    BigInt mn = M(nk);
    if (nk <= BigInt(max_interval) && mn <= BigInt(max_interval)) {
      std::size_t n = nk.convert_to<std::size_t>();
      std::size_t end = mn.convert_to<std::size_t>();
      const Element an = cache.average(n);
      double dev = 0.0;
      for (std::size_t m = n; m <= end; ++m)
        dev = std::max(dev, norm2(sub(cache.average(m), an)));
      step.deviation = dev;
      if (dev <= eps) {
        step.witness = true;
        if (!out.witness_n) out.witness_n = n;
      }
    }
    ik += dfns.recursion_increment(mn);
    out.steps.push_back(std::move(step));
    if (out.witness_n) break;
  }
  return out;
}

struct AsymptoticRow {
  std::string k_name;
  BigInt rho;
  BigInt param;                       // c for parametric families, else 0
  BigInt e;
  std::optional<std::size_t> digits;  // digits of the tower bound, when computable
  std::optional<BigInt> direct_affine_bound;  // 2*c*rho witness bound for K(x)=x+c
  bool budget_exceeded = false;
};

// Qualitative growth table: digits of the tower bound per (K, rho), plus the
// direct O(c) witness bound for the additive family K(x) = x + c, which comes
// from ||A_m f - A_n f|| <= 2(m-n)||f||/m <= 2c||f||/n for m in [n, n+c].
inline std::vector<AsymptoticRow> asymptotic_table(
    const std::vector<std::pair<GrowthFunction, BigInt>>& regimes,  // (K, c-param; c=0 if none)
    const std::vector<BigInt>& rho_range, OperatorMode mode,
    std::size_t digit_budget = 20'000) {
  std::vector<AsymptoticRow> rows;
  for (const auto& [K, c] : regimes) {
    for (const BigInt& rho : rho_range) {
      AsymptoticRow row;
      row.k_name = K.name;
      row.rho = rho;
      row.param = c;
      row.e = 512 * rho * rho;
      double rho_d = rho.convert_to<double>();
      MetBoundResult res = met_bound(rho_d, 1.0, K, mode, digit_budget);
      if (res.bound)
        row.digits = decimal_digits_exact(*res.bound);
      else
        row.budget_exceeded = true;
      if (c > 0 && K.name == growth_affine(1, c).name) row.direct_affine_bound = 2 * c * rho;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace ergostab
