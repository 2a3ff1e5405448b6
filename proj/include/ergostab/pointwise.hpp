#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "ergostab/growth.hpp"
#include "ergostab/hilbert.hpp"
#include "ergostab/numeric.hpp"

namespace ergostab {

// Exact per-atom trajectory arithmetic for Koopman systems. Coordinates are
// dyadic rationals (doubles), so partial sums and averages are exact.
class PointwiseEngine {
 public:
  PointwiseEngine(const Operator& T, const Element& f) : T_(&T), f_(&f) {
    if (!T.is_koopman())
      throw std::invalid_argument("pointwise semantics require a Koopman operator");
    std::size_t n = f.dim();
    values_.resize(n);
    prefix_.resize(n);
    pos_.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
      pos_[x] = x;
      prefix_[x].push_back(Rational(0));
    }
  }

  // Prefix sum S_i(x) = sum_{j<i} f(tau^j x); extends lazily.
  const Rational& prefix(std::size_t x, std::size_t i) {
    while (prefix_[x].size() <= i) {
      std::size_t p = pos_[x];
      prefix_[x].push_back(prefix_[x].back() + rational_from_double(f_->coords[p]));
      pos_[x] = T_->atom_map()[p];
    }
    return prefix_[x][i];
  }

  // A_m f(x) as an exact rational, m >= 1.
  Rational average(std::size_t x, std::size_t m) {
    return prefix(x, m) / Rational(m);
  }

  std::size_t atoms() const { return f_->dim(); }
  const MeasureSpace& space() const { return *f_->space; }
  Rational value(std::size_t x) const { return rational_from_double(f_->coords[x]); }

 private:
  const Operator* T_;
  const Element* f_;
  std::vector<std::vector<Rational>> values_;
  std::vector<std::vector<Rational>> prefix_;
  std::vector<std::size_t> pos_;
};

struct MaximalCheck {
  std::vector<std::size_t> set;  // atoms with max_{i<=n} S_i f(x) > 0
  Rational integral;             // exact integral of f over that set
};

// A = { x : max_{i<=n} sum_{j<i} T^j f(x) > 0 },  int_A f dmu >= 0.
inline MaximalCheck maximal_theorem_check(const Operator& T, const Element& f, std::size_t n) {
  if (n < 1) throw std::invalid_argument("maximal_theorem_check: n >= 1");
  PointwiseEngine eng(T, f);
  MaximalCheck out;
  out.integral = 0;
  for (std::size_t x = 0; x < eng.atoms(); ++x) {
    bool in_set = false;
    for (std::size_t i = 1; i <= n && !in_set; ++i)
      if (eng.prefix(x, i) > 0) in_set = true;
    if (in_set) {
      out.set.push_back(x);
      out.integral += eng.space().weight(x) * eng.value(x);
    }
  }
  return out;
}

// mu({ x : max_{1<=i<=n} |A_i f(x)| > lambda }), exact; always <= ||f||_1/lambda.
inline Rational maximal_set_measure(const Operator& T, const Element& f, std::size_t n,
                                    const Rational& lambda) {
  if (lambda <= 0) throw std::invalid_argument("maximal_set_measure: lambda > 0");
  if (n < 1) throw std::invalid_argument("maximal_set_measure: n >= 1");
  PointwiseEngine eng(T, f);
  Rational measure = 0;
  for (std::size_t x = 0; x < eng.atoms(); ++x) {
    for (std::size_t i = 1; i <= n; ++i) {
      if (abs(eng.average(x, i)) > lambda) {
        measure += eng.space().weight(x);
        break;
      }
    }
  }
  return measure;
}

// mu({ |f| >= lambda }) <= ||f||_2^2 / lambda^2; exact measure of the set.
inline Rational chebyshev_measure(const Element& f, const Rational& lambda) {
  if (lambda <= 0) throw std::invalid_argument("chebyshev_measure: lambda > 0");
  Rational measure = 0;
  for (std::size_t x = 0; x < f.dim(); ++x)
    if (abs(rational_from_double(f.coords[x])) >= lambda) measure += f.space->weight(x);
  return measure;
}

// u = u' + u'' with ||u'||_inf <= L and ||u''||_1 <= ||u||_2^2 / L.
inline std::pair<Element, Element> split_function(const Element& u, double L) {
  if (L <= 0) throw std::invalid_argument("split_function: L > 0");
  std::vector<double> lo(u.dim()), hi(u.dim());
  for (std::size_t x = 0; x < u.dim(); ++x) {
    if (std::abs(u.coords[x]) <= L) {
      lo[x] = u.coords[x];
      hi[x] = 0.0;
    } else {
      lo[x] = 0.0;
      hi[x] = u.coords[x];
    }
  }
  return {Element(u.space, std::move(lo)), Element(u.space, std::move(hi))};
}

struct PointwiseParams {
  BigInt rho;  // ceil(||f||_2 / (lambda1 sqrt(lambda2)))
  BigInt e;    // ceil(2^7 ||f||_2^2 / (lambda1 sqrt(lambda2)))
};

// ceil(c / sqrt(lambda2)) for rational c >= 0, exactly: the least integer r
// with r^2 lambda2 >= c^2.
inline BigInt ceil_div_sqrt(const Rational& c, const Rational& lambda2) {
  if (c < 0 || lambda2 <= 0) throw std::invalid_argument("ceil_div_sqrt: bad arguments");
  return ceil_sqrt(c * c / lambda2);
}

inline PointwiseParams pointwise_params(double norm_f2, double lambda1, double lambda2) {
  if (lambda1 <= 0 || lambda2 <= 0)
    throw std::invalid_argument("pointwise_params: lambda1, lambda2 > 0");
  if (norm_f2 <= 0) throw std::invalid_argument("pointwise_params: f must be nonzero");
  Rational nf = rational_from_double(norm_f2);
  Rational l1 = rational_from_double(lambda1);
  Rational l2 = rational_from_double(lambda2);
  PointwiseParams p;
  p.rho = ceil_div_sqrt(nf / l1, l2);
  if (p.rho < 1) p.rho = 1;
  p.e = ceil_div_sqrt(128 * nf * nf / l1, l2);
  if (p.e < 1) p.e = 1;
  return p;
}

// Khat(i) = i + 2^34 rho^6 K(2^12 K(1)^3 i^2 rho^4).
inline GrowthFunction khat_pointwise(const GrowthFunction& K, const BigInt& rho) {
  if (rho < 1) throw std::invalid_argument("khat_pointwise: rho >= 1");
  BigInt factor = (BigInt(1) << 34) * ipow(rho, 6);
  BigInt inner_c = 4096 * ipow(K(1), 3) * ipow(rho, 4);
  return {"Khat_pw[" + K.name + "]", [K, factor, inner_c](const BigInt& i) {
            return i + factor * K(inner_c * i * i);
          }};
}

struct PetBoundResult {
  PointwiseParams params;
  std::optional<BigInt> bound;
  BigInt iterations_done;
  std::size_t digits = 0;
  BigInt last_value;
};

inline PetBoundResult pet_bound(double norm_f2, double lambda1, double lambda2,
                                const GrowthFunction& K,
                                std::size_t digit_budget = default_digit_budget()) {
  PetBoundResult r;
  r.params = pointwise_params(norm_f2, lambda1, lambda2);
  GrowthFunction lifted = khat_pointwise(K, r.params.rho);
  IterationResult it = iterate_growth(lifted, 1, r.params.e, digit_budget);
  r.iterations_done = it.iterations;
  r.digits = decimal_digits_exact(it.value);
  r.last_value = it.value;
  if (it.complete) r.bound = it.value;
  return r;
}

struct DeviationReport {
  bool found = false;
  std::size_t n = 0;
  std::size_t interval_end = 0;  // K(n)
  Rational exceptional_measure;  // mu{ max_{n<=m<=K(n)} |A_m f - A_n f| > lambda1 }
  Rational threshold;            // lambda1
  std::size_t best_n = 0;
  Rational best_measure;
};

inline Rational exceptional_measure(PointwiseEngine& eng, std::size_t n, std::size_t end,
                                    const Rational& lambda1) {
  Rational measure = 0;
  for (std::size_t x = 0; x < eng.atoms(); ++x) {
    Rational an = eng.average(x, n);
    for (std::size_t m = n; m <= end; ++m) {
      if (abs(eng.average(x, m) - an) > lambda1) {
        measure += eng.space().weight(x);
        break;
      }
    }
  }
  return measure;
}

// Least n <= horizon with exact exceptional-set measure <= lambda2.
inline DeviationReport find_pointwise_stable_n(const Operator& T, const Element& f, double lambda1,
                                               double lambda2, const GrowthFunction& K,
                                               std::size_t horizon,
                                               std::size_t max_interval = 1'000'000) {
  if (horizon < 1) throw std::invalid_argument("find_pointwise_stable_n: horizon >= 1");
  PointwiseEngine eng(T, f);
  Rational l1 = rational_from_double(lambda1);
  Rational l2 = rational_from_double(lambda2);
  DeviationReport rep;
  rep.threshold = l1;
  rep.best_measure = 2;  // above any probability
  for (std::size_t n = 1; n <= horizon; ++n) {
    BigInt kn = K(BigInt(n));
    if (kn > BigInt(max_interval)) break;
    std::size_t end = kn.convert_to<std::size_t>();
    Rational measure = exceptional_measure(eng, n, end, l1);
    if (measure < rep.best_measure) {
      rep.best_measure = measure;
      rep.best_n = n;
    }
    if (measure <= l2) {
      rep.found = true;
      rep.n = n;
      rep.interval_end = end;
      rep.exceptional_measure = measure;
      return rep;
    }
  }
  return rep;
}

struct PointwiseScheduleStep {
  BigInt i_k;
  BigInt n_k;
  bool clamped = false;  // formula gave n_k = 0, clamped to 1
  bool witness = false;
  Rational measure;
};

struct PointwiseScheduleResult {
  std::vector<PointwiseScheduleStep> steps;
  bool capped = false;
  std::optional<std::size_t> witness_n;
};

// i_0 = 0; n_k = ceil(2^12 K(1)^3 i_k^2 ||f||_2^4 / (lambda1^4 lambda2^2));
// i_{k+1} = i_k + 2^34 K(n_k)^7 ceil(||f||_2/(lambda1 sqrt(lambda2)))^6.
// n_k is clamped to >= 1 (the formula yields 0 at i_0 = 0); steps flag it.
inline PointwiseScheduleResult iterate_pointwise_schedule(const Operator& T, const Element& f, double lambda1,
                                               double lambda2, const GrowthFunction& K,
                                               std::size_t cap,
                                               std::size_t max_interval = 100'000) {
  PointwiseScheduleResult out;
  PointwiseEngine eng(T, f);
  double nf = norm2(f);
  PointwiseParams params = pointwise_params(nf, lambda1, lambda2);
  Rational l1 = rational_from_double(lambda1);
  Rational l2 = rational_from_double(lambda2);
  Rational nf4 = rpow(rational_from_double(nf), 4);
  Rational coeff = 4096 * Rational(ipow(K(1), 3)) * nf4 / (rpow(l1, 4) * rpow(l2, 2));
  BigInt rho6 = ipow(params.rho, 6);
  BigInt ik = 0;
  for (BigInt k = 0; k < params.e; ++k) {
    PointwiseScheduleStep step;
    step.i_k = ik;
    if (ik > BigInt(cap)) {
      out.capped = true;
      out.steps.push_back(std::move(step));
      break;
    }
    BigInt nk = ceil_to_int(coeff * Rational(ik * ik));
    if (nk < 1) {
      nk = 1;
      step.clamped = true;
    }
    step.n_k = nk;
    BigInt kn = K(nk);
    if (nk <= BigInt(max_interval) && kn <= BigInt(max_interval)) {
      std::size_t n = nk.convert_to<std::size_t>();
      std::size_t end = kn.convert_to<std::size_t>();
      step.measure = exceptional_measure(eng, n, end, l1);
      if (step.measure <= l2) {
        step.witness = true;
        if (!out.witness_n) out.witness_n = n;
      }
    }
    ik += (BigInt(1) << 34) * ipow(kn, 7) * rho6;
    out.steps.push_back(std::move(step));
    if (out.witness_n) break;
  }
  return out;
}

}  // namespace ergostab
