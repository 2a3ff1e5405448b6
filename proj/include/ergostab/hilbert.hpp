#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ergostab/numeric.hpp"

namespace ergostab {

// Finite measure space: a list of positive atom weights summing to one.
class MeasureSpace {
 public:
  explicit MeasureSpace(std::vector<Rational> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("MeasureSpace: no atoms");
    Rational sum = 0;
    for (const auto& w : weights_) {
      if (w <= 0) throw std::invalid_argument("MeasureSpace: weights must be positive");
      sum += w;
    }
    if (sum != 1) {
      double err = std::abs(to_double(sum - Rational(1)));
      if (err > 1e-12) throw std::invalid_argument("MeasureSpace: weights must sum to 1");
    }
    weights_d_.reserve(weights_.size());
    for (const auto& w : weights_) weights_d_.push_back(to_double(w));
  }

  static std::shared_ptr<const MeasureSpace> uniform(std::size_t atoms) {
    std::vector<Rational> w(atoms, Rational(1, static_cast<unsigned long>(atoms)));
    return std::make_shared<const MeasureSpace>(std::move(w));
  }

  std::size_t atoms() const { return weights_.size(); }
  const std::vector<Rational>& weights() const { return weights_; }
  const Rational& weight(std::size_t i) const { return weights_[i]; }
  double weight_d(std::size_t i) const { return weights_d_[i]; }

 private:
  std::vector<Rational> weights_;
  std::vector<double> weights_d_;
};

using SpacePtr = std::shared_ptr<const MeasureSpace>;

// A vector in the weighted space: one real coordinate per atom.
struct Element {
  SpacePtr space;
  std::vector<double> coords;

  Element() = default;
  Element(SpacePtr s, std::vector<double> c) : space(std::move(s)), coords(std::move(c)) {
    if (!space || coords.size() != space->atoms())
      throw std::invalid_argument("Element: coordinate count does not match atom count");
    for (double x : coords)
      if (!std::isfinite(x)) throw std::invalid_argument("Element: non-finite coordinate");
  }

  std::size_t dim() const { return coords.size(); }
};

inline void check_same_space(const Element& f, const Element& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("dimension mismatch");
}

// Weighted inner product <f,g> = sum_i w_i f_i g_i.
inline double inner(const Element& f, const Element& g) {
  check_same_space(f, g);
  KahanAccumulator acc;
  for (std::size_t i = 0; i < f.dim(); ++i) acc.add(f.space->weight_d(i) * f.coords[i] * g.coords[i]);
  return acc.sum;
}

inline double norm2(const Element& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

inline double norm1(const Element& f) {
  KahanAccumulator acc;
  for (std::size_t i = 0; i < f.dim(); ++i) acc.add(f.space->weight_d(i) * std::abs(f.coords[i]));
  return acc.sum;
}

inline double norm_inf(const Element& f) {
  double m = 0.0;
  for (double x : f.coords) m = std::max(m, std::abs(x));
  return m;
}

inline Element add(const Element& f, const Element& g) {
  check_same_space(f, g);
  std::vector<double> c(f.dim());
  for (std::size_t i = 0; i < f.dim(); ++i) c[i] = f.coords[i] + g.coords[i];
  return Element(f.space, std::move(c));
}

inline Element sub(const Element& f, const Element& g) {
  check_same_space(f, g);
  std::vector<double> c(f.dim());
  for (std::size_t i = 0; i < f.dim(); ++i) c[i] = f.coords[i] - g.coords[i];
  return Element(f.space, std::move(c));
}

inline Element scale(const Element& f, double s) {
  std::vector<double> c(f.dim());
  for (std::size_t i = 0; i < f.dim(); ++i) c[i] = s * f.coords[i];
  return Element(f.space, std::move(c));
}

inline Element zero_like(const Element& f) {
  return Element(f.space, std::vector<double>(f.dim(), 0.0));
}

enum class OperatorClass { Nonexpansive, Isometry };

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
};

// A nonexpansive linear map: dense matrix or Koopman composition operator
// (Tf)(x) = f(tau(x)) for a weight-preserving atom map tau.
class Operator {
 public:
  struct Dense {
    std::size_t dim;
    std::vector<double> entries;  // row-major
  };
  struct Koopman {
    std::vector<std::size_t> map;  // (Tf)[k] = f[map[k]]
  };

  static Operator dense(SpacePtr space, std::vector<double> entries,
                        OperatorClass cls = OperatorClass::Nonexpansive) {
    std::size_t n = space->atoms();
    if (entries.size() != n * n) throw std::invalid_argument("Operator: entries must be dim x dim");
    Operator op(std::move(space), Dense{n, std::move(entries)}, cls);
    op.validate();
    return op;
  }

  static Operator koopman(SpacePtr space, std::vector<std::size_t> map) {
    if (map.size() != space->atoms()) throw std::invalid_argument("Operator: map size mismatch");
    for (std::size_t t : map)
      if (t >= space->atoms()) throw std::invalid_argument("Operator: map target out of range");
    Operator op(std::move(space), Koopman{std::move(map)}, OperatorClass::Isometry);
    op.validate();
    return op;
  }

  const SpacePtr& space() const { return space_; }
  OperatorClass claimed_class() const { return class_; }
  bool is_koopman() const { return std::holds_alternative<Koopman>(rep_); }
  bool is_dense() const { return std::holds_alternative<Dense>(rep_); }

  const std::vector<std::size_t>& atom_map() const {
    return std::get<Koopman>(rep_).map;
  }
  const std::vector<double>& matrix() const { return std::get<Dense>(rep_).entries; }

  Element apply(const Element& f) const {
    if (f.dim() != space_->atoms()) throw std::invalid_argument("apply: dimension mismatch");
    std::vector<double> out(f.dim());
    if (const auto* k = std::get_if<Koopman>(&rep_)) {
      for (std::size_t i = 0; i < f.dim(); ++i) out[i] = f.coords[k->map[i]];
    } else {
      const auto& d = std::get<Dense>(rep_);
      for (std::size_t i = 0; i < d.dim; ++i) {
        KahanAccumulator acc;
        for (std::size_t j = 0; j < d.dim; ++j) acc.add(d.entries[i * d.dim + j] * f.coords[j]);
        out[i] = acc.sum;
      }
    }
    return Element(f.space, std::move(out));
  }

 private:
  Operator(SpacePtr s, std::variant<Dense, Koopman> r, OperatorClass c)
      : space_(std::move(s)), rep_(std::move(r)), class_(c) {}

  void validate() const {
    if (const auto* k = std::get_if<Koopman>(&rep_)) {
      // Weight preservation, exactly: sum of weights over each preimage
      // equals the atom's weight.
      std::vector<Rational> pre(space_->atoms(), Rational(0));
      for (std::size_t i = 0; i < k->map.size(); ++i) pre[k->map[i]] += space_->weight(i);
      for (std::size_t j = 0; j < pre.size(); ++j)
        if (pre[j] != space_->weight(j))
          throw std::invalid_argument("Operator: Koopman map does not preserve weights");
      return;
    }
    NormEstimate est = norm_estimate_impl(*this, 200, 1e-12);
    if (est.value > 1.0 + 1e-9)
      throw std::invalid_argument("Operator: matrix is not nonexpansive (norm estimate " +
                                  std::to_string(est.value) + ")");
    if (class_ == OperatorClass::Isometry) {
      // Probe set: coordinate vectors and an alternating vector.
      std::size_t n = space_->atoms();
      for (std::size_t p = 0; p <= n; ++p) {
        std::vector<double> c(n, 0.0);
        if (p < n)
          c[p] = 1.0;
        else
          for (std::size_t i = 0; i < n; ++i) c[i] = (i % 2 == 0) ? 1.0 : -1.0;
        Element probe(space_, std::move(c));
        if (std::abs(norm2(apply(probe)) - norm2(probe)) > 1e-9)
          throw std::invalid_argument("Operator: isometry claim fails on probe set");
      }
    }
  }

  friend NormEstimate operator_norm_estimate(const Operator&, int, double);
  static NormEstimate norm_estimate_impl(const Operator& T, int iterations, double tol);

  SpacePtr space_;
  std::variant<Dense, Koopman> rep_;
  OperatorClass class_;
};

// Power iteration on the weighted adjoint composition T*T. Exact 1 for
// Koopman maps, whose weight preservation is already verified.
inline NormEstimate Operator::norm_estimate_impl(const Operator& T, int iterations, double tol) {
  if (iterations < 1) throw std::invalid_argument("operator_norm_estimate: iterations >= 1");
  if (T.is_koopman()) return {1.0, true};
  std::size_t n = T.space_->atoms();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(n)) + 1e-3 * static_cast<double>(i % 7);
  Element x(T.space_, v);
  double nx = norm2(x);
  if (nx == 0.0) return {0.0, true};
  x = scale(x, 1.0 / nx);
  double prev = -1.0;
  bool converged = false;
  for (int it = 0; it < iterations; ++it) {
    Element tx = T.apply(x);
    double est = norm2(tx);
    // adjoint step: W^{-1} T^t W (Tx)
    const auto& d = std::get<Dense>(T.rep_);
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      KahanAccumulator acc;
      for (std::size_t j = 0; j < n; ++j)
        acc.add(d.entries[j * n + i] * T.space_->weight_d(j) * tx.coords[j]);
      y[i] = acc.sum / T.space_->weight_d(i);
    }
    Element by(T.space_, std::move(y));
    double nb = norm2(by);
    if (nb == 0.0) return {0.0, true};
    x = scale(by, 1.0 / nb);
    if (prev >= 0.0 && std::abs(est - prev) <= tol) {
      converged = true;
      prev = est;
      break;
    }
    prev = est;
  }
  return {prev, converged};
}

inline NormEstimate operator_norm_estimate(const Operator& T, int iterations = 200,
                                           double tol = 1e-12) {
  return Operator::norm_estimate_impl(T, iterations, tol);
}

// A_n f = (1/n) sum_{i<n} T^i f, computed in one accumulation pass.
inline Element ergodic_average(const Operator& T, const Element& f, std::size_t n) {
  if (n == 0) throw std::invalid_argument("ergodic_average: n >= 1");
  std::vector<KahanAccumulator> acc(f.dim());
  Element iter = f;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) iter = T.apply(iter);
    for (std::size_t j = 0; j < f.dim(); ++j) acc[j].add(iter.coords[j]);
  }
  std::vector<double> out(f.dim());
  for (std::size_t j = 0; j < f.dim(); ++j) out[j] = acc[j].sum / static_cast<double>(n);
  return Element(f.space, std::move(out));
}

// Incrementally extensible cache of A_1..A_N.
class AveragesCache {
 public:
  AveragesCache(const Operator& T, Element f) : T_(&T), iter_(f), acc_(f.dim()) {
    for (std::size_t j = 0; j < f.dim(); ++j) acc_[j].add(f.coords[j]);
    averages_.push_back(f);
  }

  // A_n, extending the cache as needed.
  const Element& average(std::size_t n) {
    if (n == 0) throw std::invalid_argument("average: n >= 1");
    while (averages_.size() < n) {
      iter_ = T_->apply(iter_);
      std::vector<double> out(iter_.dim());
      for (std::size_t j = 0; j < iter_.dim(); ++j) {
        acc_[j].add(iter_.coords[j]);
        out[j] = acc_[j].sum / static_cast<double>(averages_.size() + 1);
      }
      averages_.emplace_back(iter_.space, std::move(out));
    }
    return averages_[n - 1];
  }

  std::size_t size() const { return averages_.size(); }

 private:
  const Operator* T_;
  Element iter_;
  std::vector<KahanAccumulator> acc_;
  std::deque<Element> averages_;  // deque: references stay valid as the cache grows
};

inline std::vector<Element> averages_prefix(const Operator& T, const Element& f, std::size_t N) {
  if (N == 0) throw std::invalid_argument("averages_prefix: N >= 1");
  AveragesCache cache(T, f);
  cache.average(N);
  std::vector<Element> out;
  out.reserve(N);
  for (std::size_t n = 1; n <= N; ++n) out.push_back(cache.average(n));
  return out;
}

}  // namespace ergostab
