#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "ergostab/hilbert.hpp"

namespace ergostab {

// v_k = T^k f - T^{k+1} f.
inline Element difference_vector(const Operator& T, const Element& f, std::size_t k) {
  Element a = f;
  for (std::size_t i = 0; i < k; ++i) a = T.apply(a);
  return sub(a, T.apply(a));
}

// The projection trace: g_i is the true orthogonal projection of f onto
// span{v_0..v_i}, u_i the coboundary representative with g_i = u_i - T u_i,
// a_i = ||g_i||. Extensible; earlier entries never change.
class ProjectionTrace {
 public:
  struct Entry {
    std::vector<double> coeffs;  // c_0..c_i with g_i = sum c_k v_k, u_i = sum c_k T^k f
    Element g;
    Element u;
    double a = 0.0;
  };

  ProjectionTrace(const Operator& T, Element f, double delta_min = 1e-10)
      : T_(&T), f_(std::move(f)), delta_min_(delta_min) {
    if (delta_min_ <= 0) throw std::invalid_argument("ProjectionTrace: delta_min > 0");
    norm_f_ = norm2(f_);
    if (norm_f_ == 0.0) throw std::invalid_argument("ProjectionTrace: f must be nonzero");
    iterates_.push_back(f_);
    g_run_ = zero_like(f_);
  }

  const Element& iterate(std::size_t k) {
    while (iterates_.size() <= k) iterates_.push_back(T_->apply(iterates_.back()));
    return iterates_[k];
  }

  Element difference(std::size_t k) {
    iterate(k + 1);
    return sub(iterates_[k], iterates_[k + 1]);
  }

  // Ensure entries 0..imax exist.
  void extend(std::size_t imax) {
    while (entries_.size() <= imax) step();
  }

  const Entry& at(std::size_t i) {
    extend(i);
    return entries_[i];
  }

  const std::set<std::size_t>& skipped() const { return skipped_; }
  double norm_f() const { return norm_f_; }
  std::size_t computed() const { return entries_.size(); }

 private:
  void step() {
    std::size_t i = entries_.size();
    Element v = difference(i);
    // Modified Gram-Schmidt with one reorthogonalization pass. The projection
    // coefficients of the new direction in the v-basis are tracked alongside.
    std::vector<double> alpha(i + 1, 0.0);
    alpha[i] = 1.0;
    Element w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < basis_.size(); ++j) {
        double r = inner(w, basis_[j]);
        w = sub(w, scale(basis_[j], r));
        for (std::size_t k = 0; k < basis_coeffs_[j].size(); ++k)
          alpha[k] -= r * basis_coeffs_[j][k];
      }
    }
    double nw = norm2(w);
    if (nw <= delta_min_ * norm_f_) {
      skipped_.insert(i);
    } else {
      Element q = scale(w, 1.0 / nw);
      std::vector<double> qa(alpha.size());
      for (std::size_t k = 0; k < alpha.size(); ++k) qa[k] = alpha[k] / nw;
      double c = inner(f_, q);
      g_run_ = add(g_run_, scale(q, c));
      if (coeffs_run_.size() < qa.size()) coeffs_run_.resize(qa.size(), 0.0);
      for (std::size_t k = 0; k < qa.size(); ++k) coeffs_run_[k] += c * qa[k];
      basis_.push_back(std::move(q));
      basis_coeffs_.push_back(std::move(qa));
    }
    Entry e;
    e.coeffs = coeffs_run_;
    e.coeffs.resize(i + 1, 0.0);
    e.g = g_run_;
    e.u = zero_like(f_);
    for (std::size_t k = 0; k < e.coeffs.size(); ++k)
      if (e.coeffs[k] != 0.0) e.u = add(e.u, scale(iterate(k), e.coeffs[k]));
    e.a = norm2(e.g);
    entries_.push_back(std::move(e));
  }

  const Operator* T_;
  Element f_;
  double delta_min_;
  double norm_f_ = 0.0;
  std::vector<Element> iterates_;
  std::vector<Element> basis_;                     // orthonormal q_j
  std::vector<std::vector<double>> basis_coeffs_;  // q_j in the v-basis
  Element g_run_;
  std::vector<double> coeffs_run_;
  std::deque<Entry> entries_;  // deque: references stay valid as the trace grows
  std::set<std::size_t> skipped_;
};

inline ProjectionTrace compute_trace(const Operator& T, const Element& f, std::size_t imax,
                                     double delta_min = 1e-10) {
  ProjectionTrace trace(T, f, delta_min);
  trace.extend(imax);
  return trace;
}

// Independent oracle: orthogonal projection of f onto span{v_0..v_i} by
// column-pivoted Gram-Schmidt (largest remaining column first, two
// orthogonalization passes). Recomputes the iterates itself; the pivoting
// order and basis differ from ProjectionTrace's fixed-order recursion, so it
// cross-checks the trace rather than replaying it. Columns whose residual
// falls below rank_tol * ||f|| are treated as dependent and dropped.
inline Element projection_oracle(const Operator& T, const Element& f, std::size_t i,
                                 double rank_tol = 1e-10) {
  if (i > 200) throw std::invalid_argument("projection_oracle: i <= 200 required");
  std::size_t n = i + 1;
  std::vector<Element> v;
  Element a = f;
  Element b = T.apply(a);
  for (std::size_t k = 0; k < n; ++k) {
    v.push_back(sub(a, b));
    a = b;
    b = T.apply(a);
  }
  double threshold = rank_tol * norm2(f);
  std::vector<bool> used(n, false);
  Element g = zero_like(f);
  std::vector<Element> basis;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    double best = threshold;
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k]) continue;
      double nv = norm2(v[k]);
      if (nv > best) {
        best = nv;
        pick = k;
      }
    }
    if (pick == n) break;  // all remaining columns are numerically dependent
    used[pick] = true;
    Element w = v[pick];
    for (int pass = 0; pass < 2; ++pass)
      for (const Element& q : basis) w = sub(w, scale(q, inner(w, q)));
    double nw = norm2(w);
    if (nw <= threshold) continue;
    Element q = scale(w, 1.0 / nw);
    g = add(g, scale(q, inner(f, q)));
    // deflate the remaining columns so the pivot always sees residual norms
    for (std::size_t k = 0; k < n; ++k)
      if (!used[k]) v[k] = sub(v[k], scale(q, inner(v[k], q)));
    basis.push_back(std::move(q));
  }
  return g;
}

}  // namespace ergostab
