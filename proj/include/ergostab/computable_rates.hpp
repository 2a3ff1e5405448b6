#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ergostab/hilbert.hpp"
#include "ergostab/numeric.hpp"
#include "ergostab/projection.hpp"

namespace ergostab {

struct RateCertificate {
  bool found = false;
  std::size_t m = 0;           // certified index: ||A_n f - Pf|| < eps for n >= m
  std::size_t trace_depth = 0; // projection-trace index used
  double residual = 0.0;       // 2 sqrt(2 (a - a_i) ||f||) at acceptance
  double a = 0.0;              // sqrt(||f||^2 - r^2), norm of the coboundary part
  double a_i = 0.0;
};

// Given r with |r - ||f*||| small (f* the invariant part), certify a rate:
// with a = sqrt(||f||^2 - r^2), extend the projection trace until
// 2 sqrt(2 max(a - a_i, 0) ||f||) < eps/2, then m = ceil(8 ||u_i|| / eps).
inline RateCertificate rate_from_limit_norm(const Operator& T, const Element& f, double r,
                                            double eps, std::size_t max_depth = 4096) {
  if (eps <= 0) throw std::invalid_argument("rate_from_limit_norm: eps > 0");
  double nf = norm2(f);
  if (nf <= 0) throw std::invalid_argument("rate_from_limit_norm: f must be nonzero");
  if (r < 0 || r > nf + 1e-9)
    throw std::invalid_argument("rate_from_limit_norm: need 0 <= r <= ||f||");
  RateCertificate cert;
  cert.a = std::sqrt(std::max(0.0, nf * nf - r * r));
  ProjectionTrace trace(T, f);
  for (std::size_t i = 0; i <= max_depth; ++i) {
    const auto& entry = trace.at(i);
    cert.a_i = entry.a;
    double slack = std::max(0.0, cert.a - entry.a);
    double residual = 2.0 * std::sqrt(2.0 * slack * nf);
    if (residual < eps / 2.0) {
      cert.found = true;
      cert.trace_depth = i;
      cert.residual = residual;
      double nu = norm2(entry.u);
      cert.m = static_cast<std::size_t>(std::ceil(8.0 * nu / eps));
      if (cert.m < 1) cert.m = 1;
      return cert;
    }
  }
  return cert;
}

// ||P f|| for ergodic Koopman systems (single orbit covering all atoms):
// Pf is constant equal to the integral of f, so ||Pf|| = |sum_i w_i f_i|.
inline double limit_norm_ergodic(const Element& f) {
  KahanAccumulator acc;
  for (std::size_t i = 0; i < f.dim(); ++i)
    acc.add(to_double(f.space->weight(i)) * f.coords[i]);
  return std::abs(acc.sum);
}

// Halting data: block index i -> halting time j >= 1. Blocks absent from the
// table are treated as non-halting.
using HaltingTable = std::map<std::size_t, std::size_t>;

// A family of blocks encoding halting information in the limit norm.
//
// Block i (0 <= i < N) has measure 2^{-(i+1)}; a tail block of measure 2^{-N}
// completes the space. A non-halting block (and the tail) has 2 atoms with
// the identity map, so f is already invariant there. A halting block with
// time j >= 1 has 2^{j+1} atoms cyclically shifted by 2 positions (rotation
// by 2^{-j}), which splits into two orbits of size 2^j each.
//
// f is the indicator of the first half of every block. On a fixed block the
// invariant part is the per-orbit mean of f:
//   - non-halting: f* = f, contributing (1/2) 2^{-(i+1)} to ||f*||^2;
//   - halting: each parity orbit meets the first half in exactly half its
//     atoms, so f* = 1/2 there, contributing (1/4) 2^{-(i+1)}.
// Hence 1/2 - ||f*||^2 = sum over halting blocks of 2^{-(i+3)}: the limit
// norm encodes the halting bits in its binary digits.
struct SpeckerSystem {
  SpacePtr space;
  Operator T = Operator::koopman(MeasureSpace::uniform(1), {0});
  Element f;
  std::size_t blocks = 0;          // N
  HaltingTable table;
  std::vector<std::size_t> start;  // first atom of each block; tail at index N
  std::vector<std::size_t> size;   // atoms per block (tail included)
};

inline SpeckerSystem build_specker_system(std::size_t N, const HaltingTable& halting) {
  if (N < 1) throw std::invalid_argument("build_specker_system: N >= 1");
  for (const auto& [i, j] : halting) {
    if (i >= N) throw std::invalid_argument("build_specker_system: block index out of range");
    if (j < 1) throw std::invalid_argument("build_specker_system: halting times are >= 1");
  }
  std::vector<Rational> weights;
  std::vector<std::size_t> map;
  std::vector<double> coords;
  SpeckerSystem sys;
  sys.blocks = N;
  sys.table = halting;
  auto add_block = [&](std::size_t atoms, const Rational& measure, std::size_t shift) {
    sys.start.push_back(weights.size());
    sys.size.push_back(atoms);
    std::size_t base = weights.size();
    Rational w = measure / Rational(atoms);
    for (std::size_t k = 0; k < atoms; ++k) {
      weights.push_back(w);
      map.push_back(base + (k + shift) % atoms);
      coords.push_back(k < atoms / 2 ? 1.0 : 0.0);
    }
  };
  for (std::size_t i = 0; i < N; ++i) {
    Rational measure = Rational(1) / Rational(BigInt(1) << (i + 1));
    auto it = halting.find(i);
    if (it != halting.end())
      add_block(std::size_t(1) << (it->second + 1), measure, 2);
    else
      add_block(2, measure, 0);
  }
  add_block(2, Rational(1) / Rational(BigInt(1) << N), 0);  // tail
  auto space = std::make_shared<MeasureSpace>(std::move(weights));
  sys.space = space;
  sys.T = Operator::koopman(space, std::move(map));
  sys.f = Element(space, std::move(coords));
  return sys;
}

// Closed formula: ||f*||^2 = 1/2 - sum_{i halting, i < N} 2^{-(i+3)}.
inline Rational specker_norm_squared(std::size_t N, const HaltingTable& halting) {
  Rational total = Rational(1, 2);
  for (const auto& [i, j] : halting) {
    if (i >= N) throw std::invalid_argument("specker_norm_squared: block index out of range");
    (void)j;
    total -= Rational(1) / Rational(BigInt(1) << (i + 3));
  }
  return total;
}

inline Rational specker_norm(const SpeckerSystem& sys) {
  return specker_norm_squared(sys.blocks, sys.table);
}

// Independent check: decompose the atom map into orbits, average f over each
// orbit, and sum weight * mean^2 exactly.
inline Rational specker_norm_direct(const SpeckerSystem& sys) {
  const auto& map = sys.T.atom_map();
  std::size_t n = map.size();
  std::vector<char> seen(n, 0);
  Rational total = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    Rational wsum = 0, fsum = 0;
    std::size_t x = s;
    do {
      seen[x] = 1;
      const Rational& w = sys.space->weight(x);
      wsum += w;
      fsum += w * rational_from_double(sys.f.coords[x]);
      x = map[x];
    } while (x != s);
    if (wsum > 0) total += fsum * fsum / wsum;
  }
  return total;
}

// Recover the halting bits of blocks 0..N-1 from any rational approximation
// of r = sum_{i halting} 2^{-(i+3)} with error <= 2^{-(N+4)}: round r * 2^{N+3}
// to the nearest integer and read off its binary digits.
inline std::vector<bool> recover_bits_from_r(const Rational& r_approx, std::size_t N) {
  BigInt scale = BigInt(1) << (N + 3);
  BigInt rounded = floor_to_int(r_approx * Rational(scale) + Rational(1, 2));
  if (rounded < 0 || rounded > scale)
    throw std::invalid_argument("recover_bits_from_r: approximation out of range");
  std::vector<bool> bits(N);
  for (std::size_t i = 0; i < N; ++i)
    bits[i] = bit_test(rounded, static_cast<unsigned>(N - i));  // 2^{-(i+3)} * 2^{N+3}
  return bits;
}

// Oracle form: requests r to precision 2^{-(N+4)} and decodes.
template <typename Oracle>
std::vector<bool> recover_halting_bits(Oracle&& r_oracle, std::size_t N) {
  Rational precision = Rational(1) / Rational(BigInt(1) << (N + 4));
  return recover_bits_from_r(r_oracle(precision), N);
}

// Convenience: decode from an approximation of ||f*||^2 itself.
inline std::vector<bool> recover_halting_bits_from_norm(const Rational& norm_sq_approx,
                                                        std::size_t N) {
  return recover_bits_from_r(Rational(1, 2) - norm_sq_approx, N);
}

}  // namespace ergostab
