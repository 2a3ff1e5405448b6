#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergostab/hilbert.hpp"

namespace ergostab {

// Deterministic generator: mt19937_64 with explicit, implementation-independent
// derivations (53-bit uniforms, Box-Muller gaussians). std::*_distribution is
// implementation-defined, so it is avoided here.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class SystemKind {
  Identity,
  CyclicPermutation,
  DiscretizedRotation,
  RandomOrthogonal,
  RandomContraction,
  DoublingMap,
};

struct SystemRecipe {
  SystemKind kind = SystemKind::Identity;
  std::size_t dim = 1;          // identity, random_* / period for cyclic / atoms for doubling
  std::size_t numerator = 0;    // discretized_rotation
  std::size_t denominator = 1;  // discretized_rotation
  std::size_t atoms = 0;        // discretized_rotation
  std::uint64_t seed = 0;       // random_*

  static SystemRecipe identity(std::size_t dim) { return {SystemKind::Identity, dim}; }
  static SystemRecipe cyclic(std::size_t period) { return {SystemKind::CyclicPermutation, period}; }
  static SystemRecipe rotation(std::size_t p, std::size_t q, std::size_t atoms) {
    SystemRecipe r;
    r.kind = SystemKind::DiscretizedRotation;
    r.numerator = p;
    r.denominator = q;
    r.atoms = atoms;
    return r;
  }
  static SystemRecipe random_orthogonal(std::size_t dim, std::uint64_t seed) {
    SystemRecipe r;
    r.kind = SystemKind::RandomOrthogonal;
    r.dim = dim;
    r.seed = seed;
    return r;
  }
  static SystemRecipe random_contraction(std::size_t dim, std::uint64_t seed) {
    SystemRecipe r;
    r.kind = SystemKind::RandomContraction;
    r.dim = dim;
    r.seed = seed;
    return r;
  }
  static SystemRecipe doubling(std::size_t atoms) { return {SystemKind::DoublingMap, atoms}; }
};

namespace detail {

inline std::vector<double> random_orthogonal_matrix(std::size_t dim, std::uint64_t seed) {
  DeterministicRng rng(seed);
  std::vector<std::vector<double>> cols(dim, std::vector<double>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    for (;;) {
      for (std::size_t i = 0; i < dim; ++i) cols[j][i] = rng.gaussian();
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < j; ++k) {
          double dot = std::inner_product(cols[j].begin(), cols[j].end(), cols[k].begin(), 0.0);
          for (std::size_t i = 0; i < dim; ++i) cols[j][i] -= dot * cols[k][i];
        }
      double nrm = std::sqrt(std::inner_product(cols[j].begin(), cols[j].end(), cols[j].begin(), 0.0));
      if (nrm > 1e-8) {
        for (std::size_t i = 0; i < dim; ++i) cols[j][i] /= nrm;
        break;
      }
    }
  }
  std::vector<double> m(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] = cols[j][i];
  return m;
}

}  // namespace detail

// Random matrix with operator norm in (0,1]: orthogonal columns, rows scaled
// by factors <= 1. Deterministic in (dim, seed).
inline Operator random_contraction(std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("random_contraction: dim >= 1");
  auto m = detail::random_orthogonal_matrix(dim, seed);
  DeterministicRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < dim; ++i) {
    double s = 0.3 + 0.7 * rng.uniform();
    for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] *= s;
  }
  return Operator::dense(MeasureSpace::uniform(dim), std::move(m), OperatorClass::Nonexpansive);
}

inline std::pair<SpacePtr, Operator> build(const SystemRecipe& r) {
  switch (r.kind) {
    case SystemKind::Identity: {
      auto space = MeasureSpace::uniform(r.dim);
      std::vector<std::size_t> map(r.dim);
      std::iota(map.begin(), map.end(), std::size_t{0});
      return {space, Operator::koopman(space, std::move(map))};
    }
    case SystemKind::CyclicPermutation: {
      if (r.dim < 1) throw std::invalid_argument("cyclic_permutation: period >= 1");
      auto space = MeasureSpace::uniform(r.dim);
      std::vector<std::size_t> map(r.dim);
      for (std::size_t i = 0; i < r.dim; ++i) map[i] = (i + 1) % r.dim;
      return {space, Operator::koopman(space, std::move(map))};
    }
    case SystemKind::DiscretizedRotation: {
      if (r.denominator == 0) throw std::invalid_argument("discretized_rotation: denominator > 0");
      if (r.atoms == 0 || r.atoms % r.denominator != 0)
        throw std::invalid_argument("discretized_rotation: atoms must be a positive multiple of the denominator");
      std::size_t shift = (r.atoms / r.denominator) * (r.numerator % r.denominator);
      auto space = MeasureSpace::uniform(r.atoms);
      std::vector<std::size_t> map(r.atoms);
      for (std::size_t i = 0; i < r.atoms; ++i) map[i] = (i + shift) % r.atoms;
      return {space, Operator::koopman(space, std::move(map))};
    }
    case SystemKind::RandomOrthogonal: {
      if (r.dim < 1) throw std::invalid_argument("random_orthogonal: dim >= 1");
      auto space = MeasureSpace::uniform(r.dim);
      return {space, Operator::dense(space, detail::random_orthogonal_matrix(r.dim, r.seed),
                                     OperatorClass::Isometry)};
    }
    case SystemKind::RandomContraction: {
      Operator op = random_contraction(r.dim, r.seed);
      return {op.space(), std::move(op)};
    }
    case SystemKind::DoublingMap: {
      // Bernoulli-shift model: on 2^s uniform atoms indexed by s-bit strings,
      // the doubling map acts as the left bit rotation, an exact permutation.
      std::size_t m = r.dim;
      if (m < 2 || (m & (m - 1)) != 0)
        throw std::invalid_argument("doubling_map: atoms must be a power of two >= 2");
      std::size_t s = 0;
      while ((std::size_t{1} << s) < m) ++s;
      auto space = MeasureSpace::uniform(m);
      std::vector<std::size_t> map(m);
      for (std::size_t i = 0; i < m; ++i) map[i] = ((i << 1) & (m - 1)) | (i >> (s - 1));
      return {space, Operator::koopman(space, std::move(map))};
    }
  }
  throw std::invalid_argument("build: unknown recipe kind");
}

// Single-orbit check for Koopman maps (finite-model ergodicity diagnostic).
inline bool koopman_single_orbit(const Operator& T) {
  if (!T.is_koopman()) return false;
  const auto& map = T.atom_map();
  std::size_t n = map.size();
  std::vector<bool> seen(n, false);
  std::size_t p = 0, count = 0;
  while (!seen[p]) {
    seen[p] = true;
    ++count;
    p = map[p];
  }
  return count == n;
}

}  // namespace ergostab
