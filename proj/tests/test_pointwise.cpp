#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "ergostab/pointwise.hpp"
#include "ergostab/systems.hpp"

using namespace ergostab;

namespace {

// seeded random permutation system on uniform atoms
std::pair<SpacePtr, Operator> random_permutation_system(std::size_t atoms, std::uint64_t seed) {
  auto space = MeasureSpace::uniform(atoms);
  std::vector<std::size_t> map(atoms);
  std::iota(map.begin(), map.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  std::shuffle(map.begin(), map.end(), gen);
  return {space, Operator::koopman(space, std::move(map))};
}

Element random_element(const SpacePtr& space, std::uint64_t seed) {
  DeterministicRng rng(seed);
  std::vector<double> c(space->atoms());
  for (auto& v : c) v = rng.gaussian();
  return Element(space, std::move(c));
}

Rational exact_norm2_sq(const Element& f) {
  Rational s = 0;
  for (std::size_t i = 0; i < f.dim(); ++i)
    s += f.space->weight(i) * rpow(rational_from_double(f.coords[i]), 2);
  return s;
}

}  // namespace

TEST_CASE("pointwise engine computes exact orbit averages") {
  auto [space, T] = build(SystemRecipe::cyclic(4));
  Element f(space, {1.0, 0.0, 0.0, 0.0});
  PointwiseEngine eng(T, f);
  CHECK(eng.average(0, 4) == Rational(1, 4));
  CHECK(eng.average(0, 1) == Rational(1));
  CHECK(eng.average(1, 4) == Rational(1, 4));
  CHECK(eng.average(1, 2) == Rational(0));
  // Tf = f o tau, orbit of atom 1 visits 2, 3, 0
  CHECK(eng.average(1, 3) == Rational(0));
  // non-Koopman operators are rejected
  auto [s2, D] = build(SystemRecipe::random_orthogonal(4, 1));
  Element g(s2, {1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(PointwiseEngine(D, g), std::invalid_argument);
}

TEST_CASE("positive-maximum set has nonnegative integral") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto [space, T] = random_permutation_system(4 + seed % 13, seed);
    Element f = random_element(space, seed + 100);
    MaximalCheck mc = maximal_theorem_check(T, f, 64);
    CHECK(mc.integral >= 0);
  }
}

TEST_CASE("maximal averages obey the weak-type bound exactly") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto [space, T] = random_permutation_system(4 + seed % 13, seed * 3 + 1);
    Element f = random_element(space, seed + 200);
    Rational lambda(1, 2);
    Rational measure = maximal_set_measure(T, f, 64, lambda);
    Rational markov = rational_from_double(norm1(f)) / lambda;
    CHECK(measure <= markov);
    CHECK(measure >= 0);
    CHECK(measure <= 1);
  }
}

TEST_CASE("chebyshev measure bound is exact") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto space = MeasureSpace::uniform(8);
    Element f = random_element(space, seed + 300);
    Rational lambda(3, 4);
    Rational measure = chebyshev_measure(f, lambda);
    CHECK(measure <= exact_norm2_sq(f) / (lambda * lambda));
  }
  // threshold comparison includes equality: |f| = lambda atoms count
  auto space = MeasureSpace::uniform(2);
  Element g(space, {0.5, 0.25});
  CHECK(chebyshev_measure(g, Rational(1, 2)) == Rational(1, 2));
}

TEST_CASE("splitting into bounded and small-L1 parts") {
  auto space = MeasureSpace::uniform(4);
  Element u(space, {0.5, -3.0, 2.0, 0.25});
  double L = 1.0;
  auto [lo, hi] = split_function(u, L);
  CHECK(norm_inf(lo) <= L);
  CHECK(norm2(sub(add(lo, hi), u)) == 0.0);
  // ||hi||_1 <= ||u||_2^2 / L exactly
  Rational h1 = 0;
  for (std::size_t i = 0; i < 4; ++i)
    h1 += space->weight(i) * abs(rational_from_double(hi.coords[i]));
  CHECK(h1 <= exact_norm2_sq(u) / rational_from_double(L));
}

TEST_CASE("pointwise iteration parameters at the unit configuration") {
  PointwiseParams p = pointwise_params(1.0, 1.0, 1.0);
  CHECK(p.rho == 1);
  CHECK(p.e == 128);
  // rho = ceil(norm / (l1 sqrt(l2))): norm 2, l1 = 1/2, l2 = 1/4 -> ceil(8) = 8
  PointwiseParams q = pointwise_params(2.0, 0.5, 0.25);
  CHECK(q.rho == 8);
  // e = ceil(2^7 * 4 / (1/2 * 1/2)) = 2048
  CHECK(q.e == 2048);
}

TEST_CASE("lifted pointwise growth function") {
  GrowthFunction khat = khat_pointwise(growth_identity(), 1);
  // i + 2^34 * (2^12 i^2): 1 -> 1 + 2^46
  CHECK(khat(1) == (BigInt(1) << 46) + 1);
}

TEST_CASE("pointwise bound at the unit configuration") {
  // e = 128 exactly; the tower itself roughly squares per step (the lifted
  // growth function maps i to i + 2^46 i^2 here), so its digit count doubles
  // each iteration and any realistic budget is exhausted partway through.
  PetBoundResult r = pet_bound(1.0, 1.0, 1.0, growth_identity(), 100000);
  CHECK(r.params.e == 128);
  CHECK_FALSE(r.bound.has_value());
  CHECK(r.iterations_done < 128);
  CHECK(r.digits <= 100000);
  CHECK(r.last_value > 0);
}

TEST_CASE("pointwise stability witness on hand systems") {
  auto [si, I] = build(SystemRecipe::identity(4));
  Element f(si, {1.0, -1.0, 0.5, 0.0});
  DeviationReport r = find_pointwise_stable_n(I, f, 0.25, 0.25, growth_polynomial(2), 100);
  REQUIRE(r.found);
  CHECK(r.n == 1);
  CHECK(r.exceptional_measure == 0);

  // two-cycle: |A_m f - A_n f| at each atom mirrors the norm case
  auto [s2, S] = build(SystemRecipe::cyclic(2));
  Element g(s2, {1.0, -1.0});
  DeviationReport r2 = find_pointwise_stable_n(S, g, Rational(1, 2).convert_to<double>(), 0.25,
                                               growth_affine(2, 0), 100);
  REQUIRE(r2.found);
  // n=1 over [1,2]: |A_2 - A_1| = 1 > 1/2 at both atoms (measure 1 > 1/4);
  // n=2 over [2,4]: |A_3 - A_2| = 1/3 <= 1/2 everywhere  -> witness 2
  CHECK(r2.n == 2);
  CHECK(r2.exceptional_measure == 0);
}

TEST_CASE("pointwise schedule clamps its first step and finds witnesses") {
  auto [space, T] = build(SystemRecipe::identity(4));
  Element f(space, {1.0, -1.0, 0.5, 0.0});
  PointwiseScheduleResult r =
      iterate_pointwise_schedule(T, f, 0.5, 0.25, growth_affine(2, 0), 1u << 20);
  REQUIRE_FALSE(r.steps.empty());
  CHECK(r.steps.front().i_k == 0);
  CHECK(r.steps.front().clamped);  // the formula yields n_0 = 0 at i_0 = 0
  CHECK(r.steps.front().n_k == 1);
  REQUIRE(r.witness_n.has_value());
  CHECK(*r.witness_n == 1);
}

TEST_CASE("pointwise schedule caps when the index escalates past the budget") {
  auto [space, T] = build(SystemRecipe::cyclic(2));
  Element f(space, {1.0, -1.0});
  PointwiseScheduleResult r =
      iterate_pointwise_schedule(T, f, 0.5, 0.25, growth_affine(2, 0), 1u << 20);
  CHECK(r.capped);  // i_1 = 2^34 K(1)^7 rho^6 blows past any demo-scale cap
  CHECK_FALSE(r.witness_n.has_value());
}

TEST_CASE("exceptional-set comparisons are strict") {
  // deviation exactly lambda1 is not exceptional
  auto [space, T] = build(SystemRecipe::cyclic(2));
  Element f(space, {1.0, -1.0});
  PointwiseEngine eng(T, f);
  // |A_1 - A_2| = 1 at both atoms: measure with lambda1 = 1 must be 0
  CHECK(exceptional_measure(eng, 1, 2, Rational(1)) == 0);
  CHECK(exceptional_measure(eng, 1, 2, Rational(99, 100)) == 1);
}
