#include <catch2/catch_amalgamated.hpp>

#include "ergostab/mean_bounds.hpp"
#include "ergostab/systems.hpp"

using namespace ergostab;

TEST_CASE("deviation window sizes at the unit configuration") {
  DeviationBoundFns d(1.0, 1.0);
  CHECK(d.d() == 32);
  CHECK(d.d_prime(1) == 2);
  CHECK(d.d_prime(2) == 32);
  CHECK(d.d_double_prime(1) == 32);
  CHECK(d.d_triple_prime(1) == 512);
  CHECK(d.e_window() == 128);
  CHECK(d.d_hat(1) == 512 * 128);
  CHECK(d.recursion_increment(1) == 8192);
  // quartic scaling in the norm/threshold ratio
  DeviationBoundFns h(2.0, 1.0);
  CHECK(h.d() == 512);
  CHECK(h.e_window() == 512);
}

TEST_CASE("iteration-count parameters") {
  MeanBoundParams p = mean_bound_params(1.0, 1.0, OperatorMode::Isometry);
  CHECK(p.rho == 1);
  CHECK(p.e == 512);
  MeanBoundParams q = mean_bound_params(2.0, 0.5, OperatorMode::Nonexpansive);
  CHECK(q.rho == 4);
  CHECK(q.e == 8192);
}

TEST_CASE("lifted growth functions at the unit configuration") {
  GrowthFunction khat = khat_isometry(growth_identity(), 1);
  // i + 2^13 (i+1): 1 -> 16385
  CHECK(khat(1) == 16385);
  GrowthFunction kbar = kbar_nonexpansive(growth_identity(), 1);
  // i + 2^13 (i+1)(2i): 0 -> 0, 1 -> 32769
  CHECK(kbar(0) == 0);
  CHECK(kbar(1) == 32769);
}

TEST_CASE("closed-form tower for the identity growth function") {
  // Khat(x) = 8193 x + 8192 at rho = 1, so Khat^k(1) = 2 * 8193^k - 1;
  // e = 512 iterations give the full bound
  MetBoundResult r = met_bound(1.0, 1.0, growth_identity(), OperatorMode::Isometry);
  REQUIRE(r.bound.has_value());
  BigInt expected = 2 * ipow(BigInt(8193), 512) - 1;
  CHECK(*r.bound == expected);
  CHECK(r.iterations_done == 512);
}

TEST_CASE("nonexpansive tower exhausts a small digit budget gracefully") {
  MetBoundResult r = met_bound(1.0, 1.0, growth_identity(), OperatorMode::Nonexpansive, 200);
  CHECK_FALSE(r.bound.has_value());
  CHECK(r.iterations_done < 512);
  CHECK(r.digits <= 210);  // reported value stays near the budget
  CHECK(r.last_value > 0);
}

TEST_CASE("digit budget from the environment-style default") {
  CHECK(default_digit_budget() >= 1);
}

TEST_CASE("stability witness on the identity system") {
  auto [space, T] = build(SystemRecipe::identity(3));
  Element f(space, {1.0, -2.0, 0.5});
  StabilityWitness w = find_stable_n(T, f, 0.1, growth_polynomial(2), 100);
  REQUIRE(w.found);
  CHECK(w.n == 1);
  CHECK(w.max_deviation == 0.0);
}

TEST_CASE("stability witness on the two-cycle by hand") {
  auto [space, T] = build(SystemRecipe::cyclic(2));
  Element f(space, {1.0, -1.0});  // A_n f = f/n odd n, 0 even n
  GrowthFunction twice = growth_affine(2, 0);
  // n=1 over [1,2]: deviation ||A_2 - A_1|| = 1 > 0.6
  // n=2 over [2,4]: deviation ||A_3 - A_2|| = 1/3 <= 0.6  -> least witness 2
  StabilityWitness w = find_stable_n(T, f, 0.6, twice, 100);
  REQUIRE(w.found);
  CHECK(w.n == 2);
  CHECK(w.max_deviation == Catch::Approx(1.0 / 3.0));

  // tighter threshold pushes the witness out: need 1/n <= ... over [n, 2n]
  StabilityWitness w2 = find_stable_n(T, f, 0.1, twice, 100);
  REQUIRE(w2.found);
  CHECK(w2.n >= 10);
  CHECK(w2.max_deviation <= 0.1);
}

TEST_CASE("stability witness failure reports progress") {
  auto [space, T] = build(SystemRecipe::cyclic(2));
  Element f(space, {1.0, -1.0});
  StabilityWitness w = find_stable_n(T, f, 1e-9, growth_affine(2, 0), 50);
  CHECK_FALSE(w.found);
  CHECK(w.best_n > 0);
  CHECK(w.best_deviation > 0.0);
}

TEST_CASE("witness schedule reaches a verified witness") {
  auto [space, T] = build(SystemRecipe::cyclic(2));
  Element f(space, {1.0, -1.0});
  ScheduleResult r = iterate_witness_schedule(T, f, 0.6, growth_affine(2, 0), 100000);
  REQUIRE(r.witness_n.has_value());
  CHECK_FALSE(r.capped);
  REQUIRE_FALSE(r.steps.empty());
  CHECK(r.steps.front().i_k == 1);
  // schedule increments are the quartic window size of the verified interval
  if (r.steps.size() >= 2) {
    DeviationBoundFns d(norm2(f), 0.6);
    BigInt m = growth_affine(2, 0)(r.steps[0].n_k);
    CHECK(r.steps[1].i_k == r.steps[0].i_k + d.recursion_increment(m));
  }
}

TEST_CASE("witness schedule caps out cleanly when the trace is too short") {
  auto [space, T] = build(SystemRecipe::random_orthogonal(4, 5));
  DeterministicRng rng(6);
  std::vector<double> c(4);
  for (auto& v : c) v = rng.gaussian();
  Element f(space, c);
  ScheduleResult r = iterate_witness_schedule(T, f, 1e-6, growth_polynomial(2), 10);
  CHECK((r.capped || r.witness_n.has_value()));
}

TEST_CASE("asymptotic table: additive growth gives a linear direct bound") {
  std::vector<std::pair<GrowthFunction, BigInt>> regimes;
  for (BigInt c : {BigInt(1), BigInt(16), BigInt(1024)})
    regimes.emplace_back(growth_affine(1, c), c);
  auto rows = asymptotic_table(regimes, {BigInt(1), BigInt(2)}, OperatorMode::Isometry, 5000);
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows) {
    REQUIRE(row.direct_affine_bound.has_value());
    CHECK(*row.direct_affine_bound == 2 * row.param * row.rho);
    CHECK(row.e == 512 * row.rho * row.rho);
  }
}
