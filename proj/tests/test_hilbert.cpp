#include <catch2/catch_amalgamated.hpp>

#include "ergostab/hilbert.hpp"
#include "ergostab/systems.hpp"

using namespace ergostab;

namespace {

Element random_element(const SpacePtr& space, DeterministicRng& rng) {
  std::vector<double> c(space->atoms());
  for (auto& v : c) v = rng.gaussian();
  return Element(space, std::move(c));
}

std::pair<SpacePtr, Operator> random_nonexpansive(std::uint64_t seed, std::size_t dim) {
  return build(SystemRecipe::random_contraction(dim, seed));
}

}  // namespace

TEST_CASE("measure space validates weights") {
  CHECK_THROWS_AS(MeasureSpace(std::vector<Rational>{}), std::invalid_argument);
  CHECK_THROWS_AS(MeasureSpace({Rational(1, 2), Rational(1, 4)}), std::invalid_argument);
  CHECK_THROWS_AS(MeasureSpace({Rational(3, 2), Rational(-1, 2)}), std::invalid_argument);
  MeasureSpace ok({Rational(1, 3), Rational(2, 3)});
  CHECK(ok.atoms() == 2);
  CHECK(ok.weight(1) == Rational(2, 3));
  auto u = MeasureSpace::uniform(4);
  CHECK(u->weight(0) == Rational(1, 4));
}

TEST_CASE("element construction checks dimensions") {
  auto space = MeasureSpace::uniform(3);
  CHECK_THROWS_AS(Element(space, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(Element(space, {1.0, 2.0, std::nan("")}), std::invalid_argument);
  Element f(space, {1.0, 2.0, 3.0});
  CHECK(f.dim() == 3);
}

TEST_CASE("weighted inner product and norms") {
  auto space = std::make_shared<const MeasureSpace>(
      std::vector<Rational>{Rational(1, 4), Rational(3, 4)});
  Element f(space, {2.0, -2.0});
  Element g(space, {1.0, 1.0});
  CHECK(inner(f, g) == Catch::Approx(0.25 * 2.0 - 0.75 * 2.0));
  CHECK(norm2(f) == Catch::Approx(2.0));  // sqrt(1/4*4 + 3/4*4)
  CHECK(norm1(f) == Catch::Approx(2.0));
  CHECK(norm_inf(f) == Catch::Approx(2.0));
  CHECK(norm2(sub(f, f)) == 0.0);
  CHECK(norm2(add(f, scale(f, -1.0))) == 0.0);
}

TEST_CASE("koopman operators must preserve the measure") {
  auto space = std::make_shared<const MeasureSpace>(
      std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
  // swapping atoms of unequal weight is not measure-preserving
  CHECK_THROWS_AS(Operator::koopman(space, {1, 0}), std::invalid_argument);
  auto u = MeasureSpace::uniform(2);
  Operator T = Operator::koopman(u, {1, 0});
  Element f(u, {1.0, -1.0});
  CHECK(norm2(T.apply(f)) == Catch::Approx(norm2(f)));
  // non-injective map collapsing mass is rejected
  CHECK_THROWS_AS(Operator::koopman(u, {0, 0}), std::invalid_argument);
}

TEST_CASE("dense operators reject expansions") {
  auto space = MeasureSpace::uniform(1);
  CHECK_THROWS_AS(Operator::dense(space, {2.0}, OperatorClass::Nonexpansive),
                  std::invalid_argument);
  Operator half = Operator::dense(space, {0.5}, OperatorClass::Nonexpansive);
  Element f(space, {2.0});
  CHECK(half.apply(f).coords[0] == Catch::Approx(1.0));
  // claiming isometry for a strict contraction is rejected
  CHECK_THROWS_AS(Operator::dense(space, {0.5}, OperatorClass::Isometry), std::invalid_argument);
}

TEST_CASE("operator norm estimate") {
  auto [space, T] = build(SystemRecipe::cyclic(4));
  NormEstimate est = operator_norm_estimate(T);
  CHECK(est.value == 1.0);  // exact for atom permutations
  CHECK(est.converged);
  auto [s2, C] = build(SystemRecipe::random_contraction(8, 7));
  NormEstimate ec = operator_norm_estimate(C);
  CHECK(ec.value <= 1.0 + 1e-9);
}

TEST_CASE("ergodic averages on hand systems") {
  auto [si, I] = build(SystemRecipe::identity(3));
  Element f(si, {1.0, 2.0, 3.0});
  for (std::size_t n : {1, 2, 7}) CHECK(norm2(sub(ergodic_average(I, f, n), f)) == 0.0);

  auto [s2, S] = build(SystemRecipe::cyclic(2));
  Element g(s2, {1.0, -1.0});
  CHECK(norm2(sub(ergodic_average(S, g, 1), g)) == 0.0);
  CHECK(norm2(ergodic_average(S, g, 2)) == 0.0);
  CHECK(norm2(sub(ergodic_average(S, g, 3), scale(g, 1.0 / 3.0))) < 1e-15);
}

TEST_CASE("averages cache matches direct computation") {
  auto [space, T] = random_nonexpansive(11, 6);
  DeterministicRng rng(12);
  Element f = random_element(space, rng);
  AveragesCache cache(T, f);
  for (std::size_t n = 1; n <= 40; ++n)
    CHECK(norm2(sub(cache.average(n), ergodic_average(T, f, n))) < 1e-10 * norm2(f));
  auto prefix = averages_prefix(T, f, 10);
  REQUIRE(prefix.size() == 10);
  CHECK(norm2(sub(prefix[9], ergodic_average(T, f, 10))) < 1e-10 * norm2(f));
}

TEST_CASE("average basics hold for random nonexpansive operators") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto [space, T] = random_nonexpansive(seed, 2 + seed % 7);
    DeterministicRng rng(seed + 1000);
    Element f = random_element(space, rng);
    Element g = random_element(space, rng);
    Element u = random_element(space, rng);
    double nf = norm2(f);
    double tol = 1e-8 * std::max(nf, 1.0);

    AveragesCache cf(T, f), cg(T, g);
    Element un = u;
    Element coboundary = sub(u, T.apply(u));
    AveragesCache cu(T, coboundary);
    for (std::size_t n = 1; n <= 64; ++n) {
      // averages are nonexpansive in f
      CHECK(norm2(cf.average(n)) <= nf + tol);
      // linearity: ||A_n f - A_n g|| <= ||f - g||
      CHECK(norm2(sub(cf.average(n), cg.average(n))) <= norm2(sub(f, g)) + tol);
      // coboundary collapse: A_n(u - Tu) = (u - T^n u)/n, norm <= 2||u||/n
      Element expected = scale(sub(u, un = (n == 1 ? T.apply(u) : T.apply(un))),
                               1.0 / static_cast<double>(n));
      CHECK(norm2(sub(cu.average(n), expected)) < tol);
      CHECK(norm2(cu.average(n)) <= 2.0 * norm2(u) / static_cast<double>(n) + tol);
    }
    // near-invariance from a small Dirichlet form: <f, f-Tf> <= e implies
    // ||Tf - f|| <= sqrt(2 e)
    double dirichlet = std::max(0.0, inner(f, sub(f, T.apply(f))));
    CHECK(norm2(sub(T.apply(f), f)) <= std::sqrt(2.0 * dirichlet) + tol);
  }
}

TEST_CASE("pairwise average deviation bound for near-invariant elements") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto [space, T] = random_nonexpansive(seed, 3 + seed % 5);
    DeterministicRng rng(seed + 2000);
    Element f = random_element(space, rng);
    double eps = norm2(sub(T.apply(f), f));
    double tol = 1e-8 * std::max(norm2(f), 1.0);
    AveragesCache cache(T, f);
    for (std::size_t n = 1; n <= 32; ++n)
      for (std::size_t m = n; m <= 32; ++m)
        CHECK(norm2(sub(cache.average(m), cache.average(n))) <=
              static_cast<double>(m - n) * eps / 2.0 + tol);
  }
}
