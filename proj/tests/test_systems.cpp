#include <catch2/catch_amalgamated.hpp>

#include "ergostab/systems.hpp"

using namespace ergostab;

TEST_CASE("deterministic rng reproducibility") {
  DeterministicRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  bool differs = false;
  DeterministicRng a2(42);
  for (int i = 0; i < 10; ++i) differs = differs || a2.uniform() != c.uniform();
  CHECK(differs);
}

TEST_CASE("cyclic permutation is a single orbit") {
  auto [space, T] = build(SystemRecipe::cyclic(5));
  CHECK(space->atoms() == 5);
  CHECK(koopman_single_orbit(T));
  Element f(space, {1.0, 0.0, 0.0, 0.0, 0.0});
  Element tf = T.apply(f);
  // Tf = f o tau: the mass moves to the atom mapping onto atom 0
  CHECK(tf.coords[4] == 1.0);
}

TEST_CASE("discretized rotation validates and shifts exactly") {
  CHECK_THROWS_AS(build(SystemRecipe::rotation(1, 4, 6)), std::invalid_argument);
  auto [space, T] = build(SystemRecipe::rotation(1, 4, 8));
  const auto& map = T.atom_map();
  for (std::size_t i = 0; i < 8; ++i) CHECK(map[i] == (i + 2) % 8);
  CHECK(koopman_single_orbit(build(SystemRecipe::rotation(1, 8, 8)).second));
  // rational rotation 2/4 = shift by half
  auto [s2, H] = build(SystemRecipe::rotation(2, 4, 8));
  CHECK(H.atom_map()[0] == 4);
}

TEST_CASE("identity recipe") {
  auto [space, T] = build(SystemRecipe::identity(3));
  Element f(space, {3.0, 1.0, 4.0});
  CHECK(norm2(sub(T.apply(f), f)) == 0.0);
}

TEST_CASE("doubling map is an exact measure-preserving shift") {
  CHECK_THROWS_AS(build(SystemRecipe::doubling(6)), std::invalid_argument);
  auto [space, T] = build(SystemRecipe::doubling(8));
  // left bit rotation on 3-bit strings
  CHECK(T.atom_map()[1] == 2);
  CHECK(T.atom_map()[4] == 1);
  CHECK(T.atom_map()[7] == 7);
  DeterministicRng rng(5);
  std::vector<double> c(8);
  for (auto& v : c) v = rng.gaussian();
  Element f(space, c);
  CHECK(norm2(T.apply(f)) == Catch::Approx(norm2(f)));
}

TEST_CASE("random orthogonal operators are isometries") {
  for (std::uint64_t seed : {1ULL, 2ULL, 77ULL}) {
    auto [space, T] = build(SystemRecipe::random_orthogonal(8, seed));
    DeterministicRng rng(seed + 9);
    std::vector<double> c(8);
    for (auto& v : c) v = rng.gaussian();
    Element f(space, c);
    CHECK(norm2(T.apply(f)) == Catch::Approx(norm2(f)).epsilon(1e-9));
  }
}

TEST_CASE("random contractions are nonexpansive and seeded deterministically") {
  auto [s1, A] = build(SystemRecipe::random_contraction(6, 3));
  auto [s2, B] = build(SystemRecipe::random_contraction(6, 3));
  auto [s3, C] = build(SystemRecipe::random_contraction(6, 4));
  DeterministicRng rng(1);
  std::vector<double> c(6);
  for (auto& v : c) v = rng.gaussian();
  Element f(s1, c);
  CHECK(norm2(A.apply(f)) <= norm2(f) + 1e-9);
  CHECK(norm2(sub(A.apply(f), B.apply(Element(s2, c)))) == 0.0);
  CHECK(norm2(sub(A.apply(f), C.apply(Element(s3, c)))) > 0.0);
}
