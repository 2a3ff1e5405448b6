#pragma once

#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergostab/computable_rates.hpp"
#include "ergostab/hilbert.hpp"
#include "ergostab/numeric.hpp"
#include "ergostab/systems.hpp"

namespace ergostab {

using Json = nlohmann::ordered_json;

inline Json rational_to_json(const Rational& q) {
  return Json{{"num", numerator(q).str()}, {"den", denominator(q).str()}};
}

inline Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(BigInt(j.get<long long>()));
  if (j.is_number_float()) return rational_from_double(j.get<double>());
  if (j.is_string()) {
    // "p/q" or plain integer string
    std::string s = j.get<std::string>();
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  }
  if (j.is_object() && j.contains("num") && j.contains("den"))
    return Rational(BigInt(j.at("num").get<std::string>()),
                    BigInt(j.at("den").get<std::string>()));
  throw std::invalid_argument("rational_from_json: expected number, \"p/q\", or {num,den}");
}

// Big integers: full decimal string, or a truncated summary for huge values.
inline Json bigint_to_json(const BigInt& v, bool full) {
  std::string s = v.str();
  if (full || s.size() <= 40) return Json(s);
  return Json{{"digits", s.size()}, {"leading", s.substr(0, 20)}};
}

inline Json recipe_to_json(const SystemRecipe& r) {
  Json j;
  switch (r.kind) {
    case SystemKind::Identity:
      j["kind"] = "identity";
      j["dim"] = r.dim;
      break;
    case SystemKind::CyclicPermutation:
      j["kind"] = "cyclic_permutation";
      j["period"] = r.dim;
      break;
    case SystemKind::DiscretizedRotation:
      j["kind"] = "discretized_rotation";
      j["numerator"] = r.numerator;
      j["denominator"] = r.denominator;
      j["atoms"] = r.atoms;
      break;
    case SystemKind::RandomOrthogonal:
      j["kind"] = "random_orthogonal";
      j["dim"] = r.dim;
      j["seed"] = r.seed;
      break;
    case SystemKind::RandomContraction:
      j["kind"] = "random_contraction";
      j["dim"] = r.dim;
      j["seed"] = r.seed;
      break;
    case SystemKind::DoublingMap:
      j["kind"] = "doubling_map";
      j["atoms"] = r.dim;
      break;
  }
  return j;
}

inline SystemRecipe recipe_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("system recipe: expected object with \"kind\"");
  static const std::vector<std::string> known_keys = {
      "kind", "dim", "period", "numerator", "denominator", "atoms", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known_keys) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("system recipe: unknown key \"" + it.key() + "\"");
  }
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return SystemRecipe::identity(j.at("dim").get<std::size_t>());
  if (kind == "cyclic_permutation")
    return SystemRecipe::cyclic(j.at("period").get<std::size_t>());
  if (kind == "discretized_rotation")
    return SystemRecipe::rotation(j.at("numerator").get<std::size_t>(),
                                  j.at("denominator").get<std::size_t>(),
                                  j.at("atoms").get<std::size_t>());
  if (kind == "random_orthogonal")
    return SystemRecipe::random_orthogonal(j.at("dim").get<std::size_t>(),
                                           j.value("seed", std::uint64_t(0)));
  if (kind == "random_contraction")
    return SystemRecipe::random_contraction(j.at("dim").get<std::size_t>(),
                                            j.value("seed", std::uint64_t(0)));
  if (kind == "doubling_map") return SystemRecipe::doubling(j.at("atoms").get<std::size_t>());
  throw std::invalid_argument("system recipe: unknown kind \"" + kind + "\"");
}

// f as an explicit coordinate list, or a named pattern on the given space:
//   "half_indicator": 1 on the first half of the atoms, 0 on the rest
//   "half_indicator_centered": the same minus its mean
//   "alternating": +1, -1, +1, ...
//   "first_atom": 1 on atom 0
//   {"gaussian": seed}: seeded standard normals
inline Element element_from_json(const Json& j, const SpacePtr& space) {
  std::size_t n = space->atoms();
  if (j.is_array()) {
    std::vector<double> c;
    for (const auto& v : j) c.push_back(v.get<double>());
    return Element(space, std::move(c));
  }
  if (j.is_string()) {
    std::string name = j.get<std::string>();
    std::vector<double> c(n, 0.0);
    if (name == "half_indicator" || name == "half_indicator_centered") {
      for (std::size_t i = 0; i < n / 2; ++i) c[i] = 1.0;
      if (name == "half_indicator_centered") {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += to_double(space->weight(i)) * c[i];
        for (std::size_t i = 0; i < n; ++i) c[i] -= mean;
      }
    } else if (name == "alternating") {
      for (std::size_t i = 0; i < n; ++i) c[i] = (i % 2 == 0) ? 1.0 : -1.0;
    } else if (name == "first_atom") {
      c[0] = 1.0;
    } else {
      throw std::invalid_argument("element pattern: unknown name \"" + name + "\"");
    }
    return Element(space, std::move(c));
  }
  if (j.is_object() && j.contains("gaussian")) {
    DeterministicRng rng(j.at("gaussian").get<std::uint64_t>());
    std::vector<double> c(n);
    for (auto& v : c) v = rng.gaussian();
    return Element(space, std::move(c));
  }
  throw std::invalid_argument("element: expected coordinate array, pattern name, or {gaussian}");
}

inline Json element_to_json(const Element& f) {
  Json a = Json::array();
  for (double v : f.coords) a.push_back(v);
  return a;
}

inline HaltingTable halting_table_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("halting table: expected object {\"i\": j}");
  HaltingTable t;
  for (auto it = j.begin(); it != j.end(); ++it)
    t[static_cast<std::size_t>(std::stoull(it.key()))] = it.value().get<std::size_t>();
  return t;
}

}  // namespace ergostab
