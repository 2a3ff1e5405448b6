#pragma once

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergostab/computable_rates.hpp"
#include "ergostab/growth.hpp"
#include "ergostab/hilbert.hpp"
#include "ergostab/mean_bounds.hpp"
#include "ergostab/pointwise.hpp"
#include "ergostab/serialization.hpp"
#include "ergostab/systems.hpp"
#include "ergostab/upcrossings.hpp"

namespace ergostab {

// Exit codes: 0 success, 2 validation error, 3 budget or cap exhausted
// (a partial report is still emitted).
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitExhausted = 3;

// Growth-function spec strings: "identity", "2n", "n^2", "affine:c[,d]",
// "poly:k", "exp".
inline GrowthFunction growth_from_spec(const std::string& spec) {
  if (spec == "identity") return growth_identity();
  if (spec == "2n") return growth_affine(2, 0);
  if (spec == "n^2" || spec == "square") return growth_polynomial(2);
  if (spec == "exp") return growth_exponential();
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::string family = spec.substr(0, colon);
    std::string args = spec.substr(colon + 1);
    if (family == "affine") {
      auto comma = args.find(',');
      BigInt c(comma == std::string::npos ? args : args.substr(0, comma));
      BigInt d = comma == std::string::npos ? BigInt(0) : BigInt(args.substr(comma + 1));
      return growth_affine(c, d);
    }
    if (family == "poly") return growth_polynomial(std::stoul(args));
  }
  throw std::invalid_argument("unknown growth function \"" + spec +
                              "\" (expected identity, 2n, n^2, affine:c[,d], poly:k, exp)");
}

struct CliOptions {
  bool full = false;
  bool verify = false;
  std::size_t jobs = 1;
  std::size_t digit_budget = default_digit_budget();
};

namespace detail_cli {

inline void require_keys(const Json& cfg, const std::vector<std::string>& allowed) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool ok = it.key() == "command";
    for (const auto& k : allowed) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("config: unknown key \"" + it.key() + "\"");
  }
}

inline std::pair<SpacePtr, Operator> system_from_config(const Json& cfg) {
  if (!cfg.contains("system")) throw std::invalid_argument("config: missing \"system\"");
  return build(recipe_from_json(cfg.at("system")));
}

inline Json witness_deviation_json(const StabilityWitness& w) {
  Json j;
  j["found"] = w.found;
  if (w.found) {
    j["n"] = w.n;
    j["interval_end"] = w.interval_end;
    j["max_deviation"] = w.max_deviation;
    j["argmax_m"] = w.argmax_m;
  } else {
    j["best_n"] = w.best_n;
    j["best_deviation"] = w.best_deviation;
  }
  return j;
}

}  // namespace detail_cli

// ---- handlers: config json in, (report json, exit code) out ----

inline std::pair<Json, int> run_stability_search(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"system", "f", "eps", "K", "horizon", "max_interval"});
  auto [space, T] = detail_cli::system_from_config(cfg);
  Element f = element_from_json(cfg.at("f"), space);
  double eps = cfg.at("eps").get<double>();
  GrowthFunction K = growth_from_spec(cfg.at("K").get<std::string>());
  std::size_t horizon = cfg.value("horizon", std::size_t(100000));
  std::size_t max_interval = cfg.value("max_interval", std::size_t(10'000'000));
  StabilityWitness w = find_stable_n(T, f, eps, K, horizon, max_interval);
  Json rep;
  rep["command"] = "stability-search";
  rep["system"] = cfg.at("system");
  rep["eps"] = eps;
  rep["K"] = K.name;
  rep["horizon"] = horizon;
  rep["criterion"] = "max deviation of averages over [n, K(n)] <= eps";
  rep["witness"] = detail_cli::witness_deviation_json(w);
  return {rep, w.found ? kExitOk : kExitExhausted};
}

inline std::pair<Json, int> run_mean_bound(const Json& cfg, const CliOptions& opt) {
  detail_cli::require_keys(cfg, {"norm_f", "eps", "K", "mode", "digit_budget"});
  double norm_f = cfg.at("norm_f").get<double>();
  double eps = cfg.at("eps").get<double>();
  GrowthFunction K = growth_from_spec(cfg.at("K").get<std::string>());
  std::string mode_s = cfg.value("mode", std::string("isometry"));
  OperatorMode mode;
  if (mode_s == "isometry")
    mode = OperatorMode::Isometry;
  else if (mode_s == "nonexpansive")
    mode = OperatorMode::Nonexpansive;
  else
    throw std::invalid_argument("mode must be isometry or nonexpansive");
  std::size_t budget = cfg.value("digit_budget", opt.digit_budget);
  MetBoundResult r = met_bound(norm_f, eps, K, mode, budget);
  Json rep;
  rep["command"] = "mean-bound";
  rep["norm_f"] = norm_f;
  rep["eps"] = eps;
  rep["K"] = K.name;
  rep["mode"] = mode_s;
  rep["rho"] = bigint_to_json(r.params.rho, true);
  rep["rho_formula"] = "rho = ceil(norm_f / eps)";
  rep["e"] = bigint_to_json(r.params.e, true);
  rep["e_formula"] = "e = 2^9 rho^2";
  rep["iterations_done"] = bigint_to_json(r.iterations_done, true);
  rep["digits"] = r.digits;
  if (r.bound) {
    rep["bound"] = bigint_to_json(*r.bound, opt.full);
    return {rep, kExitOk};
  }
  rep["bound"] = nullptr;
  rep["budget_exceeded"] = true;
  rep["last_value"] = bigint_to_json(r.last_value, opt.full);
  return {rep, kExitExhausted};
}

inline std::pair<Json, int> run_pointwise_search(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"system", "f", "lambda1", "lambda2", "K", "horizon",
                                 "max_interval"});
  auto [space, T] = detail_cli::system_from_config(cfg);
  Element f = element_from_json(cfg.at("f"), space);
  double l1 = cfg.at("lambda1").get<double>();
  double l2 = cfg.at("lambda2").get<double>();
  GrowthFunction K = growth_from_spec(cfg.at("K").get<std::string>());
  std::size_t horizon = cfg.value("horizon", std::size_t(10000));
  std::size_t max_interval = cfg.value("max_interval", std::size_t(1'000'000));
  DeviationReport r = find_pointwise_stable_n(T, f, l1, l2, K, horizon, max_interval);
  Json rep;
  rep["command"] = "pointwise-search";
  rep["system"] = cfg.at("system");
  rep["lambda1"] = l1;
  rep["lambda2"] = l2;
  rep["K"] = K.name;
  rep["horizon"] = horizon;
  rep["criterion"] = "measure{ max_{n<=m<=K(n)} |A_m f - A_n f| > lambda1 } <= lambda2";
  Json w;
  w["found"] = r.found;
  if (r.found) {
    w["n"] = r.n;
    w["interval_end"] = r.interval_end;
    w["exceptional_measure"] = rational_to_json(r.exceptional_measure);
  } else {
    w["best_n"] = r.best_n;
    w["best_measure"] = rational_to_json(r.best_measure);
  }
  rep["witness"] = w;
  return {rep, r.found ? kExitOk : kExitExhausted};
}

inline std::pair<Json, int> run_pet_bound(const Json& cfg, const CliOptions& opt) {
  detail_cli::require_keys(cfg, {"norm_f2", "lambda1", "lambda2", "K", "digit_budget"});
  double nf = cfg.at("norm_f2").get<double>();
  double l1 = cfg.at("lambda1").get<double>();
  double l2 = cfg.at("lambda2").get<double>();
  GrowthFunction K = growth_from_spec(cfg.at("K").get<std::string>());
  std::size_t budget = cfg.value("digit_budget", opt.digit_budget);
  PetBoundResult r = pet_bound(nf, l1, l2, K, budget);
  Json rep;
  rep["command"] = "pet-bound";
  rep["norm_f2"] = nf;
  rep["lambda1"] = l1;
  rep["lambda2"] = l2;
  rep["K"] = K.name;
  rep["rho"] = bigint_to_json(r.params.rho, true);
  rep["rho_formula"] = "rho = ceil(norm_f2 / (lambda1 sqrt(lambda2)))";
  rep["e"] = bigint_to_json(r.params.e, true);
  rep["e_formula"] = "e = ceil(2^7 norm_f2^2 / (lambda1 sqrt(lambda2)))";
  rep["iterations_done"] = bigint_to_json(r.iterations_done, true);
  rep["digits"] = r.digits;
  if (r.bound) {
    rep["bound"] = bigint_to_json(*r.bound, opt.full);
    return {rep, kExitOk};
  }
  rep["bound"] = nullptr;
  rep["budget_exceeded"] = true;
  rep["last_value"] = bigint_to_json(r.last_value, opt.full);
  return {rep, kExitExhausted};
}

inline std::pair<Json, int> run_maximal_check(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"system", "f", "n", "lambda"});
  auto [space, T] = detail_cli::system_from_config(cfg);
  Element f = element_from_json(cfg.at("f"), space);
  std::size_t n = cfg.at("n").get<std::size_t>();
  MaximalCheck mc = maximal_theorem_check(T, f, n);
  Json rep;
  rep["command"] = "maximal-check";
  rep["system"] = cfg.at("system");
  rep["n"] = n;
  rep["positive_set_atoms"] = mc.set.size();
  rep["integral_over_positive_set"] = rational_to_json(mc.integral);
  rep["integral_nonnegative"] = (mc.integral >= 0);
  if (cfg.contains("lambda")) {
    Rational lambda = rational_from_json(cfg.at("lambda"));
    Rational measure = maximal_set_measure(T, f, n, lambda);
    Rational markov = rational_from_double(norm1(f)) / lambda;
    rep["lambda"] = rational_to_json(lambda);
    rep["maximal_set_measure"] = rational_to_json(measure);
    rep["markov_bound"] = rational_to_json(markov);
    rep["maximal_inequality_holds"] = (measure <= markov);
  }
  return {rep, kExitOk};
}

inline std::pair<Json, int> run_upcrossings(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"system", "f", "alpha", "beta", "N", "k"});
  auto [space, T] = detail_cli::system_from_config(cfg);
  Element f = element_from_json(cfg.at("f"), space);
  Rational alpha = rational_from_json(cfg.at("alpha"));
  Rational beta = rational_from_json(cfg.at("beta"));
  std::size_t N = cfg.at("N").get<std::size_t>();
  BishopCheck bc = bishop_check(T, f, alpha, beta, N);
  Json rep;
  rep["command"] = "upcrossings";
  rep["system"] = cfg.at("system");
  rep["alpha"] = rational_to_json(alpha);
  rep["beta"] = rational_to_json(beta);
  rep["N"] = N;
  Json counts = Json::array();
  for (std::size_t c : bc.counts) counts.push_back(c);
  rep["counts_per_atom"] = counts;
  rep["expected_upcrossings"] = rational_to_json(bc.lhs);
  rep["upper_bound"] = rational_to_json(bc.rhs);
  rep["bound_formula"] = "||max(f - alpha, 0)||_1 / (beta - alpha)";
  rep["inequality_holds"] = bc.holds;
  if (cfg.contains("k")) {
    std::size_t k = cfg.at("k").get<std::size_t>();
    bool nonneg = true;
    for (double v : f.coords) nonneg = nonneg && v >= 0.0;
    if (nonneg && alpha > 0) {
      IvanovCheck iv = ivanov_check(T, f, alpha, beta, k, N);
      Json ivj;
      ivj["k"] = k;
      ivj["measure_at_least_k"] = rational_to_json(iv.measure);
      ivj["bound"] = rational_to_json(iv.bound);
      ivj["bound_formula"] = "(alpha/beta)^k";
      ivj["inequality_holds"] = iv.holds;
      rep["geometric_decay"] = ivj;
    }
  }
  return {rep, kExitOk};
}

inline std::pair<Json, int> run_compare_bounds(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"mode", "norm_f2", "norm_f_inf", "lambda1", "lambda2",
                                 "norm_f", "eps"});
  std::string mode = cfg.value("mode", std::string("lambda"));
  Json rep;
  rep["command"] = "compare-bounds";
  rep["mode"] = mode;
  if (mode == "lambda") {
    double nf2 = cfg.at("norm_f2").get<double>();
    double nfi = cfg.at("norm_f_inf").get<double>();
    double l1 = cfg.at("lambda1").get<double>();
    double l2 = cfg.at("lambda2").get<double>();
    CompareBounds c = compare_bounds_lambda(nf2, nfi, l1, l2);
    rep["general_iterations"] = bigint_to_json(c.first_e, true);
    rep["general_formula"] = "e = ceil(2^7 norm_f2^2 / (lambda1 sqrt(lambda2)))";
    rep["bounded_iterations"] = bigint_to_json(c.second_e, true);
    rep["bounded_formula"] = "e = ceil(2^4 norm_f_inf^2 / (lambda1^2 lambda2))";
    rep["ratio"] = rational_to_json(c.ratio);
    return {rep, kExitOk};
  }
  if (mode == "eps") {
    double nf = cfg.at("norm_f").get<double>();
    double eps = cfg.at("eps").get<double>();
    MeanBoundParams p = mean_bound_params(nf, eps, OperatorMode::Isometry);
    KachurovskiiBound kb = kachurovskii_bound(nf, eps);
    rep["mean_iterations"] = bigint_to_json(p.e, true);
    rep["mean_formula"] = "e = 2^9 rho^2";
    rep["fluctuation_bound"] = bigint_to_json(kb.bound, true);
    rep["fluctuation_formula"] = "ceil((norm/eps)^4 (1 + ln(norm/eps)))";
    return {rep, kExitOk};
  }
  throw std::invalid_argument("compare-bounds: mode must be lambda or eps");
}

inline std::pair<Json, int> run_rate_from_norm(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"system", "f", "norm_fstar", "eps", "max_depth",
                                 "probe_horizon"});
  auto [space, T] = detail_cli::system_from_config(cfg);
  Element f = element_from_json(cfg.at("f"), space);
  double nfstar = cfg.at("norm_fstar").get<double>();
  double eps = cfg.at("eps").get<double>();
  std::size_t max_depth = cfg.value("max_depth", std::size_t(4096));
  RateCertificate cert = rate_from_limit_norm(T, f, nfstar, eps, max_depth);
  Json rep;
  rep["command"] = "rate-from-norm";
  rep["system"] = cfg.at("system");
  rep["norm_fstar"] = nfstar;
  rep["eps"] = eps;
  rep["found"] = cert.found;
  if (!cert.found) {
    rep["trace_cap"] = max_depth;
    rep["a"] = cert.a;
    rep["a_i"] = cert.a_i;
    return {rep, kExitExhausted};
  }
  rep["m"] = cert.m;
  rep["guarantee"] = "||A_m f - A_n f|| <= eps for all n >= m";
  rep["trace_depth"] = cert.trace_depth;
  rep["a"] = cert.a;
  rep["a_i"] = cert.a_i;
  rep["residual"] = cert.residual;
  std::size_t horizon = cfg.value("probe_horizon", std::size_t(0));
  if (horizon > 0) {
    AveragesCache cache(T, f);
    Element am = cache.average(cert.m);
    double sup = 0.0;
    for (std::size_t n = cert.m; n <= horizon; ++n)
      sup = std::max(sup, norm2(sub(cache.average(n), am)));
    rep["probe_horizon"] = horizon;
    rep["probed_sup_deviation"] = sup;
    rep["probe_ok"] = (sup <= eps + 1e-8);
  }
  return {rep, kExitOk};
}

inline std::pair<Json, int> run_specker(const Json& cfg, const CliOptions&) {
  detail_cli::require_keys(cfg, {"table", "N"});
  Json tj = cfg.at("table");
  if (tj.is_string()) tj = Json::parse(tj.get<std::string>());
  HaltingTable table = halting_table_from_json(tj);
  std::size_t N = cfg.at("N").get<std::size_t>();
  SpeckerSystem sys = build_specker_system(N, table);
  Rational norm_sq = specker_norm(sys);
  Rational direct = specker_norm_direct(sys);
  std::vector<bool> bits = recover_halting_bits_from_norm(norm_sq, N);
  Json rep;
  rep["command"] = "specker";
  rep["N"] = N;
  rep["table"] = tj;
  rep["atoms"] = sys.space->atoms();
  rep["norm_sq"] = rational_to_json(norm_sq);
  rep["norm_sq_direct"] = rational_to_json(direct);
  rep["formula_matches_direct"] = (norm_sq == direct);
  Json bj = Json::array();
  for (bool b : bits) bj.push_back(b ? 1 : 0);
  rep["bits"] = bj;
  return {rep, kExitOk};
}

inline std::pair<Json, int> run_config(const Json& cfg, const CliOptions& opt) {
  if (!cfg.is_object() || !cfg.contains("command"))
    throw std::invalid_argument("config: expected object with \"command\"");
  std::string cmd = cfg.at("command").get<std::string>();
  if (cmd == "stability-search") return run_stability_search(cfg, opt);
  if (cmd == "mean-bound") return run_mean_bound(cfg, opt);
  if (cmd == "pointwise-search") return run_pointwise_search(cfg, opt);
  if (cmd == "pet-bound") return run_pet_bound(cfg, opt);
  if (cmd == "maximal-check") return run_maximal_check(cfg, opt);
  if (cmd == "upcrossings") return run_upcrossings(cfg, opt);
  if (cmd == "compare-bounds") return run_compare_bounds(cfg, opt);
  if (cmd == "rate-from-norm") return run_rate_from_norm(cfg, opt);
  if (cmd == "specker") return run_specker(cfg, opt);
  throw std::invalid_argument("unknown command \"" + cmd + "\"");
}

// Run one job, mapping exceptions to exit codes. --verify recomputes the
// report from the same config and requires byte-identical output.
inline std::pair<Json, int> run_job(const Json& cfg, const CliOptions& opt) {
  try {
    auto [rep, code] = run_config(cfg, opt);
    if (opt.verify) {
      auto [rep2, code2] = run_config(cfg, opt);
      bool ok = (rep.dump() == rep2.dump()) && code == code2;
      rep["verified"] = ok;
      if (!ok) code = kExitValidation;
    }
    return {rep, code};
  } catch (const BudgetExceeded& e) {
    return {Json{{"error", e.what()}, {"kind", "budget"}}, kExitExhausted};
  } catch (const std::exception& e) {
    return {Json{{"error", e.what()}, {"kind", "validation"}}, kExitValidation};
  }
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"workbench for quantitative ergodic-average stability bounds"};
  app.require_subcommand(0, 1);

  CliOptions opt;
  std::string config_path, output_path;
  app.add_flag("--full", opt.full, "emit huge integer bounds in full");
  app.add_flag("--verify", opt.verify, "recompute and cross-check each report");
  app.add_option("--jobs", opt.jobs, "concurrent jobs for config arrays")->default_val(1);
  app.add_option("--config", config_path, "JSON config file (object or array of objects)");
  app.add_option("--output", output_path, "write report to this path instead of stdout");
  if (const char* env = std::getenv("ES_DIGIT_BUDGET")) opt.digit_budget = std::stoull(env);

  // Subcommand flags mirror the config keys; values land in a shared json.
  Json cfg;
  auto add_str = [&cfg](CLI::App* sub, const std::string& key, const std::string& desc,
                        bool required = true, bool parse_json = false) {
    auto opt_ = sub->add_option_function<std::string>(
        "--" + key,
        [&cfg, key, parse_json](const std::string& v) {
          cfg[key] = parse_json ? Json::parse(v) : Json(v);
        },
        desc);
    if (required) opt_->required();
  };
  auto add_num = [&cfg](CLI::App* sub, const std::string& key, const std::string& desc,
                        bool required = true) {
    auto opt_ = sub->add_option_function<double>(
        "--" + key, [&cfg, key](double v) { cfg[key] = v; }, desc);
    if (required) opt_->required();
  };
  auto add_int = [&cfg](CLI::App* sub, const std::string& key, const std::string& desc,
                        bool required = true) {
    auto opt_ = sub->add_option_function<std::size_t>(
        "--" + key, [&cfg, key](std::size_t v) { cfg[key] = v; }, desc);
    if (required) opt_->required();
  };

  auto* ss = app.add_subcommand("stability-search", "least n with stable averages on [n, K(n)]");
  add_str(ss, "system", "system recipe JSON", true, true);
  add_str(ss, "f", "coordinates JSON or pattern name", true, true);
  add_num(ss, "eps", "stability threshold");
  add_str(ss, "K", "growth function spec");
  add_int(ss, "horizon", "search horizon", false);

  auto* mb = app.add_subcommand("mean-bound", "norm-stability bound from the growth function");
  add_num(mb, "norm-f", "norm of f");
  add_num(mb, "eps", "stability threshold");
  add_str(mb, "K", "growth function spec");
  add_str(mb, "mode", "isometry (default) or nonexpansive", false);

  auto* ps = app.add_subcommand("pointwise-search",
                                "least n with small exceptional set on [n, K(n)]");
  add_str(ps, "system", "system recipe JSON", true, true);
  add_str(ps, "f", "coordinates JSON or pattern name", true, true);
  add_num(ps, "lambda1", "pointwise deviation threshold");
  add_num(ps, "lambda2", "exceptional measure threshold");
  add_str(ps, "K", "growth function spec");
  add_int(ps, "horizon", "search horizon", false);

  auto* pb = app.add_subcommand("pet-bound", "pointwise-stability bound");
  add_num(pb, "norm-f2", "L2 norm of f");
  add_num(pb, "lambda1", "pointwise deviation threshold");
  add_num(pb, "lambda2", "exceptional measure threshold");
  add_str(pb, "K", "growth function spec");

  auto* mx = app.add_subcommand("maximal-check", "maximal-inequality checks on a system");
  add_str(mx, "system", "system recipe JSON", true, true);
  add_str(mx, "f", "coordinates JSON or pattern name", true, true);
  add_int(mx, "n", "horizon for the running maximum");
  add_str(mx, "lambda", "threshold (rational or decimal)", false);

  auto* uc = app.add_subcommand("upcrossings", "upcrossing counts and their integral bound");
  add_str(uc, "system", "system recipe JSON", true, true);
  add_str(uc, "f", "coordinates JSON or pattern name", true, true);
  add_str(uc, "alpha", "lower level (rational or decimal)");
  add_str(uc, "beta", "upper level (rational or decimal)");
  add_int(uc, "N", "number of averages");
  add_int(uc, "k", "also check geometric decay at this count", false);

  auto* cb = app.add_subcommand("compare-bounds", "iteration counts of competing bounds");
  add_str(cb, "mode", "lambda or eps");
  add_num(cb, "norm-f2", "L2 norm (lambda mode)", false);
  add_num(cb, "norm-f-inf", "sup norm (lambda mode)", false);
  add_num(cb, "lambda1", "threshold (lambda mode)", false);
  add_num(cb, "lambda2", "measure threshold (lambda mode)", false);
  add_num(cb, "norm-f", "norm (eps mode)", false);
  add_num(cb, "eps", "threshold (eps mode)", false);

  auto* rf = app.add_subcommand("rate-from-norm", "convergence-rate certificate from ||f*||");
  add_str(rf, "system", "system recipe JSON", true, true);
  add_str(rf, "f", "coordinates JSON or pattern name", true, true);
  add_num(rf, "norm-fstar", "norm of the invariant part");
  add_num(rf, "eps", "target accuracy");
  add_int(rf, "probe-horizon", "empirically probe the certificate up to here", false);

  auto* sp = app.add_subcommand("specker", "halting bits encoded in an exact limit norm");
  add_str(sp, "table", "halting table JSON {\"i\": j}", true, true);
  add_int(sp, "N", "number of blocks");

  // allow global flags (--output, --full, ...) to appear after subcommand flags
  for (auto* sub : {ss, mb, ps, pb, mx, uc, cb, rf, sp}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  } catch (const Json::parse_error& e) {
    std::cerr << "invalid JSON argument: " << e.what() << "\n";
    return kExitValidation;
  }

  // Collect configs: from --config file, or from the parsed subcommand flags.
  std::vector<Json> configs;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << "\n";
      return kExitValidation;
    }
    Json loaded;
    try {
      in >> loaded;
    } catch (const Json::parse_error& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      return kExitValidation;
    }
    if (loaded.is_array())
      for (auto& c : loaded) configs.push_back(c);
    else
      configs.push_back(loaded);
  } else {
    std::string cmd;
    for (auto* sub : {ss, mb, ps, pb, mx, uc, cb, rf, sp})
      if (sub->parsed()) cmd = sub->get_name();
    if (cmd.empty()) {
      std::cerr << app.help();
      return kExitValidation;
    }
    // flag spellings use dashes; config keys use underscores
    Json normalized;
    normalized["command"] = cmd;
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      std::string key = it.key();
      for (auto& ch : key)
        if (ch == '-') ch = '_';
      normalized[key] = it.value();
    }
    configs.push_back(normalized);
  }

  // Run jobs (concurrently when asked), keeping report order stable.
  std::vector<std::pair<Json, int>> results(configs.size());
  if (opt.jobs > 1 && configs.size() > 1) {
    std::vector<std::future<std::pair<Json, int>>> futures;
    futures.reserve(configs.size());
    for (const auto& c : configs)
      futures.push_back(std::async(std::launch::async, [&c, &opt] { return run_job(c, opt); }));
    for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i) results[i] = run_job(configs[i], opt);
  }

  Json out;
  int code = kExitOk;
  if (results.size() == 1) {
    out = results[0].first;
    code = results[0].second;
  } else {
    out = Json::array();
    for (auto& [rep, rc] : results) {
      out.push_back(rep);
      code = std::max(code, rc);
    }
  }
  std::string text = out.dump(2) + "\n";
  if (!output_path.empty()) {
    std::ofstream of(output_path);
    of << text;
  } else {
    std::cout << text;
  }
  return code;
}

}  // namespace ergostab
