// Command-line front end: bajmean <subcommand> ...
//
// Exit codes: 0 success (check-equal: equal), 1 check-equal not equal or
// verify-smf failure, 2 check-equal inconclusive, 64 usage error, 65 spec or
// domain error.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <bajmean/bajmean.hpp>
#include <bajmean/specio.hpp>

namespace {

using namespace bajmean;
using nlohmann::json;

constexpr int kExitUsage = 64;
constexpr int kExitSpec = 65;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  double tol = 1e-7;
  std::size_t grid = 64;
  std::uint64_t seed = 42;
  bool tol_set = false;
};

// A solver result a hair below zero would print as "-0.000..."; drop the sign.
void print_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15f", v);
  const char* text = buf;
  if (buf[0] == '-' && std::strspn(buf + 1, "0.") == std::strlen(buf + 1)) ++text;
  std::printf("%s\n", text);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_eval(const std::string& path, const std::vector<double>& x) {
  const MeanSpec spec = make_mean(load_spec(path));
  if (x.size() != spec.arity()) {
    throw UsageError("expected " + std::to_string(spec.arity()) + " coordinates, got " +
                     std::to_string(x.size()));
  }
  print_number(mean_eval(spec, x, kFineSolver));
  return 0;
}

int cmd_invert(const std::string& path, double y) {
  const LeftInverse inv(make_generator(load_spec(path)), kFineSolver);
  print_number(inv(y));
  return 0;
}

int cmd_derivs(const std::string& path, double x, int order) {
  if (order < 1 || order > 3) throw UsageError("--order must be 1, 2 or 3");
  const MeanSpec spec = make_mean(load_spec(path));
  json rows = json::array();
  for (const MultiIndex& idx : diagonal_indices(spec.arity(), static_cast<std::size_t>(order))) {
    const double formula = diag_partial(spec, idx, x);
    const double fd = fd_partial(spec, idx, x);
    const double rel = std::fabs(formula - fd) / std::max(std::fabs(formula), 1.0);
    rows.push_back({{"index", format_index(idx)},
                    {"formula", number_or_null(formula)},
                    {"fd", number_or_null(fd)},
                    {"rel_error", number_or_null(rel)}});
  }
  emit({{"x", x}, {"rows", rows}});
  return 0;
}

int cmd_transform(const std::string& path, const std::vector<double>& m, const std::string& out) {
  const MeanSpec spec = make_mean(load_spec(path));
  const MeanSpec g = mobius_transform(spec, {m[0], m[1], m[2], m[3]});
  const json j = to_json(g);
  if (out.empty()) {
    emit(j);
  } else {
    std::ofstream f(out);
    if (!f) throw SpecError("cannot write " + out);
    f << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_check_equal(const std::string& a_path, const std::string& b_path, const Globals& g) {
  const MeanSpec a = make_mean(load_spec(a_path));
  const MeanSpec b = make_mean(load_spec(b_path));
  DecisionConfig cfg;
  cfg.grid = g.grid;
  cfg.seed = g.seed;
  if (g.tol_set) {
    cfg.tol.pass = g.tol;
    cfg.tol.fail = std::max(cfg.tol.fail, 10.0 * g.tol);
  }
  const EqualityVerdict v = decide_equality(a, b, cfg);
  json j{{"status", to_string(v.status)}, {"seed", cfg.seed}, {"grid", cfg.grid}};
  if (v.witness) {
    j["witness"] = {{"a", v.witness->a}, {"b", v.witness->b}, {"c", v.witness->c},
                    {"d", v.witness->d}};
    j["gamma"] = v.gamma;
  }
  if (!v.failed_check.empty()) j["failed_check"] = v.failed_check;
  if (!v.counterexample.empty()) j["counterexample"] = v.counterexample;
  if (!v.reason.empty()) j["reason"] = v.reason;
  json res = json::object();
  for (const auto& [name, r] : v.residuals) res[name] = number_or_null(r);
  j["residuals"] = res;
  emit(j);
  switch (v.status) {
    case VerdictStatus::Equal:
      return 0;
    case VerdictStatus::NotEqual:
      return 1;
    default:
      return 2;
  }
}

int cmd_make_exceptional(const std::string& path, const std::vector<double>& P,
                         const std::vector<double>& Q, double alpha, double beta,
                         const std::string& out_a, const std::string& out_b) {
  const MonotoneFn f = make_generator(load_spec(path));
  const ExceptionalPair pair =
      exceptional_construct(f, {P[0], P[1], P[2]}, {Q[0], Q[1], Q[2]}, alpha, beta);
  const json a = to_json(pair.first);
  const json b = to_json(pair.second);
  auto write = [](const std::string& where, const json& j) {
    if (where.empty()) return;
    std::ofstream o(where);
    if (!o) throw SpecError("cannot write " + where);
    o << j.dump(2) << '\n';
  };
  write(out_a, a);
  write(out_b, b);
  emit({{"first", a},
        {"second", b},
        {"F", to_string(pair.F)},
        {"G", to_string(pair.G)},
        {"discrepancy", pair.discrepancy},
        {"verified", pair.verified}});
  return pair.verified ? 0 : 1;
}

int cmd_verify_smf(const std::string& path, const Globals& g) {
  const MonotoneFn f = make_generator(load_spec(path));
  const LeftInverse inv(f);
  const SmfReport r = verify_smf(f, inv, g.grid, g.tol_set ? g.tol : 1e-10);
  emit({{"smf1", {{"pass", r.smf1_pass}, {"residual", r.smf1_residual}}},
        {"smf2", {{"pass", r.smf2_pass}, {"residual", r.smf2_residual}, {"checked", r.smf2_checked}}},
        {"smf3", {{"pass", r.smf3_pass}, {"residual", r.smf3_residual}, {"gap_points", r.gap_points}}},
        {"pass", r.all_pass()}});
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Bajraktarevic means: evaluation, derivatives, equality"};
  app.require_subcommand(1);
  Globals g;
  auto* tol_opt = app.add_option("--tol", g.tol, "pass tolerance for grid checks")
                      ->check(CLI::PositiveNumber);
  app.add_option("--grid", g.grid, "grid size for checks")->check(CLI::Range(2, 1 << 20));
  app.add_option("--seed", g.seed, "seed for random sampling");

  std::string spec_a, spec_b, out, out_b;
  std::vector<double> xs, mobius, P, Q;
  double scalar = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  int order = 3;

  auto* eval = app.add_subcommand("eval", "mean value at a point");
  eval->add_option("spec", spec_a)->required();
  eval->add_option("x", xs)->required();

  auto* invert = app.add_subcommand("invert", "generalized left inverse of the generator");
  invert->add_option("spec", spec_a)->required();
  invert->add_option("y", scalar)->required();

  auto* derivs = app.add_subcommand("derivs", "diagonal partial derivatives with FD check");
  derivs->add_option("spec", spec_a)->required();
  derivs->add_option("x", scalar)->required();
  derivs->add_option("--order", order, "highest order (1-3)");

  auto* transform = app.add_subcommand("transform", "Möbius transform of a spec");
  transform->add_option("spec", spec_a)->required();
  transform->add_option("abcd", mobius)->required()->expected(4);
  transform->add_option("--out", out, "write the transformed spec here");

  auto* check = app.add_subcommand("check-equal", "decide whether two means coincide");
  check->add_option("specA", spec_a)->required();
  check->add_option("specB", spec_b)->required();

  auto* exceptional = app.add_subcommand("make-exceptional", "symmetric non-Möbius pair");
  exceptional->add_option("spec", spec_a, "generator spec for f")->required();
  exceptional->add_option("--P", P, "c0 c1 c2")->required()->expected(3);
  exceptional->add_option("--Q", Q, "c0 c1 c2")->required()->expected(3);
  exceptional->add_option("--alpha", alpha);
  exceptional->add_option("--beta", beta);
  exceptional->add_option("--out-a", out, "write the first spec here");
  exceptional->add_option("--out-b", out_b, "write the second spec here");

  auto* smf = app.add_subcommand("verify-smf", "check the left-inverse identities");
  smf->add_option("spec", spec_a)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  g.tol_set = tol_opt->count() > 0;

  try {
    if (*eval) return cmd_eval(spec_a, xs);
    if (*invert) return cmd_invert(spec_a, scalar);
    if (*derivs) return cmd_derivs(spec_a, scalar, order);
    if (*transform) return cmd_transform(spec_a, mobius, out);
    if (*check) return cmd_check_equal(spec_a, spec_b, g);
    if (*exceptional) return cmd_make_exceptional(spec_a, P, Q, alpha, beta, out, out_b);
    if (*smf) return cmd_verify_smf(spec_a, g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const bajmean::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSpec;
  }
  return kExitUsage;
}
