#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cli_internal.hpp"
#include "ehrenfest/case_studies.hpp"
#include "ehrenfest/errors.hpp"
#include "ehrenfest/hitting_engine.hpp"
#include "ehrenfest/oracle.hpp"
#include "ehrenfest/precision.hpp"
#include "ehrenfest/simulator.hpp"
#include "ehrenfest/special_functions.hpp"

namespace ehrenfest::cli {

namespace {

// A reported number: exact when available, always with a double.
struct Value {
  std::optional<Rational> exact;
  double approx = 0.0;
  std::string rendered;  // lambda-domain values only

  static Value of(const Rational& r) { return {r, r.to_double(), {}}; }
  static Value floating(double d) { return {std::nullopt, d, {}}; }

  std::string text() const {
    if (!rendered.empty()) return rendered;
    return exact ? exact->to_string() : double_text(approx);
  }
  json to_json() const {
    if (!rendered.empty()) return {{"value", rendered}, {"approx", approx}};
    return {{"exact", exact ? json(exact->to_string()) : json(nullptr)}, {"approx", approx}};
  }
};

using Labeled = std::vector<std::pair<std::string, Value>>;

struct CaseReport {
  std::string set;
  std::string start;
  std::size_t target_size = 0;
  bool start_in_target = false;
  std::string method;
  Value mean;
  Value variance;
  std::vector<Value> moments;
  Value ctmc_mean;
  Value ctmc_variance;
  Labeled transform_u;
  Labeled transform_lambda;
  std::optional<Labeled> exit;

  json to_json() const {
    json j;
    j["case"] = {{"set", set},
                 {"start", start},
                 {"target_size", target_size},
                 {"start_in_target", start_in_target},
                 {"method", method}};
    j["mean"] = mean.to_json();
    j["variance"] = variance.to_json();
    j["raw_moments"] = json::array();
    for (const auto& m : moments) j["raw_moments"].push_back(m.to_json());
    j["ctmc"] = {{"mean", ctmc_mean.to_json()}, {"variance", ctmc_variance.to_json()}};
    j["transform_u"] = json::array();
    for (const auto& [u, v] : transform_u) {
      json e = v.to_json();
      e["u"] = u;
      j["transform_u"].push_back(std::move(e));
    }
    j["transform_lambda"] = json::array();
    for (const auto& [l, v] : transform_lambda) {
      json e = v.to_json();
      e["lambda"] = l;
      j["transform_lambda"].push_back(std::move(e));
    }
    if (exit) {
      j["exit_distribution"] = json::array();
      for (const auto& [s, v] : *exit) {
        json e = v.to_json();
        e["state"] = s;
        j["exit_distribution"].push_back(std::move(e));
      }
    }
    return j;
  }

  // Column selects where the values go: exact or oracle.
  void to_rows(std::vector<Row>& rows, bool oracle_column) const {
    const std::string name = set + "@" + start;
    auto add = [&](const std::string& q, const Value& v) {
      Row r;
      r.case_name = name;
      r.quantity = q;
      (oracle_column ? r.oracle : r.exact) = v.text();
      rows.push_back(std::move(r));
    };
    add("mean", mean);
    add("variance", variance);
    for (std::size_t m = 0; m < moments.size(); ++m) add("moment_" + std::to_string(m + 1), moments[m]);
    add("ctmc_mean", ctmc_mean);
    add("ctmc_variance", ctmc_variance);
    for (const auto& [u, v] : transform_u) add("laplace_u(" + u + ")", v);
    for (const auto& [l, v] : transform_lambda) add("laplace_lambda(" + l + ")", v);
    if (exit) {
      for (const auto& [s, v] : *exit) add("exit" + s, v);
    }
  }
};

std::string case_label(const SetDescriptor& d, const State& x) { return d.to_string() + "@" + x.to_string(); }

std::optional<Labeled> case_study_exit(const ModelParams& params, const State& x, const SetDescriptor& d,
                                       const std::vector<State>& targets) {
  Labeled out;
  switch (d.kind) {
    case SetKind::Singleton:
      out.emplace_back(targets[0].to_string(), Value::of(Rational(1)));
      return out;
    case SetKind::Pair: {
      const auto s = cases::two_point_stats(params, x, targets[0], targets[1]);
      out.emplace_back(targets[0].to_string(), Value::of(s.exit_prob_y));
      out.emplace_back(targets[1].to_string(), Value::of(Rational(1) - s.exit_prob_y));
      return out;
    }
    case SetKind::Diagonal: {
      const auto s = cases::same_urn_stats(params, x);
      for (int i = 1; i <= params.urns; ++i) {
        out.emplace_back(State::constant(params.balls, i).to_string(), Value::of(s.exit[i - 1]));
      }
      return out;
    }
    default:
      return std::nullopt;
  }
}

CaseReport engine_case(const Request& req, const ModelParams& params, const State& x, const SetDescriptor& d) {
  const HittingProblem p({params, x, d});
  CaseReport c;
  c.set = d.to_string();
  c.start = x.to_string();
  c.target_size = p.targets().size();
  c.start_in_target = p.start_in_target();
  c.method = "closed-form";
  c.mean = Value::of(p.mean());
  c.variance = Value::of(p.variance());
  for (const auto& m : p.raw_moments(req.order)) c.moments.push_back(Value::of(m));
  const auto ctmc = p.ctmc_stats();
  c.ctmc_mean = Value::of(ctmc.mean);
  c.ctmc_variance = Value::of(ctmc.variance);
  for (const auto& u : req.u_grid()) c.transform_u.emplace_back(u.to_string(), Value::of(p.laplace_u(u)));
  const auto lambdas = req.lambda_grid();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto lv = p.laplace_lambda(lambdas[i], req.digits);
    c.transform_lambda.emplace_back(req.lambdas[i], Value{std::nullopt, lv.approx, lv.rendered});
  }
  c.exit = case_study_exit(params, x, d, p.targets());
  return c;
}

void check_oracle_size(const ModelParams& params, std::uint64_t cap) {
  const std::uint64_t count = params.state_count();
  if (count > cap && count > oracle::kFloatCap) {
    throw CapExceededError(count, cap,
                           "state space N^M = " +
                               (count == std::numeric_limits<std::uint64_t>::max() ? std::string(">= 2^64")
                                                                                   : std::to_string(count)) +
                               " exceeds the exact cap " + std::to_string(cap) + " and the float limit " +
                               std::to_string(oracle::kFloatCap));
  }
}

CaseReport oracle_case(const Request& req, const ModelParams& params, const State& x, const SetDescriptor& d) {
  const auto targets = materialize(d, params);
  check_oracle_size(params, req.cap);
  const oracle::EnumeratedChain chain(params, std::max(req.cap, oracle::kFloatCap));
  CaseReport c;
  c.set = d.to_string();
  c.start = x.to_string();
  c.target_size = targets.size();
  c.start_in_target = std::binary_search(targets.begin(), targets.end(), x);
  const int order = std::max(req.order, 2);
  const Rational m(params.balls);
  const auto lambdas = req.lambda_grid();

  if (params.state_count() <= req.cap) {
    c.method = "exact-elimination";
    oracle::ExactHittingOracle o(chain, targets, req.cap);
    const auto moments = o.raw_moments(x, order);
    const Rational var = moments[1] - moments[0] * moments[0];
    c.mean = Value::of(moments[0]);
    c.variance = Value::of(var);
    for (int i = 0; i < req.order; ++i) c.moments.push_back(Value::of(moments[i]));
    c.ctmc_mean = Value::of(moments[0] / m);
    c.ctmc_variance = Value::of((var + moments[0]) / (m * m));
    for (const auto& u : req.u_grid()) c.transform_u.emplace_back(u.to_string(), Value::of(o.transform(x, m / (u + m))));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const Rational v = lambdas[i].is_zero() ? Rational(1) : o.transform(x, exp_neg(lambdas[i], req.digits));
      c.transform_lambda.emplace_back(req.lambdas[i], Value{std::nullopt, v.to_double(), render_significant(v, req.digits)});
    }
    Labeled exit;
    for (const auto& [s, p] : o.exit_distribution(x)) exit.emplace_back(s.to_string(), Value::of(p));
    c.exit = std::move(exit);
  } else {
    c.method = "float-cg";
    oracle::FloatHittingOracle o(chain, targets);
    const auto moments = o.raw_moments(x, order);
    const double var = moments[1] - moments[0] * moments[0];
    const double md = params.balls;
    c.mean = Value::floating(moments[0]);
    c.variance = Value::floating(var);
    for (int i = 0; i < req.order; ++i) c.moments.push_back(Value::floating(moments[i]));
    c.ctmc_mean = Value::floating(moments[0] / md);
    c.ctmc_variance = Value::floating((var + moments[0]) / (md * md));
    for (const auto& u : req.u_grid()) {
      const double ud = u.to_double();
      c.transform_u.emplace_back(u.to_string(), Value::floating(o.transform(x, md / (ud + md))));
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const double l = lambdas[i].to_double();
      c.transform_lambda.emplace_back(req.lambdas[i], Value::floating(l == 0.0 ? 1.0 : o.transform(x, std::exp(-l))));
    }
    Labeled exit;
    for (const auto& [s, p] : o.exit_distribution(x)) exit.emplace_back(s.to_string(), Value::floating(p));
    c.exit = std::move(exit);
  }
  return c;
}

sim::SimConfig sim_config(const Request& req) {
  sim::SimConfig cfg;
  cfg.replicas = req.replicas;
  cfg.seed = req.seed;
  cfg.mode = sim::parse_mode(req.mode);
  cfg.max_steps = req.max_steps;
  cfg.workers = req.workers;
  for (const auto& s : req.lambdas) cfg.lambda_grid.push_back(Rational::parse(s).to_double());
  for (const auto& s : req.us) cfg.u_grid.push_back(Rational::parse(s).to_double());
  cfg.validate();
  return cfg;
}

json summary_json(const sim::SimSummary& s, const sim::SimConfig& cfg) {
  json j = {{"mode", sim::to_string(s.mode)},
            {"seed", s.seed},
            {"replicas", s.replicas},
            {"max_steps", cfg.max_steps},
            {"truncated", s.truncated},
            {"used", s.used},
            {"mean", s.mean},
            {"variance", s.variance},
            {"stderr", s.stderr_}};
  j["transforms"] = json::array();
  for (const auto& t : s.transforms) {
    j["transforms"].push_back({{"argument", t.argument}, {"estimate", t.estimate}, {"stderr", t.stderr_}});
  }
  return j;
}

bool within_stderr(double estimate, double stderr_, double exact) {
  return std::abs(estimate - exact) <= 4.0 * stderr_;
}

struct CaseSpec {
  SetDescriptor descriptor;
  std::vector<State> starts;
};

std::vector<CaseSpec> sweep_cases(const ModelParams& params) {
  const auto all = enumerate_states(params);
  std::vector<State> starts{all.front(), all[all.size() / 2], all.back()};
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  std::vector<CaseSpec> out;
  out.push_back({SetDescriptor::singleton(State::constant(params.balls, 2)), starts});
  out.push_back({SetDescriptor::pair(State::constant(params.balls, 1), State::constant(params.balls, 2)), starts});
  out.push_back({SetDescriptor::diagonal(), starts});
  for (int h = 0; h <= params.balls; ++h) out.push_back({SetDescriptor::count(h), starts});
  if (params.balls <= params.urns) out.push_back({SetDescriptor::distinct(), starts});
  return out;
}

void network_verdicts(Report& report, const ModelParams& params, int h, int k) {
  const auto c = cases::network_commute_check(params, h, k);
  const std::string name = "N=" + std::to_string(params.urns) + ",M=" + std::to_string(params.balls);
  const std::string q = "commute(" + std::to_string(h) + "," + std::to_string(k) + ")";
  Row row;
  row.exact = c.lhs.to_string();
  row.oracle = c.rhs.to_string();
  report.verdict(name, q, "network_identity", c.equal && c.lhs == c.rhs,
                 {{"lhs", c.lhs.to_string()}, {"rhs", c.rhs.to_string()}}, std::move(row));
}

}  // namespace

Report cmd_exact(const Request& req) {
  const auto params = req.params();
  const auto c = engine_case(req, params, req.start_state(params), req.descriptor());
  Report r;
  r.results = c.to_json();
  c.to_rows(r.rows, false);
  return r;
}

Report cmd_oracle(const Request& req) {
  const auto params = req.params();
  const auto c = oracle_case(req, params, req.start_state(params), req.descriptor());
  Report r;
  r.results = c.to_json();
  c.to_rows(r.rows, true);
  return r;
}

Report cmd_simulate(const Request& req) {
  const auto params = req.params();
  const State x = req.start_state(params);
  const auto d = req.descriptor();
  const auto cfg = sim_config(req);
  const auto s = sim::sample_hitting(params, x, d, cfg);
  Report r;
  r.results = summary_json(s, cfg);
  r.results["case"] = {{"set", d.to_string()}, {"start", x.to_string()}};
  const std::string name = case_label(d, x);
  auto add = [&](const std::string& q, double mean, double se) {
    Row row;
    row.case_name = name;
    row.quantity = q;
    row.mc_mean = double_text(mean);
    row.mc_stderr = double_text(se);
    r.rows.push_back(std::move(row));
  };
  add(cfg.mode == sim::Mode::Discrete ? "mean" : "ctmc_mean", s.mean, s.stderr_);
  for (const auto& t : s.transforms) {
    add(std::string(cfg.mode == sim::Mode::Discrete ? "laplace_lambda(" : "laplace_u(") + double_text(t.argument) + ")",
        t.estimate, t.stderr_);
  }
  return r;
}

Report cmd_compare(const Request& req) {
  const auto params = req.params();
  std::vector<CaseSpec> specs;
  const bool sweep = req.set.empty() && req.start.empty();
  if (sweep) {
    specs = sweep_cases(params);
  } else {
    specs.push_back({req.descriptor(), {req.start_state(params)}});
  }
  if (params.state_count() > req.cap) {
    throw CapExceededError(params.state_count(), req.cap,
                           "compare needs the exact oracle: N^M = " + std::to_string(params.state_count()) +
                               " exceeds cap " + std::to_string(req.cap));
  }
  auto u_grid = req.u_grid();
  if (u_grid.empty()) u_grid = {Rational(1, 2), Rational(1), Rational(2)};
  std::vector<std::pair<std::string, Rational>> lambda_grid;
  if (req.lambdas.empty()) {
    for (const char* s : {"0.1", "0.5", "1", "2"}) lambda_grid.emplace_back(s, Rational::parse(s));
  } else {
    const auto parsed = req.lambda_grid();
    for (std::size_t i = 0; i < parsed.size(); ++i) lambda_grid.emplace_back(req.lambdas[i], parsed[i]);
  }
  const int order = std::max(req.order, 2);
  const Rational m(params.balls);
  const oracle::EnumeratedChain chain(params, std::max(req.cap, oracle::kFloatCap));
  sim::SimConfig cfg;
  cfg.replicas = req.replicas;
  cfg.max_steps = req.max_steps;
  cfg.workers = req.workers;

  Report report;
  report.results["cases"] = json::array();
  std::uint64_t case_index = 0;
  for (const auto& spec : specs) {
    const auto targets = materialize(spec.descriptor, params);
    oracle::ExactHittingOracle o(chain, targets, req.cap);
    for (const auto& x : spec.starts) {
      const std::string name = case_label(spec.descriptor, x);
      const HittingProblem p({params, x, spec.descriptor});
      auto exact_vs_oracle = [&](const std::string& q, const Rational& e, const Rational& orc) {
        Row row;
        row.exact = e.to_string();
        row.oracle = orc.to_string();
        report.verdict(name, q, "exact_vs_oracle", e == orc, {{"exact", e.to_string()}, {"oracle", orc.to_string()}},
                       std::move(row));
      };

      auto moments = p.raw_moments(order);
      Rational mean = p.mean();
      if (req.corrupt_engine) {
        mean += Rational(1, 1000);
        moments[0] = mean;
      }
      const auto orc_moments = o.raw_moments(x, order);
      exact_vs_oracle("mean", mean, orc_moments[0]);
      exact_vs_oracle("variance", p.variance(), orc_moments[1] - orc_moments[0] * orc_moments[0]);
      for (int i = 0; i < order; ++i) exact_vs_oracle("moment_" + std::to_string(i + 1), moments[i], orc_moments[i]);
      for (const auto& u : u_grid) {
        exact_vs_oracle("laplace_u(" + u.to_string() + ")", p.laplace_u(u), o.transform(x, m / (u + m)));
      }
      for (const auto& [label, l] : lambda_grid) {
        const auto lv = p.laplace_lambda(l, req.digits);
        const Rational orc = l.is_zero() ? Rational(1) : o.transform(x, exp_neg(l, req.digits));
        const Rational rel = orc.is_zero() ? abs(lv.value) : abs(lv.value - orc) / abs(orc);
        Row row;
        row.exact = lv.rendered;
        row.oracle = render_significant(orc, req.digits);
        report.verdict(name, "laplace_lambda(" + label + ")", "transform_identity",
                       rel <= Rational::parse("1e-15"),
                       {{"exact", lv.rendered}, {"oracle", render_significant(orc, req.digits)},
                        {"relative_error", rel.to_double()}},
                       std::move(row));
      }
      if (auto exit = case_study_exit(params, x, spec.descriptor, p.targets())) {
        const auto orc_exit = o.exit_distribution(x);
        for (std::size_t i = 0; i < orc_exit.size(); ++i) {
          exact_vs_oracle("exit" + orc_exit[i].first.to_string(), *(*exit)[i].second.exact, orc_exit[i].second);
        }
      }
      if (spec.descriptor.kind == SetKind::Count) {
        const int level = overlap(x, State::constant(params.balls, spec.descriptor.reference_urn));
        const Rational lumped =
            oracle::lumped_count_oracle(params, spec.descriptor.reference_urn, level, spec.descriptor.level);
        Row row;
        row.oracle = orc_moments[0].to_string();
        row.exact = lumped.to_string();
        report.verdict(name, "lumped_mean", "full_vs_lumped_oracle", lumped == orc_moments[0],
                       {{"full", orc_moments[0].to_string()}, {"lumped", lumped.to_string()}}, std::move(row));
      }

      json mc = json::object();
      for (const auto mode : {sim::Mode::Discrete, sim::Mode::Ctmc}) {
        cfg.mode = mode;
        cfg.seed = req.seed + 0x9e3779b97f4a7c15ULL * (2 * case_index + (mode == sim::Mode::Ctmc ? 1 : 0));
        const auto s = sim::sample_hitting(params, x, spec.descriptor, cfg);
        const Rational target = mode == sim::Mode::Discrete ? mean : mean / m;
        const bool pass = s.used > 0 && within_stderr(s.mean, s.stderr_, target.to_double());
        Row row;
        row.exact = target.to_string();
        row.mc_mean = double_text(s.mean);
        row.mc_stderr = double_text(s.stderr_);
        report.verdict(name, mode == sim::Mode::Discrete ? "mean" : "ctmc_mean", "exact_vs_mc", pass,
                       {{"exact", target.to_string()},
                        {"mc_mean", s.mean},
                        {"mc_stderr", s.stderr_},
                        {"seed", cfg.seed},
                        {"truncated", s.truncated}},
                       std::move(row));
        mc[sim::to_string(mode)] = summary_json(s, cfg);
      }
      report.results["cases"].push_back({{"case", name}, {"monte_carlo", mc}});
      ++case_index;
    }
  }
  if (sweep) {
    for (int k = 1; k <= params.balls; ++k) {
      for (int h = 0; h < k; ++h) network_verdicts(report, params, h, k);
    }
  } else if (specs.front().descriptor.kind == SetKind::Count) {
    const auto& d = specs.front().descriptor;
    const int level = overlap(specs.front().starts.front(), State::constant(params.balls, d.reference_urn));
    if (level != d.level) network_verdicts(report, params, std::min(level, d.level), std::max(level, d.level));
  }
  report.results["summary"] = {{"checks", report.verdicts ? report.verdicts->size() : 0},
                               {"failed", std::count_if(report.rows.begin(), report.rows.end(),
                                                        [](const Row& r) { return r.verdict == "fail"; })}};
  return report;
}

Report cmd_identities(const Request& req) {
  std::vector<ModelParams> grid;
  if (req.has_params()) {
    grid.push_back(req.params());
  } else {
    for (int n = 2; n <= 6; ++n) {
      for (int mm = 1; mm <= 8; ++mm) grid.push_back({n, mm});
    }
  }
  Report report;
  for (const auto& params : grid) {
    const int n = params.urns;
    const int mb = params.balls;
    const std::string name = "N=" + std::to_string(n) + ",M=" + std::to_string(mb);
    auto equal = [&](const std::string& q, const Rational& lhs, const Rational& rhs) {
      Row row;
      row.exact = lhs.to_string();
      row.oracle = rhs.to_string();
      report.verdict(name, q, "exact_identity", lhs == rhs, {{"lhs", lhs.to_string()}, {"rhs", rhs.to_string()}},
                     std::move(row));
    };
    auto g_at_zero = [&](int k) { return g_k({params, k}, Rational(0)); };

    for (const Rational& a : {Rational(0), Rational(n - 1), Rational(-1), Rational(1, 2), Rational(2)}) {
      const auto s = series_identity_sides(params, a);
      equal("series_first(a=" + a.to_string() + ")", s.first_lhs, s.first_rhs);
      equal("series_second(a=" + a.to_string() + ")", s.second_lhs, s.second_rhs);
    }
    const auto closed = g_closed_forms(params);
    equal("g0_closed_form", closed.g0, g_at_zero(0));
    equal("gM_closed_form", closed.gM, g_at_zero(mb));
    Rational telescoped = closed.g0;
    for (int k = 0; k < mb; ++k) {
      equal("gap(" + std::to_string(k) + ")", closed.gaps[k], g_at_zero(k + 1) - g_at_zero(k));
      telescoped += closed.gaps[k];
    }
    equal("telescoping", telescoped, closed.gM);
    equal("g1_minus_g0", g_at_zero(1) - g_at_zero(0), Rational(1, mb));

    Rational outer(0);
    for (int i = 1; i <= mb; ++i) {
      Rational inner(0);
      for (int j = 1; j <= i; ++j) inner += pow(Rational(n), j) / Rational(j);
      outer += inner / Rational(i);
    }
    equal("derivative_gap", g_derivative({params, 0}, 1) - g_derivative({params, mb}, 1),
          Rational(n - 1) / Rational(n * n) * outer);

    const Rational p(1, n - 1);
    for (int m = 0; m < mb; ++m) {
      Rational expectation(0);
      for (int j = 0; j <= m; ++j) {
        expectation += Rational(binomial(m, j)) * pow(p, j) * pow(Rational(1) - p, m - j) *
                       (g_at_zero(j + 1) - g_at_zero(j));
      }
      equal("binomial(m=" + std::to_string(m) + ")", binomial_gap_expectation(params, m), expectation);
    }

    for (int k = 0; k <= mb; ++k) {
      for (const Rational& u : {Rational(1, 4), Rational(1), Rational(4)}) {
        const double exact = f_k({params, k}, u).to_double();
        const double quad = f_k_quadrature({params, k}, u.to_double());
        Row row;
        row.exact = double_text(exact);
        row.oracle = double_text(quad);
        report.verdict(name, "quadrature(k=" + std::to_string(k) + ",u=" + u.to_string() + ")", "abs_tol_1e-8",
                       std::abs(exact - quad) <= 1e-8, {{"sum", exact}, {"quadrature", quad}}, std::move(row));
      }
    }
  }
  report.results["grid"] = json::array();
  for (const auto& p : grid) report.results["grid"].push_back({{"N", p.urns}, {"M", p.balls}});
  return report;
}

Report cmd_network_check(const Request& req) {
  const auto params = req.params();
  Report report;
  if (req.h.has_value() != req.k.has_value()) throw UsageError("network-check needs both --h and --k, or neither");
  if (req.h) {
    if (!(0 <= *req.h && *req.h < *req.k && *req.k <= params.balls)) {
      throw UsageError("network-check needs 0 <= h < k <= M");
    }
    network_verdicts(report, params, *req.h, *req.k);
  } else {
    for (int k = 1; k <= params.balls; ++k) {
      for (int h = 0; h < k; ++h) network_verdicts(report, params, h, k);
    }
  }
  report.results["checks"] = report.verdicts->size();
  return report;
}

}  // namespace ehrenfest::cli
