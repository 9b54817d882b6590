#include "ehrenfest/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cli_internal.hpp"
#include "ehrenfest/errors.hpp"
#include "ehrenfest/oracle.hpp"

namespace ehrenfest::cli {

json Request::echo() const {
  json j;
  j["subcommand"] = subcommand;
  j["N"] = urns;
  j["M"] = balls;
  j["start"] = start.empty() ? json(nullptr) : json(start);
  j["set"] = set.empty() ? json(nullptr) : json(set);
  j["lambda"] = lambdas;
  j["u"] = us;
  j["order"] = order;
  j["replicas"] = replicas;
  j["seed"] = seed;
  j["mode"] = mode;
  j["max_steps"] = max_steps;
  j["digits"] = digits;
  j["cap"] = {{"value", cap}, {"source", cap_source}};
  j["format"] = format;
  if (h) j["h"] = *h;
  if (k) j["k"] = *k;
  return j;
}

ModelParams Request::params() const {
  if (urns == 0 || balls == 0) throw UsageError(subcommand + " needs --N and --M");
  ModelParams p{urns, balls};
  p.validate();
  return p;
}

State Request::start_state(const ModelParams& p) const {
  if (start.empty()) throw UsageError(subcommand + " needs --start");
  State x = State::parse(start);
  validate_state(p, x);
  return x;
}

SetDescriptor Request::descriptor() const {
  if (set.empty()) throw UsageError(subcommand + " needs --set");
  return parse_set_descriptor(set);
}

std::vector<Rational> Request::lambda_grid() const {
  std::vector<Rational> out;
  for (const auto& s : lambdas) {
    Rational v = Rational::parse(s);
    if (v.sign() < 0) throw UsageError("lambda must be >= 0, got " + s);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Rational> Request::u_grid() const {
  std::vector<Rational> out;
  for (const auto& s : us) {
    Rational v = Rational::parse(s);
    if (v.sign() <= 0) throw UsageError("u must be > 0, got " + s);
    out.push_back(std::move(v));
  }
  return out;
}

void Report::verdict(const std::string& case_name, const std::string& quantity, const std::string& check,
                     bool pass, json detail, Row row) {
  if (!verdicts) verdicts = json::array();
  json v = {{"case", case_name}, {"quantity", quantity}, {"check", check}, {"verdict", pass ? "pass" : "fail"}};
  for (auto& [key, value] : detail.items()) v[key] = value;
  verdicts->push_back(std::move(v));
  row.case_name = case_name;
  row.quantity = quantity;
  row.verdict = pass ? "pass" : "fail";
  rows.push_back(std::move(row));
  if (!pass) failed = true;
}

json rational_json(const Rational& r) { return {{"exact", r.to_string()}, {"approx", r.to_double()}}; }

std::string double_text(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string render(const Request& req, const Report& report, double seconds) {
  if (req.format == "csv") {
    std::ostringstream os;
    os << "case,quantity,exact,oracle,mc_mean,mc_stderr,verdict\n";
    for (const auto& r : report.rows) {
      os << csv_field(r.case_name) << ',' << csv_field(r.quantity) << ',' << csv_field(r.exact) << ','
         << csv_field(r.oracle) << ',' << csv_field(r.mc_mean) << ',' << csv_field(r.mc_stderr) << ','
         << csv_field(r.verdict) << '\n';
    }
    return os.str();
  }
  json doc;
  doc["request"] = req.echo();
  doc["results"] = report.results;
  if (report.verdicts) doc["verdicts"] = *report.verdicts;
  doc["timing"] = req.timing ? json{{"enabled", true}, {"seconds", seconds}} : json{{"enabled", false}};
  return doc.dump(2) + "\n";
}

void resolve_cap(Request& req) {
  if (req.cap_flag) {
    req.cap = *req.cap_flag;
    req.cap_source = "flag";
  } else if (const char* env = std::getenv("EHRENFEST_CAP"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      req.cap = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("EHRENFEST_CAP must be a non-negative integer, got '") + env + "'");
    }
    req.cap_source = "env";
  } else {
    req.cap = oracle::kDefaultExactCap;
    req.cap_source = "default";
  }
}

void add_common(CLI::App* sub, Request& req) {
  sub->add_option("--N", req.urns, "number of urns (>= 2)");
  sub->add_option("--M", req.balls, "number of balls (>= 1)");
  sub->add_option("--start", req.start, "start state i1,...,iM");
  sub->add_option("--set", req.set, "target: singleton:..|pair:(..);(..)|diagonal|count:h[:urn]|distinct|explicit:@file.json");
  sub->add_option("--lambda", req.lambdas, "lambda grid a,b,c")->delimiter(',');
  sub->add_option("--u", req.us, "u grid p/q,...")->delimiter(',');
  sub->add_option("--order", req.order, "highest raw moment")->check(CLI::Range(1, 64));
  sub->add_option("--replicas", req.replicas, "Monte Carlo replicas")->check(CLI::PositiveNumber);
  sub->add_option("--seed", req.seed, "Monte Carlo seed");
  sub->add_option("--mode", req.mode, "discrete|ctmc")->check(CLI::IsMember({"discrete", "ctmc"}));
  sub->add_option("--max-steps", req.max_steps, "step cap per replica")->check(CLI::PositiveNumber);
  sub->add_option("--workers", req.workers, "simulation threads (0 = all cores)");
  sub->add_option("--digits", req.digits, "significant digits of lambda-domain values")->check(CLI::Range(1, 1000));
  sub->add_option("--cap", req.cap_flag, "exact-solve state cap (overrides EHRENFEST_CAP)");
  sub->add_option("--format", req.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", req.out, "write the report to this path");
  sub->add_flag("--timing", req.timing, "record wall-clock time in the report");
  sub->add_option("--h", req.h, "network-check: lower level");
  sub->add_option("--k", req.k, "network-check: upper level");
  sub->add_flag("--corrupt-engine", req.corrupt_engine)->group("");
}

int fail(std::ostream& err, int code, const std::string& message) {
  err << json{{"error", {{"exit_code", code}, {"message", message}}}}.dump() << "\n";
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hitting times of the N-urn Ehrenfest chain", "ehrenfest"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Request req;
  const std::pair<const char*, const char*> commands[] = {
      {"exact", "closed-form engine report"},
      {"oracle", "brute-force absorbing-chain report"},
      {"simulate", "Monte Carlo report"},
      {"compare", "engine vs oracle vs Monte Carlo verdicts"},
      {"identities", "special-function identities and quadrature"},
      {"network-check", "commute-time identity of the count chain"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), req);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }
  req.subcommand = app.get_subcommands().front()->get_name();

  try {
    resolve_cap(req);
    const auto t0 = std::chrono::steady_clock::now();
    Report report;
    if (req.subcommand == "exact") {
      report = cmd_exact(req);
    } else if (req.subcommand == "oracle") {
      report = cmd_oracle(req);
    } else if (req.subcommand == "simulate") {
      report = cmd_simulate(req);
    } else if (req.subcommand == "compare") {
      report = cmd_compare(req);
    } else if (req.subcommand == "identities") {
      report = cmd_identities(req);
    } else {
      report = cmd_network_check(req);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = render(req, report, seconds);
    if (req.out.empty()) {
      out << text;
    } else {
      std::ofstream file(req.out, std::ios::binary);
      if (!file) return fail(err, kUsage, "cannot open --out path " + req.out);
      file << text;
    }
    if (report.failed) {
      err << "verdict failure: at least one check failed\n";
      return kVerdictFailure;
    }
    return kOk;
  } catch (const NotSymmetricError& e) {
    return fail(err, kNotSymmetric, e.what());
  } catch (const CapExceededError& e) {
    return fail(err, kCapExceeded, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(err, kUsage, e.what());
  } catch (const std::domain_error& e) {
    return fail(err, kUsage, e.what());
  } catch (const std::exception& e) {
    return fail(err, kInternal, e.what());
  }
}

}  // namespace ehrenfest::cli
