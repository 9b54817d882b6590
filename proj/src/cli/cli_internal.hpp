#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrenfest/model.hpp"
#include "ehrenfest/rational.hpp"
#include "json.hpp"

namespace ehrenfest::cli {

using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Request {
  std::string subcommand;
  int urns = 0;
  int balls = 0;
  std::string start;
  std::string set;
  std::vector<std::string> lambdas;
  std::vector<std::string> us;
  int order = 2;
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 1;
  std::string mode = "discrete";
  std::uint64_t max_steps = 10000000;
  unsigned workers = 0;
  int digits = 20;
  std::optional<std::uint64_t> cap_flag;
  std::uint64_t cap = 0;
  std::string cap_source;
  std::string format = "json";
  std::string out;
  bool timing = false;
  bool corrupt_engine = false;
  std::optional<int> h;
  std::optional<int> k;

  json echo() const;
  bool has_params() const { return urns != 0 || balls != 0; }
  ModelParams params() const;
  State start_state(const ModelParams& params) const;
  SetDescriptor descriptor() const;
  std::vector<Rational> lambda_grid() const;
  std::vector<Rational> u_grid() const;
};

// One CSV line: case, quantity, exact, oracle, mc_mean, mc_stderr, verdict.
struct Row {
  std::string case_name;
  std::string quantity;
  std::string exact;
  std::string oracle;
  std::string mc_mean;
  std::string mc_stderr;
  std::string verdict;
};

struct Report {
  json results = json::object();
  std::optional<json> verdicts;
  std::vector<Row> rows;
  bool failed = false;

  // Appends a verdict entry plus its CSV row.
  void verdict(const std::string& case_name, const std::string& quantity, const std::string& check,
               bool pass, json detail, Row row);
};

json rational_json(const Rational& r);
std::string double_text(double v);

Report cmd_exact(const Request& req);
Report cmd_oracle(const Request& req);
Report cmd_simulate(const Request& req);
Report cmd_compare(const Request& req);
Report cmd_identities(const Request& req);
Report cmd_network_check(const Request& req);

}  // namespace ehrenfest::cli
