#pragma once

// Monte Carlo hitting times for the discrete chain (steps) and the
// continuous-time chain with Exponential(M) holding times (elapsed time).
// Replica r draws from its own generator seeded by (seed, r), and results are
// folded in replica order, so the worker count never changes the output.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ehrenfest/model.hpp"

namespace ehrenfest::sim {

enum class Mode { Discrete, Ctmc };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct SimConfig {
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 1;
  Mode mode = Mode::Discrete;
  std::uint64_t max_steps = 10000000;
  std::vector<double> lambda_grid;  // discrete mode: estimates of E[exp(-lambda T)]
  std::vector<double> u_grid;       // ctmc mode: estimates of E[exp(-u T)]
  unsigned workers = 0;             // 0 = hardware concurrency

  void validate() const;
};

struct TransformEstimate {
  double argument = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct SimSummary {
  Mode mode = Mode::Discrete;
  std::uint64_t seed = 0;
  std::uint64_t replicas = 0;
  std::uint64_t truncated = 0;  // replicas that hit max_steps; excluded below
  std::uint64_t used = 0;       // replicas - truncated
  double mean = 0.0;
  double variance = 0.0;
  double stderr_ = 0.0;
  std::vector<TransformEstimate> transforms;
};

// Samples in replica order; truncated replicas are NaN.
std::vector<double> sample_times(const ModelParams& params, const State& x, const SetDescriptor& target,
                                 const SimConfig& cfg);

SimSummary sample_hitting(const ModelParams& params, const State& x, const SetDescriptor& target,
                          const SimConfig& cfg);
SimSummary sample_hitting(const ModelParams& params, const State& x, std::span<const State> targets,
                          const SimConfig& cfg);

// Mean of exp(-a t) over the samples for each argument a, with standard errors.
std::vector<TransformEstimate> empirical_transform(std::span<const double> samples,
                                                   std::span<const double> arguments);

// Chi-square comparison of first-step frequencies from x in the given mode
// against the uniform law on the M(N-1) neighbours.
struct FirstStepCheck {
  std::uint64_t trials = 0;
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool flagged = false;  // p_value < 1e-4
};

FirstStepCheck first_step_check(const ModelParams& params, const State& x, Mode mode,
                                std::uint64_t trials, std::uint64_t seed);

}  // namespace ehrenfest::sim
