#pragma once

// Closed-form hitting-time analytics for targets in the symmetric family.
//
// For such a target A and any reference y in A, the hitting time of the
// continuous-time chain has transform
//
//   E^x exp(-u T^Y) = sum_{z in A} f_{s(x,z)}(u) / sum_{z in A} f_{s(y,z)}(u)
//
// and the discrete hitting time follows through u = M(e^lambda - 1). Every
// quantity depends on (x, A) only through the overlap counts
// #{z in A : s(x,z) = k}, which is what HittingProblem caches.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehrenfest/model.hpp"
#include "ehrenfest/rational.hpp"
#include "ehrenfest/special_functions.hpp"

namespace ehrenfest {

struct HittingQuery {
  ModelParams params;
  State start;
  SetDescriptor target;
};

struct TransformSample {
  Rational argument;
  Rational value;
};

struct LambdaValue {
  Rational lambda;
  Rational u;         // rational approximation of M(e^lambda - 1)
  Rational value;     // exact transform at that u
  std::string rendered;
  double approx = 0.0;
};

struct CtmcStats {
  Rational mean;
  Rational variance;
};

struct HittingSummary {
  Rational mean;
  Rational variance;
  std::vector<Rational> raw_moments;  // orders 1..R
  std::vector<TransformSample> transform_samples;
  std::optional<std::vector<std::pair<State, Rational>>> exit_distribution;
};

class HittingProblem {
 public:
  // Materializes the target and checks membership in the symmetric family.
  // Throws NotSymmetricError (naming two mismatching profiles) or
  // std::invalid_argument for malformed input.
  explicit HittingProblem(HittingQuery query);

  const HittingQuery& query() const { return query_; }
  const ModelParams& params() const { return query_.params; }
  const std::vector<State>& targets() const { return targets_; }
  // Lexicographically smallest element of the target.
  const State& reference() const { return targets_.front(); }
  bool start_in_target() const { return start_in_target_; }
  // counts[k] = #{z in A : s(start, z) = k}
  std::span<const long> start_profile() const { return start_counts_; }
  std::span<const long> reference_profile() const { return reference_counts_; }

  // E^x exp(-u T^Y), u > 0.
  Rational laplace_u(const Rational& u) const;
  // E^x exp(-lambda T), lambda >= 0, through a rational u with relative error
  // <= 10^-(digits+5), rendered to `digits` significant digits.
  LambdaValue laplace_lambda(const Rational& lambda, int digits = 20) const;

  Rational mean() const;
  Rational variance() const;
  // E[T^m] for m = 1..order via exact Taylor jets of the transform.
  std::vector<Rational> raw_moments(int order) const;
  CtmcStats ctmc_stats() const;

  // Sum over the target of g_{s(x,z)}(0); the mean is decreasing in it.
  Rational potential_at_zero() const;

  HittingSummary summarize(int order, std::span<const Rational> u_grid) const;

 private:
  Rational profile_sum(std::span<const long> counts, const std::vector<Rational>& per_overlap) const;

  HittingQuery query_;
  std::vector<State> targets_;
  bool start_in_target_ = false;
  std::vector<long> start_counts_;
  std::vector<long> reference_counts_;
  GTaylorTable first_order_;
};

// G_u(x, {z}) = (N-1)/N^M f_{s(x,z)}(u), u > 0.
Rational green_potential(const ModelParams& params, const State& x, const State& z, const Rational& u);

}  // namespace ehrenfest
