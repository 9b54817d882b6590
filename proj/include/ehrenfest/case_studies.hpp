#pragma once

// Closed-form special cases: singleton targets, two-point targets, the
// all-in-one-urn set, the all-distinct set, and level sets of the occupancy
// of a reference urn (with its birth-death lumping and commute-time identity).
// Each of these is cross-checked against HittingProblem and the oracle.

#include <vector>

#include "ehrenfest/model.hpp"
#include "ehrenfest/rational.hpp"

namespace ehrenfest::cases {

// E^x(T_y) for s(x, y) = k.
Rational singleton_mean(const ModelParams& params, int k);
// Var^x(T_y) for s(x, y) = 0.
Rational singleton_variance_disjoint(const ModelParams& params);

struct TwoPointStats {
  Rational mean;
  Rational exit_prob_y;
};

// A = {y, z}, described by overlaps. Only syz = M is rejected; overlap triples
// that no three states realize still get a formal value.
TwoPointStats two_point_stats(const ModelParams& params, int sxy, int sxz, int syz);
// State-level wrapper: validates y != z and computes the overlaps.
TwoPointStats two_point_stats(const ModelParams& params, const State& x, const State& y, const State& z);

struct SameUrnStats {
  Rational mean;
  std::vector<Rational> exit;  // exit[i-1] = P(first hit is (i,...,i))
};

SameUrnStats same_urn_stats(const ModelParams& params, const State& x);

struct SameUrnCorollary {
  Rational mean;
  Rational p_low;   // urns 1..M
  Rational p_high;  // urns M+1..N
};

// Start (1, 2, ..., M) with M <= N.
SameUrnCorollary same_urn_corollary(const ModelParams& params);

// Distribution of the number of fixed points of a uniform permutation of M.
std::vector<Rational> rencontres_profile(int balls);

// M = N, start (1, ..., 1), target: all balls in different urns.
Rational all_distinct_mean(const ModelParams& params);

// E^x(T_{A_h}) when x has k balls in the reference urn.
Rational count_set_mean(const ModelParams& params, int k, int h);

// Occupancy of the reference urn as a birth-death chain on {0..M} with
// self-loops, together with its electric-network conductances.
class CountChain {
 public:
  explicit CountChain(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  int levels() const { return params_.balls + 1; }

  Rational down(int level) const;  // i / M
  Rational up(int level) const;    // (M - i) / (M (N - 1))
  Rational stay(int level) const;  // (M - i)(N - 2) / (M (N - 1))

  Rational edge_conductance(int level) const;  // C_{i,i+1}
  Rational self_conductance(int level) const;  // C_{i,i}
  Rational vertex_weight(int level) const;     // C_i
  Rational total_weight() const;

 private:
  ModelParams params_;
};

struct CommuteCheck {
  Rational lhs;  // E^k(T_h) + E^h(T_k)
  Rational rhs;  // total conductance times effective resistance
  bool equal = false;
};

// Requires 0 <= h < k <= M.
CommuteCheck network_commute_check(const ModelParams& params, int h, int k);

}  // namespace ehrenfest::cases
