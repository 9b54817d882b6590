#pragma once

// State space of the N-urn Ehrenfest chain, its transition kernel, the
// single-ball continuous-time semigroup, target-set descriptors and the
// symmetric-family membership test.
//
// Urns are 1-indexed everywhere: a State with M balls holds M values in
// {1, ..., N}.

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehrenfest/rational.hpp"

namespace ehrenfest {

struct ModelParams {
  int urns = 2;   // N >= 2
  int balls = 1;  // M >= 1

  void validate() const;
  // N^M, saturating at UINT64_MAX.
  std::uint64_t state_count() const;
  // M(N-1): number of neighbours of every state.
  long degree() const { return static_cast<long>(balls) * (urns - 1); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

class State {
 public:
  State() = default;
  explicit State(std::vector<int> positions) : positions_(std::move(positions)) {}
  State(std::initializer_list<int> positions) : positions_(positions) {}

  // "1,2,3"; surrounding parentheses are accepted.
  static State parse(std::string_view text);
  // All balls in one urn.
  static State constant(int balls, int urn) { return State(std::vector<int>(balls, urn)); }

  std::size_t size() const { return positions_.size(); }
  int operator[](std::size_t ball) const { return positions_[ball]; }
  int& operator[](std::size_t ball) { return positions_[ball]; }
  std::span<const int> positions() const { return positions_; }

  // "(1,2,3)".
  std::string to_string() const;

  friend bool operator==(const State&, const State&) = default;
  friend std::strong_ordering operator<=>(const State& a, const State& b) {
    return a.positions_ <=> b.positions_;
  }

 private:
  std::vector<int> positions_;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

// Throws std::invalid_argument when x has the wrong length or an urn out of range.
void validate_state(const ModelParams& params, const State& x);

// s(x, y): number of balls sitting in the same urn in x and y.
int overlap(const State& x, const State& y);

// One-step probability of the discrete chain.
Rational transition_prob(const ModelParams& params, const State& x, const State& y);

// p_t(i, j) of the single-ball chain with off-diagonal rate 1/(N-1).
double single_ball_semigroup(const ModelParams& params, double t, int i, int j);
// P_t(x, z) of the product chain.
double product_semigroup(const ModelParams& params, double t, const State& x, const State& z);

// Canonical enumeration: mixed radix, little endian on positions (ball 1
// varies fastest). state_index is its inverse.
std::vector<State> enumerate_states(const ModelParams& params);
std::uint64_t state_index(const ModelParams& params, const State& x);
State state_from_index(const ModelParams& params, std::uint64_t index);

enum class SetKind { Singleton, Pair, Diagonal, Count, Distinct, Explicit };

struct SetDescriptor {
  SetKind kind = SetKind::Diagonal;
  std::vector<State> states;  // Singleton: 1, Pair: 2, Explicit: any
  int level = 0;              // Count: target overlap h
  int reference_urn = 2;      // Count: urn whose occupancy is counted

  static SetDescriptor singleton(State y);
  static SetDescriptor pair(State y, State z);
  static SetDescriptor diagonal();
  static SetDescriptor count(int level, int reference_urn = 2);
  static SetDescriptor distinct();
  static SetDescriptor explicit_set(std::vector<State> states);

  // Inverse of parse_set_descriptor (explicit sets are written inline).
  std::string to_string() const;
};

// "singleton:i1,...,iM" | "pair:(..);(..)" | "diagonal" | "count:h[:urn]" |
// "distinct" | "explicit:@path.json" (JSON array of integer arrays).
SetDescriptor parse_set_descriptor(std::string_view text);

// Explicit, sorted, duplicate-free state list. Throws std::invalid_argument
// on inconsistent descriptors (Distinct with M > N, h outside [0, M],
// invalid or duplicate explicit states).
std::vector<State> materialize(const SetDescriptor& descriptor, const ModelParams& params);

// Sorted multiset {s(y, z) : z in A}, including z = y.
std::vector<int> overlap_profile(const State& y, std::span<const State> targets);

struct ProfileMismatch {
  State first;
  std::vector<int> first_profile;
  State second;
  std::vector<int> second_profile;
};

// Two elements of A with different profiles, if any. Throws on empty or
// duplicate-containing input.
std::optional<ProfileMismatch> find_profile_mismatch(std::span<const State> targets);
bool is_symmetric_family(std::span<const State> targets);

// tau = (tau_1, ..., tau_M), each a bijection of {1..N}, acting coordinatewise.
class ProductPermutation {
 public:
  explicit ProductPermutation(std::vector<std::vector<int>> maps);
  static ProductPermutation identity(const ModelParams& params);
  static ProductPermutation random(const ModelParams& params, std::mt19937_64& rng);

  State apply(const State& x) const;
  std::vector<State> apply(std::span<const State> states) const;

 private:
  std::vector<std::vector<int>> maps_;
};

}  // namespace ehrenfest
