#pragma once

// Ground truth by brute force: the full chain on all N^M states, absorbed at
// an arbitrary target set, solved exactly by p-adic lifting over a modular LU
// (or, above the exact cap, conjugate gradients in double precision). Works for
// any nonempty target, symmetric or not, and shares no code path with the
// closed forms it is used to check.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ehrenfest/model.hpp"
#include "ehrenfest/rational.hpp"

namespace ehrenfest::oracle {

inline constexpr std::uint64_t kDefaultExactCap = 2000;
inline constexpr std::uint64_t kFloatCap = 200000;

// All states plus the neighbour structure of the kernel: every state has
// exactly M(N-1) neighbours, each reached with probability 1/(M(N-1)).
class EnumeratedChain {
 public:
  // Canonical order (ball 1 varies fastest). Throws CapExceededError above
  // `cap` states.
  explicit EnumeratedChain(const ModelParams& params, std::uint64_t cap = kFloatCap);
  // Custom order; `states` must be a permutation of the state space.
  EnumeratedChain(const ModelParams& params, std::vector<State> states, std::uint64_t cap = kFloatCap);

  const ModelParams& params() const { return params_; }
  std::size_t size() const { return states_.size(); }
  long degree() const { return params_.degree(); }
  const std::vector<State>& states() const { return states_; }
  const State& state(std::size_t i) const { return states_[i]; }
  std::size_t index_of(const State& x) const;
  std::span<const std::int32_t> neighbors(std::size_t i) const;
  Rational transition(std::size_t from, std::size_t to) const;

 private:
  void build();

  ModelParams params_;
  std::vector<State> states_;
  std::vector<std::size_t> canonical_to_position_;
  std::vector<std::int32_t> neighbors_;  // row-major, degree() per state
};

// Exact absorbing-chain solver for one target set. Factorizes (I - P_B) once
// and reuses it for means, higher moments and exit probabilities; transform
// systems (I - z P_B) are factorized per z. Not thread-safe (lazy caches);
// use one instance per task.
class ExactHittingOracle {
 public:
  ExactHittingOracle(const EnumeratedChain& chain, std::span<const State> targets,
                     std::uint64_t cap = kDefaultExactCap);
  ~ExactHittingOracle();
  ExactHittingOracle(ExactHittingOracle&&) noexcept;
  ExactHittingOracle& operator=(ExactHittingOracle&&) noexcept;

  const EnumeratedChain& chain() const { return *chain_; }
  std::size_t transient_count() const { return transient_.size(); }

  Rational mean(const State& x);
  Rational second_moment(const State& x);
  // E^x[T^m] for m = 1..order.
  std::vector<Rational> raw_moments(const State& x, int order);
  // E^x[z^T], 0 < z < 1.
  Rational transform(const State& x, const Rational& z);
  // P^x(first entry into A is at y), in the order of the sorted target.
  std::vector<std::pair<State, Rational>> exit_distribution(const State& x);

 private:
  struct Factorization;
  const Factorization& hitting();

  const std::vector<Rational>& moment_vector(int order);
  std::optional<std::size_t> transient_position(const State& x) const;

  const EnumeratedChain* chain_;
  std::vector<State> targets_;
  std::vector<bool> in_target_;
  std::vector<std::size_t> transient_;      // transient position -> chain index
  std::vector<std::int64_t> position_of_;   // chain index -> transient position or -1
  std::unique_ptr<Factorization> hitting_;  // factorization of (I - P_B)
  std::vector<std::vector<Rational>> moments_;  // moments_[m-1] over transient states
  std::map<Rational, std::vector<Rational>> transforms_;
  std::map<std::size_t, std::vector<Rational>> exits_;  // per start: column of the inverse
};

// Double-precision counterpart for state spaces above the exact cap.
class FloatHittingOracle {
 public:
  FloatHittingOracle(const EnumeratedChain& chain, std::span<const State> targets);

  double mean(const State& x);
  std::vector<double> raw_moments(const State& x, int order);
  double transform(const State& x, double z);
  std::vector<std::pair<State, double>> exit_distribution(const State& x);

  // Largest CG iteration count seen so far.
  int max_iterations() const { return max_iterations_; }

 private:
  std::vector<double> solve(double z, const std::vector<double>& rhs);
  std::vector<double> apply_transient_kernel(const std::vector<double>& v);
  std::optional<std::size_t> transient_position(const State& x) const;
  const std::vector<double>& moment_vector(int order);

  const EnumeratedChain* chain_;
  std::vector<State> targets_;
  std::vector<std::size_t> transient_;
  std::vector<std::int64_t> position_of_;
  std::vector<std::int32_t> ell_;  // column-major neighbour table, pad index = transient count
  std::vector<double> target_hits_;  // neighbours in A per transient state
  std::vector<std::vector<double>> moments_;
  int max_iterations_ = 0;
};

// Single-query wrappers.
Rational solve_mean(const EnumeratedChain& chain, std::span<const State> targets, const State& x,
                    std::uint64_t cap = kDefaultExactCap);
Rational solve_second_moment(const EnumeratedChain& chain, std::span<const State> targets,
                             const State& x, std::uint64_t cap = kDefaultExactCap);
Rational solve_transform(const EnumeratedChain& chain, std::span<const State> targets, const State& x,
                         const Rational& z, std::uint64_t cap = kDefaultExactCap);
std::vector<std::pair<State, Rational>> solve_exit_distribution(const EnumeratedChain& chain,
                                                                std::span<const State> targets,
                                                                const State& x,
                                                                std::uint64_t cap = kDefaultExactCap);

// Mean hitting time of level h from level k in the lumped occupancy chain of
// the reference urn, by direct solve of its (M+1)-level system.
Rational lumped_count_oracle(const ModelParams& params, int reference_urn, int k, int h);

}  // namespace ehrenfest::oracle
