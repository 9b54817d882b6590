// Acceptance run: one PASS/FAIL line per criterion AC1..AC9.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ehrenfest/case_studies.hpp"
#include "ehrenfest/hitting_engine.hpp"
#include "ehrenfest/oracle.hpp"
#include "ehrenfest/precision.hpp"
#include "ehrenfest/simulator.hpp"
#include "ehrenfest/special_functions.hpp"

using namespace ehrenfest;

namespace ehrenfest {
std::ostream& operator<<(std::ostream& os, const std::vector<Rational>& v) {
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os << "]";
}
}  // namespace ehrenfest

namespace {

constexpr double kTransformRelTol = 1e-15;
constexpr double kQuadratureAbsTol = 1e-8;
constexpr double kMcStderrs = 4.0;
constexpr std::uint64_t kMcReplicas = 100000;
constexpr int kMetaSeeds = 20;
constexpr double kMetaPassFraction = 0.95;
constexpr int kPermutationsPerCase = 50;
constexpr double kExactnessBudgetSeconds = 300.0;
constexpr double kMonteCarloBudgetSeconds = 120.0;

// Collects comparison failures; keeps the first few messages.
class Tally {
 public:
  void check(bool ok, const std::function<std::string()>& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (messages_.size() < 5) messages_.push_back(what());
  }
  template <class T>
  void equal(const T& got, const T& want, const std::string& label) {
    check(got == want, [&] {
      std::ostringstream os;
      os << label << ": got " << got << ", want " << want;
      return os.str();
    });
  }
  bool ok() const { return failures_ == 0 && checks_ > 0; }
  long checks() const { return checks_; }
  std::string summary() const {
    std::ostringstream os;
    os << checks_ << " checks, " << failures_ << " failed";
    for (const auto& m : messages_) os << "; " << m;
    return os.str();
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::vector<std::string> messages_;
};

std::string tag(const ModelParams& p, const State& x, const std::string& set) {
  return "N=" + std::to_string(p.urns) + " M=" + std::to_string(p.balls) + " x=" + x.to_string() + " " + set;
}

double rel_diff(const Rational& a, const Rational& b) {
  if (a == b) return 0.0;
  return (abs(a - b) / abs(b)).to_double();
}

std::vector<ModelParams> exactness_grid() {
  return {{2, 1}, {2, 2}, {2, 3}, {2, 5}, {3, 1}, {3, 2}, {3, 3}, {4, 2}, {5, 2}};
}

// Every applicable descriptor kind for (N, M).
std::vector<SetDescriptor> applicable_sets(const ModelParams& p) {
  const auto states = enumerate_states(p);
  std::vector<SetDescriptor> sets{SetDescriptor::singleton(State::constant(p.balls, 1)),
                                  SetDescriptor::pair(State::constant(p.balls, 1), State::constant(p.balls, 2)),
                                  SetDescriptor::pair(states[0], states[1]), SetDescriptor::diagonal()};
  for (int h = 0; h <= p.balls; ++h) sets.push_back(SetDescriptor::count(h));
  if (p.balls <= p.urns) sets.push_back(SetDescriptor::distinct());
  return sets;
}

const std::vector<Rational> kUGrid{Rational(1, 2), Rational(1), Rational(2)};

Tally ac1_formula_vs_oracle() {
  Tally t;
  for (const ModelParams& p : exactness_grid()) {
    const oracle::EnumeratedChain chain(p);
    for (const SetDescriptor& set : applicable_sets(p)) {
      const auto targets = materialize(set, p);
      oracle::ExactHittingOracle o(chain, targets);
      for (const State& x : chain.states()) {
        const HittingProblem q({p, x, set});
        const std::string where = tag(p, x, set.to_string());
        const auto exact = o.raw_moments(x, 4);
        t.equal(q.raw_moments(4), exact, where + " moments");
        t.equal(q.mean(), exact[0], where + " mean");
        t.equal(q.variance(), exact[1] - exact[0] * exact[0], where + " variance");
        for (const Rational& u : kUGrid) {
          const Rational z = Rational(p.balls) / (u + Rational(p.balls));
          t.equal(q.laplace_u(u), o.transform(x, z), where + " laplace_u(" + u.to_string() + ")");
        }
      }
    }
  }
  return t;
}

Tally ac2_pinned_values() {
  Tally t;
  auto both_means = [&](const ModelParams& p, const State& x, const SetDescriptor& set, const Rational& want,
                        const std::string& label) {
    const oracle::EnumeratedChain chain(p);
    t.equal(HittingProblem({p, x, set}).mean(), want, label + " engine");
    t.equal(oracle::solve_mean(chain, materialize(set, p), x), want, label + " oracle");
  };
  {
    const ModelParams p{3, 2};
    const State x{1, 1};
    const auto set = SetDescriptor::singleton({2, 2});
    const HittingProblem q({p, x, set});
    const oracle::EnumeratedChain chain(p);
    oracle::ExactHittingOracle o(chain, materialize(set, p));
    const auto m = o.raw_moments(x, 2);
    t.equal(q.mean(), Rational(10), "(3,2) singleton mean");
    t.equal(q.variance(), Rational(74), "(3,2) singleton variance");
    t.equal(m[0], Rational(10), "(3,2) singleton oracle mean");
    t.equal(m[1] - m[0] * m[0], Rational(74), "(3,2) singleton oracle variance");
  }
  {
    const ModelParams p{3, 1};
    const State x{1};
    const auto set = SetDescriptor::singleton({2});
    const HittingProblem q({p, x, set});
    const oracle::EnumeratedChain chain(p);
    oracle::ExactHittingOracle o(chain, materialize(set, p));
    const auto m = o.raw_moments(x, 3);
    t.equal(q.mean(), Rational(2), "(3,1) mean");
    t.equal(q.variance(), Rational(2), "(3,1) variance");
    t.equal(q.raw_moments(3)[2], Rational(26), "(3,1) third moment");
    t.equal(m[0], Rational(2), "(3,1) oracle mean");
    t.equal(m[1] - m[0] * m[0], Rational(2), "(3,1) oracle variance");
    t.equal(m[2], Rational(26), "(3,1) oracle third moment");
  }
  {
    const ModelParams p{2, 2};
    const State x{1, 1};
    const auto set = SetDescriptor::singleton({2, 2});
    const oracle::EnumeratedChain chain(p);
    oracle::ExactHittingOracle o(chain, materialize(set, p));
    const auto m = o.raw_moments(x, 2);
    t.equal(HittingProblem({p, x, set}).variance(), Rational(8), "(2,2) singleton variance");
    t.equal(m[1] - m[0] * m[0], Rational(8), "(2,2) singleton oracle variance");
  }
  {
    const ModelParams p{3, 2};
    const State x{1, 2};
    both_means(p, x, SetDescriptor::diagonal(), Rational(2), "(3,2) diagonal mean");
    const oracle::EnumeratedChain chain(p);
    const auto exit = oracle::solve_exit_distribution(chain, materialize(SetDescriptor::diagonal(), p), x);
    const std::vector<Rational> want{Rational(2, 5), Rational(2, 5), Rational(1, 5)};
    for (std::size_t i = 0; i < exit.size(); ++i) {
      t.equal(exit[i].second, want[exit[i].first[0] - 1], "(3,2) diagonal oracle exit " + exit[i].first.to_string());
    }
    t.equal(cases::same_urn_stats(p, x).exit, want, "(3,2) diagonal closed-form exit");
  }
  both_means({3, 2}, {1, 1}, SetDescriptor::count(2), Rational(10), "(3,2) count 0->2");
  both_means({3, 2}, {2, 2}, SetDescriptor::count(0), Rational(7, 2), "(3,2) count 2->0");
  t.equal(cases::count_set_mean({3, 2}, 0, 2), Rational(10), "(3,2) count 0->2 closed form");
  t.equal(cases::count_set_mean({3, 2}, 2, 0), Rational(7, 2), "(3,2) count 2->0 closed form");
  both_means({2, 2}, {1, 1}, SetDescriptor::distinct(), Rational(1), "(2,2) distinct");
  return t;
}

Tally ac3_transform_identity() {
  Tally t;
  const std::vector<Rational> lambdas{Rational(1, 10), Rational(1, 2), Rational(1), Rational(2)};
  for (const ModelParams& p : exactness_grid()) {
    const oracle::EnumeratedChain chain(p);
    const auto states = enumerate_states(p);
    const std::vector<State> starts{states.front(), states[states.size() / 2], states.back()};
    for (const SetDescriptor& set : applicable_sets(p)) {
      oracle::ExactHittingOracle o(chain, materialize(set, p));
      for (const State& x : starts) {
        const HittingProblem q({p, x, set});
        const std::string where = tag(p, x, set.to_string());
        for (const Rational& lambda : lambdas) {
          // Discrete side: E[e^{-lambda T}] = E[z^T] at z = e^{-lambda}.
          const Rational discrete = o.transform(x, exp_neg(lambda, 25));
          const Rational via_u = q.laplace_lambda(lambda).value;
          const double rel = rel_diff(via_u, discrete);
          t.check(rel <= kTransformRelTol, [&] {
            return where + " lambda=" + lambda.to_string() + " rel=" + std::to_string(rel);
          });
        }
        for (const Rational& u : kUGrid) {
          const Rational z = Rational(p.balls) / (u + Rational(p.balls));
          t.equal(oracle::solve_transform(chain, materialize(set, p), x, z), q.laplace_u(u),
                  where + " solve_transform u=" + u.to_string());
        }
      }
    }
  }
  return t;
}

Tally ac4_closed_forms() {
  Tally t;
  for (int n = 2; n <= 5; ++n) {
    for (int m = 1; m <= 5; ++m) {
      const ModelParams p{n, m};
      const State y = State::constant(m, 1);
      // Singleton: general overlap sum, and the disjoint-start power sum.
      for (int k = 0; k <= m; ++k) {
        State x = y;
        for (int b = k; b < m; ++b) x[b] = 2;
        const HittingProblem q({p, x, SetDescriptor::singleton(y)});
        t.equal(cases::singleton_mean(p, k), q.mean(), tag(p, x, "singleton mean"));
        if (k == 0) {
          Rational power_sum(0);
          for (int i = 1; i <= m; ++i) power_sum += pow(Rational(n), i) / Rational(i);
          t.equal(Rational(m * (n - 1), n) * power_sum, q.mean(), tag(p, x, "singleton disjoint sum"));
          t.equal(cases::singleton_variance_disjoint(p), q.variance(), tag(p, x, "singleton variance"));
        }
      }
      // Same-urn proposition and corollary.
      const auto states = enumerate_states(p);
      const bool small = states.size() <= 300;
      std::optional<oracle::EnumeratedChain> chain;
      std::optional<oracle::ExactHittingOracle> o;
      if (small) {
        chain.emplace(p);
        o.emplace(*chain, materialize(SetDescriptor::diagonal(), p));
      }
      for (std::size_t i = 0; i < states.size(); i += std::max<std::size_t>(1, states.size() / 12)) {
        const State& x = states[i];
        const auto s = cases::same_urn_stats(p, x);
        t.equal(s.mean, HittingProblem({p, x, SetDescriptor::diagonal()}).mean(), tag(p, x, "same-urn mean"));
        if (small) {
          for (const auto& [z, prob] : o->exit_distribution(x)) {
            t.equal(s.exit[z[0] - 1], prob, tag(p, x, "same-urn exit " + z.to_string()));
          }
        }
      }
      if (m <= n) {
        std::vector<int> asc(m);
        std::iota(asc.begin(), asc.end(), 1);
        const State x(asc);
        const auto c = cases::same_urn_corollary(p);
        const auto s = cases::same_urn_stats(p, x);
        t.equal(c.mean, HittingProblem({p, x, SetDescriptor::diagonal()}).mean(), tag(p, x, "corollary mean"));
        for (int i = 1; i <= n; ++i) t.equal(s.exit[i - 1], i <= m ? c.p_low : c.p_high, tag(p, x, "corollary exit"));
      }
      // All-distinct set.
      if (m == n) {
        const State x = State::constant(m, 1);
        t.equal(cases::all_distinct_mean(p), HittingProblem({p, x, SetDescriptor::distinct()}).mean(),
                tag(p, x, "distinct mean"));
      }
      // Count sets, upward and downward.
      for (int h = 0; h <= m; ++h) {
        for (int k = 0; k <= m; ++k) {
          State x = State::constant(m, 1);
          for (int b = 0; b < k; ++b) x[b] = 2;
          t.equal(cases::count_set_mean(p, k, h), HittingProblem({p, x, SetDescriptor::count(h)}).mean(),
                  tag(p, x, "count h=" + std::to_string(h)));
        }
      }
    }
  }
  return t;
}

Tally ac5_identities() {
  Tally t;
  for (int n = 2; n <= 6; ++n) {
    for (int m = 1; m <= 8; ++m) {
      const ModelParams p{n, m};
      const std::string where = "N=" + std::to_string(n) + " M=" + std::to_string(m);
      for (const Rational& a : {Rational(-1), Rational(0), Rational(n - 1), Rational(2, 7), Rational(-5, 3)}) {
        t.check(series_identities_check(p, a),
                [&] { return where + " series identities a=" + a.to_string(); });
      }
      auto g0 = [&](int k) { return g_k({p, k}, Rational(0)); };
      Rational harmonic(0), power(0);
      for (int i = 1; i <= m; ++i) {
        harmonic += Rational(1, i);
        power += (pow(Rational(n), i) - Rational(1)) / Rational(i);
      }
      const auto c = g_closed_forms(p);
      t.equal(c.g0, -harmonic / Rational(n), where + " g0 closed form");
      t.equal(g0(0), c.g0, where + " g0 sum");
      t.equal(c.gM, power / Rational(n), where + " gM closed form");
      t.equal(g0(m), c.gM, where + " gM sum");
      for (int k = 0; k < m; ++k) {
        Rational s(0);
        for (int i = 0; i <= k; ++i) s += Rational(binomial(m, i)) / pow(Rational(n - 1), i);
        const Rational gap = pow(Rational(n - 1), k) / Rational(BigInt(m * binomial(m - 1, k))) * s;
        t.equal(c.gaps[k], gap, where + " gap closed form k=" + std::to_string(k));
        t.equal(g0(k + 1) - g0(k), gap, where + " gap sum k=" + std::to_string(k));
      }
      t.equal(g0(1), g0(0) + Rational(1, m), where + " g1");
      Rational outer(0);
      for (int i = 1; i <= m; ++i) {
        Rational inner(0);
        for (int j = 1; j <= i; ++j) inner += pow(Rational(n), j) / Rational(j);
        outer += inner / Rational(i);
      }
      t.equal(g_derivative({p, 0}, 1) - g_derivative({p, m}, 1), Rational(n - 1, n * n) * outer,
              where + " derivative gap");
      const Rational q(1, n - 1);
      for (int mm = 0; mm < m; ++mm) {
        Rational e(0);
        for (int j = 0; j <= mm; ++j) {
          e += Rational(binomial(mm, j)) * pow(q, j) * pow(Rational(1) - q, mm - j) * c.gaps[j];
        }
        t.equal(binomial_gap_expectation(p, mm), e, where + " binomial m=" + std::to_string(mm));
      }
    }
  }
  for (const ModelParams p : {ModelParams{2, 1}, ModelParams{2, 3}, ModelParams{3, 2}, ModelParams{4, 3},
                              ModelParams{5, 5}, ModelParams{6, 8}}) {
    for (int k = 0; k <= p.balls; ++k) {
      for (const Rational& u : {Rational(1, 4), Rational(1), Rational(4)}) {
        const double quad = f_k_quadrature({p, k}, u.to_double());
        const double exact = f_k({p, k}, u).to_double();
        t.check(std::abs(quad - exact) <= kQuadratureAbsTol, [&] {
          return "quadrature N=" + std::to_string(p.urns) + " M=" + std::to_string(p.balls) +
                 " k=" + std::to_string(k) + " u=" + u.to_string();
        });
      }
    }
  }
  return t;
}

Tally ac6_network() {
  Tally t;
  for (const ModelParams p : {ModelParams{2, 4}, ModelParams{3, 3}, ModelParams{5, 2}}) {
    for (int h = 0; h <= p.balls; ++h) {
      for (int k = h + 1; k <= p.balls; ++k) {
        const auto c = cases::network_commute_check(p, h, k);
        t.equal(c.lhs, c.rhs, "N=" + std::to_string(p.urns) + " M=" + std::to_string(p.balls) + " h=" +
                                  std::to_string(h) + " k=" + std::to_string(k));
      }
    }
  }
  const auto pinned = cases::network_commute_check({3, 2}, 0, 2);
  t.equal(pinned.lhs, Rational(27, 2), "(3,2) h=0 k=2 lhs");
  t.equal(pinned.rhs, Rational(27, 2), "(3,2) h=0 k=2 rhs");
  return t;
}

struct McCase {
  ModelParams params;
  State start;
  SetDescriptor target;
};

Tally ac7_monte_carlo() {
  Tally t;
  const std::vector<McCase> cases{
      {{3, 2}, {1, 1}, SetDescriptor::singleton({2, 2})},
      {{3, 1}, {1}, SetDescriptor::singleton({2})},
      {{3, 2}, {1, 2}, SetDescriptor::diagonal()},
      {{3, 2}, {1, 1}, SetDescriptor::count(2)},
      {{2, 2}, {1, 1}, SetDescriptor::distinct()},
      {{4, 3}, {1, 2, 3}, SetDescriptor::pair({1, 1, 1}, {2, 2, 2})},
  };
  std::uint64_t seed = 20240601;
  for (const McCase& c : cases) {
    const HittingProblem q({c.params, c.start, c.target});
    for (sim::Mode mode : {sim::Mode::Discrete, sim::Mode::Ctmc}) {
      sim::SimConfig cfg;
      cfg.replicas = kMcReplicas;
      cfg.seed = seed++;
      cfg.mode = mode;
      const auto s = sim::sample_hitting(c.params, c.start, c.target, cfg);
      const double exact = (mode == sim::Mode::Discrete ? q.mean() : q.ctmc_stats().mean).to_double();
      t.check(s.truncated == 0 && std::abs(s.mean - exact) <= kMcStderrs * s.stderr_, [&] {
        return tag(c.params, c.start, c.target.to_string()) + " " + sim::to_string(mode) + " mean " +
               std::to_string(s.mean) + " vs " + std::to_string(exact) + " (se " + std::to_string(s.stderr_) + ")";
      });
    }
  }
  int covered = 0;
  const McCase& meta = cases.front();
  const double exact = HittingProblem({meta.params, meta.start, meta.target}).mean().to_double();
  for (int i = 1; i <= kMetaSeeds; ++i) {
    sim::SimConfig cfg;
    cfg.replicas = kMcReplicas;
    cfg.seed = 7919ULL * static_cast<std::uint64_t>(i);
    const auto s = sim::sample_hitting(meta.params, meta.start, meta.target, cfg);
    covered += std::abs(s.mean - exact) <= kMcStderrs * s.stderr_;
  }
  t.check(covered >= kMetaPassFraction * kMetaSeeds,
          [&] { return "meta seeds covered " + std::to_string(covered) + "/" + std::to_string(kMetaSeeds); });
  return t;
}

Tally ac8_lumping() {
  Tally t;
  for (int n = 2; n <= 6; ++n) {
    for (int m = 1; m <= 10; ++m) {
      const ModelParams p{n, m};
      if (p.state_count() > oracle::kDefaultExactCap) break;
      const oracle::EnumeratedChain chain(p);
      for (int h = 0; h <= m; ++h) {
        oracle::ExactHittingOracle o(chain, materialize(SetDescriptor::count(h), p));
        std::vector<std::optional<Rational>> lumped(m + 1);
        for (const State& x : chain.states()) {
          const int k = overlap(x, State::constant(m, 2));
          if (!lumped[k]) lumped[k] = oracle::lumped_count_oracle(p, 2, k, h);
          t.equal(o.mean(x), *lumped[k], tag(p, x, "count h=" + std::to_string(h)));
        }
      }
    }
  }
  return t;
}

Tally ac9_permutations() {
  Tally t;
  std::mt19937_64 rng(424242);
  for (const ModelParams& p : exactness_grid()) {
    const auto states = enumerate_states(p);
    const std::vector<State> starts{states.front(), states[states.size() / 2], states.back()};
    for (const SetDescriptor& set : applicable_sets(p)) {
      const auto targets = materialize(set, p);
      for (const State& x : starts) {
        const HittingProblem base({p, x, set});
        const auto moments = base.raw_moments(4);
        const Rational variance = base.variance();
        const Rational laplace = base.laplace_u(Rational(1));
        for (int i = 0; i < kPermutationsPerCase; ++i) {
          const auto tau = ProductPermutation::random(p, rng);
          const HittingProblem moved({p, tau.apply(x), SetDescriptor::explicit_set(tau.apply(targets))});
          const std::string where = tag(p, x, set.to_string()) + " perm " + std::to_string(i);
          t.equal(moved.raw_moments(4), moments, where + " moments");
          t.equal(moved.variance(), variance, where + " variance");
          t.equal(moved.laplace_u(Rational(1)), laplace, where + " laplace_u(1)");
        }
      }
    }
  }
  return t;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Tally()> run;
    double budget_seconds;  // 0: no runtime bound
  };
  const std::vector<Criterion> criteria{
      {"AC1", "formula vs oracle exactness", ac1_formula_vs_oracle, kExactnessBudgetSeconds},
      {"AC2", "pinned values", ac2_pinned_values, 0},
      {"AC3", "transform identity", ac3_transform_identity, 0},
      {"AC4", "closed-form consistency", ac4_closed_forms, 0},
      {"AC5", "identities suite", ac5_identities, 0},
      {"AC6", "electric-network identity", ac6_network, 0},
      {"AC7", "Monte Carlo", ac7_monte_carlo, kMonteCarloBudgetSeconds},
      {"AC8", "lumping", ac8_lumping, 0},
      {"AC9", "permutation symmetry", ac9_permutations, 0},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Tally t;
    std::string error;
    try {
      t = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_seconds == 0 || secs < c.budget_seconds;
    const bool pass = error.empty() && t.ok() && in_budget;
    failed += !pass;
    std::string detail = error.empty() ? t.summary() : "exception: " + error;
    if (!in_budget) detail += "; over runtime budget of " + std::to_string(static_cast<int>(c.budget_seconds)) + "s";
    std::printf("%s %s  %s  [%s] (%.1fs)\n", c.id, pass ? "PASS" : "FAIL", c.name, detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
