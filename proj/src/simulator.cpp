#include "ehrenfest/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <boost/math/distributions/chi_squared.hpp>

#include "ehrenfest/kernels.hpp"

namespace ehrenfest::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(replica + 0x632be59bd9b4e019ULL)));
}

// Incremental membership test for the current state.
class Membership {
 public:
  Membership(const ModelParams& params, const SetDescriptor& target) : params_(params) {
    switch (target.kind) {
      case SetKind::Count:
        if (target.level < 0 || target.level > params.balls) {
          throw std::invalid_argument("count level outside [0, M]");
        }
        if (target.reference_urn < 1 || target.reference_urn > params.urns) {
          throw std::invalid_argument("count reference urn outside 1..N");
        }
        kind_ = Kind::Count;
        level_ = target.level;
        urn_ = target.reference_urn;
        break;
      case SetKind::Diagonal:
        kind_ = Kind::Diagonal;
        break;
      case SetKind::Distinct:
        if (params.balls > params.urns) throw std::invalid_argument("distinct set needs M <= N");
        kind_ = Kind::Distinct;
        break;
      default:
        init_explicit(materialize(target, params));
    }
  }

  Membership(const ModelParams& params, std::span<const State> targets) : params_(params) {
    if (targets.empty()) throw std::invalid_argument("target set is empty");
    for (const auto& s : targets) validate_state(params, s);
    init_explicit(std::vector<State>(targets.begin(), targets.end()));
  }

  void reset(const State& x) {
    switch (kind_) {
      case Kind::Codes:
        code_ = state_index(params_, x);
        break;
      case Kind::States:
        state_ = x;
        break;
      case Kind::Count:
        counter_ = static_cast<int>(std::count(x.positions().begin(), x.positions().end(), urn_));
        break;
      case Kind::Diagonal:
      case Kind::Distinct:
        occupancy_.assign(params_.urns + 1, 0);
        counter_ = 0;
        for (int p : x.positions()) {
          if (++occupancy_[p] >= 2) ++counter_;
        }
        break;
    }
  }

  bool inside() const {
    switch (kind_) {
      case Kind::Codes:
        return codes_.contains(code_);
      case Kind::States:
        return states_.contains(state_);
      case Kind::Count:
        return counter_ == level_;
      case Kind::Diagonal:
        return std::find(occupancy_.begin(), occupancy_.end(), params_.balls) != occupancy_.end();
      case Kind::Distinct:
        return counter_ == 0;
    }
    return false;
  }

  // Ball `ball` moves from urn `from` to urn `to`.
  bool move(int ball, int from, int to) {
    switch (kind_) {
      case Kind::Codes:
        code_ = code_ + static_cast<std::uint64_t>(to - 1) * powers_[ball] -
                static_cast<std::uint64_t>(from - 1) * powers_[ball];
        return codes_.contains(code_);
      case Kind::States:
        state_[ball] = to;
        return states_.contains(state_);
      case Kind::Count:
        counter_ += (to == urn_) - (from == urn_);
        return counter_ == level_;
      case Kind::Diagonal:
        --occupancy_[from];
        return ++occupancy_[to] == params_.balls;
      case Kind::Distinct:
        if (occupancy_[from]-- >= 2) --counter_;
        if (++occupancy_[to] >= 2) ++counter_;
        return counter_ == 0;
    }
    return false;
  }

 private:
  enum class Kind { Codes, States, Count, Diagonal, Distinct };

  void init_explicit(std::vector<State> targets) {
    if (params_.state_count() != std::numeric_limits<std::uint64_t>::max()) {
      kind_ = Kind::Codes;
      std::uint64_t p = 1;
      for (int b = 0; b < params_.balls; ++b) {
        powers_.push_back(p);
        p *= static_cast<std::uint64_t>(params_.urns);
      }
      for (const auto& s : targets) codes_.insert(state_index(params_, s));
    } else {
      kind_ = Kind::States;
      states_.insert(targets.begin(), targets.end());
    }
  }

  ModelParams params_;
  Kind kind_ = Kind::Codes;
  std::unordered_set<std::uint64_t> codes_;
  std::vector<std::uint64_t> powers_;
  std::uint64_t code_ = 0;
  std::unordered_set<State, StateHash> states_;
  State state_;
  std::vector<int> occupancy_;
  int counter_ = 0;
  int level_ = 0;
  int urn_ = 0;
};

// One replica; NaN when max_steps is reached first.
double run_replica(const ModelParams& params, const State& x, Membership& member, const SimConfig& cfg,
                   std::uint64_t replica) {
  member.reset(x);
  if (member.inside()) return 0.0;
  auto rng = replica_engine(cfg.seed, replica);
  std::uniform_int_distribution<int> pick_ball(0, params.balls - 1);
  std::uniform_int_distribution<int> shift(1, params.urns - 1);
  std::exponential_distribution<double> hold(static_cast<double>(params.balls));
  State y = x;
  double elapsed = 0.0;
  for (std::uint64_t step = 1; step <= cfg.max_steps; ++step) {
    if (cfg.mode == Mode::Ctmc) elapsed += hold(rng);
    const int b = pick_ball(rng);
    const int from = y[b];
    const int to = (from - 1 + shift(rng)) % params.urns + 1;
    y[b] = to;
    if (member.move(b, from, to)) {
      return cfg.mode == Mode::Ctmc ? elapsed : static_cast<double>(step);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

template <class MembershipFactory>
std::vector<double> run_all(const ModelParams& params, const State& x, const SimConfig& cfg,
                            MembershipFactory make) {
  params.validate();
  validate_state(params, x);
  cfg.validate();
  std::vector<double> out(cfg.replicas);
  unsigned workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, cfg.replicas));
  constexpr std::uint64_t kChunk = 1024;
  std::atomic<std::uint64_t> next{0};
  auto work = [&]() {
    Membership member = make();
    for (;;) {
      const std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= cfg.replicas) return;
      const std::uint64_t end = std::min(cfg.replicas, begin + kChunk);
      for (std::uint64_t r = begin; r < end; ++r) out[r] = run_replica(params, x, member, cfg, r);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

SimSummary summarize(std::vector<double> samples, const SimConfig& cfg) {
  SimSummary s;
  s.mode = cfg.mode;
  s.seed = cfg.seed;
  s.replicas = cfg.replicas;
  std::vector<double> kept;
  kept.reserve(samples.size());
  for (double v : samples) {
    if (std::isnan(v)) {
      ++s.truncated;
    } else {
      kept.push_back(v);
    }
  }
  s.used = kept.size();
  if (s.truncated > 0) {
    std::cerr << "warning: " << s.truncated << " of " << s.replicas << " replicas reached max_steps="
              << cfg.max_steps << " and were excluded\n";
  }
  if (kept.empty()) {
    s.mean = s.variance = s.stderr_ = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const auto n = static_cast<double>(kept.size());
  s.mean = kernels::sum(kept) / n;
  s.variance = kept.size() > 1 ? kernels::sum_sq_dev(kept, s.mean) / (n - 1.0) : 0.0;
  s.stderr_ = std::sqrt(s.variance / n);
  const auto& grid = cfg.mode == Mode::Discrete ? cfg.lambda_grid : cfg.u_grid;
  if (!grid.empty()) s.transforms = empirical_transform(kept, grid);
  return s;
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::Discrete ? "discrete" : "ctmc"; }

Mode parse_mode(std::string_view text) {
  if (text == "discrete") return Mode::Discrete;
  if (text == "ctmc") return Mode::Ctmc;
  throw std::invalid_argument("mode must be discrete or ctmc, got '" + std::string(text) + "'");
}

void SimConfig::validate() const {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (mode == Mode::Discrete && !u_grid.empty()) {
    throw std::invalid_argument("u grid applies to ctmc mode; use a lambda grid in discrete mode");
  }
  if (mode == Mode::Ctmc && !lambda_grid.empty()) {
    throw std::invalid_argument("lambda grid applies to discrete mode; use a u grid in ctmc mode");
  }
  for (double a : lambda_grid) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("lambda values must be finite and >= 0");
  }
  for (double a : u_grid) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("u values must be finite and >= 0");
  }
}

std::vector<double> sample_times(const ModelParams& params, const State& x, const SetDescriptor& target,
                                 const SimConfig& cfg) {
  return run_all(params, x, cfg, [&]() { return Membership(params, target); });
}

SimSummary sample_hitting(const ModelParams& params, const State& x, const SetDescriptor& target,
                          const SimConfig& cfg) {
  return summarize(sample_times(params, x, target, cfg), cfg);
}

SimSummary sample_hitting(const ModelParams& params, const State& x, std::span<const State> targets,
                          const SimConfig& cfg) {
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  return summarize(run_all(params, x, cfg, [&]() { return Membership(params, targets); }), cfg);
}

std::vector<TransformEstimate> empirical_transform(std::span<const double> samples,
                                                   std::span<const double> arguments) {
  if (samples.empty()) throw std::invalid_argument("empirical transform needs at least one sample");
  const auto& k = kernels::active_kernels();
  const auto n = static_cast<double>(samples.size());
  std::vector<double> values(samples.size());
  std::vector<TransformEstimate> out;
  for (double a : arguments) {
    if (!(a >= 0.0)) throw std::invalid_argument("transform argument must be >= 0");
    k.exp_neg_scaled(samples.data(), a, values.data(), values.size());
    TransformEstimate e;
    e.argument = a;
    e.estimate = k.sum(values.data(), values.size()) / n;
    const double var = samples.size() > 1 ? k.sum_sq_dev(values.data(), values.size(), e.estimate) / (n - 1.0) : 0.0;
    e.stderr_ = std::sqrt(var / n);
    out.push_back(e);
  }
  return out;
}

FirstStepCheck first_step_check(const ModelParams& params, const State& x, Mode mode, std::uint64_t trials,
                                std::uint64_t seed) {
  params.validate();
  validate_state(params, x);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int cells = static_cast<int>(params.degree());
  std::vector<std::uint64_t> counts(cells, 0);
  // The first transition uses the same draw sequence as run_replica.
  for (std::uint64_t r = 0; r < trials; ++r) {
    auto rng = replica_engine(seed, r);
    std::uniform_int_distribution<int> pick_ball(0, params.balls - 1);
    std::uniform_int_distribution<int> shift(1, params.urns - 1);
    std::exponential_distribution<double> hold(static_cast<double>(params.balls));
    if (mode == Mode::Ctmc) (void)hold(rng);
    const int b = pick_ball(rng);
    const int from = x[b];
    const int to = (from - 1 + shift(rng)) % params.urns + 1;
    const int slot = to < from ? to - 1 : to - 2;  // index among the other N-1 urns
    ++counts[b * (params.urns - 1) + slot];
  }
  FirstStepCheck c;
  c.trials = trials;
  const double expected = static_cast<double>(trials) / cells;
  for (auto v : counts) {
    const double d = static_cast<double>(v) - expected;
    c.chi_square += d * d / expected;
  }
  c.dof = cells - 1;
  if (c.dof > 0) {
    boost::math::chi_squared dist(c.dof);
    c.p_value = boost::math::cdf(boost::math::complement(dist, c.chi_square));
  }
  c.flagged = c.p_value < 1e-4;
  return c;
}

}  // namespace ehrenfest::sim
