#include "ehrenfest/case_studies.hpp"

#include <stdexcept>
#include <string>

#include "ehrenfest/special_functions.hpp"

namespace ehrenfest::cases {

namespace {

std::vector<Rational> g_at_zero(const ModelParams& params) {
  const GTaylorTable table(params, 0);
  std::vector<Rational> g;
  for (int k = 0; k <= params.balls; ++k) g.push_back(table.at_zero(k));
  return g;
}

// sum_{i=1}^M N^i / i
Rational power_harmonic(const ModelParams& params, int first = 1) {
  Rational sum(0);
  for (int i = first; i <= params.balls; ++i) sum += pow(Rational(params.urns), i) / Rational(i);
  return sum;
}

// (N-1)^{i+1} / C(M-1, i): the resistance of edge i -> i+1 in the count chain.
Rational edge_resistance(const ModelParams& params, int i) {
  return pow(Rational(params.urns - 1), i + 1) / Rational(binomial(params.balls - 1, i));
}

// C(M, j) / (N-1)^j
Rational level_weight(const ModelParams& params, int j) {
  return Rational(binomial(params.balls, j)) / pow(Rational(params.urns - 1), j);
}

void require_overlap(const ModelParams& params, int value, const char* name) {
  if (value < 0 || value > params.balls) {
    throw std::invalid_argument(std::string(name) + "=" + std::to_string(value) + " outside [0, " +
                                std::to_string(params.balls) + "]");
  }
}

}  // namespace

Rational singleton_mean(const ModelParams& params, int k) {
  params.validate();
  require_overlap(params, k, "k");
  Rational total(0);
  for (int j = k; j < params.balls; ++j) {
    Rational inner(0);
    for (int l = 0; l <= j; ++l) inner += level_weight(params, l);
    total += edge_resistance(params, j) * inner;
  }
  return total;
}

Rational singleton_variance_disjoint(const ModelParams& params) {
  params.validate();
  const Rational n(params.urns);
  const Rational balls(params.balls);
  const Rational s = power_harmonic(params);
  Rational cross(0);
  for (int i = 1; i <= params.balls; ++i) cross += power_harmonic(params, i + 1) / Rational(i);
  const Rational rate = balls * (n - Rational(1)) / n;
  return rate * rate * (s * s - Rational(2) * cross) - rate * s;
}

TwoPointStats two_point_stats(const ModelParams& params, int sxy, int sxz, int syz) {
  params.validate();
  require_overlap(params, sxy, "sxy");
  require_overlap(params, sxz, "sxz");
  require_overlap(params, syz, "syz");
  if (syz == params.balls) throw std::invalid_argument("two-point target needs y != z (syz = M)");
  const auto g = g_at_zero(params);
  const Rational& gm = g[params.balls];
  TwoPointStats out;
  out.mean = Rational(params.degree(), 2) * (gm + g[syz] - g[sxy] - g[sxz]);
  out.exit_prob_y = (gm + g[sxy] - g[sxz] - g[syz]) / (Rational(2) * (gm - g[syz]));
  return out;
}

TwoPointStats two_point_stats(const ModelParams& params, const State& x, const State& y, const State& z) {
  validate_state(params, x);
  validate_state(params, y);
  validate_state(params, z);
  if (y == z) throw std::invalid_argument("two-point target needs distinct states");
  return two_point_stats(params, overlap(x, y), overlap(x, z), overlap(y, z));
}

SameUrnStats same_urn_stats(const ModelParams& params, const State& x) {
  validate_state(params, x);
  const auto g = g_at_zero(params);
  const int n = params.urns;
  const int m = params.balls;
  std::vector<int> occupancy(n, 0);
  for (int urn : x.positions()) ++occupancy[urn - 1];
  Rational total(0);
  for (int i = 0; i < n; ++i) total += g[occupancy[i]];
  SameUrnStats out;
  out.mean = Rational(params.degree(), n) * (g[m] + Rational(n - 1) * g[0] - total);
  const Rational spread = g[m] - g[0];
  const Rational inv_n(1, n);
  for (int i = 0; i < n; ++i) out.exit.push_back(inv_n + (g[occupancy[i]] - inv_n * total) / spread);
  return out;
}

SameUrnCorollary same_urn_corollary(const ModelParams& params) {
  params.validate();
  const int n = params.urns;
  const int m = params.balls;
  if (m > n) throw std::invalid_argument("corollary needs M <= N");
  const Rational s = power_harmonic(params);
  SameUrnCorollary out;
  out.mean = Rational(params.degree()) / Rational(static_cast<long>(n) * n) * power_harmonic(params, 2);
  out.p_low = Rational(1, n) + Rational(n - m) / (Rational(m) * s);
  out.p_high = Rational(1, n) - Rational(1) / s;
  return out;
}

std::vector<Rational> rencontres_profile(int balls) {
  if (balls < 2) throw std::invalid_argument("rencontres profile needs M >= 2");
  std::vector<Rational> p(balls + 1, Rational(0));
  for (int k = 0; k <= balls - 2; ++k) {
    // 1/2! - 1/3! + ... + (-1)^{M-k}/(M-k)!
    Rational alternating(0);
    for (int j = 2; j <= balls - k; ++j) {
      const Rational term = Rational(1) / Rational(factorial(j));
      alternating += j % 2 ? -term : term;
    }
    p[k] = alternating / Rational(factorial(k));
  }
  p[balls] = Rational(1) / Rational(factorial(balls));
  return p;
}

Rational all_distinct_mean(const ModelParams& params) {
  params.validate();
  const int m = params.balls;
  if (m != params.urns) throw std::invalid_argument("all-distinct closed form needs M = N");
  const auto g = g_at_zero(params);
  const auto weights = rencontres_profile(m);
  Rational bracket = -g[1];
  for (int k = 0; k <= m - 2; ++k) bracket += weights[k] * g[k];
  return Rational(static_cast<long>(m) * (m - 1)) * bracket + g[m] / Rational(factorial(m - 2));
}

Rational count_set_mean(const ModelParams& params, int k, int h) {
  params.validate();
  require_overlap(params, k, "k");
  require_overlap(params, h, "h");
  const int m = params.balls;
  Rational total(0);
  if (k < h) {
    for (int i = k; i < h; ++i) {
      Rational inner(0);
      for (int j = 0; j <= i; ++j) inner += level_weight(params, j);
      total += edge_resistance(params, i) * inner;
    }
  } else if (k > h) {
    for (int i = h; i < k; ++i) {
      Rational inner(0);
      for (int j = i + 1; j <= m; ++j) inner += level_weight(params, j);
      total += edge_resistance(params, i) * inner;
    }
  }
  return total;
}

CountChain::CountChain(const ModelParams& params) : params_(params) { params.validate(); }

Rational CountChain::down(int level) const {
  require_overlap(params_, level, "level");
  return Rational(level, params_.balls);
}

Rational CountChain::up(int level) const {
  require_overlap(params_, level, "level");
  return Rational(params_.balls - level) / Rational(params_.degree());
}

Rational CountChain::stay(int level) const {
  require_overlap(params_, level, "level");
  return Rational(static_cast<long>(params_.balls - level) * (params_.urns - 2)) /
         Rational(params_.degree());
}

Rational CountChain::edge_conductance(int level) const {
  require_overlap(params_, level, "level");
  return Rational(binomial(params_.balls - 1, level)) / pow(Rational(params_.urns - 1), level + 1);
}

Rational CountChain::self_conductance(int level) const {
  return Rational(params_.urns - 2) * edge_conductance(level);
}

Rational CountChain::vertex_weight(int level) const {
  require_overlap(params_, level, "level");
  return level_weight(params_, level);
}

Rational CountChain::total_weight() const {
  Rational sum(0);
  for (int i = 0; i <= params_.balls; ++i) sum += vertex_weight(i);
  return sum;
}

CommuteCheck network_commute_check(const ModelParams& params, int h, int k) {
  params.validate();
  if (!(0 <= h && h < k && k <= params.balls)) {
    throw std::invalid_argument("commute check needs 0 <= h < k <= M");
  }
  const CountChain chain(params);
  CommuteCheck out;
  out.lhs = count_set_mean(params, k, h) + count_set_mean(params, h, k);
  Rational resistance(0);
  for (int j = h; j < k; ++j) resistance += Rational(1) / chain.edge_conductance(j);
  out.rhs = chain.total_weight() * resistance;
  out.equal = out.lhs == out.rhs;
  return out;
}

}  // namespace ehrenfest::cases
