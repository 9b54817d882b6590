#include "ehrenfest/hitting_engine.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "ehrenfest/errors.hpp"
#include "ehrenfest/jet.hpp"
#include "ehrenfest/precision.hpp"

namespace ehrenfest {

namespace {

std::string profile_text(const std::vector<int>& profile) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < profile.size(); ++i) out << (i ? "," : "") << profile[i];
  out << ']';
  return out.str();
}

std::vector<long> overlap_counts(const State& x, std::span<const State> targets, int balls) {
  std::vector<long> counts(balls + 1, 0);
  for (const auto& z : targets) ++counts[overlap(x, z)];
  return counts;
}

std::vector<Rational> f_values(const ModelParams& params, const Rational& u) {
  std::vector<Rational> out;
  out.reserve(params.balls + 1);
  for (int k = 0; k <= params.balls; ++k) out.push_back(f_k({params, k}, u));
  return out;
}

}  // namespace

HittingProblem::HittingProblem(HittingQuery query)
    : query_(std::move(query)), first_order_(query_.params, 1) {
  validate_state(query_.params, query_.start);
  targets_ = materialize(query_.target, query_.params);
  if (const auto mismatch = find_profile_mismatch(targets_)) {
    throw NotSymmetricError("target set is not in the symmetric family: " +
                            mismatch->first.to_string() + " has overlap profile " +
                            profile_text(mismatch->first_profile) + " but " +
                            mismatch->second.to_string() + " has " +
                            profile_text(mismatch->second_profile));
  }
  start_in_target_ = std::binary_search(targets_.begin(), targets_.end(), query_.start);
  start_counts_ = overlap_counts(query_.start, targets_, query_.params.balls);
  reference_counts_ = overlap_counts(reference(), targets_, query_.params.balls);
}

Rational HittingProblem::profile_sum(std::span<const long> counts,
                                     const std::vector<Rational>& per_overlap) const {
  Rational sum(0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] != 0) sum += Rational(counts[k]) * per_overlap[k];
  }
  return sum;
}

Rational HittingProblem::laplace_u(const Rational& u) const {
  if (u.sign() <= 0) throw std::domain_error("laplace_u needs u > 0");
  if (start_in_target_) return Rational(1);
  const auto f = f_values(params(), u);
  return profile_sum(start_counts_, f) / profile_sum(reference_counts_, f);
}

LambdaValue HittingProblem::laplace_lambda(const Rational& lambda, int digits) const {
  if (lambda.sign() < 0) throw std::domain_error("laplace_lambda needs lambda >= 0");
  LambdaValue out;
  out.lambda = lambda;
  if (lambda.is_zero() || start_in_target_) {
    out.u = lambda.is_zero() ? Rational(0) : scaled_expm1(lambda, params().balls, digits);
    out.value = Rational(1);
  } else {
    out.u = scaled_expm1(lambda, params().balls, digits);
    out.value = laplace_u(out.u);
  }
  out.rendered = render_significant(out.value, digits);
  out.approx = out.value.to_double();
  return out;
}

Rational HittingProblem::potential_at_zero() const {
  std::vector<Rational> g0;
  for (int k = 0; k <= params().balls; ++k) g0.push_back(first_order_.at_zero(k));
  return profile_sum(start_counts_, g0);
}

Rational HittingProblem::mean() const {
  if (start_in_target_) return Rational(0);
  std::vector<Rational> g0;
  for (int k = 0; k <= params().balls; ++k) g0.push_back(first_order_.at_zero(k));
  const Rational scale = Rational(params().degree()) / Rational(static_cast<long>(targets_.size()));
  return scale * (profile_sum(reference_counts_, g0) - profile_sum(start_counts_, g0));
}

Rational HittingProblem::variance() const {
  if (start_in_target_) return Rational(0);
  const int m = params().balls;
  std::vector<Rational> g0, g1;
  for (int k = 0; k <= m; ++k) {
    g0.push_back(first_order_.at_zero(k));
    g1.push_back(first_order_.coefficient(k, 1));  // g'_k(0)
  }
  const Rational e = mean();
  const Rational balls(m);
  const Rational bracket = balls * profile_sum(start_counts_, g1) -
                           balls * profile_sum(reference_counts_, g1) +
                           e * profile_sum(start_counts_, g0);
  const Rational scale = Rational(2 * params().degree()) / Rational(static_cast<long>(targets_.size()));
  return scale * bracket + e * e - e;
}

std::vector<Rational> HittingProblem::raw_moments(int order) const {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  if (start_in_target_) return std::vector<Rational>(order, Rational(0));
  const std::size_t jet_order = static_cast<std::size_t>(std::max(order, 2) + 1);
  const GTaylorTable table(params(), static_cast<int>(jet_order));
  const Rational rate(params().urns - 1);
  const Rational set_size(static_cast<long>(targets_.size()));

  // |A| + u (N-1) sum_z g_{s(., z)}(u) as a jet in u.
  auto resolvent_jet = [&](std::span<const long> counts) {
    SeriesJet jet = SeriesJet::constant(set_size, jet_order);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] == 0) continue;
      const Rational weight = Rational(counts[k]) * rate;
      for (std::size_t i = 1; i <= jet_order; ++i) {
        jet[i] += weight * table.coefficient(static_cast<int>(k), static_cast<int>(i - 1));
      }
    }
    return jet;
  };

  const SeriesJet u_of_lambda = SeriesJet::scaled_expm1(Rational(params().balls), jet_order);
  const SeriesJet numerator = compose(resolvent_jet(start_counts_), u_of_lambda);
  const SeriesJet denominator = compose(resolvent_jet(reference_counts_), u_of_lambda);
  const SeriesJet transform = numerator / denominator;

  std::vector<Rational> moments;
  moments.reserve(order);
  for (int m = 1; m <= order; ++m) {
    Rational value = transform.derivative_at_zero(static_cast<std::size_t>(m));
    if (m % 2) value = -value;
    moments.push_back(value);
  }
  return moments;
}

CtmcStats HittingProblem::ctmc_stats() const {
  const Rational e = mean();
  const Rational balls(params().balls);
  return CtmcStats{e / balls, (variance() + e) / (balls * balls)};
}

HittingSummary HittingProblem::summarize(int order, std::span<const Rational> u_grid) const {
  HittingSummary s;
  s.mean = mean();
  s.variance = variance();
  s.raw_moments = raw_moments(std::max(order, 1));
  for (const auto& u : u_grid) s.transform_samples.push_back({u, laplace_u(u)});
  return s;
}

Rational green_potential(const ModelParams& params, const State& x, const State& z, const Rational& u) {
  if (u.sign() <= 0) throw std::domain_error("green_potential needs u > 0");
  validate_state(params, x);
  validate_state(params, z);
  const Rational scale = Rational(params.urns - 1) / pow(Rational(params.urns), params.balls);
  return scale * f_k({params, overlap(x, z)}, u);
}

}  // namespace ehrenfest
