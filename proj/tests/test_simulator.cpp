#include <gtest/gtest.h>

#include <cmath>

#include "ehrenfest/hitting_engine.hpp"
#include "ehrenfest/simulator.hpp"

using namespace ehrenfest;
using namespace ehrenfest::sim;

namespace {

SimConfig config(std::uint64_t replicas, std::uint64_t seed, Mode mode = Mode::Discrete) {
  SimConfig c;
  c.replicas = replicas;
  c.seed = seed;
  c.mode = mode;
  return c;
}

const SetDescriptor kFar = SetDescriptor::singleton({2, 2});

}  // namespace

TEST(Config, Validation) {
  EXPECT_THROW(config(0, 1).validate(), std::invalid_argument);
  SimConfig c = config(10, 1);
  c.max_steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(10, 1);
  c.u_grid = {1.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(10, 1, Mode::Ctmc);
  c.lambda_grid = {1.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(10, 1);
  c.lambda_grid = {-1.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_mode("ctmc"), Mode::Ctmc);
  EXPECT_EQ(to_string(Mode::Discrete), "discrete");
  EXPECT_THROW(parse_mode("poisson"), std::invalid_argument);
}

TEST(Sample, Errors) {
  EXPECT_THROW(sample_hitting({3, 2}, {1, 1}, std::span<const State>{}, config(10, 1)), std::invalid_argument);
  EXPECT_THROW(sample_hitting({3, 2}, {1, 1}, kFar, config(0, 1)), std::invalid_argument);
  EXPECT_THROW(sample_hitting({3, 2}, {1, 4}, kFar, config(10, 1)), std::invalid_argument);
}

TEST(Sample, StartInsideTarget) {
  for (Mode mode : {Mode::Discrete, Mode::Ctmc}) {
    const auto s = sample_hitting({3, 2}, {2, 2}, kFar, config(1000, 5, mode));
    EXPECT_EQ(s.mean, 0.0);
    EXPECT_EQ(s.variance, 0.0);
    EXPECT_EQ(s.stderr_, 0.0);
    EXPECT_EQ(s.used, 1000u);
  }
}

TEST(Sample, DiscreteMeanWithinFourStderr) {
  const auto s = sample_hitting({3, 2}, {1, 1}, kFar, config(100000, 11));
  EXPECT_EQ(s.truncated, 0u);
  EXPECT_LE(std::abs(s.mean - 10.0), 4.0 * s.stderr_) << s.mean << " +- " << s.stderr_;
  EXPECT_NEAR(s.variance / 74.0, 1.0, 0.1);
}

TEST(Sample, CtmcMeanWithinFourStderr) {
  const auto s = sample_hitting({3, 2}, {1, 1}, kFar, config(100000, 12, Mode::Ctmc));
  EXPECT_LE(std::abs(s.mean - 5.0), 4.0 * s.stderr_) << s.mean << " +- " << s.stderr_;
}

TEST(Sample, MembershipModesAgreeWithEngine) {
  const ModelParams p{3, 3};
  const State x{1, 2, 3};
  const std::vector<SetDescriptor> sets{SetDescriptor::diagonal(), SetDescriptor::count(3),
                                        SetDescriptor::pair({1, 1, 1}, {2, 2, 2}),
                                        SetDescriptor::explicit_set(materialize(SetDescriptor::diagonal(), p))};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double exact = HittingProblem({p, x, sets[i]}).mean().to_double();
    const auto s = sample_hitting(p, x, sets[i], config(40000, 100 + i));
    EXPECT_LE(std::abs(s.mean - exact), 4.0 * s.stderr_) << sets[i].to_string();
  }
  const State y{1, 1, 1};
  const double exact = HittingProblem({p, y, SetDescriptor::distinct()}).mean().to_double();
  const auto s = sample_hitting(p, y, SetDescriptor::distinct(), config(40000, 7));
  EXPECT_LE(std::abs(s.mean - exact), 4.0 * s.stderr_);
}

TEST(Sample, DeterministicAcrossWorkerCounts) {
  for (Mode mode : {Mode::Discrete, Mode::Ctmc}) {
    SimConfig a = config(5000, 99, mode);
    a.workers = 1;
    SimConfig b = a;
    b.workers = 7;
    const auto ta = sample_times({3, 2}, {1, 1}, kFar, a);
    const auto tb = sample_times({3, 2}, {1, 1}, kFar, b);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) ASSERT_EQ(ta[i], tb[i]) << i;
    const auto sa = sample_hitting({3, 2}, {1, 1}, kFar, a);
    const auto sb = sample_hitting({3, 2}, {1, 1}, kFar, b);
    EXPECT_EQ(sa.mean, sb.mean);
    EXPECT_EQ(sa.variance, sb.variance);
  }
}

TEST(Sample, SeedsGiveDifferentStreams) {
  const auto a = sample_times({3, 2}, {1, 1}, kFar, config(200, 1));
  const auto b = sample_times({3, 2}, {1, 1}, kFar, config(200, 2));
  EXPECT_NE(a, b);
}

TEST(Sample, TruncationIsReportedNotDropped) {
  SimConfig c = config(2000, 3);
  c.max_steps = 3;
  const auto times = sample_times({3, 2}, {1, 1}, kFar, c);
  std::size_t nan = 0;
  for (double t : times) nan += std::isnan(t);
  const auto s = sample_hitting({3, 2}, {1, 1}, kFar, c);
  EXPECT_GT(s.truncated, 0u);
  EXPECT_EQ(s.truncated, nan);
  EXPECT_EQ(s.used + s.truncated, s.replicas);
}

TEST(Transform, Examples) {
  const std::vector<double> samples{0.0, 1.0, 2.0, 5.0};
  const std::vector<double> zero{0.0};
  const auto e = empirical_transform(samples, zero);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].estimate, 1.0);
  EXPECT_EQ(e[0].stderr_, 0.0);
  EXPECT_THROW(empirical_transform(std::vector<double>{}, zero), std::invalid_argument);
  const std::vector<double> one{1.0};
  const double expect = (1.0 + std::exp(-1.0) + std::exp(-2.0) + std::exp(-5.0)) / 4.0;
  EXPECT_NEAR(empirical_transform(samples, one)[0].estimate, expect, 1e-15);
}

TEST(Transform, CtmcSingleBallMatchesExact) {
  SimConfig c = config(100000, 21, Mode::Ctmc);
  c.u_grid = {1.0};
  const auto s = sample_hitting({3, 1}, {1}, SetDescriptor::singleton({2}), c);
  ASSERT_EQ(s.transforms.size(), 1u);
  EXPECT_LE(std::abs(s.transforms[0].estimate - 1.0 / 3.0), 4.0 * s.transforms[0].stderr_);
}

TEST(Transform, PairedDiscreteAndCtmcAgree) {
  const ModelParams p{3, 2};
  for (double lambda : {0.1, 0.5, 1.0}) {
    SimConfig d = config(100000, 31);
    d.lambda_grid = {lambda};
    SimConfig c = config(100000, 32, Mode::Ctmc);
    c.u_grid = {p.balls * std::expm1(lambda)};
    const auto sd = sample_hitting(p, {1, 1}, kFar, d);
    const auto sc = sample_hitting(p, {1, 1}, kFar, c);
    const double combined = std::hypot(sd.transforms[0].stderr_, sc.transforms[0].stderr_);
    EXPECT_LE(std::abs(sd.transforms[0].estimate - sc.transforms[0].estimate), 4.0 * combined) << lambda;
  }
}

TEST(MetaSeeds, MostSeedsCoverTheExactMean) {
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = sample_hitting({3, 2}, {1, 1}, kFar, config(20000, seed * 7919));
    covered += std::abs(s.mean - 10.0) <= 4.0 * s.stderr_;
  }
  EXPECT_GE(covered, 19);
}

TEST(FirstStep, EmbeddedChainMatchesKernel) {
  for (Mode mode : {Mode::Discrete, Mode::Ctmc}) {
    const auto check = first_step_check({3, 2}, {1, 2}, mode, 60000, 5);
    EXPECT_EQ(check.trials, 60000u);
    EXPECT_EQ(check.dof, 3);
    EXPECT_FALSE(check.flagged) << "chi2=" << check.chi_square << " p=" << check.p_value;
    EXPECT_GT(check.p_value, 0.0);
  }
  EXPECT_THROW(first_step_check({3, 2}, {1, 2}, Mode::Discrete, 0, 5), std::invalid_argument);
}
