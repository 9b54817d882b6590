#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ehrenfest/model.hpp"

using namespace ehrenfest;

namespace {

State S(std::string_view text) { return State::parse(text); }

std::vector<ModelParams> small_grid(std::uint64_t limit) {
  std::vector<ModelParams> out;
  for (int n = 2; n <= 12; ++n) {
    for (int m = 1; m <= 13; ++m) {
      const ModelParams p{n, m};
      if (p.state_count() <= limit) out.push_back(p);
    }
  }
  return out;
}

}  // namespace

TEST(Overlap, Examples) {
  EXPECT_EQ(overlap(S("1,2,3"), S("1,3,3")), 2);
  EXPECT_EQ(overlap(S("2,1,2"), S("2,1,2")), 3);
  EXPECT_EQ(overlap(S("1,1"), S("2,2")), 0);
  EXPECT_THROW(overlap(S("1,1"), S("1,1,1")), std::invalid_argument);
}

TEST(StateText, ParseAndRender) {
  EXPECT_EQ(S("(1,2,3)").to_string(), "(1,2,3)");
  EXPECT_EQ(S(" 2, 1 ").to_string(), "(2,1)");
  EXPECT_THROW(S("1,,2"), std::invalid_argument);
  EXPECT_THROW(validate_state(ModelParams{3, 2}, S("1,4")), std::invalid_argument);
  EXPECT_THROW(validate_state(ModelParams{3, 2}, S("1,0")), std::invalid_argument);
  EXPECT_THROW(validate_state(ModelParams{3, 2}, S("1,1,1")), std::invalid_argument);
}

TEST(ModelParamsCheck, RejectsDegenerateChains) {
  EXPECT_THROW((ModelParams{1, 2}.validate()), std::invalid_argument);
  EXPECT_THROW((ModelParams{2, 0}.validate()), std::invalid_argument);
  EXPECT_EQ((ModelParams{3, 4}.state_count()), 81u);
  EXPECT_EQ((ModelParams{3, 4}.degree()), 8);
}

TEST(TransitionProb, Examples) {
  EXPECT_EQ(transition_prob({3, 2}, S("1,1"), S("1,2")), Rational(1, 4));
  EXPECT_EQ(transition_prob({3, 2}, S("1,1"), S("1,1")), Rational(0));
  EXPECT_EQ(transition_prob({2, 3}, S("1,1,1"), S("1,2,1")), Rational(1, 3));
  EXPECT_EQ(transition_prob({3, 2}, S("1,1"), S("2,2")), Rational(0));
}

TEST(TransitionProb, RowsSumToOneExactly) {
  for (const auto& p : small_grid(10000)) {
    if (p.state_count() > 400) continue;  // exhaustive double loop
    const auto states = enumerate_states(p);
    for (const auto& x : states) {
      Rational row(0);
      for (const auto& y : states) row += transition_prob(p, x, y);
      ASSERT_EQ(row, Rational(1)) << "N=" << p.urns << " M=" << p.balls << " x=" << x.to_string();
    }
  }
}

TEST(TransitionProb, NeighbourCountMatchesDegree) {
  for (const auto& p : small_grid(10000)) {
    const auto states = enumerate_states(p);
    const State& x = states[states.size() / 3];
    long nonzero = 0;
    for (const auto& y : states) nonzero += transition_prob(p, x, y).is_zero() ? 0 : 1;
    EXPECT_EQ(nonzero, p.degree());
  }
}

TEST(Enumeration, MixedRadixBallOneFastest) {
  const auto states = enumerate_states({3, 2});
  ASSERT_EQ(states.size(), 9u);
  EXPECT_EQ(states[0], S("1,1"));
  EXPECT_EQ(states[1], S("2,1"));
  EXPECT_EQ(states[3], S("1,2"));
  EXPECT_EQ(states[8], S("3,3"));
  for (std::uint64_t i = 0; i < states.size(); ++i) {
    EXPECT_EQ(state_index({3, 2}, states[i]), i);
    EXPECT_EQ(state_from_index({3, 2}, i), states[i]);
  }
}

TEST(Semigroup, Examples) {
  const ModelParams p{3, 1};
  EXPECT_DOUBLE_EQ(single_ball_semigroup(p, 0.0, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(single_ball_semigroup(p, 0.0, 1, 2), 0.0);
  const double t = (2.0 / 3.0) * std::log(2.0);
  EXPECT_NEAR(single_ball_semigroup(p, t, 1, 1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(single_ball_semigroup(p, t, 1, 3), 1.0 / 6.0, 1e-15);
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) EXPECT_NEAR(single_ball_semigroup(p, 1e3, i, j), 1.0 / 3.0, 1e-15);
  }
  EXPECT_THROW(single_ball_semigroup(p, -1.0, 1, 1), std::domain_error);
}

TEST(Semigroup, KolmogorovBackwardEquation) {
  for (int n = 2; n <= 6; ++n) {
    const ModelParams p{n, 1};
    for (double t : {0.05, 0.3, 1.0, 2.5}) {
      const double h = 1e-5;
      const double derivative =
          (single_ball_semigroup(p, t + h, 1, 1) - single_ball_semigroup(p, t - h, 1, 1)) / (2 * h);
      const double rhs = -(double(n) / (n - 1)) * single_ball_semigroup(p, t, 1, 1) + 1.0 / (n - 1);
      EXPECT_NEAR(derivative, rhs, 1e-6) << "N=" << n << " t=" << t;
    }
  }
}

TEST(Semigroup, ChapmanKolmogorov) {
  for (int n = 2; n <= 5; ++n) {
    const ModelParams p{n, 1};
    for (double t : {0.1, 0.7, 1.9}) {
      for (double s : {0.2, 1.3}) {
        for (int i = 1; i <= n; ++i) {
          for (int j = 1; j <= n; ++j) {
            double composed = 0.0;
            for (int l = 1; l <= n; ++l) {
              composed += single_ball_semigroup(p, t, i, l) * single_ball_semigroup(p, s, l, j);
            }
            EXPECT_NEAR(single_ball_semigroup(p, t + s, i, j), composed, 1e-12);
          }
        }
      }
    }
  }
}

TEST(ProductSemigroup, IdentityAtZeroAndStochastic) {
  const ModelParams p{3, 3};
  const auto states = enumerate_states(p);
  EXPECT_DOUBLE_EQ(product_semigroup(p, 0.0, S("1,2,3"), S("1,2,3")), 1.0);
  EXPECT_DOUBLE_EQ(product_semigroup(p, 0.0, S("1,2,3"), S("1,2,2")), 0.0);
  for (double t : {0.0, 0.4, 3.0}) {
    for (const State& x : {S("1,1,1"), S("1,2,3")}) {
      double row = 0.0;
      for (const auto& z : states) row += product_semigroup(p, t, x, z);
      EXPECT_NEAR(row, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(product_semigroup(p, -0.5, S("1,1,1"), S("1,1,1")), std::domain_error);
}

TEST(ProductSemigroup, FactorsOverBalls) {
  const ModelParams p{4, 3};
  const State x = S("1,2,3");
  const State z = S("1,4,3");
  const double t = 0.37;
  double product = 1.0;
  for (int b = 0; b < 3; ++b) product *= single_ball_semigroup(p, t, x[b], z[b]);
  EXPECT_NEAR(product_semigroup(p, t, x, z), product, 1e-15);
}

TEST(Materialize, DiagonalCountDistinctExamples) {
  EXPECT_EQ(materialize(SetDescriptor::diagonal(), {3, 2}), (std::vector<State>{S("1,1"), S("2,2"), S("3,3")}));
  EXPECT_EQ(materialize(SetDescriptor::count(1, 2), {2, 2}), (std::vector<State>{S("1,2"), S("2,1")}));
  EXPECT_EQ(materialize(SetDescriptor::distinct(), {2, 2}), (std::vector<State>{S("1,2"), S("2,1")}));
}

TEST(Materialize, SizesMatchCountingFormulas) {
  for (const auto& p : small_grid(5000)) {
    EXPECT_EQ(materialize(SetDescriptor::diagonal(), p).size(), static_cast<std::size_t>(p.urns));
    for (int h = 0; h <= p.balls; ++h) {
      const BigInt expected = binomial(p.balls, h) * BigInt(static_cast<unsigned long>(std::pow(p.urns - 1, p.balls - h)));
      EXPECT_EQ(BigInt(static_cast<unsigned long>(materialize(SetDescriptor::count(h), p).size())), expected);
    }
    if (p.balls <= p.urns) {
      BigInt falling = 1;
      for (int i = 0; i < p.balls; ++i) falling *= p.urns - i;
      EXPECT_EQ(BigInt(static_cast<unsigned long>(materialize(SetDescriptor::distinct(), p).size())), falling);
    }
  }
}

TEST(Materialize, Errors) {
  EXPECT_THROW(materialize(SetDescriptor::distinct(), {2, 3}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::count(3), {2, 2}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::count(-1), {2, 2}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::count(1, 3), {2, 2}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::explicit_set({S("1,1"), S("1,1")}), {2, 2}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::explicit_set({S("1,3")}), {2, 2}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::explicit_set({}), {2, 2}), std::invalid_argument);
  EXPECT_THROW(materialize(SetDescriptor::pair(S("1,2"), S("1,2")), {2, 2}), std::invalid_argument);
}

TEST(Materialize, ExplicitIsSorted) {
  const auto a = materialize(SetDescriptor::explicit_set({S("2,2"), S("1,2"), S("1,1")}), {2, 2});
  EXPECT_EQ(a, (std::vector<State>{S("1,1"), S("1,2"), S("2,2")}));
}

TEST(DescriptorGrammar, ParsesEveryKind) {
  const auto single = parse_set_descriptor("singleton:2,2");
  EXPECT_EQ(single.kind, SetKind::Singleton);
  EXPECT_EQ(single.states.at(0), S("2,2"));

  const auto pair = parse_set_descriptor("pair:(1,1);(2,2)");
  EXPECT_EQ(pair.kind, SetKind::Pair);
  EXPECT_EQ(pair.states.at(1), S("2,2"));

  EXPECT_EQ(parse_set_descriptor("diagonal").kind, SetKind::Diagonal);
  EXPECT_EQ(parse_set_descriptor("distinct").kind, SetKind::Distinct);

  const auto count = parse_set_descriptor("count:1");
  EXPECT_EQ(count.kind, SetKind::Count);
  EXPECT_EQ(count.level, 1);
  EXPECT_EQ(count.reference_urn, 2);
  EXPECT_EQ(parse_set_descriptor("count:0:3").reference_urn, 3);

  EXPECT_THROW(parse_set_descriptor("bogus"), std::invalid_argument);
  EXPECT_THROW(parse_set_descriptor("count:x"), std::invalid_argument);
  EXPECT_THROW(parse_set_descriptor("pair:(1,1)"), std::invalid_argument);
}

TEST(DescriptorGrammar, ToStringRoundTrips) {
  for (const char* text : {"singleton:2,1,3", "pair:(1,1);(2,2)", "diagonal", "count:2:2", "distinct"}) {
    EXPECT_EQ(parse_set_descriptor(parse_set_descriptor(text).to_string()).to_string(),
              parse_set_descriptor(text).to_string());
  }
}

TEST(DescriptorGrammar, ExplicitJsonFile) {
  const auto path = std::filesystem::temp_directory_path() / "ehrenfest_explicit_set.json";
  {
    std::ofstream f(path);
    f << "[[1,1],[2,2]]";
  }
  const auto d = parse_set_descriptor("explicit:@" + path.string());
  EXPECT_EQ(d.kind, SetKind::Explicit);
  EXPECT_EQ(materialize(d, {2, 2}), (std::vector<State>{S("1,1"), S("2,2")}));
  {
    std::ofstream f(path);
    f << "[[1,1],[2,\"x\"]]";
  }
  EXPECT_THROW(parse_set_descriptor("explicit:@" + path.string()), std::invalid_argument);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_set_descriptor("explicit:@/nonexistent/set.json"), std::invalid_argument);
}

TEST(SymmetricFamily, Examples) {
  const std::vector<State> diag{S("1,1"), S("2,2"), S("3,3")};
  EXPECT_TRUE(is_symmetric_family(diag));
  const std::vector<State> bad{S("1,1"), S("2,2"), S("1,2")};
  EXPECT_FALSE(is_symmetric_family(bad));
  const auto mismatch = find_profile_mismatch(bad);
  ASSERT_TRUE(mismatch.has_value());
  EXPECT_NE(mismatch->first_profile, mismatch->second_profile);
  EXPECT_EQ(overlap_profile(S("1,1"), bad), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(overlap_profile(S("1,2"), bad), (std::vector<int>{1, 1, 2}));
  EXPECT_THROW(is_symmetric_family(std::vector<State>{}), std::invalid_argument);
}

TEST(SymmetricFamily, AnyTwoPointSet) {
  const ModelParams p{3, 3};
  const auto states = enumerate_states(p);
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const std::vector<State> a{states[i], states[j]};
      ASSERT_TRUE(is_symmetric_family(a));
    }
  }
}

TEST(SymmetricFamily, EveryDescriptorKindOnGrid) {
  std::vector<ModelParams> grid = small_grid(10000);
  for (int n = 13; n <= 100; ++n) grid.push_back({n, 2});
  for (int n : {13, 14, 15, 16, 17, 18, 19, 20, 21}) grid.push_back({n, 3});
  for (int n : {200, 1000, 10000}) grid.push_back({n, 1});
  for (const auto& p : grid) {
    std::vector<SetDescriptor> kinds{SetDescriptor::singleton(State::constant(p.balls, 1)),
                                     SetDescriptor::pair(State::constant(p.balls, 1), State::constant(p.balls, 2)),
                                     SetDescriptor::diagonal()};
    for (int h = 0; h <= p.balls; ++h) kinds.push_back(SetDescriptor::count(h));
    if (p.balls <= p.urns) kinds.push_back(SetDescriptor::distinct());
    for (const auto& d : kinds) {
      ASSERT_TRUE(is_symmetric_family(materialize(d, p)))
          << d.to_string() << " N=" << p.urns << " M=" << p.balls;
    }
  }
}

TEST(Permutation, IdentityAndValidation) {
  const ModelParams p{3, 2};
  const auto id = ProductPermutation::identity(p);
  EXPECT_EQ(id.apply(S("2,3")), S("2,3"));
  EXPECT_THROW(ProductPermutation({{1, 1, 2}, {1, 2, 3}}), std::invalid_argument);
  EXPECT_THROW(ProductPermutation({{1, 2, 4}, {1, 2, 3}}), std::invalid_argument);
}

TEST(Permutation, PreservesOverlapAndFamilyMembership) {
  std::mt19937_64 rng(2024);
  for (const ModelParams p : {ModelParams{3, 2}, ModelParams{4, 3}, ModelParams{5, 2}, ModelParams{2, 5}}) {
    const auto states = enumerate_states(p);
    std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
      const auto tau = ProductPermutation::random(p, rng);
      const State& x = states[pick(rng)];
      const State& y = states[pick(rng)];
      EXPECT_EQ(overlap(tau.apply(x), tau.apply(y)), overlap(x, y));

      std::vector<State> a{states[pick(rng)], states[pick(rng)], states[pick(rng)]};
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      auto image = tau.apply(a);
      std::sort(image.begin(), image.end());
      EXPECT_EQ(is_symmetric_family(a), is_symmetric_family(image));
    }
  }
}
