// Copyright 2026 The kbembed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kbembed/kbembed.hpp"
#include "test_support.hpp"

namespace kbembed {
namespace {

using testing::oracle_softmax;
using testing::random_model;

std::vector<EntityId> entity_ids(std::initializer_list<std::uint32_t> ids) {
  std::vector<EntityId> out;
  for (auto i : ids) out.emplace_back(i);
  return out;
}

std::vector<RelationId> relation_ids(std::size_t n) {
  std::vector<RelationId> out;
  for (std::uint32_t i = 0; i < n; ++i) out.emplace_back(i);
  return out;
}

// d = 1 model whose entity i sits at `positions[i]`, with h = entity 0 at 0
// and a zero relation, so score(0, r, i) = -|positions[i]|.
EmbeddingModel line_model(const std::vector<double>& positions) {
  auto m = random_model(positions.size(), 1, 0, 1, NormKind::L1, 1);
  for (std::size_t i = 0; i < positions.size(); ++i) m.entity(EntityId(i))[0] = positions[i];
  m.relation(RelationId(0))[0] = 0.0;
  return m;
}

TEST(ModelConfig, Validation) {
  ModelConfig c;
  c.dim = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.dim = 4;
  c.init_scale = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(EmbeddingModel, ShapesFollowVocabulary) {
  auto m = random_model(7, 3, 5, 4, NormKind::L1, 2);
  EXPECT_EQ(m.entities().rows(), 7u);
  EXPECT_EQ(m.relations().rows(), 3u);
  EXPECT_EQ(m.words().rows(), 5u);
  EXPECT_EQ(m.entities().cols(), 4u);
  EXPECT_EQ(m.alpha, 0.0);
  EXPECT_EQ(m.beta, 0.0);
  EXPECT_GE(m.epsilon, 0.0);
  EXPECT_LE(m.epsilon, 1e-6);
  EXPECT_LE(m.eta, 1e-6);
}

TEST(EmbeddingModel, InitializationBoundsAndProjection) {
  auto m = random_model(50, 4, 20, 16, NormKind::L1, 3);
  Rng rng(5);
  m.initialize(rng);
  const double bound = 6.0 / std::sqrt(16.0);
  for (double x : m.relations().data()) EXPECT_LE(std::fabs(x), bound);
  for (const Matrix* mat : {&m.entities(), &m.words()}) {
    for (std::size_t i = 0; i < mat->rows(); ++i) {
      double sq = 0;
      for (double x : mat->row(i)) sq += x * x;
      EXPECT_LE(std::sqrt(sq), 1.0 + 1e-12);
    }
  }
}

TEST(ScoreTriplet, ZeroResidualGivesAlpha) {
  auto m = random_model(3, 1, 0, 4, NormKind::L2, 4);
  m.alpha = 0.25;
  for (int i = 0; i < 4; ++i) {
    m.entity(EntityId(2))[i] = m.entity(EntityId(0))[i] + m.relation(RelationId(0))[i];
  }
  EXPECT_DOUBLE_EQ(score_triplet(m, EntityId(0), RelationId(0), EntityId(2)), 0.25);
}

TEST(ScoreTriplet, HandArithmeticL1) {
  auto m = random_model(2, 1, 0, 2, NormKind::L1, 4);
  for (int i = 0; i < 2; ++i) {
    m.entity(EntityId(0))[i] = 0;
    m.relation(RelationId(0))[i] = 0;
  }
  m.entity(EntityId(1))[0] = 1;
  m.entity(EntityId(1))[1] = 0;
  EXPECT_DOUBLE_EQ(score_triplet(m, EntityId(0), RelationId(0), EntityId(1)), -1.0);
}

TEST(ScoreTriplet, MatchesStraightLineOracle) {
  for (auto norm : {NormKind::L1, NormKind::L2}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto m = random_model(6, 3, 0, 8, norm, seed);
      m.alpha = 0.1 * static_cast<double>(seed);
      for (std::uint32_t h = 0; h < 6; ++h) {
        for (std::uint32_t t = 0; t < 6; ++t) {
          const double got = score_triplet(m, EntityId(h), RelationId(seed % 3), EntityId(t));
          const double want =
              static_cast<double>(testing::oracle_distance_score(m, h, seed % 3, t));
          EXPECT_NEAR(got, want, 1e-12);
        }
      }
    }
  }
}

TEST(ScoreTriplet, OutOfRangeIdThrows) {
  auto m = random_model(3, 2, 0, 2, NormKind::L1, 1);
  EXPECT_THROW(score_triplet(m, EntityId(3), RelationId(0), EntityId(0)), IndexError);
  EXPECT_THROW(score_triplet(m, EntityId(0), RelationId(2), EntityId(0)), IndexError);
}

TEST(ScoreTriplet, NeverExceedsAlpha) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = random_model(4, 2, 0, 5, trial % 2 ? NormKind::L1 : NormKind::L2, trial);
    m.alpha = std::uniform_real_distribution<double>(-3, 3)(rng);
    for (std::uint32_t h = 0; h < 4; ++h) {
      for (std::uint32_t t = 0; t < 4; ++t) {
        EXPECT_LT(score_triplet(m, EntityId(h), RelationId(1), EntityId(t)), m.alpha);
      }
    }
  }
}

TEST(ScoreMention, EmptyMentionGivesBeta) {
  auto m = random_model(2, 2, 3, 4, NormKind::L1, 1);
  m.beta = -0.75;
  EXPECT_DOUBLE_EQ(score_mention(m, RelationId(1), Mention{}), -0.75);
}

TEST(ScoreMention, SelfInnerProduct) {
  auto m = random_model(2, 1, 1, 6, NormKind::L1, 3);
  double q = 0;
  for (int i = 0; i < 6; ++i) {
    m.word(WordId(0))[i] = m.relation(RelationId(0))[i];
    q += m.relation(RelationId(0))[i] * m.relation(RelationId(0))[i];
  }
  Mention mention{{{WordId(0), 1}}};
  EXPECT_NEAR(score_mention(m, RelationId(0), mention), q, 1e-14);
}

TEST(ScoreMention, MatchesPerWordOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto m = random_model(2, 3, 10, 8, NormKind::L1, seed);
    Mention mention{{{WordId(1), 1}, {WordId(4), 2}, {WordId(9), 1}}};
    for (std::uint32_t r = 0; r < 3; ++r) {
      EXPECT_NEAR(score_mention(m, RelationId(r), mention),
                  static_cast<double>(
                      testing::oracle_mention_score(m, r, testing::tokens_of(mention))),
                  1e-12);
    }
  }
  auto m = random_model(2, 1, 2, 2, NormKind::L1, 1);
  EXPECT_THROW(score_mention(m, RelationId(0), Mention{{{WordId(5), 1}}}), IndexError);
}

TEST(ProbTail, UniformWhenScoresTie) {
  auto m = line_model({0.0, 1.0, -1.0, 1.0, -1.0});
  auto p = prob_tail(m, EntityId(0), RelationId(0), entity_ids({1, 2, 3, 4}));
  for (double x : p) EXPECT_NEAR(x, 0.25, 1e-15);
}

TEST(ProbTail, SingletonIsCertain) {
  auto m = random_model(4, 1, 0, 3, NormKind::L1, 1);
  auto p = prob_tail(m, EntityId(0), RelationId(0), entity_ids({2}));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_THROW(prob_tail(m, EntityId(0), RelationId(0), {}), ArgumentError);
}

TEST(ProbTail, MatchesExtendedPrecisionOracle) {
  const std::vector<double> pos = {0.0, 0.3, -1.7, 2.5, 0.05, -4.0};
  auto m = line_model(pos);
  auto p = prob_tail(m, EntityId(0), RelationId(0), entity_ids({1, 2, 3, 4, 5}));
  std::vector<long double> scores;
  for (int i = 1; i <= 5; ++i) scores.push_back(-std::fabs(static_cast<long double>(pos[i])));
  auto want = oracle_softmax(scores);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(p[i], static_cast<double>(want[i]), 1e-12);
}

TEST(ProbHead, UniformAndSingleton) {
  auto m = line_model({0.0, 1.0, -1.0});
  // score(h, r, 0) = -|h|
  auto p = prob_head(m, RelationId(0), EntityId(0), entity_ids({1, 2}));
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_EQ(prob_head(m, RelationId(0), EntityId(0), entity_ids({1}))[0], 1.0);
}

// ||h' + r - t|| = ||t + (-r) - h'||: with L2 and a negated relation, the head
// distribution equals the tail distribution of the mirrored query.
TEST(ProbHead, MirrorsTailUnderNegatedRelation) {
  auto m = random_model(8, 2, 0, 5, NormKind::L2, 31);
  for (int i = 0; i < 5; ++i) m.relation(RelationId(1))[i] = -m.relation(RelationId(0))[i];
  auto cands = entity_ids({0, 1, 2, 4, 5, 7});
  auto ph = prob_head(m, RelationId(0), EntityId(3), cands);
  auto pt = prob_tail(m, EntityId(3), RelationId(1), cands);
  for (std::size_t i = 0; i < cands.size(); ++i) EXPECT_NEAR(ph[i], pt[i], 1e-12);
}

TEST(ProbRelStruct, UniformSingletonAndOracle) {
  auto m = random_model(3, 6, 0, 4, NormKind::L1, 2);
  // Identical relation rows give identical scores.
  auto tied = m;
  for (std::uint32_t r = 1; r < 6; ++r) {
    for (int i = 0; i < 4; ++i) tied.relation(RelationId(r))[i] = tied.relation(RelationId(0))[i];
  }
  for (double x : prob_rel_struct(tied, EntityId(0), EntityId(1), relation_ids(6))) {
    EXPECT_NEAR(x, 1.0 / 6, 1e-15);
  }
  EXPECT_EQ(prob_rel_struct(m, EntityId(0), EntityId(1), relation_ids(1))[0], 1.0);

  auto p = prob_rel_struct(m, EntityId(0), EntityId(2), relation_ids(6));
  std::vector<long double> s;
  for (std::uint32_t r = 0; r < 6; ++r) s.push_back(testing::oracle_distance_score(m, 0, r, 2));
  auto want = oracle_softmax(s);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(p[i], static_cast<double>(want[i]), 1e-12);
}

TEST(ProbRelMention, EmptyMentionIsUniform) {
  auto m = random_model(2, 11, 3, 4, NormKind::L1, 3);
  auto p = prob_rel_mention(m, Mention{}, relation_ids(11));
  for (double x : p) EXPECT_NEAR(x, 1.0 / 11, 1e-15);
  EXPECT_EQ(prob_rel_mention(m, Mention{{{WordId(0), 1}}}, relation_ids(1))[0], 1.0);
  EXPECT_THROW(prob_rel_mention(m, Mention{}, {}), ArgumentError);
}

TEST(ProbRelMention, MatchesExtendedPrecisionOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = random_model(2, 6, 12, 6, NormKind::L1, seed, 0.8);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> w(0, 11);
    std::map<std::uint32_t, std::uint32_t> counts;
    for (int i = 0; i < 4; ++i) ++counts[w(rng)];
    Mention mention;
    for (auto [id, n] : counts) mention.words.push_back({WordId(id), n});
    auto p = prob_rel_mention(m, mention, relation_ids(6));
    std::vector<long double> s;
    for (std::uint32_t r = 0; r < 6; ++r) {
      s.push_back(testing::oracle_mention_score(m, r, testing::tokens_of(mention)));
    }
    auto want = oracle_softmax(s);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(p[i], static_cast<double>(want[i]), 1e-12);
  }
}

TEST(Softmax, InvariantToConstantShift) {
  auto m = random_model(10, 4, 0, 6, NormKind::L2, 6);
  auto all = m.vocabulary().all_entities();
  auto before = prob_tail(m, EntityId(1), RelationId(2), all);
  m.alpha = 123.0;
  auto after = prob_tail(m, EntityId(1), RelationId(2), all);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i], after[i], 1e-12);
}

TEST(Softmax, StableForLargeScores) {
  auto m = line_model({0.0, 1000.0, 1001.0, 2000.0});
  auto p = prob_tail(m, EntityId(0), RelationId(0), entity_ids({1, 2, 3}));
  for (double x : p) EXPECT_TRUE(std::isfinite(x));
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(BeliefLogProbability, SingletonSetsGiveZero) {
  auto m = random_model(3, 2, 2, 2, NormKind::L1, 4);
  Belief b{EntityId(0), RelationId(1), EntityId(2), Mention{{{WordId(1), 1}}}, {}, {}};
  CandidateSets sets{{EntityId(0)}, {EntityId(2)}, {RelationId(1)}};
  EXPECT_NEAR(belief_log_probability(m, b, sets), 0.0, 1e-15);
}

// Exhaustive oracle on a 3-entity, 2-relation, d = 2 model.
TEST(BeliefLogProbability, MatchesExhaustiveOracle) {
  for (auto norm : {NormKind::L1, NormKind::L2}) {
    auto m = random_model(3, 2, 3, 2, norm, 77);
    const auto sets = CandidateSets::from(m.vocabulary());
    Mention mention{{{WordId(0), 1}, {WordId(2), 2}}};
    for (std::uint32_t h = 0; h < 3; ++h) {
      for (std::uint32_t r = 0; r < 2; ++r) {
        for (std::uint32_t t = 0; t < 3; ++t) {
          auto D = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
            return testing::oracle_distance_score(m, a, b, c);
          };
          long double zh = 0, zt = 0, zr = 0, zm = 0;
          for (std::uint32_t x = 0; x < 3; ++x) zh += std::exp(D(x, r, t));
          for (std::uint32_t x = 0; x < 3; ++x) zt += std::exp(D(h, r, x));
          for (std::uint32_t x = 0; x < 2; ++x) zr += std::exp(D(h, x, t));
          auto toks = testing::tokens_of(mention);
          for (std::uint32_t x = 0; x < 2; ++x) {
            zm += std::exp(testing::oracle_mention_score(m, x, toks));
          }
          const long double p_h = std::exp(D(h, r, t)) / zh;
          const long double p_t = std::exp(D(h, r, t)) / zt;
          const long double p_r = std::exp(D(h, r, t)) / zr;
          const long double p_m = std::exp(testing::oracle_mention_score(m, r, toks)) / zm;

          Belief with{EntityId(h), RelationId(r), EntityId(t), mention, {}, {}};
          Belief without{EntityId(h), RelationId(r), EntityId(t), {}, {}, {}};
          const double lp_with = belief_log_probability(m, with, sets);
          const double lp_without = belief_log_probability(m, without, sets);
          EXPECT_NEAR(lp_with, static_cast<double>(std::log(p_h * p_r * p_m * p_t) / 3), 1e-10);
          EXPECT_NEAR(lp_without, static_cast<double>(std::log(p_h * p_r * p_t) / 3), 1e-10);
          // Geometric mean with Pr(r|h,t,m) = Pr(r|h,t) Pr(r|m).
          EXPECT_NEAR(std::exp(lp_with), static_cast<double>(std::cbrt(p_h * (p_r * p_m) * p_t)),
                      1e-10);
        }
      }
    }
  }
}

// Equals the sum of independently computed component log-softmaxes.
TEST(BeliefLogProbability, EqualsSumOfComponents) {
  auto m = random_model(12, 4, 6, 5, NormKind::L1, 12);
  const auto sets = CandidateSets::from(m.vocabulary());
  Belief b{EntityId(3), RelationId(2), EntityId(9), Mention{{{WordId(1), 1}, {WordId(5), 1}}},
           {}, {}};
  auto idx = [](const auto& ids, auto id) {
    return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
  };
  const double ph = prob_head(m, b.relation, b.tail, sets.heads)[idx(sets.heads, b.head)];
  const double pt = prob_tail(m, b.head, b.relation, sets.tails)[idx(sets.tails, b.tail)];
  const double pr =
      prob_rel_struct(m, b.head, b.tail, sets.relations)[idx(sets.relations, b.relation)];
  const double pm = prob_rel_mention(m, *b.mention, sets.relations)[idx(sets.relations, b.relation)];
  EXPECT_NEAR(belief_log_probability(m, b, sets),
              (std::log(ph) + std::log(pt) + std::log(pr) + std::log(pm)) / 3, 1e-10);
}

TEST(SigmoidTriplet, MidpointAndSaturation) {
  auto m = random_model(3, 1, 0, 2, NormKind::L1, 1);
  for (int i = 0; i < 2; ++i) {
    m.entity(EntityId(1))[i] = m.entity(EntityId(0))[i] + m.relation(RelationId(0))[i];
  }
  EXPECT_DOUBLE_EQ(sigmoid_triplet(m, EntityId(0), RelationId(0), EntityId(1)), 0.5 + m.epsilon);
  m.entity(EntityId(2))[0] = 1e6;
  EXPECT_DOUBLE_EQ(sigmoid_triplet(m, EntityId(0), RelationId(0), EntityId(2)), m.epsilon);
}

TEST(SigmoidMention, MidpointForEmptyMention) {
  auto m = random_model(2, 2, 2, 3, NormKind::L1, 1);
  EXPECT_DOUBLE_EQ(sigmoid_mention(m, RelationId(0), Mention{}), 0.5 + m.eta);
  // Orthogonal word and relation: F = 0.
  for (int i = 0; i < 3; ++i) {
    m.word(WordId(0))[i] = i == 0 ? 1.0 : 0.0;
    m.relation(RelationId(1))[i] = i == 0 ? 0.0 : 1.0;
  }
  EXPECT_DOUBLE_EQ(sigmoid_mention(m, RelationId(1), Mention{{{WordId(0), 1}}}), 0.5 + m.eta);
}

// 10^5 random models: sigmoid outputs stay in (offset, 1 + offset).
TEST(Sigmoid, RangeSweep) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3, 3), unit(-1, 1), a(-20, 20);
  auto m = random_model(2, 1, 2, 4, NormKind::L2, 0);
  Mention mention{{{WordId(0), 1}, {WordId(1), 1}}};
  for (int trial = 0; trial < 100000; ++trial) {
    for (Matrix* mat : {&m.entities(), &m.relations()}) {
      for (double& x : mat->data()) x = u(rng);
    }
    for (double& x : m.words().data()) x = unit(rng);
    m.alpha = a(rng);
    m.beta = a(rng);
    const double st = sigmoid_triplet(m, EntityId(0), RelationId(0), EntityId(1));
    const double sm = sigmoid_mention(m, RelationId(0), mention);
    ASSERT_GT(st, m.epsilon);
    ASSERT_LT(st, 1 + m.epsilon);
    ASSERT_GT(sm, m.eta);
    ASSERT_LT(sm, 1 + m.eta);
  }
}

TEST(Scores, Deterministic) {
  auto m = random_model(5, 2, 3, 4, NormKind::L1, 9);
  const auto a = score_triplet(m, EntityId(1), RelationId(1), EntityId(4));
  const auto b = score_triplet(m, EntityId(1), RelationId(1), EntityId(4));
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace kbembed
