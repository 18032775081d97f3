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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kbembed/belief.hpp"
#include "kbembed/error.hpp"
#include "kbembed/ids.hpp"
#include "kbembed/random.hpp"
#include "kbembed/vocabulary.hpp"

namespace kbembed {

enum class NormKind { L1, L2 };

struct ModelConfig {
  std::size_t dim = 50;
  double init_scale = 6.0;
  NormKind norm = NormKind::L1;

  void validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(init_scale > 0)) throw ConfigError("init_scale must be > 0");
  }
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// All learned parameters plus the vocabulary they are indexed by.
//
// The biases alpha/beta cancel inside every softmax and are held at 0; the
// logistic offsets epsilon/eta only keep the negative-sampling logs finite.
class EmbeddingModel {
 public:
  static constexpr double kDefaultOffset = 1e-9;

  EmbeddingModel() = default;
  EmbeddingModel(Vocabulary vocab, ModelConfig config)
      : vocab_(std::move(vocab)),
        config_(config),
        entities_(vocab_.entities().size(), config.dim),
        relations_(vocab_.relations().size(), config.dim),
        words_(vocab_.words().size(), config.dim) {
    config_.validate();
    vocab_.freeze();
  }

  // Uniform in +-init_scale/sqrt(d), then entity and word rows are projected
  // onto the unit ball.
  void initialize(Rng& rng) {
    const double bound = config_.init_scale / std::sqrt(static_cast<double>(config_.dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Matrix* m : {&entities_, &relations_, &words_}) {
      for (double& x : m->data()) x = dist(rng);
    }
    project_to_unit_ball();
  }

  void project_to_unit_ball() {
    for (Matrix* m : {&entities_, &words_}) {
      for (std::size_t i = 0; i < m->rows(); ++i) {
        auto row = m->row(i);
        double sq = 0;
        for (double x : row) sq += x * x;
        if (sq > 1.0) {
          const double inv = 1.0 / std::sqrt(sq);
          for (double& x : row) x *= inv;
        }
      }
    }
  }

  const Vocabulary& vocabulary() const { return vocab_; }
  const ModelConfig& config() const { return config_; }
  std::size_t dim() const { return config_.dim; }
  NormKind norm() const { return config_.norm; }

  Matrix& entities() { return entities_; }
  const Matrix& entities() const { return entities_; }
  Matrix& relations() { return relations_; }
  const Matrix& relations() const { return relations_; }
  Matrix& words() { return words_; }
  const Matrix& words() const { return words_; }

  std::span<double> entity(EntityId e) { return entities_.row(check(e.index(), entities_, "entity")); }
  std::span<const double> entity(EntityId e) const {
    return entities_.row(check(e.index(), entities_, "entity"));
  }
  std::span<double> relation(RelationId r) {
    return relations_.row(check(r.index(), relations_, "relation"));
  }
  std::span<const double> relation(RelationId r) const {
    return relations_.row(check(r.index(), relations_, "relation"));
  }
  std::span<double> word(WordId w) { return words_.row(check(w.index(), words_, "word")); }
  std::span<const double> word(WordId w) const {
    return words_.row(check(w.index(), words_, "word"));
  }

  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = kDefaultOffset;
  double eta = kDefaultOffset;

  // Assembles a model from deserialized parts.
  static EmbeddingModel from_parts(Vocabulary vocab, ModelConfig config, Matrix entities,
                                   Matrix relations, Matrix words) {
    EmbeddingModel m;
    m.vocab_ = std::move(vocab);
    m.vocab_.freeze();
    m.config_ = config;
    m.entities_ = std::move(entities);
    m.relations_ = std::move(relations);
    m.words_ = std::move(words);
    return m;
  }

 private:
  static std::size_t check(std::size_t i, const Matrix& m, const char* kind) {
    if (i >= m.rows()) {
      throw IndexError(std::string(kind) + " id " + std::to_string(i) + " out of range (" +
                       std::to_string(m.rows()) + " rows)");
    }
    return i;
  }

  Vocabulary vocab_;
  ModelConfig config_;
  Matrix entities_;
  Matrix relations_;
  Matrix words_;
};

// ---------------------------------------------------------------------------
// Scores

// -||h + r - t|| + alpha
inline double score_triplet(const EmbeddingModel& model, EntityId h, RelationId r, EntityId t) {
  auto hv = model.entity(h);
  auto rv = model.relation(r);
  auto tv = model.entity(t);
  double norm = 0;
  if (model.norm() == NormKind::L1) {
    for (std::size_t i = 0; i < hv.size(); ++i) norm += std::abs(hv[i] + rv[i] - tv[i]);
  } else {
    for (std::size_t i = 0; i < hv.size(); ++i) {
      const double x = hv[i] + rv[i] - tv[i];
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  return -norm + model.alpha;
}

// Sum over mention words of count * W[w], dotted with r, plus beta.
inline double score_mention(const EmbeddingModel& model, RelationId r, const Mention& mention) {
  auto rv = model.relation(r);
  double s = 0;
  for (const auto& wc : mention.words) {
    auto wv = model.word(wc.word);
    double dot = 0;
    for (std::size_t i = 0; i < rv.size(); ++i) dot += wv[i] * rv[i];
    s += wc.count * dot;
  }
  return s + model.beta;
}

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid_triplet(const EmbeddingModel& model, EntityId h, RelationId r, EntityId t) {
  return logistic(score_triplet(model, h, r, t)) + model.epsilon;
}

inline double sigmoid_mention(const EmbeddingModel& model, RelationId r, const Mention& mention) {
  return logistic(score_mention(model, r, mention)) + model.eta;
}

// ---------------------------------------------------------------------------
// Softmax conditionals

// Smallest value a probability is floored to before taking its log.
inline constexpr double kProbabilityFloor = std::numeric_limits<double>::min();

// Max-subtracted softmax in place.
inline void softmax_inplace(std::span<double> scores) {
  if (scores.empty()) throw ArgumentError("softmax over an empty candidate set");
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    z += s;
  }
  for (double& s : scores) s /= z;
}

inline double log_sum_exp(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("log-sum-exp over an empty set");
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0;
  for (double s : scores) z += std::exp(s - mx);
  return mx + std::log(z);
}

// Probability of each candidate tail t' given (h, r), aligned with `candidates`.
inline std::vector<double> prob_tail(const EmbeddingModel& model, EntityId h, RelationId r,
                                     std::span<const EntityId> candidates) {
  std::vector<double> p;
  p.reserve(candidates.size());
  for (auto t : candidates) p.push_back(score_triplet(model, h, r, t));
  softmax_inplace(p);
  return p;
}

inline std::vector<double> prob_head(const EmbeddingModel& model, RelationId r, EntityId t,
                                     std::span<const EntityId> candidates) {
  std::vector<double> p;
  p.reserve(candidates.size());
  for (auto h : candidates) p.push_back(score_triplet(model, h, r, t));
  softmax_inplace(p);
  return p;
}

inline std::vector<double> prob_rel_struct(const EmbeddingModel& model, EntityId h, EntityId t,
                                           std::span<const RelationId> relations) {
  std::vector<double> p;
  p.reserve(relations.size());
  for (auto r : relations) p.push_back(score_triplet(model, h, r, t));
  softmax_inplace(p);
  return p;
}

inline std::vector<double> prob_rel_mention(const EmbeddingModel& model, const Mention& mention,
                                            std::span<const RelationId> relations) {
  std::vector<double> p;
  p.reserve(relations.size());
  for (auto r : relations) p.push_back(score_mention(model, r, mention));
  softmax_inplace(p);
  return p;
}

namespace detail {

// log softmax of `truth` against `candidates`; the truth joins the
// normalizer when it is not a member.
template <class Id, class ScoreFn>
double log_conditional(Id truth, std::span<const Id> candidates, ScoreFn&& score) {
  std::vector<double> s;
  s.reserve(candidates.size() + 1);
  bool member = false;
  for (auto c : candidates) {
    s.push_back(score(c));
    member = member || c == truth;
  }
  const double truth_score = score(truth);
  if (!member) s.push_back(truth_score);
  const double lp = truth_score - log_sum_exp(s);
  return std::max(lp, std::log(kProbabilityFloor));
}

}  // namespace detail

inline double log_prob_head(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t,
                            std::span<const EntityId> heads) {
  return detail::log_conditional(h, heads, [&](EntityId c) { return score_triplet(m, c, r, t); });
}

inline double log_prob_tail(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t,
                            std::span<const EntityId> tails) {
  return detail::log_conditional(t, tails, [&](EntityId c) { return score_triplet(m, h, r, c); });
}

inline double log_prob_rel_struct(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t,
                                  std::span<const RelationId> relations) {
  return detail::log_conditional(r, relations,
                                 [&](RelationId c) { return score_triplet(m, h, c, t); });
}

inline double log_prob_rel_mention(const EmbeddingModel& m, RelationId r, const Mention& mention,
                                   std::span<const RelationId> relations) {
  return detail::log_conditional(r, relations,
                                 [&](RelationId c) { return score_mention(m, c, mention); });
}

// Candidate sets E_h, E_t and R for the softmax normalizers.
struct CandidateSets {
  std::vector<EntityId> heads;
  std::vector<EntityId> tails;
  std::vector<RelationId> relations;

  static CandidateSets from(const Vocabulary& vocab) {
    return {vocab.head_occurrence().members(), vocab.tail_occurrence().members(),
            vocab.relation_universe()};
  }
};

// log Pr(h,r,t,m): one third of log Pr(h|r,t) + log Pr(r|h,t) + log Pr(r|m)
// + log Pr(t|h,r). The mention term is omitted for mention-free beliefs.
inline double belief_log_probability(const EmbeddingModel& model, const Belief& b,
                                     const CandidateSets& sets) {
  double sum = log_prob_head(model, b.head, b.relation, b.tail, sets.heads) +
               log_prob_rel_struct(model, b.head, b.relation, b.tail, sets.relations) +
               log_prob_tail(model, b.head, b.relation, b.tail, sets.tails);
  if (b.mention && !b.mention->empty()) {
    sum += log_prob_rel_mention(model, b.relation, *b.mention, sets.relations);
  }
  if (std::isnan(sum)) return -std::numeric_limits<double>::infinity();
  return sum / 3.0;
}

}  // namespace kbembed
