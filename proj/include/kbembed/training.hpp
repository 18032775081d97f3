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
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "kbembed/belief.hpp"
#include "kbembed/error.hpp"
#include "kbembed/gradient.hpp"
#include "kbembed/model.hpp"
#include "kbembed/negative_sampling.hpp"
#include "kbembed/random.hpp"

namespace kbembed {

// The four negative-sampled conditionals: Pr(h|r,t), Pr(t|h,r), Pr(r|h,t)
// and Pr(r|m).
enum class Component { Head, Tail, RelationStructure, RelationMention };

enum class Objective {
  MaxLikelihood,         // maximize the mean log belief probability
  ConfidenceRegression,  // fit the log belief probability to log c
};

struct TrainConfig {
  Objective objective = Objective::MaxLikelihood;
  std::size_t negatives_k = 5;
  double learning_rate = 0.01;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // 0 = single-threaded and deterministic.
  std::size_t parallel_workers = 0;

  void validate() const {
    if (negatives_k < 1) throw ConfigError("negatives_k must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  }
};

struct LossTrace {
  std::vector<double> mean_loss;
  std::vector<double> seconds;

  std::size_t epochs() const { return mean_loss.size(); }

  // Two columns: epoch index and mean loss.
  void write(std::ostream& out) const {
    for (std::size_t i = 0; i < mean_loss.size(); ++i) {
      out << (i + 1) << '\t' << mean_loss[i] << '\n';
    }
  }
};

// Corruptions drawn for one component of one belief.
struct NegativeSample {
  Component component = Component::Head;
  std::vector<EntityId> entities;    // Head / Tail
  std::vector<RelationId> relations;  // RelationStructure / RelationMention
};

inline NegativeSample sample_negatives(const Belief& positive, Component component,
                                       std::size_t k, const Vocabulary& vocab, Rng& rng,
                                       const KnownTriplets* known = nullptr) {
  NegativeSample s;
  s.component = component;
  for (std::size_t i = 0; i < k; ++i) {
    switch (component) {
      case Component::Head:
        s.entities.push_back(generate_negative(positive, Position::Head, vocab, rng, known).head);
        break;
      case Component::Tail:
        s.entities.push_back(generate_negative(positive, Position::Tail, vocab, rng, known).tail);
        break;
      case Component::RelationStructure:
      case Component::RelationMention:
        s.relations.push_back(generate_negative_relation(positive, vocab, rng).relation);
        break;
    }
  }
  return s;
}

namespace detail {

// log(logistic(score) + offset) and its derivative w.r.t. score.
inline double positive_term(double score, double offset, double& dscore) {
  const double s = logistic(score);
  const double p = s + offset;
  dscore = s * (1.0 - s) / p;
  return std::log(p);
}

// log(1 - logistic(score) - offset) and its derivative w.r.t. score. Once the
// argument drops to the floor the value is clamped and the gradient of
// log(1 - logistic(score)) is used so the negative keeps being pushed down.
inline double negative_term(double score, double offset, double& dscore) {
  const double s = logistic(score);
  const double q = logistic(-score) - offset;
  if (q <= kProbabilityFloor) {
    dscore = -s;
    return std::log(kProbabilityFloor);
  }
  dscore = -s * (1.0 - s) / q;
  return std::log(q);
}

// sink += coeff * d score_triplet(h,r,t) / d(h, r, t)
inline void accumulate_triplet_grad(const EmbeddingModel& model, EntityId h, RelationId r,
                                    EntityId t, double coeff, GradientSink& sink) {
  if (coeff == 0.0) return;
  auto hv = model.entity(h);
  auto rv = model.relation(r);
  auto tv = model.entity(t);
  const std::size_t d = hv.size();

  // d score / d residual, residual = h + r - t
  thread_local std::vector<double> g;
  g.assign(d, 0.0);
  if (model.norm() == NormKind::L1) {
    for (std::size_t i = 0; i < d; ++i) {
      const double x = hv[i] + rv[i] - tv[i];
      g[i] = x > 0 ? -1.0 : (x < 0 ? 1.0 : 0.0);
    }
  } else {
    double sq = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = hv[i] + rv[i] - tv[i];
      g[i] = x;
      sq += x * x;
    }
    const double norm = std::sqrt(sq);
    for (auto& v : g) v = norm > 0 ? -v / norm : 0.0;
  }

  auto gh = sink.entity(h);
  for (std::size_t i = 0; i < d; ++i) gh[i] += coeff * g[i];
  auto gr = sink.relation(r);
  for (std::size_t i = 0; i < d; ++i) gr[i] += coeff * g[i];
  auto gt = sink.entity(t);
  for (std::size_t i = 0; i < d; ++i) gt[i] -= coeff * g[i];
}

// sink += coeff * d score_mention(r, m) / d(r, W)
inline void accumulate_mention_grad(const EmbeddingModel& model, RelationId r,
                                    const Mention& mention, double coeff, GradientSink& sink) {
  if (coeff == 0.0) return;
  auto rv = model.relation(r);
  const std::size_t d = rv.size();
  auto gr = sink.relation(r);
  for (const auto& wc : mention.words) {
    auto wv = model.word(wc.word);
    for (std::size_t i = 0; i < d; ++i) gr[i] += coeff * wc.count * wv[i];
  }
  // Separate pass: sink.word() may reallocate and invalidate `gr`.
  for (const auto& wc : mention.words) {
    auto gw = sink.word(wc.word);
    for (std::size_t i = 0; i < d; ++i) gw[i] += coeff * wc.count * rv[i];
  }
}

}  // namespace detail

// Negative-sampling estimate of one log conditional:
//   log Pr(1|positive) + sum_i log Pr(0|negative_i)
// with Pr(1|.) the offset logistic of the matching score. When `sink` is set,
// `scale` times the gradient of the value is accumulated into it.
inline double ns_log_prob(const EmbeddingModel& model, const Belief& b,
                          const NegativeSample& sample, GradientSink* sink,
                          double scale = 1.0) {
  double value = 0;
  double dscore = 0;

  if (sample.component == Component::RelationMention) {
    if (!b.mention || b.mention->empty()) {
      throw ArgumentError("mention component requested for a belief without a mention");
    }
    const Mention& m = *b.mention;
    value += detail::positive_term(score_mention(model, b.relation, m), model.eta, dscore);
    if (sink) detail::accumulate_mention_grad(model, b.relation, m, scale * dscore, *sink);
    for (auto r : sample.relations) {
      value += detail::negative_term(score_mention(model, r, m), model.eta, dscore);
      if (sink) detail::accumulate_mention_grad(model, r, m, scale * dscore, *sink);
    }
    return value;
  }

  auto add_negative = [&](EntityId h, RelationId r, EntityId t) {
    value += detail::negative_term(score_triplet(model, h, r, t), model.epsilon, dscore);
    if (sink) detail::accumulate_triplet_grad(model, h, r, t, scale * dscore, *sink);
  };

  value += detail::positive_term(score_triplet(model, b.head, b.relation, b.tail), model.epsilon,
                                 dscore);
  if (sink) detail::accumulate_triplet_grad(model, b.head, b.relation, b.tail, scale * dscore, *sink);

  switch (sample.component) {
    case Component::Head:
      for (auto h : sample.entities) add_negative(h, b.relation, b.tail);
      break;
    case Component::Tail:
      for (auto t : sample.entities) add_negative(b.head, b.relation, t);
      break;
    case Component::RelationStructure:
      for (auto r : sample.relations) add_negative(b.head, r, b.tail);
      break;
    case Component::RelationMention:
      break;
  }
  return value;
}

// Draws k negatives from the model's vocabulary, then evaluates.
inline double ns_log_prob(const EmbeddingModel& model, const Belief& b, Component component,
                          std::size_t k, Rng& rng, GradientSink* sink,
                          const KnownTriplets* known = nullptr) {
  auto sample = sample_negatives(b, component, k, model.vocabulary(), rng, known);
  return ns_log_prob(model, b, sample, sink);
}

// Components evaluated for a belief: head, relation-structure, mention (if
// the belief has one), tail.
inline std::vector<NegativeSample> sample_belief_negatives(const Belief& b, std::size_t k,
                                                           const Vocabulary& vocab, Rng& rng,
                                                           const KnownTriplets* known = nullptr) {
  std::vector<NegativeSample> out;
  out.push_back(sample_negatives(b, Component::Head, k, vocab, rng, known));
  out.push_back(sample_negatives(b, Component::RelationStructure, k, vocab, rng, known));
  if (b.mention && !b.mention->empty()) {
    out.push_back(sample_negatives(b, Component::RelationMention, k, vocab, rng, known));
  }
  out.push_back(sample_negatives(b, Component::Tail, k, vocab, rng, known));
  return out;
}

struct ObjectiveValue {
  double loss = 0;
  // One third of the summed component estimates: the estimated log belief
  // probability.
  double log_probability = 0;
};

inline double clamped_log_confidence(double c) {
  return std::log(std::clamp(c, 1e-6, 1.0));
}

// Per-belief loss with pre-drawn negatives. `sink` must start empty and
// receives d loss / d parameters.
//   MaxLikelihood:        loss = -y
//   ConfidenceRegression: loss = 0.5 * (y - log c)^2
inline ObjectiveValue belief_objective(const EmbeddingModel& model, const Belief& b,
                                       Objective objective,
                                       std::span<const NegativeSample> samples,
                                       GradientSink* sink) {
  if (objective == Objective::ConfidenceRegression && !b.confidence) {
    throw ConfigError("confidence regression requires every belief to carry a confidence");
  }
  double sum = 0;
  for (const auto& s : samples) sum += ns_log_prob(model, b, s, sink, 1.0 / 3.0);
  const double y = sum / 3.0;

  ObjectiveValue v;
  v.log_probability = y;
  if (objective == Objective::MaxLikelihood) {
    v.loss = -y;
    if (sink) sink->scale(-1.0);
  } else {
    const double residual = y - clamped_log_confidence(*b.confidence);
    v.loss = 0.5 * residual * residual;
    if (sink) sink->scale(residual);
  }
  return v;
}

inline ObjectiveValue belief_objective(const EmbeddingModel& model, const Belief& b,
                                       const TrainConfig& config, Rng& rng, GradientSink* sink,
                                       const KnownTriplets* known = nullptr) {
  if (config.objective == Objective::ConfidenceRegression && !b.confidence) {
    throw ConfigError("confidence regression requires every belief to carry a confidence");
  }
  auto samples = sample_belief_negatives(b, config.negatives_k, model.vocabulary(), rng, known);
  return belief_objective(model, b, config.objective, samples, sink);
}

namespace detail {

inline void check_compatible(const EmbeddingModel& model, const BeliefSet& set) {
  const auto& v = model.vocabulary();
  for (std::size_t i = 0; i < set.beliefs.size(); ++i) {
    const auto& b = set.beliefs[i];
    bool ok = b.head.index() < v.entities().size() && b.tail.index() < v.entities().size() &&
              b.relation.index() < v.relations().size();
    if (ok && b.mention) {
      for (const auto& w : b.mention->words) ok = ok && w.word.index() < v.words().size();
    }
    if (!ok) {
      throw ConfigError("belief " + std::to_string(i) +
                        " references ids outside the model vocabulary");
    }
  }
}

inline double train_range(EmbeddingModel& model, const BeliefSet& set,
                          std::span<const std::size_t> order, const TrainConfig& config,
                          Rng& rng, std::size_t epoch) {
  GradientSink sink(model.dim());
  double total = 0;
  for (std::size_t idx : order) {
    const Belief& b = set.beliefs[idx];
    sink.clear();
    auto v = belief_objective(model, b, config, rng, &sink, &set.known);
    if (!std::isfinite(v.loss)) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", belief " +
                           std::to_string(idx));
    }
    total += v.loss;
    sink.apply(model, config.learning_rate);
  }
  return total;
}

}  // namespace detail

// Per-belief SGD over the training set. Entity and word rows are projected
// onto the unit ball at the end of every epoch. Progress lines
// "epoch <i> loss <mean> secs <t>" go to `progress` when set.
//
// With parallel_workers > 0 the shuffled order is split into contiguous
// chunks that update the shared model without locks (Hogwild-style); the
// result then depends on thread scheduling.
inline LossTrace train(EmbeddingModel& model, const BeliefSet& set, const TrainConfig& config,
                       std::ostream* progress = nullptr) {
  config.validate();
  detail::check_compatible(model, set);

  LossTrace trace;
  if (set.empty()) return trace;

  Rng shuffle_rng = make_rng(config.seed, streams::kShuffle);
  Rng sample_rng = make_rng(config.seed, streams::kSampling);
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);

    double total = 0;
    if (config.parallel_workers == 0) {
      total = detail::train_range(model, set, order, config, sample_rng, epoch);
    } else {
      const std::size_t workers = std::min(config.parallel_workers, order.size());
      std::vector<double> partial(workers, 0.0);
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> threads;
      const std::size_t chunk = (order.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = std::min(order.size(), w * chunk);
        const std::size_t hi = std::min(order.size(), lo + chunk);
        threads.emplace_back([&, w, lo, hi] {
          try {
            Rng rng = make_rng(config.seed, streams::kWorkerBase + epoch * workers + w);
            partial[w] = detail::train_range(
                model, set, std::span<const std::size_t>(order).subspan(lo, hi - lo), config,
                rng, epoch);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      total = std::accumulate(partial.begin(), partial.end(), 0.0);
    }

    model.project_to_unit_ball();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double mean = total / static_cast<double>(set.size());
    trace.mean_loss.push_back(mean);
    trace.seconds.push_back(secs);
    if (progress) *progress << "epoch " << epoch << " loss " << mean << " secs " << secs << '\n';
  }
  return trace;
}

}  // namespace kbembed
