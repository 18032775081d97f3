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
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "kbembed/belief.hpp"
#include "kbembed/error.hpp"
#include "kbembed/model.hpp"
#include "kbembed/negative_sampling.hpp"

namespace kbembed {

struct RankResult {
  std::size_t raw_rank = 0;
  std::size_t filtered_rank = 0;
  std::size_t candidate_count = 0;

  friend bool operator==(const RankResult&, const RankResult&) = default;
};

enum class Task { EntityInference, RelationPrediction, TripletClassification };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::EntityInference: return "entity_inference";
    case Task::RelationPrediction: return "relation_prediction";
    case Task::TripletClassification: return "triplet_classification";
  }
  return "unknown";
}

struct EvalReport {
  Task task = Task::EntityInference;
  std::size_t trials = 0;

  // entity inference
  double mean_rank_raw = 0;
  double mean_rank_filtered = 0;
  double hit_at_10_raw = 0;
  double hit_at_10_filtered = 0;
  std::size_t candidate_total = 0;

  // relation prediction
  double avg_rank = 0;
  double hit_at_10 = 0;
  double hit_at_1 = 0;

  // triplet classification
  double accuracy = 0;
};

namespace detail {

// Runs fn(i) for i in [0, n), split across `workers` threads (0 = inline).
// Results are written by index, so aggregation order never depends on
// scheduling.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min(workers, n);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        const std::size_t hi = std::min(n, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entity inference

// Ranks the true head (or tail) of `b` among `candidates` by triplet score,
// descending, ties by ascending id. The filtered rank ignores competitors
// whose corrupted triplet is in `known`.
inline RankResult rank_entity(const EmbeddingModel& model, const Belief& b, Position position,
                              std::span<const EntityId> candidates,
                              const KnownTriplets& known) {
  const EntityId truth = position == Position::Head ? b.head : b.tail;
  const double truth_score = score_triplet(model, b.head, b.relation, b.tail);

  bool found = false;
  std::size_t above_raw = 0;
  std::size_t above_filtered = 0;
  TripletKey key = key_of(b);
  for (EntityId c : candidates) {
    if (c == truth) {
      found = true;
      continue;
    }
    (position == Position::Head ? key.head : key.tail) = c;
    const double s = score_triplet(model, key.head, key.relation, key.tail);
    if (s > truth_score || (s == truth_score && c < truth)) {
      ++above_raw;
      if (!known.contains(key)) ++above_filtered;
    }
  }
  if (!found) {
    throw ProtocolError("ground-truth entity " + std::to_string(truth.value) +
                        " is not among the ranking candidates");
  }
  return {above_raw + 1, above_filtered + 1, candidates.size()};
}

// Head and tail ranks for every test belief, in order:
// [2i] = head replaced, [2i+1] = tail replaced.
inline std::vector<RankResult> entity_ranks(const EmbeddingModel& model, const BeliefSet& test,
                                            const KnownTriplets& known,
                                            std::size_t workers = 0) {
  const auto candidates = model.vocabulary().all_entities();
  std::vector<RankResult> out(2 * test.size());
  detail::parallel_for(test.size(), workers, [&](std::size_t i) {
    const auto& b = test.beliefs[i];
    out[2 * i] = rank_entity(model, b, Position::Head, candidates, known);
    out[2 * i + 1] = rank_entity(model, b, Position::Tail, candidates, known);
  });
  return out;
}

inline EvalReport aggregate_entity_ranks(std::span<const RankResult> ranks,
                                         std::size_t candidate_total) {
  EvalReport r;
  r.task = Task::EntityInference;
  r.trials = ranks.size();
  r.candidate_total = candidate_total;
  if (ranks.empty()) return r;
  double raw = 0, filt = 0, hit_raw = 0, hit_filt = 0;
  for (const auto& x : ranks) {
    raw += static_cast<double>(x.raw_rank);
    filt += static_cast<double>(x.filtered_rank);
    hit_raw += x.raw_rank <= 10 ? 1 : 0;
    hit_filt += x.filtered_rank <= 10 ? 1 : 0;
  }
  const double n = static_cast<double>(ranks.size());
  r.mean_rank_raw = raw / n;
  r.mean_rank_filtered = filt / n;
  r.hit_at_10_raw = hit_raw / n;
  r.hit_at_10_filtered = hit_filt / n;
  return r;
}

// Mean rank and Hit@10 over 2N trials (head and tail replaced for each test
// belief), raw and filtered. Candidates are all entities of the model.
inline EvalReport entity_inference_eval(const EmbeddingModel& model, const BeliefSet& test,
                                        const KnownTriplets& known, std::size_t workers = 0) {
  if (test.empty()) throw ArgumentError("entity inference needs a non-empty test set");
  auto ranks = entity_ranks(model, test, known, workers);
  return aggregate_entity_ranks(ranks, model.vocabulary().entities().size());
}

// ---------------------------------------------------------------------------
// Relation prediction

struct ScoredRelation {
  RelationId relation;
  double score = 0;  // log Pr(r|h,t) + log Pr(r|m)
};

// All of `relations` ordered by log Pr(r|h,t) + log Pr(r|m), best first,
// ties by ascending id. Without a mention only the structural term counts.
inline std::vector<ScoredRelation> rank_relations(const EmbeddingModel& model, EntityId h,
                                                  EntityId t, const Mention* mention,
                                                  std::span<const RelationId> relations) {
  if (relations.empty()) throw ArgumentError("relation ranking over an empty relation set");
  std::vector<double> structural;
  structural.reserve(relations.size());
  for (auto r : relations) structural.push_back(score_triplet(model, h, r, t));
  const double z_struct = log_sum_exp(structural);

  // Both normalizers are shared by every candidate, so ordering uses the raw
  // score sum; exact ties stay exact.
  std::vector<double> key = structural;
  double z = z_struct;
  if (mention != nullptr && !mention->empty()) {
    std::vector<double> textual;
    textual.reserve(relations.size());
    for (auto r : relations) textual.push_back(score_mention(model, r, *mention));
    z += log_sum_exp(textual);
    for (std::size_t i = 0; i < relations.size(); ++i) key[i] += textual[i];
  }

  std::vector<std::size_t> order(relations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return relations[a] < relations[b];
  });
  std::vector<ScoredRelation> out;
  out.reserve(relations.size());
  for (auto i : order) out.push_back({relations[i], key[i] - z});
  return out;
}

struct RelationEvalOptions {
  bool use_mentions = true;
  std::size_t workers = 0;
};

// 1-based rank of each test belief's relation.
inline std::vector<std::size_t> relation_ranks(const EmbeddingModel& model, const BeliefSet& test,
                                               const RelationEvalOptions& options = {}) {
  const auto relations = model.vocabulary().relation_universe();
  std::vector<std::size_t> out(test.size());
  detail::parallel_for(test.size(), options.workers, [&](std::size_t i) {
    const auto& b = test.beliefs[i];
    const Mention* m = options.use_mentions && b.mention ? &*b.mention : nullptr;
    auto ranked = rank_relations(model, b.head, b.tail, m, relations);
    auto it = std::find_if(ranked.begin(), ranked.end(),
                           [&](const ScoredRelation& s) { return s.relation == b.relation; });
    if (it == ranked.end()) throw ProtocolError("ground-truth relation not among candidates");
    out[i] = static_cast<std::size_t>(it - ranked.begin()) + 1;
  });
  return out;
}

inline EvalReport aggregate_relation_ranks(std::span<const std::size_t> ranks,
                                           std::size_t candidate_total) {
  EvalReport r;
  r.task = Task::RelationPrediction;
  r.trials = ranks.size();
  r.candidate_total = candidate_total;
  if (ranks.empty()) return r;
  double sum = 0, h10 = 0, h1 = 0;
  for (auto k : ranks) {
    sum += static_cast<double>(k);
    h10 += k <= 10 ? 1 : 0;
    h1 += k == 1 ? 1 : 0;
  }
  const double n = static_cast<double>(ranks.size());
  r.avg_rank = sum / n;
  r.hit_at_10 = h10 / n;
  r.hit_at_1 = h1 / n;
  return r;
}

inline EvalReport relation_prediction_eval(const EmbeddingModel& model, const BeliefSet& test,
                                           const RelationEvalOptions& options = {}) {
  if (test.empty()) throw ArgumentError("relation prediction needs a non-empty test set");
  auto ranks = relation_ranks(model, test, options);
  return aggregate_relation_ranks(ranks, model.vocabulary().relations().size());
}

// ---------------------------------------------------------------------------
// Triplet classification

// log Pr(h|r,t) + log Pr(r|h,t) + log Pr(t|h,r). No mention term and no
// cube root.
inline double classify_score(const EmbeddingModel& model, EntityId h, RelationId r, EntityId t,
                             const CandidateSets& sets) {
  return log_prob_head(model, h, r, t, sets.heads) +
         log_prob_rel_struct(model, h, r, t, sets.relations) +
         log_prob_tail(model, h, r, t, sets.tails);
}

struct LabeledScore {
  RelationId relation;
  double score = 0;
  bool label = false;
};

// Decision rule: score >= threshold -> positive.
struct ThresholdTable {
  std::unordered_map<RelationId, double> per_relation;
  std::unordered_map<RelationId, double> validation_accuracy;
  double fallback = -std::numeric_limits<double>::infinity();
  double fallback_accuracy = 0;

  double threshold(RelationId r) const {
    auto it = per_relation.find(r);
    return it == per_relation.end() ? fallback : it->second;
  }
};

inline std::size_t count_correct(std::span<const LabeledScore> xs, double threshold) {
  std::size_t n = 0;
  for (const auto& x : xs) n += ((x.score >= threshold) == x.label) ? 1 : 0;
  return n;
}

struct ThresholdChoice {
  double threshold = 0;
  std::size_t correct = 0;
};

// Best threshold over -inf, the midpoints between consecutive distinct
// scores, and +inf. Ties go to the smallest threshold.
inline ThresholdChoice best_threshold(std::span<const LabeledScore> xs) {
  std::vector<LabeledScore> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score < b.score; });
  std::size_t positives = 0;
  for (const auto& x : sorted) positives += x.label ? 1 : 0;

  // Threshold below everything: all predicted positive.
  ThresholdChoice best{-std::numeric_limits<double>::infinity(), positives};
  std::size_t correct = positives;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // Moving the threshold just past sorted[i] flips it to negative.
    correct = sorted[i].label ? correct - 1 : correct + 1;
    if (i + 1 < sorted.size() && sorted[i + 1].score == sorted[i].score) continue;
    double threshold = std::numeric_limits<double>::infinity();
    if (i + 1 < sorted.size()) {
      threshold = sorted[i].score + (sorted[i + 1].score - sorted[i].score) / 2;
      // Adjacent doubles: the midpoint can round down onto the lower score.
      if (threshold <= sorted[i].score) threshold = sorted[i + 1].score;
    }
    if (correct > best.correct) best = {threshold, correct};
  }
  return best;
}

// Per-relation thresholds maximizing validation accuracy; relations missing
// from validation use the global best threshold.
inline ThresholdTable search_thresholds(std::span<const LabeledScore> validation) {
  if (validation.empty()) throw ArgumentError("threshold search needs validation examples");
  std::unordered_map<RelationId, std::vector<LabeledScore>> groups;
  for (const auto& x : validation) groups[x.relation].push_back(x);

  ThresholdTable table;
  for (const auto& [r, xs] : groups) {
    auto choice = best_threshold(xs);
    table.per_relation[r] = choice.threshold;
    table.validation_accuracy[r] =
        static_cast<double>(choice.correct) / static_cast<double>(xs.size());
  }
  auto global = best_threshold(validation);
  table.fallback = global.threshold;
  table.fallback_accuracy =
      static_cast<double>(global.correct) / static_cast<double>(validation.size());
  return table;
}

inline std::vector<LabeledScore> score_labeled(const EmbeddingModel& model, const BeliefSet& set,
                                               const CandidateSets& sets,
                                               std::size_t workers = 0) {
  std::vector<LabeledScore> out(set.size());
  detail::parallel_for(set.size(), workers, [&](std::size_t i) {
    const auto& b = set.beliefs[i];
    if (!b.label) throw ArgumentError("classification example " + std::to_string(i) + " has no label");
    out[i] = {b.relation, classify_score(model, b.head, b.relation, b.tail, sets), *b.label};
  });
  return out;
}

inline ThresholdTable search_thresholds(const EmbeddingModel& model, const BeliefSet& validation,
                                        std::size_t workers = 0) {
  const auto sets = CandidateSets::from(model.vocabulary());
  auto scored = score_labeled(model, validation, sets, workers);
  return search_thresholds(scored);
}

inline EvalReport classification_accuracy(const ThresholdTable& thresholds,
                                          std::span<const LabeledScore> test) {
  EvalReport r;
  r.task = Task::TripletClassification;
  r.trials = test.size();
  std::size_t correct = 0;
  for (const auto& x : test) correct += ((x.score >= thresholds.threshold(x.relation)) == x.label);
  r.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  return r;
}

inline EvalReport triplet_classification_eval(const EmbeddingModel& model,
                                              const ThresholdTable& thresholds,
                                              const BeliefSet& test, std::size_t workers = 0) {
  if (test.empty()) throw ArgumentError("triplet classification needs a non-empty test set");
  const auto sets = CandidateSets::from(model.vocabulary());
  auto scored = score_labeled(model, test, sets, workers);
  auto r = classification_accuracy(thresholds, scored);
  r.candidate_total = model.vocabulary().entities().size();
  return r;
}

}  // namespace kbembed
