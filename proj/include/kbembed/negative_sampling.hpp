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

#include <random>
#include <string>

#include "kbembed/belief.hpp"
#include "kbembed/error.hpp"
#include "kbembed/random.hpp"
#include "kbembed/vocabulary.hpp"

namespace kbembed {

enum class Position { Head, Tail };

inline constexpr int kMaxNegativeRetries = 100;

namespace detail {

// Uniform draw from `set` excluding `original` (if it is a member).
inline EntityId draw_excluding(const OccurrenceSet& set, EntityId original, Rng& rng) {
  const auto pos = set.position(original);
  const std::size_t n = set.size();
  const std::size_t alternatives = pos >= 0 ? n - 1 : n;
  if (alternatives == 0) {
    throw DegenerateCorpusError("positional occurrence set has no alternative to entity " +
                                std::to_string(original.value));
  }
  std::uniform_int_distribution<std::size_t> dist(0, alternatives - 1);
  std::size_t i = dist(rng);
  if (pos >= 0 && i >= static_cast<std::size_t>(pos)) ++i;
  return set.members()[i];
}

}  // namespace detail

// Corrupts the head or tail with an entity seen in the same position. When
// `known` is given, redraws up to kMaxNegativeRetries times to avoid known
// triplets and then accepts the last draw.
inline Belief generate_negative(const Belief& positive, Position position,
                                const Vocabulary& vocab, Rng& rng,
                                const KnownTriplets* known = nullptr) {
  const OccurrenceSet& set =
      position == Position::Head ? vocab.head_occurrence() : vocab.tail_occurrence();
  const EntityId original = position == Position::Head ? positive.head : positive.tail;

  Belief negative = positive;
  EntityId& slot = position == Position::Head ? negative.head : negative.tail;
  for (int attempt = 0; attempt < kMaxNegativeRetries; ++attempt) {
    slot = detail::draw_excluding(set, original, rng);
    if (known == nullptr || !known->contains(key_of(negative))) break;
  }
  return negative;
}

// Replaces the relation by a uniform draw from R minus the original.
inline Belief generate_negative_relation(const Belief& positive, const Vocabulary& vocab,
                                         Rng& rng) {
  const std::size_t n = vocab.relations().size();
  if (n < 2) throw DegenerateCorpusError("relation corruption needs at least 2 relations");
  std::uniform_int_distribution<std::uint32_t> dist(0, static_cast<std::uint32_t>(n - 2));
  std::uint32_t r = dist(rng);
  if (r >= positive.relation.value) ++r;
  Belief negative = positive;
  negative.relation = RelationId(r);
  return negative;
}

// Labeled classification split: every positive followed by one corruption of
// a randomly chosen side, drawn from the matching positional set and kept
// out of `known`. Built once and written out so runs share the negatives.
inline BeliefSet build_classification_split(const BeliefSet& positives,
                                            const Vocabulary& vocab,
                                            const KnownTriplets& known, Rng& rng) {
  BeliefSet out;
  std::bernoulli_distribution coin(0.5);
  for (const auto& p : positives.beliefs) {
    Belief pos = p;
    pos.label = true;
    out.push_back(pos);
    Belief neg = generate_negative(p, coin(rng) ? Position::Head : Position::Tail, vocab, rng,
                                   &known);
    neg.label = false;
    out.push_back(std::move(neg));
  }
  return out;
}

}  // namespace kbembed
