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

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "kbembed/ids.hpp"

namespace kbembed {

struct WordCount {
  WordId word;
  std::uint32_t count = 1;

  friend bool operator==(const WordCount&, const WordCount&) = default;
};

// Bag-of-words mention: the nonzero support of the one-hot indicator, with
// multiplicity. Kept sorted by word id.
struct Mention {
  std::vector<WordCount> words;

  bool empty() const { return words.empty(); }
  std::uint32_t total() const {
    std::uint32_t n = 0;
    for (const auto& w : words) n += w.count;
    return n;
  }
  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Belief {
  EntityId head;
  RelationId relation;
  EntityId tail;
  std::optional<Mention> mention;
  std::optional<double> confidence;
  std::optional<bool> label;

  friend bool operator==(const Belief&, const Belief&) = default;
};

struct TripletKey {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend bool operator==(const TripletKey&, const TripletKey&) = default;
};

inline TripletKey key_of(const Belief& b) { return {b.head, b.relation, b.tail}; }

struct TripletKeyHash {
  std::size_t operator()(const TripletKey& k) const noexcept {
    std::uint64_t x = (std::uint64_t{k.head.value} << 32) ^ k.tail.value;
    x ^= std::uint64_t{k.relation.value} * 0x9e3779b97f4a7c15ULL;
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};

class KnownTriplets {
 public:
  void insert(const TripletKey& k) { keys_.insert(k); }
  bool contains(const TripletKey& k) const { return keys_.contains(k); }
  std::size_t size() const { return keys_.size(); }

  void merge(const KnownTriplets& other) {
    keys_.insert(other.keys_.begin(), other.keys_.end());
  }

 private:
  std::unordered_set<TripletKey, TripletKeyHash> keys_;
};

// An ordered sequence of beliefs plus the distinct (h,r,t) keys among them.
struct BeliefSet {
  std::vector<Belief> beliefs;
  KnownTriplets known;

  void push_back(Belief b) {
    known.insert(key_of(b));
    beliefs.push_back(std::move(b));
  }
  std::size_t size() const { return beliefs.size(); }
  bool empty() const { return beliefs.empty(); }
};

}  // namespace kbembed
