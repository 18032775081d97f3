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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbembed/error.hpp"
#include "kbembed/ids.hpp"

namespace kbembed {

// Bidirectional symbol <-> dense id map. Ids are assigned in first-seen
// order starting at 0.
template <class Id>
class SymbolTable {
 public:
  std::optional<Id> find(std::string_view symbol) const {
    auto it = ids_.find(std::string(symbol));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  // Returns the existing id or appends a new one.
  Id intern(std::string_view symbol) {
    std::string key(symbol);
    auto [it, inserted] =
        ids_.try_emplace(key, Id(static_cast<std::uint32_t>(symbols_.size())));
    if (inserted) symbols_.push_back(std::move(key));
    return it->second;
  }

  const std::string& symbol(Id id) const {
    if (id.index() >= symbols_.size()) {
      throw IndexError("symbol id " + std::to_string(id.value) + " out of range");
    }
    return symbols_[id.index()];
  }

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  // Known symbols that start with `prefix`, in id order, at most `limit`.
  std::vector<std::string> with_prefix(std::string_view prefix,
                                       std::size_t limit) const {
    std::vector<std::string> out;
    for (const auto& s : symbols_) {
      if (out.size() >= limit) break;
      if (std::string_view(s).substr(0, prefix.size()) == prefix) out.push_back(s);
    }
    return out;
  }

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Id> ids_;
};

// Positional occurrence set (E_h or E_t): entities seen in one slot, kept in
// first-seen order so uniform draws are reproducible.
class OccurrenceSet {
 public:
  bool insert(EntityId e) {
    if (e.index() >= slot_.size()) slot_.resize(e.index() + 1, kAbsent);
    if (slot_[e.index()] != kAbsent) return false;
    slot_[e.index()] = static_cast<std::int64_t>(members_.size());
    members_.push_back(e);
    return true;
  }

  bool contains(EntityId e) const {
    return e.index() < slot_.size() && slot_[e.index()] != kAbsent;
  }

  // Position of `e` in members(), or -1.
  std::int64_t position(EntityId e) const {
    return contains(e) ? slot_[e.index()] : -1;
  }

  const std::vector<EntityId>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  friend bool operator==(const OccurrenceSet& a, const OccurrenceSet& b) {
    return a.members_ == b.members_;
  }

 private:
  static constexpr std::int64_t kAbsent = -1;
  std::vector<EntityId> members_;
  std::vector<std::int64_t> slot_;
};

class Vocabulary {
 public:
  SymbolTable<EntityId>& entities() { return entities_; }
  const SymbolTable<EntityId>& entities() const { return entities_; }
  SymbolTable<RelationId>& relations() { return relations_; }
  const SymbolTable<RelationId>& relations() const { return relations_; }
  SymbolTable<WordId>& words() { return words_; }
  const SymbolTable<WordId>& words() const { return words_; }

  const OccurrenceSet& head_occurrence() const { return heads_; }
  const OccurrenceSet& tail_occurrence() const { return tails_; }

  // R: every relation id, in id order.
  std::vector<RelationId> relation_universe() const {
    std::vector<RelationId> out;
    out.reserve(relations_.size());
    for (std::uint32_t i = 0; i < relations_.size(); ++i) out.emplace_back(i);
    return out;
  }

  std::vector<EntityId> all_entities() const {
    std::vector<EntityId> out;
    out.reserve(entities_.size());
    for (std::uint32_t i = 0; i < entities_.size(); ++i) out.emplace_back(i);
    return out;
  }

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  // Growable: interns. Frozen: throws VocabularyError for unknown symbols.
  EntityId resolve_entity(std::string_view symbol) {
    return resolve(entities_, symbol, "entity");
  }
  RelationId resolve_relation(std::string_view symbol) {
    return resolve(relations_, symbol, "relation");
  }

  // Unknown words under a frozen vocabulary are dropped (nullopt).
  std::optional<WordId> resolve_word(std::string_view token) {
    if (frozen_) return words_.find(token);
    return words_.intern(token);
  }

  // Records positional occurrence; a no-op when frozen.
  void note_occurrence(EntityId head, EntityId tail) {
    if (frozen_) return;
    heads_.insert(head);
    tails_.insert(tail);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_ &&
           a.words_ == b.words_ && a.heads_ == b.heads_ && a.tails_ == b.tails_;
  }

  // Used by model deserialization; ids must be within the entity range.
  void restore_occurrence(const std::vector<EntityId>& heads,
                          const std::vector<EntityId>& tails) {
    heads_ = {};
    tails_ = {};
    for (auto e : heads) heads_.insert(e);
    for (auto e : tails) tails_.insert(e);
  }

 private:
  template <class Id>
  Id resolve(SymbolTable<Id>& table, std::string_view symbol, const char* kind) {
    if (!frozen_) return table.intern(symbol);
    if (auto id = table.find(symbol)) return *id;
    throw VocabularyError(std::string("unknown ") + kind + " '" +
                          std::string(symbol) + "'");
  }

  SymbolTable<EntityId> entities_;
  SymbolTable<RelationId> relations_;
  SymbolTable<WordId> words_;
  OccurrenceSet heads_;
  OccurrenceSet tails_;
  bool frozen_ = false;
};

}  // namespace kbembed
