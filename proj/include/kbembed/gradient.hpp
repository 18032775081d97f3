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
#include <span>
#include <vector>

#include "kbembed/model.hpp"

namespace kbembed {

enum class Table : std::uint8_t { Entity, Relation, Word };

// Sparse gradient accumulator keyed by (table, row). A step touches a
// handful of rows, so lookup is a linear scan.
class GradientSink {
 public:
  explicit GradientSink(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  std::span<double> row(Table table, std::uint32_t index) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].table == table && entries_[i].index == index) {
        return {values_.data() + i * dim_, dim_};
      }
    }
    entries_.push_back({table, index});
    values_.resize(values_.size() + dim_, 0.0);
    return {values_.data() + (entries_.size() - 1) * dim_, dim_};
  }

  std::span<double> entity(EntityId e) { return row(Table::Entity, e.value); }
  std::span<double> relation(RelationId r) { return row(Table::Relation, r.value); }
  std::span<double> word(WordId w) { return row(Table::Word, w.value); }

  // Gradient for (table, index), or an empty span if untouched.
  std::span<const double> find(Table table, std::uint32_t index) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].table == table && entries_[i].index == index) {
        return {values_.data() + i * dim_, dim_};
      }
    }
    return {};
  }

  void scale(double factor) {
    for (double& v : values_) v *= factor;
  }

  void clear() {
    entries_.clear();
    values_.clear();
  }

  std::size_t touched() const { return entries_.size(); }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      fn(entries_[i].table, entries_[i].index,
         std::span<const double>(values_.data() + i * dim_, dim_));
    }
  }

  // Gradient-descent step: row <- row - lr * grad.
  void apply(EmbeddingModel& model, double learning_rate) const {
    for_each([&](Table table, std::uint32_t index, std::span<const double> g) {
      std::span<double> target;
      switch (table) {
        case Table::Entity: target = model.entity(EntityId(index)); break;
        case Table::Relation: target = model.relation(RelationId(index)); break;
        case Table::Word: target = model.word(WordId(index)); break;
      }
      for (std::size_t j = 0; j < g.size(); ++j) target[j] -= learning_rate * g[j];
    });
  }

 private:
  struct Entry {
    Table table;
    std::uint32_t index;
  };
  std::size_t dim_;
  std::vector<Entry> entries_;
  std::vector<double> values_;
};

}  // namespace kbembed
