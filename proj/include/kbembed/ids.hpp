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

#include <compare>
#include <cstdint>
#include <functional>

namespace kbembed {

// Dense id in one of the disjoint symbol namespaces. The tag keeps an
// entity id from being passed where a relation or word id is expected.
template <class Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

struct EntityTag {};
struct RelationTag {};
struct WordTag {};

using EntityId = StrongId<EntityTag>;
using RelationId = StrongId<RelationTag>;
using WordId = StrongId<WordTag>;

}  // namespace kbembed

template <class Tag>
struct std::hash<kbembed::StrongId<Tag>> {
  std::size_t operator()(kbembed::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
