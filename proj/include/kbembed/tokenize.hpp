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
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kbembed/belief.hpp"
#include "kbembed/vocabulary.hpp"

namespace kbembed {

// Lowercase and whitespace-split. ASCII case folding only; other bytes pass
// through untouched.
inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Maps mention text to a word multiset. A growable vocabulary interns new
// tokens in reading order; a frozen one drops them.
inline Mention tokenize_mention(std::string_view text, Vocabulary& vocab) {
  std::map<WordId, std::uint32_t> counts;
  for (const auto& tok : split_tokens(text)) {
    if (auto id = vocab.resolve_word(tok)) ++counts[*id];
  }
  Mention m;
  m.words.reserve(counts.size());
  for (auto [word, n] : counts) m.words.push_back({word, n});
  return m;
}

// Read-only variant; never extends the vocabulary.
inline Mention tokenize_mention(std::string_view text, const Vocabulary& vocab) {
  std::map<WordId, std::uint32_t> counts;
  for (const auto& tok : split_tokens(text)) {
    if (auto id = vocab.words().find(tok)) ++counts[*id];
  }
  Mention m;
  for (auto [word, n] : counts) m.words.push_back({word, n});
  return m;
}

}  // namespace kbembed
