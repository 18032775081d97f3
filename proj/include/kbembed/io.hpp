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

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kbembed/belief.hpp"
#include "kbembed/error.hpp"
#include "kbembed/tokenize.hpp"
#include "kbembed/vocabulary.hpp"

namespace kbembed {

// triplet:  head \t relation \t tail
// weighted: head \t relation \t tail \t mention text \t confidence
// Either may carry a trailing 1/0 label field for classification splits.
enum class DatasetFormat { Triplet, Weighted };

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_real(std::string_view text, const std::string& source,
                         std::size_t line_no, const char* what) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(source, line_no,
                     std::string("cannot parse ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Parses beliefs from a stream. `source` only labels error messages.
// Blank lines are skipped.
inline BeliefSet read_beliefs(std::istream& in, const std::string& source,
                              Vocabulary& vocab, DatasetFormat format,
                              bool labeled = false) {
  const std::size_t base = format == DatasetFormat::Triplet ? 3 : 5;
  const std::size_t expected = base + (labeled ? 1 : 0);

  BeliefSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;

    auto fields = detail::split_tabs(view);
    if (fields.size() != expected) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(expected) + " tab-separated fields, got " +
                           std::to_string(fields.size()));
    }

    Belief b;
    try {
      b.head = vocab.resolve_entity(fields[0]);
      b.relation = vocab.resolve_relation(fields[1]);
      b.tail = vocab.resolve_entity(fields[2]);
    } catch (const VocabularyError& e) {
      throw VocabularyError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }

    if (format == DatasetFormat::Weighted) {
      Mention m = tokenize_mention(fields[3], vocab);
      if (!m.empty()) b.mention = std::move(m);
      double c = detail::parse_real(fields[4], source, line_no, "confidence");
      if (!(c > 0.0 && c <= 1.0)) {
        throw RangeError(source, line_no,
                         "confidence " + std::string(fields[4]) + " outside (0,1]");
      }
      b.confidence = c;
    }

    if (labeled) {
      auto f = fields[expected - 1];
      if (f == "1") {
        b.label = true;
      } else if (f == "0") {
        b.label = false;
      } else {
        throw ParseError(source, line_no, "label must be 1 or 0, got '" + std::string(f) + "'");
      }
    }

    vocab.note_occurrence(b.head, b.tail);
    set.push_back(std::move(b));
  }
  return set;
}

inline BeliefSet load_beliefs(const std::string& path, Vocabulary& vocab,
                              DatasetFormat format, bool labeled = false) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_beliefs(in, path, vocab, format, labeled);
}

inline BeliefSet load_triplets(const std::string& path, Vocabulary& vocab) {
  return load_beliefs(path, vocab, DatasetFormat::Triplet);
}

inline BeliefSet load_weighted_beliefs(const std::string& path, Vocabulary& vocab) {
  return load_beliefs(path, vocab, DatasetFormat::Weighted);
}

// Mentions are written as their tokens in word-id order, repeated by count.
inline void write_beliefs(std::ostream& out, const BeliefSet& set,
                          const Vocabulary& vocab, DatasetFormat format,
                          bool labeled = false) {
  for (const auto& b : set.beliefs) {
    out << vocab.entities().symbol(b.head) << '\t'
        << vocab.relations().symbol(b.relation) << '\t'
        << vocab.entities().symbol(b.tail);
    if (format == DatasetFormat::Weighted) {
      out << '\t';
      bool first = true;
      if (b.mention) {
        for (const auto& w : b.mention->words) {
          for (std::uint32_t i = 0; i < w.count; ++i) {
            if (!first) out << ' ';
            out << vocab.words().symbol(w.word);
            first = false;
          }
        }
      }
      out << '\t' << detail::format_real(b.confidence.value_or(1.0));
    }
    if (labeled) out << '\t' << (b.label.value_or(true) ? '1' : '0');
    out << '\n';
  }
}

}  // namespace kbembed
