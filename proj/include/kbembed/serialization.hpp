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

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kbembed/error.hpp"
#include "kbembed/model.hpp"

// Model file layout, all integers and floats little-endian:
//
//   magic "KBEM" | u32 version | u64 dim | u64 #entities | u64 #relations
//   | u64 #words | u32 norm (0 = L1, 1 = L2) | f64 alpha | f64 beta
//   | f64 epsilon | f64 eta
//   | entity matrix | relation matrix | word matrix      (row-major f64)
//   | entity, relation, word symbols                      (u32 length + UTF-8)
//   | u64 #heads, u32 ids | u64 #tails, u32 ids            (occurrence sets)

namespace kbembed {

inline constexpr std::array<char, 4> kModelMagic = {'K', 'B', 'E', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

template <class UInt>
void put_le(std::ostream& out, UInt v) {
  unsigned char buf[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(UInt));
}

template <class UInt>
UInt get_le(std::istream& in) {
  unsigned char buf[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(UInt))) {
    throw FormatError("model file truncated");
  }
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(buf[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

inline void put_string(std::ostream& out, const std::string& s) {
  put_le(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto n = get_le<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw FormatError("model file truncated in symbol table");
  return s;
}

inline void put_matrix(std::ostream& out, const Matrix& m) {
  for (double x : m.data()) put_f64(out, x);
}

inline Matrix get_matrix(std::istream& in, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = get_f64(in);
  return m;
}

template <class Id>
void put_symbols(std::ostream& out, const SymbolTable<Id>& table) {
  for (const auto& s : table.symbols()) put_string(out, s);
}

template <class Id>
void get_symbols(std::istream& in, SymbolTable<Id>& table, std::size_t count, const char* kind) {
  for (std::size_t i = 0; i < count; ++i) {
    const auto id = table.intern(get_string(in));
    if (id.index() != i) throw FormatError(std::string("duplicate ") + kind + " symbol in model file");
  }
}

inline void put_occurrence(std::ostream& out, const OccurrenceSet& set) {
  put_le(out, static_cast<std::uint64_t>(set.size()));
  for (auto e : set.members()) put_le(out, e.value);
}

inline std::vector<EntityId> get_occurrence(std::istream& in, std::size_t entity_count) {
  const auto n = get_le<std::uint64_t>(in);
  if (n > entity_count) throw FormatError("occurrence set larger than entity table");
  std::vector<EntityId> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto v = get_le<std::uint32_t>(in);
    if (v >= entity_count) throw FormatError("occurrence id out of range");
    out.emplace_back(v);
  }
  return out;
}

}  // namespace detail

inline void write_model(std::ostream& out, const EmbeddingModel& model) {
  using namespace detail;
  const auto& vocab = model.vocabulary();
  out.write(kModelMagic.data(), kModelMagic.size());
  put_le(out, kModelFormatVersion);
  put_le(out, static_cast<std::uint64_t>(model.dim()));
  put_le(out, static_cast<std::uint64_t>(vocab.entities().size()));
  put_le(out, static_cast<std::uint64_t>(vocab.relations().size()));
  put_le(out, static_cast<std::uint64_t>(vocab.words().size()));
  put_le(out, static_cast<std::uint32_t>(model.norm() == NormKind::L1 ? 0 : 1));
  put_f64(out, model.alpha);
  put_f64(out, model.beta);
  put_f64(out, model.epsilon);
  put_f64(out, model.eta);
  put_matrix(out, model.entities());
  put_matrix(out, model.relations());
  put_matrix(out, model.words());
  put_symbols(out, vocab.entities());
  put_symbols(out, vocab.relations());
  put_symbols(out, vocab.words());
  put_occurrence(out, vocab.head_occurrence());
  put_occurrence(out, vocab.tail_occurrence());
  if (!out) throw Error("failed writing model");
}

inline EmbeddingModel read_model(std::istream& in) {
  using namespace detail;
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kModelMagic) {
    throw FormatError("not a model file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  ModelConfig config;
  config.dim = get_le<std::uint64_t>(in);
  const auto n_ent = get_le<std::uint64_t>(in);
  const auto n_rel = get_le<std::uint64_t>(in);
  const auto n_word = get_le<std::uint64_t>(in);
  const auto norm = get_le<std::uint32_t>(in);
  if (config.dim == 0 || config.dim > (1u << 20)) throw FormatError("implausible dimension");
  if (norm > 1) throw FormatError("unknown norm kind " + std::to_string(norm));
  config.norm = norm == 0 ? NormKind::L1 : NormKind::L2;
  const double alpha = get_f64(in);
  const double beta = get_f64(in);
  const double epsilon = get_f64(in);
  const double eta = get_f64(in);

  Matrix ent = get_matrix(in, n_ent, config.dim);
  Matrix rel = get_matrix(in, n_rel, config.dim);
  Matrix wrd = get_matrix(in, n_word, config.dim);

  Vocabulary vocab;
  get_symbols(in, vocab.entities(), n_ent, "entity");
  get_symbols(in, vocab.relations(), n_rel, "relation");
  get_symbols(in, vocab.words(), n_word, "word");
  auto heads = get_occurrence(in, n_ent);
  auto tails = get_occurrence(in, n_ent);
  vocab.restore_occurrence(heads, tails);

  auto model = EmbeddingModel::from_parts(std::move(vocab), config, std::move(ent),
                                          std::move(rel), std::move(wrd));
  model.alpha = alpha;
  model.beta = beta;
  model.epsilon = epsilon;
  model.eta = eta;
  return model;
}

inline void save_model(const std::string& path, const EmbeddingModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_model(out, model);
}

inline EmbeddingModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_model(in);
}

}  // namespace kbembed
