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

#include <gtest/gtest.h>

#include <sstream>

#include "kbembed/kbembed.hpp"
#include "test_support.hpp"

namespace kbembed {
namespace {

EmbeddingModel sample_model() {
  Vocabulary v;
  auto set = testing::parse(testing::keyword_kb(12, 3, 40, 2), v, DatasetFormat::Weighted);
  ModelConfig mc;
  mc.dim = 5;
  mc.norm = NormKind::L2;
  EmbeddingModel m(v, mc);
  Rng rng(3);
  m.initialize(rng);
  m.alpha = 0.125;
  m.epsilon = 3e-10;
  return m;
}

TEST(Serialization, RoundTripIsExact) {
  auto m = sample_model();
  std::stringstream buf;
  write_model(buf, m);
  auto back = read_model(buf);
  EXPECT_EQ(back.vocabulary(), m.vocabulary());
  EXPECT_TRUE(back.vocabulary().frozen());
  EXPECT_EQ(back.entities(), m.entities());
  EXPECT_EQ(back.relations(), m.relations());
  EXPECT_EQ(back.words(), m.words());
  EXPECT_EQ(back.dim(), 5u);
  EXPECT_EQ(back.norm(), NormKind::L2);
  EXPECT_EQ(back.alpha, 0.125);
  EXPECT_EQ(back.epsilon, 3e-10);
  EXPECT_EQ(back.eta, m.eta);
}

TEST(Serialization, LittleEndianHeader) {
  auto m = sample_model();
  std::ostringstream buf;
  write_model(buf, m);
  const std::string s = buf.str();
  ASSERT_GT(s.size(), 16u);
  EXPECT_EQ(s.substr(0, 4), "KBEM");
  EXPECT_EQ(static_cast<unsigned char>(s[4]), 1);  // version, low byte first
  EXPECT_EQ(s[5], 0);
  EXPECT_EQ(static_cast<unsigned char>(s[8]), 5);  // dim
  // Header + three matrices of 8-byte doubles precede the symbols.
  const auto& v = m.vocabulary();
  const std::size_t header = 4 + 4 + 8 * 4 + 4 + 8 * 4;
  const std::size_t matrices =
      8 * 5 * (v.entities().size() + v.relations().size() + v.words().size());
  EXPECT_GT(s.size(), header + matrices);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= std::uint64_t{static_cast<unsigned char>(s[header + i])} << (8 * i);
  }
  EXPECT_EQ(std::bit_cast<double>(bits), m.entities().data()[0]);
}

TEST(Serialization, RejectsBadMagicVersionAndTruncation) {
  auto m = sample_model();
  std::ostringstream buf;
  write_model(buf, m);
  std::string s = buf.str();

  std::string bad = s;
  bad[0] = 'X';
  std::istringstream a(bad);
  EXPECT_THROW(read_model(a), FormatError);

  std::string ver = s;
  ver[4] = 9;
  std::istringstream b(ver);
  EXPECT_THROW(read_model(b), FormatError);

  std::istringstream c(s.substr(0, s.size() / 2));
  EXPECT_THROW(read_model(c), FormatError);

  std::istringstream d(s.substr(0, s.size() - 2));
  EXPECT_THROW(read_model(d), FormatError);
}

TEST(Serialization, FileRoundTrip) {
  auto m = sample_model();
  auto path = testing::temp_path("model_roundtrip.bin").string();
  save_model(path, m);
  auto back = load_model(path);
  EXPECT_EQ(back.entities(), m.entities());
  EXPECT_THROW(load_model(path + ".missing"), Error);
}

}  // namespace
}  // namespace kbembed
