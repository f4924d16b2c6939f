// Copyright (c) 2026 The fairbench Authors. All Rights Reserved
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

#include <cstring>
#include <fstream>
#include <random>

#include "fairbench/corpus.h"
#include "fairbench/error.h"
#include "oracles.h"

namespace fairbench {
namespace {

using testing::TempDir;

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const char* kHeader = "image_id,identity_id,gender,ethnicity,age_group,pitch_deg,yaw_deg,roll_deg\n";

EmbeddingSet Set(std::size_t dim, std::vector<std::pair<uint64_t, std::vector<double>>> rows) {
  EmbeddingSet s(dim);
  for (auto& [id, v] : rows) s.Insert(id, v);
  return s;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

TEST(Normalize, ScalesToUnitNorm) {
  auto n = Normalize(Set(2, {{1, {3, 4}}, {2, {1, 0}}}));
  EXPECT_DOUBLE_EQ(n.Vector(1)[0], 0.6);
  EXPECT_DOUBLE_EQ(n.Vector(1)[1], 0.8);
  EXPECT_EQ(n.Vector(2)[0], 1.0);
  EXPECT_EQ(n.Vector(2)[1], 0.0);
  EXPECT_TRUE(n.IsNormalized());
}

TEST(Normalize, ZeroVector) {
  EXPECT_EQ(CodeOf([] { Normalize(Set(2, {{1, {1, 1}}, {7, {0, 0}}})); }), ErrorCode::kZeroVector);
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingSet s(9);
    for (uint64_t id = 1; id <= 40; ++id) {
      std::vector<double> v(9);
      for (double& x : v) x = normal(gen) * std::pow(10.0, trial % 7 - 3);
      s.Insert(id, v);
    }
    const auto once = Normalize(s);
    const auto twice = Normalize(once);
    for (uint64_t id = 1; id <= 40; ++id) {
      for (std::size_t k = 0; k < 9; ++k) {
        ASSERT_NEAR(once.Vector(id)[k], twice.Vector(id)[k], 1e-12);
      }
    }
  }
}

TEST(EmbeddingSet, InsertChecks) {
  EmbeddingSet s(3);
  s.Insert(1, std::vector<double>{1, 0, 0});
  EXPECT_EQ(CodeOf([&] { s.Insert(2, std::vector<double>{1, 0}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(CodeOf([&] { s.Insert(3, std::vector<double>{NAN, 0, 0}); }), ErrorCode::kNonFiniteInput);
  EXPECT_EQ(CodeOf([&] { (void)s.Vector(9); }), ErrorCode::kUnknownId);
}

TEST(Corpus, MinimalLoad) {
  TempDir dir("corpus");
  WriteEmbeddings(dir / "e.bin", Set(4, {{10, {1, 0, 0, 0}}, {11, {0, 1, 0, 0}}}));
  WriteText(dir / "m.csv", std::string(kHeader) + "10,5,Male,White,Young,1,2,3\n11,5,Male,White,Adult,,,\n");
  const Corpus c = LoadCorpus(dir / "e.bin", dir / "m.csv");
  EXPECT_EQ(c.images().size(), 2u);
  ASSERT_EQ(c.identities().size(), 1u);
  EXPECT_EQ(c.identities()[0].image_ids, (std::vector<uint64_t>{10, 11}));
  EXPECT_TRUE(c.Image(10).pose.has_value());
  EXPECT_FALSE(c.Image(11).pose.has_value());
}

// One fixture per load error.
TEST(Corpus, ErrorFixtures) {
  TempDir dir("corpus_err");
  const std::string good_meta = std::string(kHeader) + "1,1,Male,White,Young,,,\n2,1,Male,White,Young,,,\n";
  WriteEmbeddings(dir / "two.bin", Set(2, {{1, {1, 0}}, {2, {0, 1}}}));
  WriteEmbeddings(dir / "three.bin", Set(2, {{1, {1, 0}}, {2, {0, 1}}, {3, {1, 1}}}));
  WriteText(dir / "good.csv", good_meta);

  // DanglingId both ways.
  EXPECT_EQ(CodeOf([&] { LoadCorpus(dir / "three.bin", dir / "good.csv"); }), ErrorCode::kDanglingId);
  WriteText(dir / "extra.csv", good_meta + "4,2,Female,Asian,Adult,,,\n");
  EXPECT_EQ(CodeOf([&] { LoadCorpus(dir / "two.bin", dir / "extra.csv"); }), ErrorCode::kDanglingId);

  // Inconsistent identity attribute.
  WriteText(dir / "incons.csv", std::string(kHeader) + "1,1,Male,White,Young,,,\n2,1,Female,White,Young,,,\n");
  EXPECT_EQ(CodeOf([&] { LoadCorpus(dir / "two.bin", dir / "incons.csv"); }),
            ErrorCode::kInconsistentIdentityAttribute);

  // Malformed embedding files.
  std::string bytes = Slurp(dir / "two.bin");
  WriteText(dir / "magic.bin", "XEMB" + bytes.substr(4));
  EXPECT_EQ(CodeOf([&] { ReadEmbeddings(dir / "magic.bin"); }), ErrorCode::kMalformedFile);
  WriteText(dir / "short.bin", bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(CodeOf([&] { ReadEmbeddings(dir / "short.bin"); }), ErrorCode::kMalformedFile);
  WriteText(dir / "long.bin", bytes + "x");
  EXPECT_EQ(CodeOf([&] { ReadEmbeddings(dir / "long.bin"); }), ErrorCode::kMalformedFile);
  std::string version = bytes;
  version[4] = 2;
  WriteText(dir / "version.bin", version);
  EXPECT_EQ(CodeOf([&] { ReadEmbeddings(dir / "version.bin"); }), ErrorCode::kMalformedFile);
  std::string dim0 = bytes.substr(0, 13);
  dim0[9] = dim0[10] = dim0[11] = dim0[12] = 0;
  WriteText(dir / "dim0.bin", dim0);
  EXPECT_EQ(CodeOf([&] { ReadEmbeddings(dir / "dim0.bin"); }), ErrorCode::kDimensionMismatch);
  // Duplicate id: second record's id overwritten with the first.
  std::string dup = bytes;
  std::memcpy(&dup[13 + 8 + 8], &bytes[13], 8);
  WriteText(dir / "dup.bin", dup);
  EXPECT_EQ(CodeOf([&] { ReadEmbeddings(dir / "dup.bin"); }), ErrorCode::kMalformedFile);

  // Malformed metadata.
  const std::pair<const char*, std::string> bad_meta[] = {
      {"header", "image_id,identity_id,gender\n1,1,Male\n"},
      {"gender", std::string(kHeader) + "1,1,Other,White,Young,,,\n"},
      {"ethnicity", std::string(kHeader) + "1,1,Male,Latino,Young,,,\n"},
      {"age", std::string(kHeader) + "1,1,Male,White,Old,,,\n"},
      {"fields", std::string(kHeader) + "1,1,Male,White,Young,,\n"},
      {"id", std::string(kHeader) + "x,1,Male,White,Young,,,\n"},
      {"partial_pose", std::string(kHeader) + "1,1,Male,White,Young,1,,\n"},
      {"pose_range", std::string(kHeader) + "1,1,Male,White,Young,1,2,181\n"},
      {"pose_nan", std::string(kHeader) + "1,1,Male,White,Young,1,nan,2\n"},
      {"duplicate", std::string(kHeader) + "1,1,Male,White,Young,,,\n1,1,Male,White,Young,,,\n"},
  };
  for (const auto& [name, text] : bad_meta) {
    WriteText(dir / name, text);
    EXPECT_EQ(CodeOf([&] { ReadMetadata(dir / name); }), ErrorCode::kMalformedFile) << name;
  }
  EXPECT_EQ(CodeOf([&] { ReadMetadata(dir / "missing.csv"); }), ErrorCode::kIo);
}

TEST(Corpus, RoundTripIsBitwise) {
  std::mt19937_64 gen(11);
  const Corpus c0 = testing::RandomCorpus(gen, 60, 15, 7);
  TempDir dir("rt");
  WriteCorpus(c0, dir / "a.bin", dir / "a.csv");
  const Corpus c1 = LoadCorpus(dir / "a.bin", dir / "a.csv");
  WriteCorpus(c1, dir / "b.bin", dir / "b.csv");
  const Corpus c2 = LoadCorpus(dir / "b.bin", dir / "b.csv");
  EXPECT_EQ(Slurp(dir / "a.bin"), Slurp(dir / "b.bin"));
  EXPECT_EQ(Slurp(dir / "a.csv"), Slurp(dir / "b.csv"));
  EXPECT_EQ(c1.images(), c2.images());
  EXPECT_EQ(c0.images(), c1.images());  // metadata, poses included, survive the first trip
  for (uint64_t id : c1.embeddings().ids()) {
    const auto a = c1.embeddings().Vector(id);
    const auto b = c2.embeddings().Vector(id);
    ASSERT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
    // First trip rounds to float32 only.
    const auto o = c0.embeddings().Vector(id);
    for (std::size_t k = 0; k < o.size(); ++k) ASSERT_EQ(a[k], static_cast<double>(static_cast<float>(o[k])));
  }
}

TEST(Corpus, MetadataOrderIrrelevant) {
  TempDir dir("order");
  WriteEmbeddings(dir / "e.bin", Set(2, {{1, {1, 0}}, {2, {0, 1}}, {3, {1, 1}}}));
  WriteText(dir / "a.csv", std::string(kHeader) +
                               "1,1,Male,White,Young,,,\n2,1,Male,White,Adult,,,\n3,2,Female,Black,Senior,,,\n");
  WriteText(dir / "b.csv", std::string(kHeader) +
                               "3,2,Female,Black,Senior,,,\n1,1,Male,White,Young,,,\n2,1,Male,White,Adult,,,\n");
  EXPECT_EQ(LoadCorpus(dir / "e.bin", dir / "a.csv").images(),
            LoadCorpus(dir / "e.bin", dir / "b.csv").images());
}

}  // namespace
}  // namespace fairbench
