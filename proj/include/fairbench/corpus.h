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

#ifndef FAIRBENCH_CORPUS_H_
#define FAIRBENCH_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairbench/attributes.h"

namespace fairbench {

// Collection of fixed-dimension embedding vectors keyed by image id. Rows keep
// insertion order; lookups by id go through a hash index.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim);

  // Throws kDimensionMismatch on a wrong-sized vector, kInvalidArgument on a
  // duplicate id and kNonFiniteInput on NaN/inf components.
  void Insert(uint64_t image_id, std::span<const double> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  const std::vector<uint64_t>& ids() const { return ids_; }
  uint64_t IdAt(std::size_t row) const { return ids_[row]; }
  std::span<const double> Row(std::size_t row) const {
    return {data_.data() + row * dim_, dim_};
  }
  std::optional<std::size_t> RowOf(uint64_t image_id) const;
  bool Contains(uint64_t image_id) const { return index_.contains(image_id); }

  // Throws kUnknownId.
  std::span<const double> Vector(uint64_t image_id) const;

  // True when every vector has Euclidean norm within 1 +- tolerance.
  bool IsNormalized(double tolerance = 1e-6) const {
    return max_norm_deviation_ <= tolerance;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<uint64_t> ids_;
  std::vector<double> data_;
  std::unordered_map<uint64_t, std::size_t> index_;
  double max_norm_deviation_ = 0.0;
};

// Scales every vector to unit Euclidean norm. Throws kZeroVector naming the
// first offending image id.
EmbeddingSet Normalize(const EmbeddingSet& set);

struct ImageRecord {
  uint64_t image_id = 0;
  uint64_t identity_id = 0;
  Gender gender = Gender::kMale;
  Ethnicity ethnicity = Ethnicity::kWhite;
  AgeGroup age_group = AgeGroup::kAdult;
  std::optional<Pose> pose;

  bool operator==(const ImageRecord&) const = default;
};

struct IdentityRecord {
  uint64_t identity_id = 0;
  std::vector<uint64_t> image_ids;  // ascending
  Gender gender = Gender::kMale;
  Ethnicity ethnicity = Ethnicity::kWhite;
};

// Groups images by identity and checks that gender and ethnicity are constant
// within each identity (kInconsistentIdentityAttribute otherwise). Output is
// sorted by identity id.
std::vector<IdentityRecord> DeriveIdentities(const std::vector<ImageRecord>& images);

// Immutable after construction; safe to share across threads.
class Corpus {
 public:
  Corpus() = default;

  // Validates that embedding ids and metadata ids coincide (kDanglingId) and
  // that identity attributes are consistent.
  static Corpus Assemble(EmbeddingSet embeddings, std::vector<ImageRecord> images);

  const EmbeddingSet& embeddings() const { return embeddings_; }
  // Sorted by image id.
  const std::vector<ImageRecord>& images() const { return images_; }
  // Sorted by identity id.
  const std::vector<IdentityRecord>& identities() const { return identities_; }

  // Throw kUnknownId.
  const ImageRecord& Image(uint64_t image_id) const;
  const IdentityRecord& Identity(uint64_t identity_id) const;
  bool HasImage(uint64_t image_id) const { return image_index_.contains(image_id); }

  // Same metadata with a different embedding set over the same ids.
  Corpus WithEmbeddings(EmbeddingSet embeddings) const;

 private:
  EmbeddingSet embeddings_;
  std::vector<ImageRecord> images_;
  std::vector<IdentityRecord> identities_;
  std::unordered_map<uint64_t, std::size_t> image_index_;
  std::unordered_map<uint64_t, std::size_t> identity_index_;
};

// Binary embedding file: "FEMB", version 0x01, u32 count, u32 dim, then
// count records of [u64 image_id, dim x f32], all little-endian.
EmbeddingSet ReadEmbeddings(const std::string& path);
void WriteEmbeddings(const std::string& path, const EmbeddingSet& set);

// Metadata CSV with header
// image_id,identity_id,gender,ethnicity,age_group,pitch_deg,yaw_deg,roll_deg
std::vector<ImageRecord> ReadMetadata(const std::string& path);
void WriteMetadata(const std::string& path, const std::vector<ImageRecord>& images);

Corpus LoadCorpus(const std::string& embedding_path, const std::string& metadata_path);
void WriteCorpus(const Corpus& corpus, const std::string& embedding_path,
                 const std::string& metadata_path);

}  // namespace fairbench

#endif  // FAIRBENCH_CORPUS_H_
