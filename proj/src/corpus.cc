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

#include "fairbench/corpus.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <unordered_set>

#include "fairbench/error.h"
#include "fairbench/text.h"

namespace fairbench {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'M', 'B'};
constexpr uint8_t kVersion = 0x01;
constexpr std::string_view kMetadataHeader =
    "image_id,identity_id,gender,ethnicity,age_group,pitch_deg,yaw_deg,roll_deg";

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

  template <typename T>
  T Read() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw Error(ErrorCode::kMalformedFile, path_ + ": truncated embedding file");
    }
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

template <typename T>
void AppendLe(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kDimensionMismatch, "embedding dimension must be >= 1");
}

void EmbeddingSet::Insert(uint64_t image_id, std::span<const double> values) {
  if (dim_ == 0) throw Error(ErrorCode::kDimensionMismatch, "embedding dimension must be >= 1");
  if (values.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "image " + std::to_string(image_id) + " has " + std::to_string(values.size()) +
                    " components, expected " + std::to_string(dim_));
  }
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFiniteInput,
                  "image " + std::to_string(image_id) + " has a non-finite component");
    }
  }
  if (!index_.emplace(image_id, ids_.size()).second) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate image_id " + std::to_string(image_id));
  }
  ids_.push_back(image_id);
  data_.insert(data_.end(), values.begin(), values.end());
  max_norm_deviation_ = std::max(max_norm_deviation_, std::abs(Norm(values) - 1.0));
}

std::optional<std::size_t> EmbeddingSet::RowOf(uint64_t image_id) const {
  auto it = index_.find(image_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingSet::Vector(uint64_t image_id) const {
  auto row = RowOf(image_id);
  if (!row) throw Error(ErrorCode::kUnknownId, "unknown image_id " + std::to_string(image_id));
  return Row(*row);
}

EmbeddingSet Normalize(const EmbeddingSet& set) {
  EmbeddingSet out(set.dim());
  std::vector<double> buf(set.dim());
  for (std::size_t r = 0; r < set.size(); ++r) {
    auto v = set.Row(r);
    const double n = Norm(v);
    if (n == 0.0) {
      throw Error(ErrorCode::kZeroVector, "zero vector for image " + std::to_string(set.IdAt(r)));
    }
    for (std::size_t i = 0; i < v.size(); ++i) buf[i] = v[i] / n;
    out.Insert(set.IdAt(r), buf);
  }
  return out;
}

std::vector<IdentityRecord> DeriveIdentities(const std::vector<ImageRecord>& images) {
  std::map<uint64_t, IdentityRecord> by_id;
  for (const auto& img : images) {
    auto [it, fresh] = by_id.try_emplace(img.identity_id);
    IdentityRecord& rec = it->second;
    if (fresh) {
      rec.identity_id = img.identity_id;
      rec.gender = img.gender;
      rec.ethnicity = img.ethnicity;
    } else if (rec.gender != img.gender || rec.ethnicity != img.ethnicity) {
      throw Error(ErrorCode::kInconsistentIdentityAttribute,
                  "identity " + std::to_string(img.identity_id) +
                      " has inconsistent gender/ethnicity at image " +
                      std::to_string(img.image_id));
    }
    rec.image_ids.push_back(img.image_id);
  }
  std::vector<IdentityRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, rec] : by_id) {
    std::sort(rec.image_ids.begin(), rec.image_ids.end());
    out.push_back(std::move(rec));
  }
  return out;
}

Corpus Corpus::Assemble(EmbeddingSet embeddings, std::vector<ImageRecord> images) {
  std::sort(images.begin(), images.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (images[i].image_id == images[i - 1].image_id) {
      throw Error(ErrorCode::kMalformedFile,
                  "duplicate metadata row for image " + std::to_string(images[i].image_id));
    }
  }
  Corpus c;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!embeddings.Contains(images[i].image_id)) {
      throw Error(ErrorCode::kDanglingId,
                  "image " + std::to_string(images[i].image_id) + " has metadata but no embedding");
    }
    c.image_index_.emplace(images[i].image_id, i);
  }
  if (embeddings.size() != images.size()) {
    for (uint64_t id : embeddings.ids()) {
      if (!c.image_index_.contains(id)) {
        throw Error(ErrorCode::kDanglingId,
                    "image " + std::to_string(id) + " has an embedding but no metadata");
      }
    }
  }
  c.identities_ = DeriveIdentities(images);
  for (std::size_t i = 0; i < c.identities_.size(); ++i) {
    c.identity_index_.emplace(c.identities_[i].identity_id, i);
  }
  c.embeddings_ = std::move(embeddings);
  c.images_ = std::move(images);
  return c;
}

const ImageRecord& Corpus::Image(uint64_t image_id) const {
  auto it = image_index_.find(image_id);
  if (it == image_index_.end()) {
    throw Error(ErrorCode::kUnknownId, "unknown image_id " + std::to_string(image_id));
  }
  return images_[it->second];
}

const IdentityRecord& Corpus::Identity(uint64_t identity_id) const {
  auto it = identity_index_.find(identity_id);
  if (it == identity_index_.end()) {
    throw Error(ErrorCode::kUnknownId, "unknown identity_id " + std::to_string(identity_id));
  }
  return identities_[it->second];
}

Corpus Corpus::WithEmbeddings(EmbeddingSet embeddings) const {
  return Assemble(std::move(embeddings), images_);
}

EmbeddingSet ReadEmbeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kMalformedFile, path + ": bad magic");
  }
  ByteReader reader(bytes, path);
  reader.Read<uint32_t>();  // magic
  if (reader.Read<uint8_t>() != kVersion) {
    throw Error(ErrorCode::kMalformedFile, path + ": unsupported version");
  }
  const uint32_t count = reader.Read<uint32_t>();
  const uint32_t dim = reader.Read<uint32_t>();
  if (dim == 0) throw Error(ErrorCode::kDimensionMismatch, path + ": dimension 0");
  const uint64_t record = 8 + 4 * static_cast<uint64_t>(dim);
  if (reader.remaining() != record * count) {
    throw Error(ErrorCode::kMalformedFile,
                path + ": payload length does not match count " + std::to_string(count) +
                    " x dim " + std::to_string(dim));
  }
  EmbeddingSet set(dim);
  std::vector<double> buf(dim);
  for (uint32_t r = 0; r < count; ++r) {
    const uint64_t id = reader.Read<uint64_t>();
    for (uint32_t i = 0; i < dim; ++i) {
      buf[i] = std::bit_cast<float>(reader.Read<uint32_t>());
    }
    if (set.Contains(id)) {
      throw Error(ErrorCode::kMalformedFile, path + ": duplicate image_id " + std::to_string(id));
    }
    try {
      set.Insert(id, buf);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
    }
  }
  return set;
}

void WriteEmbeddings(const std::string& path, const EmbeddingSet& set) {
  std::string out;
  out.reserve(13 + set.size() * (8 + 4 * set.dim()));
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  AppendLe<uint32_t>(out, static_cast<uint32_t>(set.size()));
  AppendLe<uint32_t>(out, static_cast<uint32_t>(set.dim()));
  for (std::size_t r = 0; r < set.size(); ++r) {
    AppendLe<uint64_t>(out, set.IdAt(r));
    for (double x : set.Row(r)) {
      AppendLe<uint32_t>(out, std::bit_cast<uint32_t>(static_cast<float>(x)));
    }
  }
  WriteFileAtomic(path, out);
}

std::vector<ImageRecord> ReadMetadata(const std::string& path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || lines[0] != kMetadataHeader) {
    throw Error(ErrorCode::kMalformedFile, path + ": missing or wrong header");
  }
  std::vector<ImageRecord> images;
  std::unordered_set<uint64_t> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto where = path + ":" + std::to_string(ln + 1) + ": ";
    const auto f = SplitCsv(lines[ln]);
    if (f.size() != 8) throw Error(ErrorCode::kMalformedFile, where + "expected 8 fields");
    ImageRecord rec;
    auto image_id = ParseU64(f[0]);
    auto identity_id = ParseU64(f[1]);
    auto gender = ParseGender(f[2]);
    auto ethnicity = ParseEthnicity(f[3]);
    auto age = ParseAgeGroup(f[4]);
    if (!image_id || !identity_id) throw Error(ErrorCode::kMalformedFile, where + "bad id");
    if (!gender) throw Error(ErrorCode::kMalformedFile, where + "bad gender");
    if (!ethnicity) throw Error(ErrorCode::kMalformedFile, where + "bad ethnicity");
    if (!age) throw Error(ErrorCode::kMalformedFile, where + "bad age_group");
    rec.image_id = *image_id;
    rec.identity_id = *identity_id;
    rec.gender = *gender;
    rec.ethnicity = *ethnicity;
    rec.age_group = *age;
    const bool any_pose = !f[5].empty() || !f[6].empty() || !f[7].empty();
    if (any_pose) {
      double angles[3];
      for (int k = 0; k < 3; ++k) {
        auto v = ParseDouble(f[5 + k]);
        if (!v || !std::isfinite(*v) || *v < -180.0 || *v > 180.0) {
          throw Error(ErrorCode::kMalformedFile,
                      where + "pose fields must be all empty or all finite in [-180, 180]");
        }
        angles[k] = *v;
      }
      rec.pose = Pose{angles[0], angles[1], angles[2]};
    }
    if (!seen.insert(rec.image_id).second) {
      throw Error(ErrorCode::kMalformedFile,
                  where + "duplicate image_id " + std::to_string(rec.image_id));
    }
    images.push_back(rec);
  }
  return images;
}

void WriteMetadata(const std::string& path, const std::vector<ImageRecord>& images) {
  std::ostringstream out;
  out << kMetadataHeader << '\n';
  for (const auto& img : images) {
    out << img.image_id << ',' << img.identity_id << ',' << Name(img.gender) << ','
        << Name(img.ethnicity) << ',' << Name(img.age_group) << ',';
    if (img.pose) {
      out << FormatDouble(img.pose->pitch) << ',' << FormatDouble(img.pose->yaw) << ','
          << FormatDouble(img.pose->roll);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  WriteFileAtomic(path, out.str());
}

Corpus LoadCorpus(const std::string& embedding_path, const std::string& metadata_path) {
  return Corpus::Assemble(ReadEmbeddings(embedding_path), ReadMetadata(metadata_path));
}

void WriteCorpus(const Corpus& corpus, const std::string& embedding_path,
                 const std::string& metadata_path) {
  WriteEmbeddings(embedding_path, corpus.embeddings());
  WriteMetadata(metadata_path, corpus.images());
}

}  // namespace fairbench
