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

#ifndef FAIRBENCH_ATTRIBUTES_H_
#define FAIRBENCH_ATTRIBUTES_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairbench {

// Enumerator order is the canonical level order used by greedy balancing
// (Young < Adult < Senior) and by report tables.
enum class Gender { kMale, kFemale };
enum class Ethnicity { kWhite, kBlack, kAsian, kIndian };
enum class AgeGroup { kYoung, kAdult, kSenior };

enum class Attribute { kGender, kAge, kEthnicity };

inline constexpr std::array<Gender, 2> kAllGenders = {Gender::kMale, Gender::kFemale};
inline constexpr std::array<Ethnicity, 4> kAllEthnicities = {
    Ethnicity::kWhite, Ethnicity::kBlack, Ethnicity::kAsian, Ethnicity::kIndian};
inline constexpr std::array<AgeGroup, 3> kAllAgeGroups = {
    AgeGroup::kYoung, AgeGroup::kAdult, AgeGroup::kSenior};
inline constexpr std::array<Attribute, 3> kAllAttributes = {
    Attribute::kGender, Attribute::kAge, Attribute::kEthnicity};

std::string_view Name(Gender g);
std::string_view Name(Ethnicity e);
std::string_view Name(AgeGroup a);
std::string_view Name(Attribute a);

std::optional<Gender> ParseGender(std::string_view s);
std::optional<Ethnicity> ParseEthnicity(std::string_view s);
std::optional<AgeGroup> ParseAgeGroup(std::string_view s);
std::optional<Attribute> ParseAttribute(std::string_view s);

// Level names of an attribute in enumerator order.
std::vector<std::string> LevelNames(Attribute a);

// Head pose in degrees; rotations around the x, y and z axes.
struct Pose {
  double pitch = 0.0;
  double yaw = 0.0;
  double roll = 0.0;

  bool operator==(const Pose&) const = default;
};

}  // namespace fairbench

#endif  // FAIRBENCH_ATTRIBUTES_H_
