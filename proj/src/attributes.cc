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

#include "fairbench/attributes.h"

namespace fairbench {

std::string_view Name(Gender g) {
  return g == Gender::kMale ? "Male" : "Female";
}

std::string_view Name(Ethnicity e) {
  switch (e) {
    case Ethnicity::kWhite: return "White";
    case Ethnicity::kBlack: return "Black";
    case Ethnicity::kAsian: return "Asian";
    case Ethnicity::kIndian: return "Indian";
  }
  return "";
}

std::string_view Name(AgeGroup a) {
  switch (a) {
    case AgeGroup::kYoung: return "Young";
    case AgeGroup::kAdult: return "Adult";
    case AgeGroup::kSenior: return "Senior";
  }
  return "";
}

std::string_view Name(Attribute a) {
  switch (a) {
    case Attribute::kGender: return "gender";
    case Attribute::kAge: return "age";
    case Attribute::kEthnicity: return "ethnicity";
  }
  return "";
}

std::optional<Gender> ParseGender(std::string_view s) {
  for (Gender g : kAllGenders) {
    if (Name(g) == s) return g;
  }
  return std::nullopt;
}

std::optional<Ethnicity> ParseEthnicity(std::string_view s) {
  for (Ethnicity e : kAllEthnicities) {
    if (Name(e) == s) return e;
  }
  return std::nullopt;
}

std::optional<AgeGroup> ParseAgeGroup(std::string_view s) {
  for (AgeGroup a : kAllAgeGroups) {
    if (Name(a) == s) return a;
  }
  return std::nullopt;
}

std::optional<Attribute> ParseAttribute(std::string_view s) {
  for (Attribute a : kAllAttributes) {
    if (Name(a) == s) return a;
  }
  return std::nullopt;
}

std::vector<std::string> LevelNames(Attribute a) {
  std::vector<std::string> out;
  switch (a) {
    case Attribute::kGender:
      for (Gender g : kAllGenders) out.emplace_back(Name(g));
      break;
    case Attribute::kAge:
      for (AgeGroup x : kAllAgeGroups) out.emplace_back(Name(x));
      break;
    case Attribute::kEthnicity:
      for (Ethnicity e : kAllEthnicities) out.emplace_back(Name(e));
      break;
  }
  return out;
}

}  // namespace fairbench
