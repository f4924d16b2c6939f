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

#ifndef FAIRBENCH_RENDER_H_
#define FAIRBENCH_RENDER_H_

#include <map>
#include <string>

#include "json.hpp"

namespace fairbench {

// Heatmaps of every gap matrix of `attribute` in an audit report, one panel
// per (model, metric). Each panel has n x n <rect class="cell"> elements with
// a value label; labels are rounded to three decimals and mirror each other
// across the diagonal. Empty string when the report has no such matrix.
std::string RenderGapSvg(const nlohmann::json& report, const std::string& attribute);

// Stacked eta-squared bars, one bar per (model, pair class) ANOVA.
std::string RenderAnovaSvg(const nlohmann::json& report);

// gaps_<attr>.svg for each attribute with gaps, plus anova.svg when present.
std::map<std::string, std::string> RenderReport(const nlohmann::json& report);

}  // namespace fairbench

#endif  // FAIRBENCH_RENDER_H_
