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

#ifndef FAIRBENCH_TEXT_H_
#define FAIRBENCH_TEXT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairbench {

// Plain comma split; fields are never quoted in the formats this tool emits.
std::vector<std::string_view> SplitCsv(std::string_view line);

std::optional<uint64_t> ParseU64(std::string_view s);
std::optional<double> ParseDouble(std::string_view s);

// Round-trip formatting with 17 significant digits ("%.17g").
std::string FormatDouble(double v);

// Reads a whole text file into lines with trailing '\r' stripped. Throws kIo.
std::vector<std::string> ReadLines(const std::string& path);

// Writes via a sibling temp file and rename so readers never see a partial
// file. Throws kIo.
void WriteFileAtomic(const std::string& path, const std::string& contents);

}  // namespace fairbench

#endif  // FAIRBENCH_TEXT_H_
