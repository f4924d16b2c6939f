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

#ifndef FAIRBENCH_REPORT_H_
#define FAIRBENCH_REPORT_H_

#include <string>

#include "json.hpp"

namespace fairbench {

// Sorted keys, two-space indentation, floats with 17 significant digits and
// non-finite floats as null. Same value in, same bytes out.
std::string CanonicalJson(const nlohmann::json& j);

// {"error": {"code": ..., "message": ...}}
std::string ErrorJson(const std::string& code, const std::string& message);

}  // namespace fairbench

#endif  // FAIRBENCH_REPORT_H_
