// Copyright 2026 The humi Authors
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

#ifndef HUMI_TOOLS_CLI_H_
#define HUMI_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace humi::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDomainFailure = 1;
inline constexpr int kUsageOrIo = 2;

// Runs one `humi` invocation. args[0] is the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// <out>.run.json, with any trailing separator of `out` removed.
std::string ManifestPath(const std::string& out);

}  // namespace humi::cli

#endif  // HUMI_TOOLS_CLI_H_
