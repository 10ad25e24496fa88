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

#ifndef HUMI_IO_H_
#define HUMI_IO_H_

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "humi/geom.h"

// Helpers shared by every on-disk format: strict JSON field access with
// error paths, pose encoding, and atomic file output.
namespace humi::io {

using Json = nlohmann::json;

std::string ReadTextFile(const std::string& path);

// Writes through a temporary file in the same directory, then renames.
void WriteFileAtomic(const std::string& path, std::string_view content);

// Canonical serialization: two-space indent, keys sorted, trailing newline.
std::string Dump(const Json& doc);

// Parses JSON text; syntax errors become ParseError at `path`.
Json ParseJson(std::string_view text, const std::string& path);

// Throws ParseError for any key of `obj` not in `allowed`.
void RejectUnknownFields(const Json& obj,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& path);

void ExpectObject(const Json& value, const std::string& path);
void ExpectArray(const Json& value, const std::string& path);
const Json& Require(const Json& obj, std::string_view key,
                    const std::string& path);
double AsNumber(const Json& value, const std::string& path);
std::string AsString(const Json& value, const std::string& path);
int64_t AsInteger(const Json& value, const std::string& path);
std::vector<double> AsNumbers(const Json& value, const std::string& path,
                              size_t expected_size);
geom::Vec3 AsVec3(const Json& value, const std::string& path);
// [w, x, y, z]; must be unit within 1e-6. Values already unit to 1e-12 are
// returned bit-exact so files round-trip.
geom::Quat AsQuat(const Json& value, const std::string& path);

// {"p": [x, y, z], "q": [w, x, y, z]}
Json PoseToJson(const geom::Pose& pose);
geom::Pose PoseFromJson(const Json& value, const std::string& path);

// Throws ParseError unless doc["format"] equals `format`.
void ExpectFormat(const Json& doc, std::string_view format,
                  const std::string& path);

}  // namespace humi::io

#endif  // HUMI_IO_H_
