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

#include "humi/io.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "humi/error.h"

namespace humi::io {

namespace fs = std::filesystem;

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return buffer.str();
}

void WriteFileAtomic(const std::string& path, std::string_view content) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError(target.parent_path().string(), ec.message());
  }
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(temp.string(), "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(temp.string(), "write failed");
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) throw IoError(path, "rename failed: " + ec.message());
}

std::string Dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json ParseJson(std::string_view text, const std::string& path) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(path, std::string("invalid JSON: ") + e.what());
  }
}

void RejectUnknownFields(const Json& obj,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& path) {
  ExpectObject(obj, path);
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) {
      throw ParseError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

void ExpectObject(const Json& value, const std::string& path) {
  if (!value.is_object()) throw ParseError(path, "expected an object");
}

void ExpectArray(const Json& value, const std::string& path) {
  if (!value.is_array()) throw ParseError(path, "expected an array");
}

const Json& Require(const Json& obj, std::string_view key,
                    const std::string& path) {
  ExpectObject(obj, path);
  auto it = obj.find(key);
  const std::string child = path.empty() ? std::string(key)
                                         : path + "." + std::string(key);
  if (it == obj.end()) throw ParseError(child, "missing required field");
  return *it;
}

double AsNumber(const Json& value, const std::string& path) {
  if (!value.is_number()) throw ParseError(path, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) throw ParseError(path, "expected a finite number");
  return x;
}

std::string AsString(const Json& value, const std::string& path) {
  if (!value.is_string()) throw ParseError(path, "expected a string");
  return value.get<std::string>();
}

int64_t AsInteger(const Json& value, const std::string& path) {
  if (!value.is_number_integer()) throw ParseError(path, "expected an integer");
  return value.get<int64_t>();
}

std::vector<double> AsNumbers(const Json& value, const std::string& path,
                              size_t expected_size) {
  ExpectArray(value, path);
  if (value.size() != expected_size) {
    throw ParseError(path, "expected " + std::to_string(expected_size) +
                               " numbers, got " +
                               std::to_string(value.size()));
  }
  std::vector<double> out;
  out.reserve(expected_size);
  for (size_t i = 0; i < value.size(); ++i) {
    out.push_back(AsNumber(value[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

geom::Vec3 AsVec3(const Json& value, const std::string& path) {
  const auto v = AsNumbers(value, path, 3);
  return {v[0], v[1], v[2]};
}

geom::Quat AsQuat(const Json& value, const std::string& path) {
  const auto v = AsNumbers(value, path, 4);
  geom::Quat q(v[0], v[1], v[2], v[3]);
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw ParseError(path, "quaternion is not unit length");
  }
  if (std::abs(q.norm() - 1.0) > 1e-12) q.normalize();
  return q;
}

Json PoseToJson(const geom::Pose& pose) {
  const auto& t = pose.translation;
  const auto& q = pose.rotation;
  return Json{{"p", {t.x(), t.y(), t.z()}},
              {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

geom::Pose PoseFromJson(const Json& value, const std::string& path) {
  RejectUnknownFields(value, {"p", "q"}, path);
  geom::Pose pose;
  if (value.contains("p")) pose.translation = AsVec3(value["p"], path + ".p");
  if (value.contains("q")) pose.rotation = AsQuat(value["q"], path + ".q");
  return pose;
}

void ExpectFormat(const Json& doc, std::string_view format,
                  const std::string& path) {
  const std::string child = path.empty() ? "format" : path + ".format";
  const std::string found = AsString(Require(doc, "format", path), child);
  if (found != format) {
    throw ParseError(child, "unsupported format '" + found + "', expected '" +
                                std::string(format) + "'");
  }
}

}  // namespace humi::io
