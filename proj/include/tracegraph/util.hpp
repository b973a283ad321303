// Copyright 2026 The TraceGraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tracegraph {

using Json = nlohmann::ordered_json;

/// Lowercase hex SHA-256 of the input bytes.
std::string Sha256Hex(std::string_view data);

std::uint64_t Fnv1a64(std::string_view data);

/// Reads a whole file; throws Error(kIo) naming the path on failure.
std::string ReadFile(std::filesystem::path const& path);
void WriteFile(std::filesystem::path const& path, std::string_view contents);

/// Line-delimited JSON. Records are written compactly with insertion-ordered
/// keys so that files are byte-comparable across runs.
std::vector<Json> ReadJsonLines(std::filesystem::path const& path);
void WriteJsonLines(std::filesystem::path const& path,
                    std::vector<Json> const& records);
void AppendJsonLine(std::filesystem::path const& path, Json const& record);

std::string ToLowerAscii(std::string_view s);
std::string Trim(std::string_view s);
/// Trims, collapses internal whitespace runs to one space.
std::string CollapseWhitespace(std::string_view s);

/// Splits text into sentences on '.', '!', '?' or newline boundaries.
/// Returned spans are byte ranges [begin, end) over the input, trimmed.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(Span const&) const = default;
};
std::vector<Span> SplitSentences(std::string_view text);

/// Portable deterministic RNG helpers (std distributions are not portable).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next();
  /// Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

template <typename T>
void DeterministicShuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.Below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace tracegraph
