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

#include "tracegraph/util.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tracegraph/error.hpp"

namespace tracegraph {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kDuplicateDocument: return "DuplicateDocument";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kScriptMiss: return "ScriptMiss";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kNoContext: return "NoContext";
    case ErrorCode::kNoMatch: return "NoMatch";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kDanglingProvenance: return "DanglingProvenance";
    case ErrorCode::kUnknownMetric: return "UnknownMetric";
    case ErrorCode::kUnknownMethod: return "UnknownMethod";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kStoreCorrupt: return "StoreCorrupt";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string ReadFile(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read file: " + path.string());
  return std::move(ss).str();
}

void WriteFile(std::filesystem::path const& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write file: " + path.string());
}

std::vector<Json> ReadJsonLines(std::filesystem::path const& path) {
  std::vector<Json> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read file: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (nlohmann::json::exception const& e) {
      throw Error(ErrorCode::kStoreCorrupt, path.string() + ":" +
                                                std::to_string(lineno) + ": " +
                                                e.what());
    }
  }
  return out;
}

void WriteJsonLines(std::filesystem::path const& path,
                    std::vector<Json> const& records) {
  std::string buf;
  for (auto const& r : records) {
    buf += r.dump();
    buf += '\n';
  }
  WriteFile(path, buf);
}

void AppendJsonLine(std::filesystem::path const& path, Json const& record) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to file: " + path.string());
  out << record.dump() << '\n';
}

std::string ToLowerAscii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {
bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && IsSpace(s[b])) ++b;
  while (e > b && IsSpace(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string CollapseWhitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<Span> SplitSentences(std::string_view text) {
  std::vector<Span> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::size_t b = start;
    std::size_t e = end;
    while (b < e && IsSpace(text[b])) ++b;
    while (e > b && IsSpace(text[e - 1])) --e;
    if (b < e) out.push_back({b, e});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool boundary = c == '\n';
    if (c == '.' || c == '!' || c == '?') {
      boundary = i + 1 == text.size() || IsSpace(text[i + 1]);
    }
    if (boundary) {
      flush(c == '\n' ? i : i + 1);
      start = i + 1;
    }
  }
  flush(text.size());
  return out;
}

std::uint64_t SplitMix64::Next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::Below(std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t const limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = Next();
  while (x >= limit) x = Next();
  return x % bound;
}

}  // namespace tracegraph
