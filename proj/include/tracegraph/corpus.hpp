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

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracegraph/util.hpp"

namespace tracegraph {

/// Byte range of one token inside the tokenized text.
struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> Tokenize(std::string_view text) const = 0;
  std::size_t Count(std::string_view text) const { return Tokenize(text).size(); }
};

/// Maximal runs of letters/digits form one token; every other
/// non-whitespace byte is a token of its own. Bytes >= 0x80 are treated as
/// letters so multi-byte UTF-8 words stay whole.
class RuleTokenizer final : public Tokenizer {
 public:
  std::vector<Token> Tokenize(std::string_view text) const override;
};

/// Process-wide default tokenizer used for accounting.
Tokenizer const& DefaultTokenizer();
std::size_t CountTokens(std::string_view text);

struct Document {
  std::string doc_id;
  std::string title;
  std::string source_path;
  std::string body;
  std::size_t token_count = 0;
};

/// Offsets are byte offsets into the parent document's normalized UTF-8 body.
struct TextUnit {
  std::string unit_id;
  std::string doc_id;
  std::size_t seq_index = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string text;
  std::size_t token_count = 0;

  bool operator==(TextUnit const&) const = default;
};

struct ChunkConfig {
  std::size_t chunk_tokens = 600;
  std::size_t overlap_tokens = 100;
};

/// CRLF/CR become LF, tabs become spaces, other control bytes are dropped.
std::string NormalizeText(std::string_view raw);

Document IngestDocument(std::string_view raw, std::string_view title,
                        std::string_view source_path = {});

std::vector<TextUnit> ChunkDocument(Document const& doc, ChunkConfig const& config,
                                    Tokenizer const& tokenizer = DefaultTokenizer());

std::string MakeUnitId(std::string_view doc_id, std::size_t seq_index);

Json ManifestRecord(Document const& doc);
Json DocumentToJson(Document const& doc);
Document DocumentFromJson(Json const& j);
Json UnitToJson(TextUnit const& unit);
TextUnit UnitFromJson(Json const& j);

/// In-memory corpus: documents plus their text units, keyed for lookup.
class Corpus {
 public:
  bool Contains(std::string_view doc_id) const;
  /// Throws kDuplicateDocument if the id is already present.
  void Add(Document doc, std::vector<TextUnit> units);

  Document const* FindDocument(std::string_view doc_id) const;
  TextUnit const* FindUnit(std::string_view unit_id) const;

  /// Documents ordered by doc_id.
  std::vector<Document const*> Documents() const;
  /// Units ordered by (doc_id, seq_index).
  std::vector<TextUnit const*> Units() const;
  std::size_t UnitCount() const { return units_.size(); }
  std::size_t DocumentCount() const { return documents_.size(); }

  void Save(std::filesystem::path const& root) const;
  static Corpus Load(std::filesystem::path const& root);

 private:
  std::map<std::string, Document, std::less<>> documents_;
  std::map<std::string, TextUnit, std::less<>> units_;
};

}  // namespace tracegraph
