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

#include "tracegraph/corpus.hpp"

#include <cstdio>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool IsSpaceByte(unsigned char c) {
  return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

constexpr char kManifestFile[] = "corpus_manifest.jsonl";
constexpr char kDocumentsFile[] = "documents.jsonl";
constexpr char kChunksFile[] = "chunks.jsonl";

}  // namespace

std::vector<Token> RuleTokenizer::Tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (IsSpaceByte(c)) {
      ++i;
    } else if (IsWordByte(c)) {
      std::size_t j = i + 1;
      while (j < text.size() && IsWordByte(static_cast<unsigned char>(text[j]))) ++j;
      tokens.push_back({i, j});
      i = j;
    } else {
      tokens.push_back({i, i + 1});
      ++i;
    }
  }
  return tokens;
}

Tokenizer const& DefaultTokenizer() {
  static RuleTokenizer const tokenizer;
  return tokenizer;
}

std::size_t CountTokens(std::string_view text) { return DefaultTokenizer().Count(text); }

std::string NormalizeText(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto c = static_cast<unsigned char>(raw[i]);
    if (c == '\r') {
      out.push_back('\n');
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
    } else if (c == '\t') {
      out.push_back(' ');
    } else if (c == '\n' || (c >= 0x20 && c != 0x7F)) {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

Document IngestDocument(std::string_view raw, std::string_view title,
                        std::string_view source_path) {
  Document doc;
  doc.body = NormalizeText(raw);
  doc.token_count = CountTokens(doc.body);
  if (doc.token_count == 0) {
    throw Error(ErrorCode::kEmptyDocument,
                "document '" + std::string(title) + "' has no content after normalization");
  }
  doc.title = NormalizeText(title);
  doc.source_path = std::string(source_path);
  std::string key = doc.title;
  key.push_back('\0');
  key += doc.body;
  doc.doc_id = "doc-" + Sha256Hex(key).substr(0, 16);
  return doc;
}

std::string MakeUnitId(std::string_view doc_id, std::size_t seq_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", seq_index);
  return std::string(doc_id) + ":" + buf;
}

std::vector<TextUnit> ChunkDocument(Document const& doc, ChunkConfig const& config,
                                    Tokenizer const& tokenizer) {
  if (config.chunk_tokens == 0 || config.overlap_tokens >= config.chunk_tokens) {
    throw Error(ErrorCode::kInvalidArgument,
                "chunking requires 0 <= overlap_tokens < chunk_tokens");
  }
  std::string_view body = doc.body;
  auto tokens = tokenizer.Tokenize(body);
  std::size_t const n = tokens.size();
  std::vector<TextUnit> units;
  if (n == 0) return units;

  // A token starts a word when it is first or preceded by whitespace; window
  // edges only ever land on word starts so no word is split.
  auto word_start = [&](std::size_t t) {
    return t == 0 || t == n || tokens[t - 1].end < tokens[t].begin;
  };

  std::size_t start = 0;
  for (std::size_t seq = 0;; ++seq) {
    std::size_t end = std::min(start + config.chunk_tokens, n);
    while (end < n && !word_start(end)) ++end;
    bool const last = end == n;

    TextUnit unit;
    unit.doc_id = doc.doc_id;
    unit.seq_index = seq;
    unit.unit_id = MakeUnitId(doc.doc_id, seq);
    unit.char_start = seq == 0 ? 0 : tokens[start].begin;
    unit.char_end = last ? body.size() : tokens[end].begin;
    unit.text = std::string(body.substr(unit.char_start, unit.char_end - unit.char_start));
    unit.token_count = tokenizer.Count(unit.text);
    units.push_back(std::move(unit));
    if (last) break;

    std::size_t next = end - config.overlap_tokens;
    while (next < end && !word_start(next)) ++next;
    start = next;
  }
  return units;
}

Json ManifestRecord(Document const& doc) {
  Json j;
  j["doc_id"] = doc.doc_id;
  j["title"] = doc.title;
  j["source_path"] = doc.source_path;
  j["sha256"] = Sha256Hex(doc.body);
  return j;
}

Json DocumentToJson(Document const& doc) {
  Json j;
  j["doc_id"] = doc.doc_id;
  j["title"] = doc.title;
  j["source_path"] = doc.source_path;
  j["token_count"] = doc.token_count;
  j["body"] = doc.body;
  return j;
}

Document DocumentFromJson(Json const& j) {
  Document d;
  d.doc_id = j.at("doc_id").get<std::string>();
  d.title = j.at("title").get<std::string>();
  d.source_path = j.at("source_path").get<std::string>();
  d.token_count = j.at("token_count").get<std::size_t>();
  d.body = j.at("body").get<std::string>();
  return d;
}

Json UnitToJson(TextUnit const& unit) {
  Json j;
  j["unit_id"] = unit.unit_id;
  j["doc_id"] = unit.doc_id;
  j["seq_index"] = unit.seq_index;
  j["char_start"] = unit.char_start;
  j["char_end"] = unit.char_end;
  j["token_count"] = unit.token_count;
  j["text"] = unit.text;
  return j;
}

TextUnit UnitFromJson(Json const& j) {
  TextUnit u;
  u.unit_id = j.at("unit_id").get<std::string>();
  u.doc_id = j.at("doc_id").get<std::string>();
  u.seq_index = j.at("seq_index").get<std::size_t>();
  u.char_start = j.at("char_start").get<std::size_t>();
  u.char_end = j.at("char_end").get<std::size_t>();
  u.token_count = j.at("token_count").get<std::size_t>();
  u.text = j.at("text").get<std::string>();
  return u;
}

bool Corpus::Contains(std::string_view doc_id) const {
  return documents_.find(doc_id) != documents_.end();
}

void Corpus::Add(Document doc, std::vector<TextUnit> units) {
  if (Contains(doc.doc_id)) {
    throw Error(ErrorCode::kDuplicateDocument,
                "document already in corpus: " + doc.doc_id + " (" + doc.title + ")");
  }
  for (auto& u : units) {
    auto id = u.unit_id;
    units_.emplace(std::move(id), std::move(u));
  }
  auto id = doc.doc_id;
  documents_.emplace(std::move(id), std::move(doc));
}

Document const* Corpus::FindDocument(std::string_view doc_id) const {
  auto it = documents_.find(doc_id);
  return it == documents_.end() ? nullptr : &it->second;
}

TextUnit const* Corpus::FindUnit(std::string_view unit_id) const {
  auto it = units_.find(unit_id);
  return it == units_.end() ? nullptr : &it->second;
}

std::vector<Document const*> Corpus::Documents() const {
  std::vector<Document const*> out;
  out.reserve(documents_.size());
  for (auto const& [id, d] : documents_) out.push_back(&d);
  return out;
}

std::vector<TextUnit const*> Corpus::Units() const {
  std::vector<TextUnit const*> out;
  out.reserve(units_.size());
  for (auto const& [id, u] : units_) out.push_back(&u);
  return out;
}

void Corpus::Save(std::filesystem::path const& root) const {
  std::vector<Json> manifest;
  std::vector<Json> docs;
  for (auto const& [id, d] : documents_) {
    manifest.push_back(ManifestRecord(d));
    docs.push_back(DocumentToJson(d));
  }
  std::vector<Json> chunks;
  for (auto const& [id, u] : units_) chunks.push_back(UnitToJson(u));
  WriteJsonLines(root / kManifestFile, manifest);
  WriteJsonLines(root / kDocumentsFile, docs);
  WriteJsonLines(root / kChunksFile, chunks);
}

Corpus Corpus::Load(std::filesystem::path const& root) {
  Corpus corpus;
  for (auto const& j : ReadJsonLines(root / kDocumentsFile)) {
    auto d = DocumentFromJson(j);
    auto id = d.doc_id;
    corpus.documents_.emplace(std::move(id), std::move(d));
  }
  for (auto const& j : ReadJsonLines(root / kChunksFile)) {
    auto u = UnitFromJson(j);
    auto const* doc = corpus.FindDocument(u.doc_id);
    if (doc == nullptr || u.char_end > doc->body.size() || u.char_start >= u.char_end) {
      throw Error(ErrorCode::kStoreCorrupt, "chunk store references invalid span: " + u.unit_id);
    }
    auto id = u.unit_id;
    corpus.units_.emplace(std::move(id), std::move(u));
  }
  return corpus;
}

}  // namespace tracegraph
