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

#include <doctest.h>

#include "support.hpp"
#include "tracegraph/corpus.hpp"
#include "tracegraph/error.hpp"

using namespace tracegraph;

namespace {

std::vector<std::string> TokenTexts(std::string_view text) {
  std::vector<std::string> out;
  for (auto t : RuleTokenizer().Tokenize(text)) out.emplace_back(text.substr(t.begin, t.end - t.begin));
  return out;
}

std::string RandomBody(SplitMix64& rng) {
  static char const* const kWords[] = {"amyloid", "beta", "-", "tau,", "APOE4", "kinetics.",
                                       "in", "the", "CSF", "(SILK)", "\n", "ß-sheet"};
  std::string body;
  auto n = 1 + rng.Below(400);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!body.empty()) body += rng.Below(5) == 0 ? "  " : " ";
    body += kWords[rng.Below(12)];
  }
  return body;
}

}  // namespace

TEST_CASE("tokenizer splits words and punctuation") {
  CHECK(CountTokens("") == 0);
  CHECK(TokenTexts("amyloid-beta kinetics") ==
        std::vector<std::string>{"amyloid", "-", "beta", "kinetics"});
  CHECK(CountTokens("a.b c") == 4);
  CHECK(CountTokens("\xce\xb2-amyloid") == 3);
}

TEST_CASE("token count is monotone under concatenation") {
  SplitMix64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto a = RandomBody(rng);
    auto b = RandomBody(rng);
    CHECK(CountTokens(a + " " + b) >= std::max(CountTokens(a), CountTokens(b)));
  }
}

TEST_CASE("normalization") {
  CHECK(NormalizeText("a\r\nb\rc\td\x01") == "a\nb\nc d");
}

TEST_CASE("ingest derives a stable id and rejects empty bodies") {
  auto d1 = IngestDocument("Tau spreads.", "Tau");
  auto d2 = IngestDocument("Tau spreads.", "Tau");
  auto d3 = IngestDocument("Tau spreads.", "Other");
  CHECK(d1.doc_id == d2.doc_id);
  CHECK(d1.doc_id != d3.doc_id);
  CHECK(d1.token_count == 3);
  CHECK_THROWS_AS(IngestDocument(" \n\t ", "empty"), Error);
  try {
    IngestDocument("\r\n", "empty");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kEmptyDocument);
  }
}

TEST_CASE("chunk config validation") {
  auto d = IngestDocument("a b c", "t");
  CHECK_THROWS_AS(ChunkDocument(d, {0, 0}), Error);
  CHECK_THROWS_AS(ChunkDocument(d, {5, 5}), Error);
}

TEST_CASE("short document is one unit covering the body") {
  auto d = IngestDocument("APOE4 raises risk.", "t");
  auto units = ChunkDocument(d, {600, 100});
  REQUIRE(units.size() == 1);
  CHECK(units[0].char_start == 0);
  CHECK(units[0].char_end == d.body.size());
  CHECK(units[0].text == d.body);
  CHECK(units[0].unit_id == d.doc_id + ":000000");
}

TEST_CASE("chunking properties over random bodies") {
  SplitMix64 rng(11);
  for (int iter = 0; iter < 300; ++iter) {
    auto body = RandomBody(rng);
    auto doc = IngestDocument(body, "t" + std::to_string(iter));
    ChunkConfig config{static_cast<std::size_t>(2 + rng.Below(40)), 0};
    config.overlap_tokens = rng.Below(config.chunk_tokens);
    auto units = ChunkDocument(doc, config);
    REQUIRE(!units.empty());
    CHECK(units == ChunkDocument(doc, config));

    std::string rebuilt;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < units.size(); ++i) {
      auto const& u = units[i];
      CHECK(u.char_start < u.char_end);
      CHECK(u.text == doc.body.substr(u.char_start, u.char_end - u.char_start));
      CHECK(u.seq_index == i);
      CHECK(u.token_count == CountTokens(u.text));
      CHECK(u.char_start <= covered);
      covered = std::max(covered, u.char_end);
      if (i == 0) {
        CHECK(u.char_start == 0);
        rebuilt = u.text;
      } else {
        auto const& prev = units[i - 1];
        CHECK(u.char_start > prev.char_start);
        CHECK(u.char_start <= prev.char_end);
        auto overlap = doc.body.substr(u.char_start, prev.char_end - u.char_start);
        CHECK(CountTokens(overlap) <= config.overlap_tokens);
        rebuilt += u.text.substr(prev.char_end - u.char_start);
      }
    }
    CHECK(covered == doc.body.size());
    CHECK(rebuilt == doc.body);
  }
}

TEST_CASE("corpus store round trip and duplicate rejection") {
  testing::TempDir dir;
  Corpus corpus;
  auto doc = IngestDocument("Sleep lowers amyloid beta. Exercise helps.", "sleep");
  auto units = ChunkDocument(doc, {4, 1});
  corpus.Add(doc, units);
  try {
    corpus.Add(doc, units);
    FAIL("expected DuplicateDocument");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kDuplicateDocument);
  }
  corpus.Save(dir.path());
  auto back = Corpus::Load(dir.path());
  REQUIRE(back.DocumentCount() == 1);
  CHECK(back.UnitCount() == units.size());
  CHECK(back.FindDocument(doc.doc_id)->body == doc.body);
  for (auto const& u : units) CHECK(*back.FindUnit(u.unit_id) == u);
  auto ordered = back.Units();
  for (std::size_t i = 0; i < ordered.size(); ++i) CHECK(ordered[i]->seq_index == i);
}

TEST_CASE("corrupt chunk span is rejected on load") {
  testing::TempDir dir;
  Corpus corpus;
  auto doc = IngestDocument("Short body.", "x");
  corpus.Add(doc, ChunkDocument(doc, {600, 100}));
  corpus.Save(dir.path());
  auto chunks = ReadJsonLines(dir.path() / "chunks.jsonl");
  chunks[0]["char_end"] = 999;
  WriteJsonLines(dir.path() / "chunks.jsonl", chunks);
  try {
    Corpus::Load(dir.path());
    FAIL("expected StoreCorrupt");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kStoreCorrupt);
  }
}
