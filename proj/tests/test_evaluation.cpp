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

#include <algorithm>
#include <fstream>
#include <mutex>

#include "support.hpp"
#include "tracegraph/error.hpp"
#include "tracegraph/evaluation.hpp"

using namespace tracegraph;

namespace {

ErrorCode CodeOf(std::function<void()> const& fn) {
  try {
    fn();
  } catch (Error const& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

constexpr char kQuestion[] = "Describe the various isoforms of APOE.";
constexpr char kAnswerA[] = "APOE has three common isoforms: APOE2, APOE3 and APOE4.";
constexpr char kAnswerB[] = "APOE comes in several forms.";

std::vector<EvalQuestion> FourQuestions() {
  return {{1, "What is amyloid beta?", QuestionSubtype::kBackground},
          {2, "How is APOE4 linked to risk?", QuestionSubtype::kResults},
          {3, "Which tau species spread?", std::nullopt},
          {4, "How does sleep affect clearance?", QuestionSubtype::kOpenEnded}};
}

JudgeVerdict Verdict(std::string qid, Winner w, Metric m = Metric::kComprehensiveness) {
  JudgeVerdict v;
  v.question_id = std::move(qid);
  v.metric = m;
  v.winner = w;
  v.method = "graphrag-global(level=0,seed=0)";
  return v;
}

/// The judge always prefers whatever sits in the first slot.
std::shared_ptr<Gateway> FirstSlotJudge(std::shared_ptr<std::vector<std::string>> seen = nullptr) {
  auto mu = std::make_shared<std::mutex>();
  return testing::FnGateway([seen, mu](ChatRequest const& r) {
    if (seen) {
      std::lock_guard lock(*mu);
      seen->push_back(r.messages.back().text);
    }
    return std::string("<evaluation><reasoning>first is fuller</reasoning>"
                       "<choice>Graph RAG</choice></evaluation>");
  });
}

}  // namespace

TEST_CASE("metric names round trip") {
  for (auto m : AllMetrics()) CHECK(ParseMetric(MetricName(m)) == m);
  CHECK(ParseMetric("Diversity") == Metric::kDiversity);
  CHECK(CodeOf([] { ParseMetric("fluency"); }) == ErrorCode::kUnknownMetric);
  CHECK(AllMetrics().size() == 4);
}

TEST_CASE("judge prompts match the golden renderings byte for byte") {
  auto const& p = PromptCatalog::Default();
  auto dir = testing::FixtureDir() / "judge";
  CHECK(RenderJudgePrompt(p, Metric::kComprehensiveness, kQuestion, kAnswerA, kAnswerB) ==
        testing::ReadText(dir / "comprehensiveness.golden.txt"));
  CHECK(RenderJudgePrompt(p, Metric::kEmpowerment, kQuestion, kAnswerA, kAnswerB) ==
        testing::ReadText(dir / "empowerment.golden.txt"));
  for (auto m : AllMetrics()) {
    auto s = RenderJudgePrompt(p, m, kQuestion, kAnswerA, kAnswerB);
    CHECK(s.find(kAnswerA) < s.find(kAnswerB));
    CHECK(s.find("\"Graph RAG\" or \"Chat LLM\"") != std::string::npos);
    CHECK(s.find('{') == std::string::npos);
  }
  CHECK(CodeOf([&] { RenderJudgePrompt(p, Metric::kDiversity, kQuestion, " ", kAnswerB); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("verdict parsing is total") {
  auto v = ParseVerdict("<evaluation>\n<reasoning>\n more detail \n</reasoning>\n<choice>\nGraph RAG\n</choice>\n</evaluation>");
  CHECK(v.choice == Slot::kFirst);
  CHECK(v.reasoning == "more detail");
  CHECK(ParseVerdict("<CHOICE> chat llm. </CHOICE>").choice == Slot::kSecond);
  CHECK(ParseVerdict("<choice>\"Graph-RAG\"</choice>").choice == Slot::kFirst);
  auto none = ParseVerdict("I prefer the first one.");
  CHECK(none.choice == Slot::kNone);
  CHECK(none.reasoning == "I prefer the first one.");
  CHECK(ParseVerdict("<choice>both</choice>").choice == Slot::kNone);
  CHECK(ParseVerdict("<choice>Graph RAG").choice == Slot::kNone);
  CHECK(ParseVerdict("").choice == Slot::kNone);
  SplitMix64 rng(3);
  std::string alphabet = "<>/choiceGraphRAGChatLLM \n\"";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (auto n = rng.Below(40); n > 0; --n) s += alphabet[rng.Below(alphabet.size())];
    CHECK_NOTHROW(ParseVerdict(s));
  }
}

TEST_CASE("the question set loads with indices 1..70") {
  auto qs = LoadQuestions(testing::DataDir() / "questions.jsonl");
  REQUIRE(qs.size() == 70);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(qs[i].index == i + 1);
    CHECK_FALSE(qs[i].text.empty());
  }
  CHECK(qs[0].QueryId() == "q001");
  CHECK(qs[0].subtype == QuestionSubtype::kMethodological);
}

TEST_CASE("malformed question files are rejected") {
  testing::TempDir dir;
  auto write = [&](std::string const& body) {
    auto p = dir.path() / "q.jsonl";
    std::ofstream(p) << body;
    return p;
  };
  CHECK(CodeOf([&] { LoadQuestions(dir.path() / "missing.jsonl"); }) == ErrorCode::kIo);
  CHECK(CodeOf([&] { LoadQuestions(write("{\"index\":1,\"text\":\"a\"}\n{\"index\":1,\"text\":\"b\"}\n")); }) ==
        ErrorCode::kStoreCorrupt);
  CHECK(CodeOf([&] { LoadQuestions(write("{\"index\":1,\"text\":\"a\",\"subtype\":\"vague\"}\n")); }) ==
        ErrorCode::kStoreCorrupt);
  CHECK(CodeOf([&] { LoadQuestions(write("{\"index\":1}\n")); }) == ErrorCode::kStoreCorrupt);
  CHECK(LoadQuestions(write("{\"index\":7,\"text\":\"a\",\"subtype\":null}\n"))[0].index == 7);
}

TEST_CASE("pairwise runs emit one verdict per question, metric and order") {
  auto corpus = [] {
    Corpus c;
    auto doc = IngestDocument(testing::ReadText(testing::FixtureDir() / "corpus" / "02_apoe.txt"), "apoe");
    auto units = ChunkDocument(doc, {120, 20});
    c.Add(doc, units);
    return c;
  }();
  VectorIndex index(std::make_shared<HashingEmbedder>(), corpus);
  RetrievalStores stores{&corpus, nullptr, nullptr, nullptr, &index};
  auto cand = MethodDescriptor::Parse("vector");
  auto base = MethodDescriptor::Parse("direct");

  PairwiseConfig fixed;
  fixed.order_policy = OrderPolicy::kFixed;
  auto run = RunPairwise(FourQuestions(), cand, base, stores, *testing::RuleGateway(), *FirstSlotJudge(),
                         PromptCatalog::Default(), {}, fixed);
  CHECK(run.verdicts.size() == 16);
  CHECK(run.answers.size() == 8);
  for (auto const& v : run.verdicts) {
    CHECK(v.winner == Winner::kCandidate);
    CHECK(v.candidate_first);
    CHECK(v.reasoning == "first is fuller");
    CHECK(JudgeVerdict::FromJson(v.ToJson()).ToJson() == v.ToJson());
  }

  PairwiseConfig both;
  auto seen = std::make_shared<std::vector<std::string>>();
  auto run2 = RunPairwise(FourQuestions(), cand, base, stores, *testing::RuleGateway(),
                          *FirstSlotJudge(seen), PromptCatalog::Default(), {}, both);
  CHECK(run2.verdicts.size() == 32);
  CHECK(seen->size() == 32);
  std::size_t cand_wins = 0;
  for (auto const& v : run2.verdicts) cand_wins += v.winner == Winner::kCandidate;
  CHECK(cand_wins == 16);
  // position bias cancels out under both orders
  auto table = WinRates(run2.verdicts, {});
  for (auto const& [key, row] : table) CHECK(*row.win_rate == doctest::Approx(0.5));
}

TEST_CASE("answer failures become unparsed verdicts") {
  RetrievalStores none;
  PairwiseConfig cfg;
  cfg.order_policy = OrderPolicy::kFixed;
  cfg.metrics = {Metric::kDirectness};
  auto run = RunPairwise(FourQuestions(), MethodDescriptor::Parse("vector"), MethodDescriptor::Parse("direct"),
                         none, *testing::RuleGateway(), *FirstSlotJudge(), PromptCatalog::Default(), {}, cfg);
  REQUIRE(run.verdicts.size() == 4);
  for (auto const& v : run.verdicts) {
    CHECK(v.winner == Winner::kUnparsed);
    CHECK(v.reasoning.find("answer generation failed") == 0);
  }
}

TEST_CASE("win rates count decided verdicts only") {
  std::vector<JudgeVerdict> vs;
  for (int i = 0; i < 40; ++i) vs.push_back(Verdict("q001", Winner::kCandidate));
  for (int i = 0; i < 30; ++i) vs.push_back(Verdict("q002", Winner::kBaseline));
  for (int i = 0; i < 7; ++i) vs.push_back(Verdict("q003", Winner::kUnparsed));
  std::map<std::string, QuestionSubtype> subtypes{{"q001", QuestionSubtype::kResults},
                                                   {"q002", QuestionSubtype::kResults}};
  auto table = WinRates(vs, subtypes);
  auto const& all = table.at({vs[0].method, Metric::kComprehensiveness, "ALL"});
  CHECK(all.candidate_wins == 40);
  CHECK(all.baseline_wins == 30);
  CHECK(all.unparsed == 7);
  CHECK(std::abs(*all.win_rate - 40.0 / 70.0) < 1e-12);
  CHECK(table.at({vs[0].method, Metric::kComprehensiveness, "results"}).unparsed == 0);
  CHECK(table.size() == 2);

  auto only_unparsed = WinRates({Verdict("q9", Winner::kUnparsed)}, {});
  CHECK_FALSE(only_unparsed.begin()->second.win_rate.has_value());
  CHECK(WinRateRecords(only_unparsed)[0]["win_rate"].is_null());
  CHECK(RenderWinRateTable(table).find("0.571") != std::string::npos);
}

TEST_CASE("win rates do not depend on verdict order") {
  SplitMix64 rng(44);
  std::vector<JudgeVerdict> vs;
  for (int i = 0; i < 200; ++i) {
    auto m = AllMetrics()[rng.Below(4)];
    auto w = static_cast<Winner>(rng.Below(3));
    vs.push_back(Verdict("q00" + std::to_string(rng.Below(5)), w, m));
  }
  std::map<std::string, QuestionSubtype> subtypes{{"q001", QuestionSubtype::kResults},
                                                   {"q003", QuestionSubtype::kBackground}};
  auto expected = WinRateRecords(WinRates(vs, subtypes));
  for (int t = 0; t < 20; ++t) {
    DeterministicShuffle(vs, rng);
    CHECK(WinRateRecords(WinRates(vs, subtypes)) == expected);
  }
}

TEST_CASE("cost of reading every report up to a level") {
  CostScenario s;
  s.community_counts = {{0, 67}, {1, 298}, {2, 444}};
  s.avg_report_tokens = 500;
  s.price_per_million_input = 2.5;
  s.level_a = 2;
  s.level_b = 0;
  auto e = EstimateCost(s);
  // hand arithmetic: (67 + 298 + 444 - 67) * 500 tokens at 2.5 per million
  CHECK(e.tokens_a == 404500);
  CHECK(e.tokens_b == 33500);
  CHECK(e.extra == doctest::Approx(742.0 * 500 * 2.5 / 1e6).epsilon(1e-12));
  CHECK(e.extra >= 0.90);
  CHECK(e.extra <= 0.95);

  auto doubled = s;
  doubled.price_per_million_input = 5.0;
  CHECK(EstimateCost(doubled).extra == doctest::Approx(2 * e.extra));
  auto same = s;
  same.level_b = 2;
  CHECK(EstimateCost(same).extra == 0.0);
  auto bad = s;
  bad.level_a = 0;
  bad.level_b = 1;
  CHECK(CodeOf([&] { EstimateCost(bad); }) == ErrorCode::kInvalidArgument);
}
