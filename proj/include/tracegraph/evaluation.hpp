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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tracegraph/llm.hpp"
#include "tracegraph/prompts.hpp"
#include "tracegraph/retrieval.hpp"

namespace tracegraph {

enum class Metric { kComprehensiveness, kDiversity, kEmpowerment, kDirectness };
std::string_view MetricName(Metric m);
/// Throws kUnknownMetric.
Metric ParseMetric(std::string_view name);
std::vector<Metric> AllMetrics();
std::string_view JudgeTemplateName(Metric m);

/// Fills the metric's judge template. `answer_a` takes the "Graph RAG"
/// slot and `answer_b` the "Chat LLM" slot. Empty texts are rejected.
std::string RenderJudgePrompt(PromptCatalog const& prompts, Metric metric,
                              std::string_view question, std::string_view answer_a,
                              std::string_view answer_b);

enum class Winner { kCandidate, kBaseline, kUnparsed };
std::string_view WinnerName(Winner w);

/// Which slot name the judge picked.
enum class Slot { kFirst, kSecond, kNone };

struct ParsedVerdict {
  Slot choice = Slot::kNone;
  std::string reasoning;
};

/// Total parser. "Graph RAG" folds to the first slot and "Chat LLM" to the
/// second, ignoring case, whitespace and punctuation. Anything else leaves
/// choice kNone and keeps the raw reply as reasoning.
ParsedVerdict ParseVerdict(std::string_view reply);

enum class OrderPolicy { kFixed, kBothOrders };
std::string_view OrderPolicyName(OrderPolicy p);
OrderPolicy ParseOrderPolicy(std::string_view name);

struct EvalQuestion {
  std::size_t index = 0;
  std::string text;
  std::optional<QuestionSubtype> subtype;

  std::string QueryId() const;
};

/// Line-delimited {index, text, subtype?}. Throws kIo for a missing file
/// and kStoreCorrupt for malformed records or duplicate indices.
std::vector<EvalQuestion> LoadQuestions(std::filesystem::path const& path);

struct JudgeVerdict {
  std::string question_id;
  Metric metric = Metric::kComprehensiveness;
  Winner winner = Winner::kUnparsed;
  std::string reasoning;
  /// true when the candidate occupied the first ("Graph RAG") slot.
  bool candidate_first = true;
  std::string method;
  std::string candidate_answer_id;
  std::string baseline_answer_id;

  Json ToJson() const;
  static JudgeVerdict FromJson(Json const& j);
};

struct PairwiseConfig {
  OrderPolicy order_policy = OrderPolicy::kBothOrders;
  std::vector<Metric> metrics = AllMetrics();
  std::size_t workers = 4;
  std::size_t judge_max_tokens = 1024;
};

struct PairwiseRun {
  std::vector<Answer> answers;
  std::vector<JudgeVerdict> verdicts;
};

/// Generates both answers once per question, then judges every metric (and
/// both slot orders when requested). Failures become unparsed verdicts.
PairwiseRun RunPairwise(std::vector<EvalQuestion> const& questions,
                        MethodDescriptor const& candidate, MethodDescriptor const& baseline,
                        RetrievalStores const& stores, Gateway const& answer_gateway,
                        Gateway const& judge_gateway, PromptCatalog const& prompts,
                        RetrievalConfig const& retrieval, PairwiseConfig const& config);

struct WinRateKey {
  std::string method;
  Metric metric = Metric::kComprehensiveness;
  std::string subtype;  // subtype name or "ALL"
  auto operator<=>(WinRateKey const&) const = default;
};

struct WinRateRow {
  std::size_t candidate_wins = 0;
  std::size_t baseline_wins = 0;
  std::size_t unparsed = 0;
  /// Absent when no verdict was parsed.
  std::optional<double> win_rate;
};

using WinRateTable = std::map<WinRateKey, WinRateRow>;

inline constexpr std::string_view kAllSubtypes = "ALL";

/// Aggregates by (method, metric, subtype) and (method, metric, ALL).
/// Questions without a subtype only count towards ALL.
WinRateTable WinRates(std::vector<JudgeVerdict> const& verdicts,
                      std::map<std::string, QuestionSubtype> const& subtypes);

std::vector<Json> WinRateRecords(WinRateTable const& table);
/// Aligned plain-text rendering.
std::string RenderWinRateTable(WinRateTable const& table);

struct CostScenario {
  std::map<std::size_t, std::size_t> community_counts;
  std::size_t avg_report_tokens = 500;
  double price_per_million_input = 0.0;
  std::size_t level_a = 0;
  std::size_t level_b = 0;
};

struct CostEstimate {
  std::size_t tokens_a = 0;
  std::size_t tokens_b = 0;
  double cost_a = 0.0;
  double cost_b = 0.0;
  double extra = 0.0;
};

/// Input-token cost of reading every report at or below each level.
/// Throws kInvalidArgument unless level_a >= level_b.
CostEstimate EstimateCost(CostScenario const& scenario);

}  // namespace tracegraph
