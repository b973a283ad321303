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

#include "tracegraph/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <thread>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

/// Lower-cased letters and digits only.
std::string Fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out += static_cast<char>(std::tolower(u));
  }
  return out;
}

std::optional<std::string> Between(std::string_view text, std::string_view open,
                                   std::string_view close) {
  auto lower = ToLowerAscii(text);
  auto b = lower.find(open);
  if (b == std::string::npos) return std::nullopt;
  b += open.size();
  auto e = lower.find(close, b);
  if (e == std::string::npos) return std::nullopt;
  return std::string(text.substr(b, e - b));
}

}  // namespace

std::string_view MetricName(Metric m) {
  switch (m) {
    case Metric::kComprehensiveness: return "comprehensiveness";
    case Metric::kDiversity: return "diversity";
    case Metric::kEmpowerment: return "empowerment";
    case Metric::kDirectness: return "directness";
  }
  return "comprehensiveness";
}

Metric ParseMetric(std::string_view name) {
  auto lower = ToLowerAscii(name);
  for (auto m : AllMetrics()) {
    if (MetricName(m) == lower) return m;
  }
  throw Error(ErrorCode::kUnknownMetric, "unknown metric '" + std::string(name) + "'");
}

std::vector<Metric> AllMetrics() {
  return {Metric::kComprehensiveness, Metric::kDiversity, Metric::kEmpowerment,
          Metric::kDirectness};
}

std::string_view JudgeTemplateName(Metric m) {
  switch (m) {
    case Metric::kComprehensiveness: return PromptCatalog::kJudgeComprehensiveness;
    case Metric::kDiversity: return PromptCatalog::kJudgeDiversity;
    case Metric::kEmpowerment: return PromptCatalog::kJudgeEmpowerment;
    case Metric::kDirectness: return PromptCatalog::kJudgeDirectness;
  }
  throw Error(ErrorCode::kUnknownMetric, "unknown metric");
}

std::string RenderJudgePrompt(PromptCatalog const& prompts, Metric metric,
                              std::string_view question, std::string_view answer_a,
                              std::string_view answer_b) {
  if (Trim(question).empty() || Trim(answer_a).empty() || Trim(answer_b).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "judge prompt needs a question and two answers");
  }
  return prompts.Render(JudgeTemplateName(metric), {{"QUESTION", std::string(question)},
                                                    {"GRAPH_RAG_ANSWER", std::string(answer_a)},
                                                    {"CHAT_LLM_ANSWER", std::string(answer_b)}});
}

std::string_view WinnerName(Winner w) {
  switch (w) {
    case Winner::kCandidate: return "candidate";
    case Winner::kBaseline: return "baseline";
    case Winner::kUnparsed: return "unparsed";
  }
  return "unparsed";
}

ParsedVerdict ParseVerdict(std::string_view reply) {
  ParsedVerdict v;
  auto choice = Between(reply, "<choice>", "</choice>");
  if (choice) {
    auto folded = Fold(*choice);
    if (folded == "graphrag") v.choice = Slot::kFirst;
    if (folded == "chatllm") v.choice = Slot::kSecond;
  }
  if (v.choice == Slot::kNone) {
    v.reasoning = std::string(reply);
    return v;
  }
  auto reasoning = Between(reply, "<reasoning>", "</reasoning>");
  v.reasoning = reasoning ? Trim(*reasoning) : std::string();
  return v;
}

std::string_view OrderPolicyName(OrderPolicy p) {
  return p == OrderPolicy::kFixed ? "fixed" : "both_orders";
}

OrderPolicy ParseOrderPolicy(std::string_view name) {
  if (name == "fixed") return OrderPolicy::kFixed;
  if (name == "both_orders" || name == "both-orders") return OrderPolicy::kBothOrders;
  throw Error(ErrorCode::kInvalidArgument, "unknown order policy '" + std::string(name) + "'");
}

std::string EvalQuestion::QueryId() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%03zu", index);
  return buf;
}

std::vector<EvalQuestion> LoadQuestions(std::filesystem::path const& path) {
  std::vector<EvalQuestion> out;
  std::set<std::size_t> seen;
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "question file not found: " + path.string());
  }
  for (auto const& j : ReadJsonLines(path)) {
    EvalQuestion q;
    try {
      q.index = j.at("index").get<std::size_t>();
      q.text = j.at("text").get<std::string>();
      if (j.contains("subtype") && !j.at("subtype").is_null()) {
        auto name = j.at("subtype").get<std::string>();
        q.subtype = ParseSubtype(name);
        if (!q.subtype) {
          throw Error(ErrorCode::kStoreCorrupt, "question " + std::to_string(q.index) +
                                                    " has unknown subtype '" + name + "'");
        }
      }
    } catch (Json::exception const& e) {
      throw Error(ErrorCode::kStoreCorrupt, path.string() + ": " + e.what());
    }
    if (Trim(q.text).empty()) {
      throw Error(ErrorCode::kStoreCorrupt, "question " + std::to_string(q.index) + " is empty");
    }
    if (!seen.insert(q.index).second) {
      throw Error(ErrorCode::kStoreCorrupt, "duplicate question index " + std::to_string(q.index));
    }
    out.push_back(std::move(q));
  }
  return out;
}

Json JudgeVerdict::ToJson() const {
  Json j;
  j["question_id"] = question_id;
  j["metric"] = MetricName(metric);
  j["winner"] = WinnerName(winner);
  j["order_used"] = candidate_first ? "candidate_first" : "baseline_first";
  j["method"] = method;
  j["candidate_answer_id"] = candidate_answer_id;
  j["baseline_answer_id"] = baseline_answer_id;
  j["reasoning"] = reasoning;
  return j;
}

JudgeVerdict JudgeVerdict::FromJson(Json const& j) {
  JudgeVerdict v;
  v.question_id = j.at("question_id").get<std::string>();
  v.metric = ParseMetric(j.at("metric").get<std::string>());
  auto w = j.at("winner").get<std::string>();
  v.winner = w == "candidate" ? Winner::kCandidate
             : w == "baseline" ? Winner::kBaseline
                               : Winner::kUnparsed;
  v.candidate_first = j.at("order_used").get<std::string>() == "candidate_first";
  v.method = j.at("method").get<std::string>();
  v.candidate_answer_id = j.at("candidate_answer_id").get<std::string>();
  v.baseline_answer_id = j.at("baseline_answer_id").get<std::string>();
  v.reasoning = j.at("reasoning").get<std::string>();
  return v;
}

PairwiseRun RunPairwise(std::vector<EvalQuestion> const& questions,
                        MethodDescriptor const& candidate, MethodDescriptor const& baseline,
                        RetrievalStores const& stores, Gateway const& answer_gateway,
                        Gateway const& judge_gateway, PromptCatalog const& prompts,
                        RetrievalConfig const& retrieval, PairwiseConfig const& config) {
  auto const cand = ResolveDescriptor(candidate, retrieval);
  auto const base = ResolveDescriptor(baseline, retrieval);
  std::string const label = cand.Label();
  std::vector<bool> orders{true};
  if (config.order_policy == OrderPolicy::kBothOrders) orders.push_back(false);

  struct PerQuestion {
    std::vector<Answer> answers;
    std::vector<JudgeVerdict> verdicts;
  };
  std::vector<PerQuestion> slots(questions.size());

  auto run_one = [&](std::size_t qi) {
    auto const& q = questions[qi];
    auto& slot = slots[qi];
    auto query = Query::Make(q.text, q.QueryId(), q.subtype);

    std::optional<Answer> ca;
    std::optional<Answer> ba;
    std::string failure;
    try {
      ca = RunMethod(cand, query, stores, answer_gateway, prompts, retrieval);
      ba = RunMethod(base, query, stores, answer_gateway, prompts, retrieval);
    } catch (std::exception const& e) {
      failure = std::string("answer generation failed: ") + e.what();
    }
    if (ca) slot.answers.push_back(*ca);
    if (ba) slot.answers.push_back(*ba);

    for (auto metric : config.metrics) {
      for (bool candidate_first : orders) {
        JudgeVerdict v;
        v.question_id = q.QueryId();
        v.metric = metric;
        v.candidate_first = candidate_first;
        v.method = label;
        v.candidate_answer_id = ca ? ca->answer_id : "";
        v.baseline_answer_id = ba ? ba->answer_id : "";
        if (!failure.empty()) {
          v.reasoning = failure;
          slot.verdicts.push_back(std::move(v));
          continue;
        }
        auto const& first = candidate_first ? ca->text : ba->text;
        auto const& second = candidate_first ? ba->text : ca->text;
        try {
          auto prompt = RenderJudgePrompt(prompts, metric, q.text, first, second);
          auto request = MakeUserRequest(std::move(prompt), task::kJudge,
                                         {std::string(MetricName(metric)), q.text, first, second});
          request.max_output_tokens = config.judge_max_tokens;
          auto parsed = ParseVerdict(judge_gateway.Complete(request).text);
          v.reasoning = std::move(parsed.reasoning);
          if (parsed.choice == Slot::kFirst) {
            v.winner = candidate_first ? Winner::kCandidate : Winner::kBaseline;
          } else if (parsed.choice == Slot::kSecond) {
            v.winner = candidate_first ? Winner::kBaseline : Winner::kCandidate;
          }
        } catch (std::exception const& e) {
          v.reasoning = std::string("judge call failed: ") + e.what();
        }
        slot.verdicts.push_back(std::move(v));
      }
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < questions.size(); i = next++) run_one(i);
  };
  {
    std::size_t const w = std::max<std::size_t>(1, std::min(config.workers, questions.size()));
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < w; ++k) pool.emplace_back(worker);
    worker();
  }

  PairwiseRun run;
  for (auto& s : slots) {
    for (auto& a : s.answers) run.answers.push_back(std::move(a));
    for (auto& v : s.verdicts) run.verdicts.push_back(std::move(v));
  }
  return run;
}

WinRateTable WinRates(std::vector<JudgeVerdict> const& verdicts,
                      std::map<std::string, QuestionSubtype> const& subtypes) {
  WinRateTable table;
  auto count = [](WinRateRow& row, Winner w) {
    if (w == Winner::kCandidate) ++row.candidate_wins;
    if (w == Winner::kBaseline) ++row.baseline_wins;
    if (w == Winner::kUnparsed) ++row.unparsed;
  };
  for (auto const& v : verdicts) {
    count(table[{v.method, v.metric, std::string(kAllSubtypes)}], v.winner);
    auto it = subtypes.find(v.question_id);
    if (it != subtypes.end()) {
      count(table[{v.method, v.metric, std::string(SubtypeName(it->second))}], v.winner);
    }
  }
  for (auto& [key, row] : table) {
    std::size_t const decided = row.candidate_wins + row.baseline_wins;
    if (decided > 0) row.win_rate = static_cast<double>(row.candidate_wins) / decided;
  }
  return table;
}

std::vector<Json> WinRateRecords(WinRateTable const& table) {
  std::vector<Json> out;
  for (auto const& [key, row] : table) {
    Json j;
    j["method"] = key.method;
    j["metric"] = MetricName(key.metric);
    j["subtype"] = key.subtype;
    j["candidate_wins"] = row.candidate_wins;
    j["baseline_wins"] = row.baseline_wins;
    j["unparsed"] = row.unparsed;
    j["win_rate"] = row.win_rate ? Json(*row.win_rate) : Json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

std::string RenderWinRateTable(WinRateTable const& table) {
  std::vector<std::vector<std::string>> rows{
      {"method", "metric", "subtype", "cand", "base", "unparsed", "win_rate"}};
  for (auto const& [key, row] : table) {
    std::string rate = "-";
    if (row.win_rate) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", *row.win_rate);
      rate = buf;
    }
    rows.push_back({key.method, std::string(MetricName(key.metric)), key.subtype,
                    std::to_string(row.candidate_wins), std::to_string(row.baseline_wins),
                    std::to_string(row.unparsed), rate});
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (auto const& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (auto const& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) line += "  ";
      // text columns left-aligned, counts right-aligned
      std::string pad(width[c] - r[c].size(), ' ');
      line += c < 3 ? r[c] + pad : pad + r[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

CostEstimate EstimateCost(CostScenario const& s) {
  if (s.level_a < s.level_b) {
    throw Error(ErrorCode::kInvalidArgument, "level_a must be at least level_b");
  }
  auto reports_upto = [&](std::size_t level) {
    std::size_t n = 0;
    for (auto const& [l, count] : s.community_counts) {
      if (l <= level) n += count;
    }
    return n;
  };
  CostEstimate e;
  e.tokens_a = s.avg_report_tokens * reports_upto(s.level_a);
  e.tokens_b = s.avg_report_tokens * reports_upto(s.level_b);
  e.cost_a = static_cast<double>(e.tokens_a) * s.price_per_million_input / 1e6;
  e.cost_b = static_cast<double>(e.tokens_b) * s.price_per_million_input / 1e6;
  e.extra = e.cost_a - e.cost_b;
  return e;
}

}  // namespace tracegraph
