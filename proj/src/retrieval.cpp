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

#include "tracegraph/retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

constexpr char kNoAnswerText[] =
    "I am sorry but I am unable to answer this question given the provided data.";

template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::size_t const w = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::jthread> pool;
  for (std::size_t k = 1; k < w; ++k) pool.emplace_back(worker);
  worker();
}

/// Extracts the outermost {...} block, tolerating code fences and chatter.
std::optional<Json> JsonBlock(std::string_view reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  try {
    auto j = Json::parse(reply.substr(open, close - open + 1));
    if (j.is_object()) return j;
  } catch (Json::parse_error const&) {
  }
  return std::nullopt;
}

std::vector<std::string> LowerTokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto const& t : DefaultTokenizer().Tokenize(text)) {
    out.push_back(ToLowerAscii(text.substr(t.begin, t.end - t.begin)));
  }
  return out;
}

bool ContainsRun(std::vector<std::string> const& hay, std::vector<std::string> const& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

/// Keeps elements in order while the rendered context stays within budget.
std::vector<ContextElement> FitBudget(std::vector<ContextElement> elements, std::size_t budget,
                                      std::vector<std::string>& diagnostics) {
  std::vector<ContextElement> out;
  std::size_t used = 0;
  std::size_t dropped = 0;
  for (auto& e : elements) {
    std::size_t cost = CountTokens(ElementHeader(out.size(), e)) + CountTokens(e.text);
    if (used + cost > budget) {
      ++dropped;
      continue;
    }
    used += cost;
    out.push_back(std::move(e));
  }
  if (dropped > 0) {
    diagnostics.push_back(std::to_string(dropped) + " context elements dropped by the " +
                          std::to_string(budget) + "-token budget");
  }
  return out;
}

std::string AnswerId(Answer const& a) {
  return "ans-" + Sha256Hex(a.query_id + "\n" + a.method.Label() + "\n" + a.text).substr(0, 16);
}

Answer Finish(Answer a) {
  a.answer_id = AnswerId(a);
  return a;
}

Answer StartAnswer(Query const& query, MethodDescriptor const& method) {
  Answer a;
  a.query_id = query.query_id;
  a.query_text = query.text;
  a.method = method;
  return a;
}

/// Renders `template_name` over the elements and asks for the final answer.
void AnswerFromContext(Answer& a, std::string_view template_name, Gateway const& gateway,
                       PromptCatalog const& prompts, RetrievalConfig const& config) {
  std::vector<std::string> payload{a.query_text};
  for (auto const& e : a.context.elements) payload.push_back(e.text);
  auto prompt = prompts.Render(template_name,
                               {{"context", RenderContext(a.context.elements)},
                                {"query", a.query_text}});
  auto request = MakeUserRequest(std::move(prompt), task::kAnswer, std::move(payload));
  request.max_output_tokens = config.answer_max_tokens;
  a.text = Trim(gateway.Complete(request, a.usage).text);
}

/// Direct answer that keeps the original method label and marks the fallback.
Answer NoMatchFallback(Answer a, Gateway const& gateway, PromptCatalog const& prompts,
                       RetrievalConfig const& config) {
  auto direct = DirectAnswer(Query{a.query_id, a.query_text, std::nullopt}, gateway, prompts, config);
  a.text = direct.text;
  a.usage.Add(direct.usage);
  a.context = MakeBundle({});
  a.fallback = std::string(kNoMatchMarker);
  a.diagnostics.push_back("no entity or relation matched the query keywords");
  return Finish(std::move(a));
}

bool ByDegreeThenName(KnowledgeGraph const& graph, std::string const& a, std::string const& b) {
  auto da = graph.Degree(a);
  auto db = graph.Degree(b);
  if (da != db) return da > db;
  return a < b;
}

std::string ReportRef(std::size_t id) { return "report:" + std::to_string(id); }

}  // namespace

// ---------------------------------------------------------------------------
// Basic types

std::string_view SubtypeName(QuestionSubtype s) {
  switch (s) {
    case QuestionSubtype::kMethodological: return "methodological";
    case QuestionSubtype::kResults: return "results";
    case QuestionSubtype::kBackground: return "background";
    case QuestionSubtype::kOpenEnded: return "open-ended";
  }
  return "open-ended";
}

std::optional<QuestionSubtype> ParseSubtype(std::string_view name) {
  for (auto s : {QuestionSubtype::kMethodological, QuestionSubtype::kResults,
                 QuestionSubtype::kBackground, QuestionSubtype::kOpenEnded}) {
    if (SubtypeName(s) == name) return s;
  }
  return std::nullopt;
}

Query Query::Make(std::string text, std::string query_id, std::optional<QuestionSubtype> subtype) {
  if (Trim(text).empty()) throw Error(ErrorCode::kInvalidArgument, "query text is empty");
  if (query_id.empty()) query_id = "q-" + Sha256Hex(text).substr(0, 12);
  return Query{std::move(query_id), std::move(text), subtype};
}

std::string_view ContextKindName(ContextKind kind) {
  switch (kind) {
    case ContextKind::kReport: return "report";
    case ContextKind::kEntity: return "entity";
    case ContextKind::kRelation: return "relation";
    case ContextKind::kChunk: return "chunk";
  }
  return "chunk";
}

ContextKind ParseContextKind(std::string_view name) {
  for (auto k : {ContextKind::kReport, ContextKind::kEntity, ContextKind::kRelation,
                 ContextKind::kChunk}) {
    if (ContextKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown context kind '" + std::string(name) + "'");
}

Json ContextElement::ToJson() const {
  Json j;
  j["kind"] = ContextKindName(kind);
  j["ref_id"] = ref_id;
  j["text"] = text;
  j["source_unit_ids"] = source_unit_ids;
  j["score"] = score ? Json(*score) : Json(nullptr);
  return j;
}

ContextElement ContextElement::FromJson(Json const& j) {
  ContextElement e;
  e.kind = ParseContextKind(j.at("kind").get<std::string>());
  e.ref_id = j.at("ref_id").get<std::string>();
  e.text = j.at("text").get<std::string>();
  e.source_unit_ids = j.at("source_unit_ids").get<std::set<std::string>>();
  if (j.contains("score") && !j.at("score").is_null()) e.score = j.at("score").get<double>();
  return e;
}

ContextElement ReportElement(CommunityReport const& report) {
  return {ContextKind::kReport, ReportRef(report.community_id), report.Text(),
          report.source_unit_ids, std::nullopt};
}

ContextElement EntityElement(Entity const& entity) {
  return {ContextKind::kEntity, "entity:" + entity.canonical_name,
          entity.canonical_name + " (" + entity.type_label + "): " + entity.Description(),
          entity.source_unit_ids, std::nullopt};
}

ContextElement RelationElement(Relation const& relation) {
  return {ContextKind::kRelation, "relation:" + relation.source_name + "|" + relation.target_name,
          relation.source_name + " -- " + relation.target_name + ": " + relation.Description(),
          relation.source_unit_ids, std::nullopt};
}

ContextElement ChunkElement(TextUnit const& unit) {
  return {ContextKind::kChunk, "chunk:" + unit.unit_id, unit.text, {unit.unit_id}, std::nullopt};
}

Json ContextBundle::ToJson() const {
  Json j;
  j["token_count"] = token_count;
  j["elements"] = Json::array();
  for (auto const& e : elements) j["elements"].push_back(e.ToJson());
  return j;
}

ContextBundle ContextBundle::FromJson(Json const& j) {
  ContextBundle b;
  b.token_count = j.at("token_count").get<std::size_t>();
  for (auto const& e : j.at("elements")) b.elements.push_back(ContextElement::FromJson(e));
  return b;
}

std::string ElementHeader(std::size_t index, ContextElement const& element) {
  return "[" + std::to_string(index + 1) + "] " + std::string(ContextKindName(element.kind)) + " " +
         element.ref_id;
}

std::string RenderContext(std::vector<ContextElement> const& elements) {
  std::string out;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    out += ElementHeader(i, elements[i]);
    out += '\n';
    out += elements[i].text;
    out += "\n\n";
  }
  return out;
}

ContextBundle MakeBundle(std::vector<ContextElement> elements) {
  ContextBundle b;
  b.token_count = CountTokens(RenderContext(elements));
  b.elements = std::move(elements);
  return b;
}

std::string_view LightModeName(LightMode m) {
  switch (m) {
    case LightMode::kLocal: return "local";
    case LightMode::kGlobal: return "global";
    case LightMode::kHybrid: return "hybrid";
  }
  return "hybrid";
}

std::string MethodDescriptor::Name() const {
  switch (family) {
    case MethodFamily::kGraphRagGlobal: return "graphrag-global";
    case MethodFamily::kGraphRagLocal: return "graphrag-local";
    case MethodFamily::kLightRag:
      return "lightrag-" + std::string(LightModeName(mode.value_or(LightMode::kHybrid)));
    case MethodFamily::kVector: return "vector";
    case MethodFamily::kDirect: return "direct";
  }
  return "direct";
}

std::string MethodDescriptor::Label() const {
  std::vector<std::string> parts;
  if (level) parts.push_back("level=" + std::to_string(*level));
  if (k) parts.push_back("k=" + std::to_string(*k));
  if (seed) parts.push_back("seed=" + std::to_string(*seed));
  if (hop_limit) parts.push_back("hops=" + std::to_string(*hop_limit));
  std::string out = Name();
  if (parts.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + ')';
}

MethodDescriptor MethodDescriptor::Parse(std::string_view name) {
  MethodDescriptor d;
  if (name == "graphrag-global") {
    d.family = MethodFamily::kGraphRagGlobal;
  } else if (name == "graphrag-local") {
    d.family = MethodFamily::kGraphRagLocal;
  } else if (name == "lightrag-local" || name == "lightrag-global" || name == "lightrag-hybrid") {
    d.family = MethodFamily::kLightRag;
    auto m = name.substr(9);
    d.mode = m == "local" ? LightMode::kLocal : m == "global" ? LightMode::kGlobal : LightMode::kHybrid;
  } else if (name == "vector") {
    d.family = MethodFamily::kVector;
  } else if (name == "direct") {
    d.family = MethodFamily::kDirect;
  } else {
    throw Error(ErrorCode::kUnknownMethod, "unknown method '" + std::string(name) + "'");
  }
  return d;
}

std::vector<std::string> MethodDescriptor::KnownNames() {
  return {"direct",         "vector",          "graphrag-global", "graphrag-local",
          "lightrag-local", "lightrag-global", "lightrag-hybrid"};
}

Json MethodDescriptor::ToJson() const {
  Json j;
  j["name"] = Name();
  if (level) j["level"] = *level;
  if (k) j["k"] = *k;
  if (seed) j["seed"] = *seed;
  if (hop_limit) j["hop_limit"] = *hop_limit;
  return j;
}

MethodDescriptor MethodDescriptor::FromJson(Json const& j) {
  auto d = Parse(j.at("name").get<std::string>());
  if (j.contains("level")) d.level = j.at("level").get<std::size_t>();
  if (j.contains("k")) d.k = j.at("k").get<std::size_t>();
  if (j.contains("seed")) d.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("hop_limit")) d.hop_limit = j.at("hop_limit").get<std::size_t>();
  return d;
}

Json Answer::ToJson() const {
  Json j;
  j["answer_id"] = answer_id;
  j["query_id"] = query_id;
  j["query_text"] = query_text;
  j["method"] = method.ToJson();
  j["text"] = text;
  j["context"] = context.ToJson();
  j["usage"] = usage.ToJson();
  j["fallback"] = fallback ? Json(*fallback) : Json(nullptr);
  j["intermediate"] = Json::array();
  for (auto const& ia : intermediate) {
    j["intermediate"].push_back(
        {{"batch_index", ia.batch_index}, {"text", ia.text}, {"score", ia.relevance_score}});
  }
  j["diagnostics"] = diagnostics;
  return j;
}

Answer Answer::FromJson(Json const& j) {
  Answer a;
  a.answer_id = j.at("answer_id").get<std::string>();
  a.query_id = j.at("query_id").get<std::string>();
  a.query_text = j.at("query_text").get<std::string>();
  a.method = MethodDescriptor::FromJson(j.at("method"));
  a.text = j.at("text").get<std::string>();
  a.context = ContextBundle::FromJson(j.at("context"));
  a.usage = UsageTotals::FromJson(j.at("usage"));
  if (!j.at("fallback").is_null()) a.fallback = j.at("fallback").get<std::string>();
  for (auto const& ia : j.at("intermediate")) {
    a.intermediate.push_back({ia.at("batch_index").get<std::size_t>(),
                              ia.at("text").get<std::string>(), ia.at("score").get<int>()});
  }
  a.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return a;
}

// ---------------------------------------------------------------------------
// Global search

std::vector<std::vector<std::size_t>> PackBatches(std::vector<std::size_t> const& token_counts,
                                                  std::size_t budget,
                                                  std::vector<std::string>* diagnostics) {
  std::vector<std::vector<std::size_t>> batches;
  std::size_t used = 0;
  for (std::size_t i = 0; i < token_counts.size(); ++i) {
    std::size_t const t = token_counts[i];
    if (t > budget) {
      if (diagnostics) {
        diagnostics->push_back("item " + std::to_string(i) + " has " + std::to_string(t) +
                               " tokens, over the batch budget of " + std::to_string(budget));
      }
      batches.push_back({i});
      used = budget;  // nothing else joins an oversize batch
      continue;
    }
    if (batches.empty() || used + t > budget) {
      batches.push_back({i});
      used = t;
    } else {
      batches.back().push_back(i);
      used += t;
    }
  }
  return batches;
}

std::string RenderMapPrompt(PromptCatalog const& prompts, std::string_view query,
                            std::vector<ContextElement> const& batch) {
  return prompts.Render(PromptCatalog::kMap,
                        {{"context", RenderContext(batch)}, {"query", std::string(query)}});
}

std::string RenderReducePrompt(PromptCatalog const& prompts, std::string_view query,
                               std::vector<IntermediateAnswer> const& answers) {
  std::string block;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    block += "----Analyst " + std::to_string(i + 1) + "----\nImportance Score: " +
             std::to_string(answers[i].relevance_score) + "\n" + answers[i].text + "\n\n";
  }
  return prompts.Render(PromptCatalog::kReduce,
                        {{"intermediate_answers", block}, {"query", std::string(query)}});
}

IntermediateAnswer ParseMapReply(std::string_view reply, std::size_t batch_index,
                                 std::string* diagnostic) {
  IntermediateAnswer out{batch_index, {}, 0};
  auto fail = [&](std::string why) {
    if (diagnostic) *diagnostic = "batch " + std::to_string(batch_index) + ": " + why;
    return out;
  };
  auto j = JsonBlock(reply);
  if (!j) return fail("map reply is not a JSON object");
  if (j->contains("answer") && (*j)["answer"].is_string()) {
    out.text = (*j)["answer"].get<std::string>();
  } else {
    return fail("map reply has no answer string");
  }
  auto const& s = (*j).contains("score") ? (*j)["score"] : Json(nullptr);
  double score = 0;
  if (s.is_number()) {
    score = s.get<double>();
  } else if (s.is_string()) {
    try {
      score = std::stod(s.get<std::string>());
    } catch (std::exception const&) {
      return fail("map reply score is not numeric");
    }
  } else {
    return fail("map reply has no score");
  }
  if (!std::isfinite(score)) return fail("map reply score is not finite");
  out.relevance_score = static_cast<int>(std::clamp(std::lround(score), 0L, 100L));
  return out;
}

Answer GlobalSearch(Query const& query, std::vector<CommunityReport> const& reports,
                    std::size_t level, Gateway const& gateway, PromptCatalog const& prompts,
                    RetrievalConfig const& config) {
  MethodDescriptor method;
  method.family = MethodFamily::kGraphRagGlobal;
  method.level = level;
  method.seed = config.seed;
  Answer a = StartAnswer(query, method);

  auto eligible = ReportsAtOrBelow(reports, level);
  if (eligible.empty()) {
    throw Error(ErrorCode::kNoContext,
                "no community reports at or below level " + std::to_string(level));
  }
  std::sort(eligible.begin(), eligible.end(), [](auto const& x, auto const& y) {
    return std::tie(x.level, x.community_id) < std::tie(y.level, y.community_id);
  });
  SplitMix64 rng(config.seed);
  DeterministicShuffle(eligible, rng);

  std::vector<std::size_t> sizes;
  for (auto const& r : eligible) sizes.push_back(CountTokens(r.Text()));
  auto batches = PackBatches(sizes, config.batch_token_budget, &a.diagnostics);

  std::vector<IntermediateAnswer> mapped(batches.size());
  std::vector<UsageTotals> usage(batches.size());
  std::vector<std::string> notes(batches.size());
  std::vector<std::exception_ptr> errors(batches.size());
  ParallelFor(batches.size(), config.workers, [&](std::size_t b) {
    std::vector<ContextElement> elements;
    std::vector<std::string> payload{query.text};
    for (auto i : batches[b]) {
      elements.push_back(ReportElement(eligible[i]));
      payload.push_back(elements.back().text);
    }
    auto request = MakeUserRequest(RenderMapPrompt(prompts, query.text, elements), task::kMap,
                                   std::move(payload));
    request.max_output_tokens = config.map_max_tokens;
    try {
      auto reply = gateway.Complete(request, usage[b]);
      mapped[b] = ParseMapReply(reply.text, b, &notes[b]);
    } catch (...) {
      errors[b] = std::current_exception();
    }
  });
  for (std::size_t b = 0; b < batches.size(); ++b) {
    a.usage.Add(usage[b]);
    if (!notes[b].empty()) a.diagnostics.push_back(notes[b]);
    if (errors[b]) std::rethrow_exception(errors[b]);
  }

  std::vector<IntermediateAnswer> kept;
  for (auto const& m : mapped) {
    if (m.relevance_score > 0) kept.push_back(m);
  }
  std::stable_sort(kept.begin(), kept.end(), [](auto const& x, auto const& y) {
    return x.relevance_score > y.relevance_score;
  });
  a.intermediate = kept;

  std::vector<ContextElement> context;
  for (auto const& m : kept) {
    for (auto i : batches[m.batch_index]) {
      auto e = ReportElement(eligible[i]);
      e.score = m.relevance_score;
      context.push_back(std::move(e));
    }
  }
  a.context = MakeBundle(std::move(context));

  if (kept.empty()) {
    a.text = kNoAnswerText;
    a.diagnostics.push_back("every batch scored 0; reduce skipped");
    return Finish(std::move(a));
  }
  std::vector<std::string> payload{query.text};
  for (auto const& m : kept) payload.push_back(m.text);
  auto request = MakeUserRequest(RenderReducePrompt(prompts, query.text, kept), task::kReduce,
                                 std::move(payload));
  request.max_output_tokens = config.answer_max_tokens;
  a.text = Trim(gateway.Complete(request, a.usage).text);
  return Finish(std::move(a));
}

// ---------------------------------------------------------------------------
// Keywords and graph-local retrieval

Keywords ParseKeywords(std::string_view reply) {
  Keywords k;
  auto j = JsonBlock(reply);
  if (!j) {
    k.diagnostics.push_back("keyword reply is not a JSON object");
    return k;
  }
  auto read = [&](char const* key, std::vector<std::string>& out) {
    if (!j->contains(key) || !(*j)[key].is_array()) {
      k.diagnostics.push_back(std::string("keyword reply lacks ") + key);
      return;
    }
    for (auto const& v : (*j)[key]) {
      if (!v.is_string()) {
        k.diagnostics.push_back(std::string("non-string entry in ") + key);
        continue;
      }
      auto s = CollapseWhitespace(v.get<std::string>());
      if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  };
  read("low_level_keywords", k.low_level);
  read("high_level_keywords", k.high_level);
  return k;
}

Keywords LightKeywords(Query const& query, Gateway const& gateway, PromptCatalog const& prompts,
                       UsageTotals* usage) {
  auto request = MakeUserRequest(prompts.Render(PromptCatalog::kKeywords, {{"query", query.text}}),
                                 task::kKeywords, {query.text});
  UsageTotals local;
  auto reply = gateway.Complete(request, usage ? *usage : local);
  return ParseKeywords(reply.text);
}

int MatchSpecificity(std::string_view name, std::string_view keyword) {
  auto a = LowerTokens(name);
  auto b = LowerTokens(keyword);
  if (a.empty() || b.empty()) return 0;
  if (a == b) return 2;
  return ContainsRun(a, b) || ContainsRun(b, a) ? 1 : 0;
}

Answer LocalSearch(Query const& query, KnowledgeGraph const& graph,
                   std::vector<Community> const& communities,
                   std::vector<CommunityReport> const& reports, Gateway const& gateway,
                   PromptCatalog const& prompts, RetrievalConfig const& config) {
  MethodDescriptor method;
  method.family = MethodFamily::kGraphRagLocal;
  method.k = config.top_k;
  Answer a = StartAnswer(query, method);

  auto keywords = LightKeywords(query, gateway, prompts, &a.usage);
  a.diagnostics.insert(a.diagnostics.end(), keywords.diagnostics.begin(),
                       keywords.diagnostics.end());
  std::vector<std::string> all = keywords.low_level;
  all.insert(all.end(), keywords.high_level.begin(), keywords.high_level.end());

  struct Scored {
    int specificity;
    std::string const* name;
  };
  std::vector<Scored> matched;
  for (auto const& [name, e] : graph.entities()) {
    int best = 0;
    for (auto const& kw : all) best = std::max(best, MatchSpecificity(name, kw));
    if (best > 0) matched.push_back({best, &name});
  }
  if (matched.empty()) return NoMatchFallback(std::move(a), gateway, prompts, config);
  std::sort(matched.begin(), matched.end(), [&](Scored const& x, Scored const& y) {
    if (x.specificity != y.specificity) return x.specificity > y.specificity;
    return ByDegreeThenName(graph, *x.name, *y.name);
  });
  if (matched.size() > config.top_k) matched.resize(config.top_k);

  std::vector<ContextElement> elements;
  std::set<std::string> chosen;
  for (auto const& m : matched) {
    chosen.insert(*m.name);
    auto e = EntityElement(*graph.FindEntity(*m.name));
    e.score = m.specificity;
    elements.push_back(std::move(e));
  }

  std::map<EntityPair, Relation const*> incident;
  for (auto const& name : chosen) {
    for (auto const* r : graph.IncidentRelations(name)) {
      incident.emplace(MakePair(r->source_name, r->target_name), r);
    }
  }
  std::vector<Relation const*> rels;
  for (auto const& [p, r] : incident) rels.push_back(r);
  std::stable_sort(rels.begin(), rels.end(),
                   [](auto const* x, auto const* y) { return x->Weight() > y->Weight(); });
  for (auto const* r : rels) elements.push_back(RelationElement(*r));

  // Reports of communities holding matched entities, most overlap first,
  // finer levels before coarser ones.
  std::map<std::size_t, CommunityReport const*> by_id;
  for (auto const& r : reports) by_id.emplace(r.community_id, &r);
  struct Hit {
    std::size_t overlap;
    std::size_t level;
    std::size_t id;
  };
  std::vector<Hit> hits;
  for (auto const& c : communities) {
    std::size_t overlap = 0;
    for (auto const& n : chosen) overlap += c.member_entities.count(n);
    if (overlap > 0 && by_id.count(c.community_id)) hits.push_back({overlap, c.level, c.community_id});
  }
  std::sort(hits.begin(), hits.end(), [](Hit const& x, Hit const& y) {
    return std::tie(y.overlap, y.level, x.id) < std::tie(x.overlap, x.level, y.id);
  });
  for (auto const& h : hits) elements.push_back(ReportElement(*by_id[h.id]));

  a.context = MakeBundle(FitBudget(std::move(elements), config.context_budget, a.diagnostics));
  AnswerFromContext(a, PromptCatalog::kLocalAnswer, gateway, prompts, config);
  return Finish(std::move(a));
}

Answer LightRetrieve(Query const& query, KnowledgeGraph const& graph, LightMode mode,
                     Gateway const& gateway, PromptCatalog const& prompts,
                     RetrievalConfig const& config) {
  MethodDescriptor method;
  method.family = MethodFamily::kLightRag;
  method.mode = mode;
  method.k = config.top_k;
  method.hop_limit = config.hop_limit;
  Answer a = StartAnswer(query, method);

  auto keywords = LightKeywords(query, gateway, prompts, &a.usage);
  a.diagnostics.insert(a.diagnostics.end(), keywords.diagnostics.begin(),
                       keywords.diagnostics.end());

  // Seed entities from low-level keywords.
  std::vector<std::string> seed_entities;
  if (mode != LightMode::kGlobal) {
    std::vector<std::pair<int, std::string const*>> scored;
    for (auto const& [name, e] : graph.entities()) {
      int best = 0;
      for (auto const& kw : keywords.low_level) best = std::max(best, MatchSpecificity(name, kw));
      if (best > 0) scored.push_back({best, &name});
    }
    std::sort(scored.begin(), scored.end(), [&](auto const& x, auto const& y) {
      if (x.first != y.first) return x.first > y.first;
      return ByDegreeThenName(graph, *x.second, *y.second);
    });
    for (std::size_t i = 0; i < std::min(scored.size(), config.top_k); ++i) {
      seed_entities.push_back(*scored[i].second);
    }
  }

  // Seed relations from high-level keywords against relation descriptions.
  std::vector<Relation const*> seed_relations;
  if (mode != LightMode::kLocal) {
    std::vector<std::vector<std::string>> kw_tokens;
    for (auto const& kw : keywords.high_level) kw_tokens.push_back(LowerTokens(kw));
    std::vector<std::pair<std::size_t, Relation const*>> scored;
    for (auto const& [pair, r] : graph.relations()) {
      std::string text;
      for (auto const& d : r.Descriptions()) text += d.text + "\n";
      if (r.summary) text += *r.summary;
      auto toks = LowerTokens(text);
      std::size_t hits = 0;
      for (auto const& kt : kw_tokens) hits += ContainsRun(toks, kt) ? 1 : 0;
      if (hits > 0) scored.push_back({hits, &r});
    }
    std::stable_sort(scored.begin(), scored.end(), [](auto const& x, auto const& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second->Weight() > y.second->Weight();
    });
    for (std::size_t i = 0; i < std::min(scored.size(), config.top_k); ++i) {
      seed_relations.push_back(scored[i].second);
    }
  }

  if (seed_entities.empty() && seed_relations.empty()) {
    return NoMatchFallback(std::move(a), gateway, prompts, config);
  }

  // Breadth-first expansion from seeds and seed-relation endpoints.
  std::map<std::string, std::size_t> distance;
  std::vector<std::string> frontier;
  auto reach = [&](std::string const& n, std::size_t d) {
    if (distance.emplace(n, d).second) frontier.push_back(n);
  };
  for (auto const& n : seed_entities) reach(n, 0);
  for (auto const* r : seed_relations) {
    reach(r->source_name, 0);
    reach(r->target_name, 0);
  }
  std::set<EntityPair> walked;
  for (std::size_t hop = 1; hop <= config.hop_limit && !frontier.empty(); ++hop) {
    std::vector<std::string> current;
    current.swap(frontier);
    for (auto const& n : current) {
      for (auto const& m : graph.Neighbors(n)) {
        walked.insert(MakePair(n, m));
        reach(m, hop);
      }
    }
  }

  std::vector<ContextElement> elements;
  std::set<std::string> seeded(seed_entities.begin(), seed_entities.end());
  for (auto const& n : seed_entities) elements.push_back(EntityElement(*graph.FindEntity(n)));
  std::vector<std::string> others;
  // With no expansion only the seeds themselves are context.
  for (auto const& [n, d] : distance) {
    if (config.hop_limit > 0 && !seeded.count(n)) others.push_back(n);
  }
  std::sort(others.begin(), others.end(), [&](auto const& x, auto const& y) {
    if (distance[x] != distance[y]) return distance[x] < distance[y];
    return ByDegreeThenName(graph, x, y);
  });
  for (auto const& n : others) elements.push_back(EntityElement(*graph.FindEntity(n)));

  std::set<EntityPair> seen;
  for (auto const* r : seed_relations) {
    seen.insert(MakePair(r->source_name, r->target_name));
    elements.push_back(RelationElement(*r));
  }
  std::vector<Relation const*> rest;
  for (auto const& p : walked) {
    if (!seen.count(p)) rest.push_back(graph.FindRelation(p.first, p.second));
  }
  std::stable_sort(rest.begin(), rest.end(),
                   [](auto const* x, auto const* y) { return x->Weight() > y->Weight(); });
  for (auto const* r : rest) elements.push_back(RelationElement(*r));

  a.context = MakeBundle(FitBudget(std::move(elements), config.context_budget, a.diagnostics));
  AnswerFromContext(a, PromptCatalog::kLightAnswer, gateway, prompts, config);
  return Finish(std::move(a));
}

// ---------------------------------------------------------------------------
// Vector baseline

std::vector<float> HashingEmbedder::Embed(std::string_view text) const {
  std::vector<float> v(dimension_, 0.0f);
  for (auto const& t : DefaultTokenizer().Tokenize(text)) {
    auto word = ToLowerAscii(text.substr(t.begin, t.end - t.begin));
    auto c = static_cast<unsigned char>(word[0]);
    bool const alnum = std::isalnum(c) || c >= 0x80;
    if (!alnum) continue;
    auto h = Fnv1a64(word);
    v[h % dimension_] += (h >> 63) ? -1.0f : 1.0f;
  }
  double norm = 0.0;
  for (float x : v) norm += double(x) * x;
  if (norm > 0.0) {
    auto inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (float& x : v) x *= inv;
  }
  return v;
}

double Cosine(std::vector<float> const& a, std::vector<float> const& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInvalidArgument, "vector dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

VectorIndex::VectorIndex(std::shared_ptr<Embedder const> embedder, Corpus const& corpus)
    : embedder_(std::move(embedder)), units_(corpus.Units()) {
  vectors_.reserve(units_.size());
  for (auto const* u : units_) vectors_.push_back(embedder_->Embed(u->text));
}

std::vector<VectorIndex::Hit> VectorIndex::Search(std::string_view text, std::size_t k) const {
  if (units_.empty()) throw Error(ErrorCode::kEmptyIndex, "vector index has no text units");
  auto q = embedder_->Embed(text);
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < units_.size(); ++i) hits.push_back({units_[i], Cosine(q, vectors_[i])});
  std::sort(hits.begin(), hits.end(), [](Hit const& x, Hit const& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    return x.unit->unit_id < y.unit->unit_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

Answer VectorSearch(Query const& query, VectorIndex const& index, std::size_t k,
                    Gateway const& gateway, PromptCatalog const& prompts,
                    RetrievalConfig const& config) {
  MethodDescriptor method;
  method.family = MethodFamily::kVector;
  method.k = k;
  Answer a = StartAnswer(query, method);
  std::vector<ContextElement> elements;
  for (auto const& hit : index.Search(query.text, k)) {
    auto e = ChunkElement(*hit.unit);
    e.score = hit.similarity;
    elements.push_back(std::move(e));
  }
  a.context = MakeBundle(FitBudget(std::move(elements), config.context_budget, a.diagnostics));
  AnswerFromContext(a, PromptCatalog::kVectorAnswer, gateway, prompts, config);
  return Finish(std::move(a));
}

Answer DirectAnswer(Query const& query, Gateway const& gateway, PromptCatalog const& prompts,
                    RetrievalConfig const& config) {
  MethodDescriptor method;
  method.family = MethodFamily::kDirect;
  Answer a = StartAnswer(query, method);
  a.context = MakeBundle({});
  auto request = MakeUserRequest(prompts.Render(PromptCatalog::kDirectAnswer, {{"query", query.text}}),
                                 task::kAnswer, {query.text});
  request.max_output_tokens = config.answer_max_tokens;
  a.text = Trim(gateway.Complete(request, a.usage).text);
  return Finish(std::move(a));
}

// ---------------------------------------------------------------------------
// Dispatch

MethodDescriptor ResolveDescriptor(MethodDescriptor d, RetrievalConfig const& config) {
  switch (d.family) {
    case MethodFamily::kGraphRagGlobal:
      if (!d.level) d.level = config.default_level;
      if (!d.seed) d.seed = config.seed;
      d.k.reset();
      d.hop_limit.reset();
      break;
    case MethodFamily::kGraphRagLocal:
      if (!d.k) d.k = config.top_k;
      d.level.reset();
      d.seed.reset();
      d.hop_limit.reset();
      break;
    case MethodFamily::kLightRag:
      if (!d.mode) d.mode = LightMode::kHybrid;
      if (!d.k) d.k = config.top_k;
      if (!d.hop_limit) d.hop_limit = config.hop_limit;
      d.level.reset();
      d.seed.reset();
      break;
    case MethodFamily::kVector:
      if (!d.k) d.k = config.vector_k;
      d.level.reset();
      d.seed.reset();
      d.hop_limit.reset();
      break;
    case MethodFamily::kDirect:
      d = MethodDescriptor{};
      break;
  }
  return d;
}

Answer RunMethod(MethodDescriptor const& descriptor, Query const& query,
                 RetrievalStores const& stores, Gateway const& gateway,
                 PromptCatalog const& prompts, RetrievalConfig const& config) {
  auto d = ResolveDescriptor(descriptor, config);
  auto cfg = config;
  auto need = [](auto const* p, char const* what) -> decltype(*p) {
    if (p == nullptr) throw Error(ErrorCode::kNoContext, std::string("no ") + what + " loaded");
    return *p;
  };
  switch (d.family) {
    case MethodFamily::kGraphRagGlobal:
      cfg.seed = *d.seed;
      return GlobalSearch(query, need(stores.reports, "community reports"), *d.level, gateway,
                          prompts, cfg);
    case MethodFamily::kGraphRagLocal:
      cfg.top_k = *d.k;
      return LocalSearch(query, need(stores.graph, "graph"), need(stores.communities, "communities"),
                         need(stores.reports, "community reports"), gateway, prompts, cfg);
    case MethodFamily::kLightRag:
      cfg.top_k = *d.k;
      cfg.hop_limit = *d.hop_limit;
      return LightRetrieve(query, need(stores.graph, "graph"), *d.mode, gateway, prompts, cfg);
    case MethodFamily::kVector:
      if (stores.vectors == nullptr) throw Error(ErrorCode::kEmptyIndex, "no vector index loaded");
      return VectorSearch(query, *stores.vectors, *d.k, gateway, prompts, cfg);
    case MethodFamily::kDirect:
      return DirectAnswer(query, gateway, prompts, cfg);
  }
  throw Error(ErrorCode::kUnknownMethod, "unhandled method");
}

}  // namespace tracegraph
