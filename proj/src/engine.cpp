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

#include "tracegraph/engine.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

constexpr int kStoreFormat = 1;

std::filesystem::path Resolve(std::filesystem::path const& base, std::filesystem::path p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

ProviderConfig ProviderFromJson(Json const& j, std::filesystem::path const& base) {
  auto c = ProviderConfig::FromJson(j);
  if (c.script_path) c.script_path = Resolve(base, *c.script_path).string();
  return c;
}

std::string UtcNow() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
T Get(Json const& j, char const* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

EngineConfig EngineConfig::FromJson(Json const& j, std::filesystem::path const& base) {
  EngineConfig c;
  try {
    c.store_root = Resolve(base, Get<std::string>(j, "store_root", "store"));
    if (j.contains("chunking")) {
      auto const& k = j.at("chunking");
      c.chunking.chunk_tokens = Get(k, "chunk_tokens", c.chunking.chunk_tokens);
      c.chunking.overlap_tokens = Get(k, "overlap_tokens", c.chunking.overlap_tokens);
    }
    if (j.contains("providers")) {
      auto const& p = j.at("providers");
      if (p.contains("indexing")) c.indexing = ProviderFromJson(p.at("indexing"), base);
      c.answering = p.contains("answering") ? ProviderFromJson(p.at("answering"), base) : c.indexing;
      c.judging = p.contains("judging") ? ProviderFromJson(p.at("judging"), base) : c.answering;
    }
    if (j.contains("community")) {
      auto const& k = j.at("community");
      c.community.max_level = Get(k, "max_level", c.community.max_level);
      c.community.min_subdivide_size = Get(k, "min_subdivide_size", c.community.min_subdivide_size);
      c.community.seed = Get(k, "seed", c.community.seed);
      c.community.resolution = Get(k, "resolution", c.community.resolution);
    }
    if (j.contains("retrieval")) {
      auto const& k = j.at("retrieval");
      auto& r = c.retrieval;
      r.batch_token_budget = Get(k, "batch_token_budget", r.batch_token_budget);
      r.top_k = Get(k, "top_k", r.top_k);
      r.context_budget = Get(k, "context_budget", r.context_budget);
      r.hop_limit = Get(k, "hop_limit", r.hop_limit);
      r.answer_max_tokens = Get(k, "answer_max_tokens", r.answer_max_tokens);
      r.map_max_tokens = Get(k, "map_max_tokens", r.map_max_tokens);
      r.workers = Get(k, "workers", r.workers);
      r.seed = Get(k, "seed", r.seed);
      r.default_level = Get(k, "default_level", r.default_level);
      r.vector_k = Get(k, "vector_k", r.vector_k);
    }
    if (j.contains("indexing")) {
      auto const& k = j.at("indexing");
      c.index.augment_threshold = Get(k, "augment_threshold", c.index.augment_threshold);
      c.index.summary_max_tokens = Get(k, "summary_max_tokens", c.index.summary_max_tokens);
      c.index.workers = Get(k, "workers", c.index.workers);
      c.reports.max_tokens = Get(k, "report_max_tokens", c.reports.max_tokens);
      c.reports.workers = c.index.workers;
    }
    c.embedding_dimension = Get(j, "embedding_dimension", c.embedding_dimension);
    if (j.contains("prompt_catalog") && !j.at("prompt_catalog").is_null()) {
      c.prompt_catalog = Resolve(base, j.at("prompt_catalog").get<std::string>());
    }
  } catch (Json::exception const& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("engine config: ") + e.what());
  }
  c.index.chunking = c.chunking;
  c.Validate();
  return c;
}

EngineConfig EngineConfig::Load(std::filesystem::path const& path) {
  Json j;
  try {
    j = Json::parse(ReadFile(path));
  } catch (Json::parse_error const& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
  return FromJson(j, path.parent_path());
}

Json EngineConfig::ToJson() const {
  Json j;
  j["store_root"] = store_root.string();
  j["chunking"] = {{"chunk_tokens", chunking.chunk_tokens},
                   {"overlap_tokens", chunking.overlap_tokens}};
  j["providers"] = {{"indexing", indexing.ToJson()},
                    {"answering", answering.ToJson()},
                    {"judging", judging.ToJson()}};
  j["community"] = {{"max_level", community.max_level},
                    {"min_subdivide_size", community.min_subdivide_size},
                    {"seed", community.seed},
                    {"resolution", community.resolution}};
  j["retrieval"] = {{"batch_token_budget", retrieval.batch_token_budget},
                    {"top_k", retrieval.top_k},
                    {"context_budget", retrieval.context_budget},
                    {"hop_limit", retrieval.hop_limit},
                    {"answer_max_tokens", retrieval.answer_max_tokens},
                    {"map_max_tokens", retrieval.map_max_tokens},
                    {"workers", retrieval.workers},
                    {"seed", retrieval.seed},
                    {"default_level", retrieval.default_level},
                    {"vector_k", retrieval.vector_k}};
  j["indexing"] = {{"augment_threshold", index.augment_threshold},
                   {"summary_max_tokens", index.summary_max_tokens},
                   {"workers", index.workers},
                   {"report_max_tokens", reports.max_tokens}};
  j["embedding_dimension"] = embedding_dimension;
  j["prompt_catalog"] = prompt_catalog ? Json(prompt_catalog->string()) : Json(nullptr);
  return j;
}

void EngineConfig::Validate() const {
  auto require = [](bool ok, char const* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("engine config: ") + what);
  };
  require(!store_root.empty(), "store_root is empty");
  require(chunking.chunk_tokens > 0, "chunk_tokens must be positive");
  require(chunking.overlap_tokens < chunking.chunk_tokens,
          "overlap_tokens must be smaller than chunk_tokens");
  require(community.resolution > 0, "resolution must be positive");
  require(community.min_subdivide_size >= 2, "min_subdivide_size must be at least 2");
  require(retrieval.batch_token_budget > 0, "batch_token_budget must be positive");
  require(retrieval.top_k > 0, "top_k must be positive");
  require(retrieval.context_budget > 0, "context_budget must be positive");
  require(retrieval.answer_max_tokens > 0, "answer_max_tokens must be positive");
  require(retrieval.vector_k > 0, "vector_k must be positive");
  require(index.augment_threshold > 0, "augment_threshold must be positive");
  require(embedding_dimension > 0, "embedding_dimension must be positive");
  indexing.Validate();
  answering.Validate();
  judging.Validate();
  for (auto const* p : {&indexing, &answering, &judging}) {
    if (p->script_path && !std::filesystem::exists(*p->script_path)) {
      throw Error(ErrorCode::kNotFound, "script file not found: " + *p->script_path);
    }
  }
  if (prompt_catalog && !std::filesystem::is_directory(*prompt_catalog)) {
    throw Error(ErrorCode::kNotFound, "prompt catalog not found: " + prompt_catalog->string());
  }
}

Json IndexSummary::ToJson() const {
  Json j;
  j["documents"] = documents;
  j["units"] = units;
  j["entities"] = entities;
  j["relations"] = relations;
  j["communities"] = communities;
  j["reports"] = reports;
  j["warnings"] = warnings;
  return j;
}

Json Conversation::ToJson() const {
  Json j;
  j["conversation_id"] = conversation_id;
  j["title"] = title;
  j["turns"] = Json::array();
  for (auto const& t : turns) {
    j["turns"].push_back({{"query", t.query},
                          {"answer_id", t.answer_id},
                          {"method", t.method.ToJson()},
                          {"trace_level", TraceLevelName(t.trace_level)},
                          {"timestamp", t.timestamp}});
  }
  return j;
}

Conversation Conversation::FromJson(Json const& j) {
  Conversation c;
  c.conversation_id = j.at("conversation_id").get<std::string>();
  c.title = j.value("title", std::string());
  for (auto const& t : j.at("turns")) {
    c.turns.push_back({t.at("query").get<std::string>(), t.at("answer_id").get<std::string>(),
                       MethodDescriptor::FromJson(t.at("method")),
                       ParseTraceLevel(t.at("trace_level").get<std::string>()),
                       t.at("timestamp").get<std::string>()});
  }
  return c;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(EngineConfig config)
    : config_(std::move(config)), ledger_(std::make_shared<UsageLedger>()) {
  indexing_ = Gateway::FromConfig(config_.indexing, ledger_);
  answering_ = Gateway::FromConfig(config_.answering, ledger_);
  judging_ = Gateway::FromConfig(config_.judging, ledger_);
  prompts_ = config_.prompt_catalog ? PromptCatalog::Load(*config_.prompt_catalog)
                                    : PromptCatalog::Default();
  LoadStores();
}

Engine::Engine(EngineConfig config, std::shared_ptr<Gateway> indexing,
               std::shared_ptr<Gateway> answering, std::shared_ptr<Gateway> judging)
    : config_(std::move(config)),
      ledger_(std::make_shared<UsageLedger>()),
      indexing_(std::move(indexing)),
      answering_(std::move(answering)),
      judging_(std::move(judging)) {
  prompts_ = config_.prompt_catalog ? PromptCatalog::Load(*config_.prompt_catalog)
                                    : PromptCatalog::Default();
  LoadStores();
}

void Engine::LoadStores() {
  auto const& root = config_.store_root;
  if (!std::filesystem::exists(root / store::kManifest)) {
    RebuildVectors();
    return;
  }
  Json manifest;
  try {
    manifest = Json::parse(ReadFile(root / store::kManifest));
  } catch (Json::parse_error const& e) {
    throw Error(ErrorCode::kStoreCorrupt, std::string("store manifest: ") + e.what());
  }
  if (manifest.value("format", 0) != kStoreFormat) {
    throw Error(ErrorCode::kStoreCorrupt, "unsupported store format in " + root.string());
  }
  corpus_ = Corpus::Load(root);
  graph_ = KnowledgeGraph::Load(root);
  graph_.CheckIntegrity();
  graph_.set_revision(manifest.value("graph_revision", std::uint64_t{0}));
  communities_ = LoadCommunities(root);
  reports_ = LoadReports(root);
  stale_ = manifest.value("stale_communities", false);
  community_revision_ = manifest.value("community_revision", std::uint64_t{0});
  for (auto const& [id, e] : graph_.entities()) {
    for (auto const& u : e.source_unit_ids) {
      if (!corpus_.FindUnit(u)) {
        throw Error(ErrorCode::kStoreCorrupt, "entity " + id + " references missing unit " + u);
      }
    }
  }

  if (std::filesystem::exists(root / store::kAnswers)) {
    for (auto const& j : ReadJsonLines(root / store::kAnswers)) {
      auto a = Answer::FromJson(j);
      answers_.emplace(a.answer_id, std::move(a));
    }
  }
  if (std::filesystem::exists(root / store::kCitations)) {
    for (auto const& j : ReadJsonLines(root / store::kCitations)) {
      auto c = CitationMap::FromJson(j);
      citations_.emplace(c.answer_id, std::move(c));
    }
  }
  if (std::filesystem::exists(root / store::kConversations)) {
    for (auto const& j : ReadJsonLines(root / store::kConversations)) {
      auto c = Conversation::FromJson(j);
      conversations_.emplace(c.conversation_id, std::move(c));
    }
  }
  RebuildVectors();
}

void Engine::RebuildVectors() {
  vectors_ = std::make_unique<VectorIndex>(
      std::make_shared<HashingEmbedder>(config_.embedding_dimension), corpus_);
}

void Engine::SaveManifest() const {
  Json m;
  m["format"] = kStoreFormat;
  m["files"] = {{"corpus_manifest", "corpus_manifest.jsonl"},
                {"documents", "documents.jsonl"},
                {"chunks", "chunks.jsonl"},
                {"entities", "entities.jsonl"},
                {"relations", "relations.jsonl"},
                {"communities", "communities.jsonl"},
                {"reports", "reports.jsonl"},
                {"answers", store::kAnswers},
                {"provenance", store::kProvenance},
                {"citations", store::kCitations},
                {"conversations", store::kConversations}};
  m["documents"] = corpus_.DocumentCount();
  m["units"] = corpus_.UnitCount();
  m["entities"] = graph_.entities().size();
  m["relations"] = graph_.relations().size();
  m["communities"] = communities_.size();
  m["reports"] = reports_.size();
  m["graph_revision"] = graph_.revision();
  m["community_revision"] = community_revision_;
  m["stale_communities"] = stale_;
  WriteFile(config_.store_root / store::kManifest, m.dump(2) + "\n");
}

void Engine::SaveStores(bool communities) const {
  std::filesystem::create_directories(config_.store_root);
  corpus_.Save(config_.store_root);
  graph_.Save(config_.store_root);
  if (communities) SaveCommunities(config_.store_root, communities_, reports_);
  SaveManifest();
}

void Engine::BuildCommunitiesLocked(IndexSummary& summary) {
  communities_.clear();
  reports_.clear();
  if (!graph_.empty()) {
    communities_ = BuildHierarchy(graph_, config_.community);
    auto result = GenerateReports(communities_, graph_, *indexing_, prompts_, config_.reports);
    reports_ = std::move(result.reports);
    for (auto& f : result.failures) summary.warnings.push_back("report failed: " + f);
  }
  stale_ = false;
  community_revision_ = graph_.revision();
  summary.communities = communities_.size();
  summary.reports = reports_.size();
}

IndexSummary Engine::IndexDirectory(std::filesystem::path const& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "corpus directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (auto const& entry : std::filesystem::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (entry.is_regular_file() && !name.empty() && name[0] != '.') files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  IndexSummary summary;
  Corpus corpus;
  for (auto const& f : files) {
    auto raw = ReadFile(f);
    try {
      auto doc = IngestDocument(raw, f.stem().string(), f.filename().string());
      if (corpus.Contains(doc.doc_id)) {
        summary.warnings.push_back("skipped duplicate document " + f.string());
        continue;
      }
      auto units = ChunkDocument(doc, config_.chunking);
      corpus.Add(std::move(doc), std::move(units));
    } catch (Error const& e) {
      if (e.code() != ErrorCode::kEmptyDocument) throw;
      summary.warnings.push_back("skipped empty document " + f.string());
    }
  }

  auto extractions = ExtractUnits(corpus.Units(), *indexing_, prompts_, config_.index.workers);
  KnowledgeGraph graph;
  for (auto const& x : extractions) {
    auto delta = graph.Merge(x);
    for (auto const& d : x.diagnostics) {
      summary.warnings.push_back("extraction " + x.unit_id + ": " + d.message);
    }
    for (auto& d : delta.diagnostics) summary.warnings.push_back(std::move(d));
  }
  auto augment = AugmentDescriptions(graph, *indexing_, prompts_, config_.index);
  for (auto& f : augment.failures) summary.warnings.push_back("augment failed: " + f);

  std::unique_lock lock(store_mu_);
  corpus_ = std::move(corpus);
  graph_ = std::move(graph);
  BuildCommunitiesLocked(summary);
  RebuildVectors();
  SaveStores(true);

  summary.documents = corpus_.DocumentCount();
  summary.units = corpus_.UnitCount();
  summary.entities = graph_.entities().size();
  summary.relations = graph_.relations().size();
  return summary;
}

InsertReport Engine::InsertText(std::string const& text, std::string const& title,
                                std::string const& source_path) {
  auto doc = IngestDocument(text, title, source_path);
  std::unique_lock lock(store_mu_);
  auto report = InsertIncremental(graph_, corpus_, std::move(doc), *indexing_, prompts_, config_.index);
  stale_ = true;
  RebuildVectors();
  SaveStores(false);
  return report;
}

InsertReport Engine::InsertFile(std::filesystem::path const& path) {
  return InsertText(ReadFile(path), path.stem().string(), path.filename().string());
}

IndexSummary Engine::RebuildCommunities() {
  IndexSummary summary;
  std::unique_lock lock(store_mu_);
  BuildCommunitiesLocked(summary);
  SaveStores(true);
  summary.documents = corpus_.DocumentCount();
  summary.units = corpus_.UnitCount();
  summary.entities = graph_.entities().size();
  summary.relations = graph_.relations().size();
  return summary;
}

RetrievalStores Engine::StoresLocked() const {
  return RetrievalStores{&corpus_, &graph_, &communities_, &reports_, vectors_.get()};
}

QueryResult Engine::Ask(std::string const& text, MethodDescriptor const& method,
                        std::optional<std::string> const& conversation_id) {
  if (conversation_id) {
    std::lock_guard lock(answers_mu_);
    if (!conversations_.count(*conversation_id)) {
      throw Error(ErrorCode::kNotFound, "unknown conversation " + *conversation_id);
    }
  }
  auto query = Query::Make(text);
  QueryResult result;
  {
    std::shared_lock lock(store_mu_);
    auto family = method.family;
    bool const uses_communities =
        family == MethodFamily::kGraphRagGlobal || family == MethodFamily::kGraphRagLocal;
    if (uses_communities && stale_) {
      result.warnings.push_back(
          "stale communities: documents were inserted after the last community build; "
          "run reindex to refresh reports");
    }
    result.answer = RunMethod(method, query, StoresLocked(), *answering_, prompts_, config_.retrieval);
    result.trace_level = ClassifyTrace(result.answer);
    result.provenance = ResolveProvenance(result.answer, corpus_);
  }
  result.conversation_id = conversation_id;
  RecordAnswer(result.answer, result.trace_level, result.provenance);
  if (conversation_id) {
    std::lock_guard lock(answers_mu_);
    auto& c = conversations_.at(*conversation_id);
    c.turns.push_back({text, result.answer.answer_id, result.answer.method, result.trace_level,
                       UtcNow()});
    SaveConversations();
  }
  return result;
}

void Engine::RecordAnswer(Answer const& answer, TraceLevel level, ProvenanceChain const& chain) {
  std::lock_guard lock(answers_mu_);
  if (!answers_.emplace(answer.answer_id, answer).second) return;
  std::filesystem::create_directories(config_.store_root);
  AppendJsonLine(config_.store_root / store::kAnswers, answer.ToJson());
  AppendProvenanceLedger(config_.store_root / store::kProvenance, chain, level);
}

std::optional<Answer> Engine::FindAnswer(std::string const& answer_id) const {
  std::lock_guard lock(answers_mu_);
  auto it = answers_.find(answer_id);
  if (it == answers_.end()) return std::nullopt;
  return it->second;
}

ProvenanceChain Engine::Provenance(std::string const& answer_id) const {
  auto a = FindAnswer(answer_id);
  if (!a) throw Error(ErrorCode::kNotFound, "unknown answer " + answer_id);
  std::shared_lock lock(store_mu_);
  return ResolveProvenance(*a, corpus_);
}

CitationMap Engine::Citations(std::string const& answer_id) {
  auto a = FindAnswer(answer_id);
  if (!a) throw Error(ErrorCode::kNotFound, "unknown answer " + answer_id);
  {
    std::lock_guard lock(answers_mu_);
    auto it = citations_.find(answer_id);
    if (it != citations_.end()) return it->second;
  }
  CitationMap map;
  if (a->context.elements.empty()) {
    map.answer_id = answer_id;
    map.diagnostics.push_back("answer has no context; nothing to cite");
    return map;
  }
  map = AttributeCitations(*a, *answering_, prompts_);
  std::lock_guard lock(answers_mu_);
  if (citations_.emplace(answer_id, map).second) {
    AppendJsonLine(config_.store_root / store::kCitations, map.ToJson());
  }
  return map;
}

Conversation Engine::CreateConversation(std::string title) {
  std::lock_guard lock(answers_mu_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "conv-%04zu", conversations_.size() + 1);
  Conversation c{buf, std::move(title), {}};
  conversations_.emplace(c.conversation_id, c);
  SaveConversations();
  return c;
}

void Engine::SaveConversations() const {
  std::vector<Json> records;
  for (auto const& [id, c] : conversations_) records.push_back(c.ToJson());
  std::filesystem::create_directories(config_.store_root);
  WriteJsonLines(config_.store_root / store::kConversations, records);
}

std::vector<Conversation> Engine::Conversations() const {
  std::lock_guard lock(answers_mu_);
  std::vector<Conversation> out;
  for (auto const& [id, c] : conversations_) out.push_back(c);
  return out;
}

std::optional<Conversation> Engine::FindConversation(std::string const& id) const {
  std::lock_guard lock(answers_mu_);
  auto it = conversations_.find(id);
  if (it == conversations_.end()) return std::nullopt;
  return it->second;
}

EvalSummary Engine::Evaluate(std::filesystem::path const& questions,
                             MethodDescriptor const& candidate, MethodDescriptor const& baseline,
                             OrderPolicy order_policy) {
  auto qs = LoadQuestions(questions);
  PairwiseConfig pc;
  pc.order_policy = order_policy;
  pc.workers = config_.retrieval.workers;
  EvalSummary summary;
  {
    std::shared_lock lock(store_mu_);
    summary.run = RunPairwise(qs, candidate, baseline, StoresLocked(), *answering_, *judging_,
                              prompts_, config_.retrieval, pc);
  }
  std::map<std::string, QuestionSubtype> subtypes;
  for (auto const& q : qs) {
    if (q.subtype) subtypes.emplace(q.QueryId(), *q.subtype);
  }
  summary.table = WinRates(summary.run.verdicts, subtypes);

  summary.report_dir = config_.store_root / store::kEvalDir;
  std::filesystem::create_directories(summary.report_dir);
  std::vector<Json> answers;
  for (auto const& a : summary.run.answers) answers.push_back(a.ToJson());
  std::vector<Json> verdicts;
  for (auto const& v : summary.run.verdicts) verdicts.push_back(v.ToJson());
  WriteJsonLines(summary.report_dir / "answers.jsonl", answers);
  WriteJsonLines(summary.report_dir / "verdicts.jsonl", verdicts);
  WriteJsonLines(summary.report_dir / "win_rates.jsonl", WinRateRecords(summary.table));
  WriteFile(summary.report_dir / "win_rates.txt", RenderWinRateTable(summary.table));
  return summary;
}

bool Engine::communities_stale() const {
  std::shared_lock lock(store_mu_);
  return stale_;
}

Json Engine::Status() const {
  std::shared_lock lock(store_mu_);
  Json j;
  j["store_root"] = config_.store_root.string();
  j["documents"] = corpus_.DocumentCount();
  j["units"] = corpus_.UnitCount();
  j["entities"] = graph_.entities().size();
  j["relations"] = graph_.relations().size();
  j["communities"] = communities_.size();
  j["reports"] = reports_.size();
  j["graph_revision"] = graph_.revision();
  j["stale_communities"] = stale_;
  return j;
}

std::map<std::string, UsageTotals> Engine::Usage() const { return UsageReport(*ledger_); }

KnowledgeGraph Engine::graph() const {
  std::shared_lock lock(store_mu_);
  return graph_;
}

Corpus Engine::corpus() const {
  std::shared_lock lock(store_mu_);
  return corpus_;
}

std::vector<Community> Engine::communities() const {
  std::shared_lock lock(store_mu_);
  return communities_;
}

std::vector<CommunityReport> Engine::reports() const {
  std::shared_lock lock(store_mu_);
  return reports_;
}

}  // namespace tracegraph
