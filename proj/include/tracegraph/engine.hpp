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
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tracegraph/community.hpp"
#include "tracegraph/corpus.hpp"
#include "tracegraph/evaluation.hpp"
#include "tracegraph/graph.hpp"
#include "tracegraph/llm.hpp"
#include "tracegraph/prompts.hpp"
#include "tracegraph/retrieval.hpp"
#include "tracegraph/traceability.hpp"

namespace tracegraph {

struct EngineConfig {
  std::filesystem::path store_root = "store";
  ChunkConfig chunking;
  ProviderConfig indexing;
  ProviderConfig answering;
  ProviderConfig judging;
  HierarchyConfig community;
  RetrievalConfig retrieval;
  IndexConfig index;
  ReportConfig reports;
  std::size_t embedding_dimension = 512;
  std::optional<std::filesystem::path> prompt_catalog;

  /// Relative paths in the file are resolved against its directory.
  static EngineConfig Load(std::filesystem::path const& path);
  static EngineConfig FromJson(Json const& j, std::filesystem::path const& base = {});
  Json ToJson() const;
  /// Throws kInvalidArgument for out-of-range values and kNotFound for
  /// missing referenced paths.
  void Validate() const;
};

struct IndexSummary {
  std::size_t documents = 0;
  std::size_t units = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t communities = 0;
  std::size_t reports = 0;
  std::vector<std::string> warnings;
  Json ToJson() const;
};

struct QueryResult {
  Answer answer;
  TraceLevel trace_level = TraceLevel::kNonTraceable;
  ProvenanceChain provenance;
  std::vector<std::string> warnings;
  std::optional<std::string> conversation_id;
};

struct ConversationTurn {
  std::string query;
  std::string answer_id;
  MethodDescriptor method;
  TraceLevel trace_level = TraceLevel::kNonTraceable;
  std::string timestamp;
};

struct Conversation {
  std::string conversation_id;
  std::string title;
  std::vector<ConversationTurn> turns;
  Json ToJson() const;
  static Conversation FromJson(Json const& j);
};

struct EvalSummary {
  PairwiseRun run;
  WinRateTable table;
  std::filesystem::path report_dir;
};

/// Owns the stores under `store_root`. Writers (index, insert, community
/// rebuild) are serialized; queries run concurrently on the current snapshot.
class Engine {
 public:
  /// Loads existing stores if the manifest exists, otherwise starts empty.
  explicit Engine(EngineConfig config);
  /// Same, with explicitly supplied gateways (used for scripted runs).
  Engine(EngineConfig config, std::shared_ptr<Gateway> indexing, std::shared_ptr<Gateway> answering,
         std::shared_ptr<Gateway> judging);

  EngineConfig const& config() const { return config_; }

  /// Full pipeline over the regular files of `dir` (sorted by name),
  /// replacing every store.
  IndexSummary IndexDirectory(std::filesystem::path const& dir);
  /// Incremental insert; marks communities stale.
  InsertReport InsertFile(std::filesystem::path const& path);
  InsertReport InsertText(std::string const& text, std::string const& title,
                          std::string const& source_path = {});
  /// Rebuilds communities and reports from the current graph.
  IndexSummary RebuildCommunities();

  QueryResult Ask(std::string const& text, MethodDescriptor const& method,
                  std::optional<std::string> const& conversation_id = std::nullopt);

  std::optional<Answer> FindAnswer(std::string const& answer_id) const;
  ProvenanceChain Provenance(std::string const& answer_id) const;
  /// Computed on first request, then served from the citation store.
  CitationMap Citations(std::string const& answer_id);

  Conversation CreateConversation(std::string title);
  std::vector<Conversation> Conversations() const;
  std::optional<Conversation> FindConversation(std::string const& id) const;

  EvalSummary Evaluate(std::filesystem::path const& questions, MethodDescriptor const& candidate,
                       MethodDescriptor const& baseline, OrderPolicy order_policy);

  bool communities_stale() const;
  Json Status() const;
  std::map<std::string, UsageTotals> Usage() const;

  /// Snapshot accessors for tests and bindings.
  KnowledgeGraph graph() const;
  Corpus corpus() const;
  std::vector<Community> communities() const;
  std::vector<CommunityReport> reports() const;
  PromptCatalog const& prompts() const { return prompts_; }

 private:
  void LoadStores();
  void SaveStores(bool communities) const;
  void SaveManifest() const;
  void RebuildVectors();
  void BuildCommunitiesLocked(IndexSummary& summary);
  void RecordAnswer(Answer const& answer, TraceLevel level, ProvenanceChain const& chain);
  void SaveConversations() const;
  RetrievalStores StoresLocked() const;

  EngineConfig config_;
  PromptCatalog prompts_;
  std::shared_ptr<UsageLedger> ledger_;
  std::shared_ptr<Gateway> indexing_;
  std::shared_ptr<Gateway> answering_;
  std::shared_ptr<Gateway> judging_;

  mutable std::shared_mutex store_mu_;
  Corpus corpus_;
  KnowledgeGraph graph_;
  std::vector<Community> communities_;
  std::vector<CommunityReport> reports_;
  std::unique_ptr<VectorIndex> vectors_;
  bool stale_ = false;
  std::uint64_t community_revision_ = 0;

  mutable std::mutex answers_mu_;
  std::map<std::string, Answer> answers_;
  std::map<std::string, CitationMap> citations_;
  std::map<std::string, Conversation> conversations_;
};

/// File names inside the store root.
namespace store {
inline constexpr char kManifest[] = "store_manifest.json";
inline constexpr char kAnswers[] = "answers.jsonl";
inline constexpr char kProvenance[] = "provenance.jsonl";
inline constexpr char kCitations[] = "citations.jsonl";
inline constexpr char kConversations[] = "conversations.jsonl";
inline constexpr char kEvalDir[] = "eval";
}  // namespace store

}  // namespace tracegraph
