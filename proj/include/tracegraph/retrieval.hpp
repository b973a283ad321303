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

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracegraph/community.hpp"
#include "tracegraph/corpus.hpp"
#include "tracegraph/graph.hpp"
#include "tracegraph/llm.hpp"
#include "tracegraph/prompts.hpp"

namespace tracegraph {

enum class QuestionSubtype { kMethodological, kResults, kBackground, kOpenEnded };
std::string_view SubtypeName(QuestionSubtype s);
std::optional<QuestionSubtype> ParseSubtype(std::string_view name);

struct Query {
  std::string query_id;
  std::string text;
  std::optional<QuestionSubtype> subtype;

  /// Throws kInvalidArgument for empty text; derives an id when absent.
  static Query Make(std::string text, std::string query_id = {},
                    std::optional<QuestionSubtype> subtype = std::nullopt);
};

enum class ContextKind { kReport, kEntity, kRelation, kChunk };
std::string_view ContextKindName(ContextKind kind);
ContextKind ParseContextKind(std::string_view name);

struct ContextElement {
  ContextKind kind = ContextKind::kChunk;
  std::string ref_id;
  std::string text;
  std::set<std::string> source_unit_ids;
  std::optional<double> score;

  bool operator==(ContextElement const&) const = default;
  Json ToJson() const;
  static ContextElement FromJson(Json const& j);
};

ContextElement ReportElement(CommunityReport const& report);
ContextElement EntityElement(Entity const& entity);
ContextElement RelationElement(Relation const& relation);
ContextElement ChunkElement(TextUnit const& unit);

struct ContextBundle {
  std::vector<ContextElement> elements;
  std::size_t token_count = 0;

  bool empty() const { return elements.empty(); }
  bool operator==(ContextBundle const&) const = default;
  Json ToJson() const;
  static ContextBundle FromJson(Json const& j);
};

/// Header line placed before element `index` (0-based) when rendering.
std::string ElementHeader(std::size_t index, ContextElement const& element);
/// Numbered rendering fed to answer prompts.
std::string RenderContext(std::vector<ContextElement> const& elements);
/// Bundle whose token_count is the rendered context's token count.
ContextBundle MakeBundle(std::vector<ContextElement> elements);

enum class MethodFamily { kGraphRagGlobal, kGraphRagLocal, kLightRag, kVector, kDirect };
enum class LightMode { kLocal, kGlobal, kHybrid };
std::string_view LightModeName(LightMode m);

struct MethodDescriptor {
  MethodFamily family = MethodFamily::kDirect;
  std::optional<std::size_t> level;
  std::optional<LightMode> mode;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> hop_limit;

  /// One of: direct, vector, graphrag-global, graphrag-local,
  /// lightrag-local, lightrag-global, lightrag-hybrid.
  std::string Name() const;
  /// Name plus the parameters that matter for that family.
  std::string Label() const;
  static MethodDescriptor Parse(std::string_view name);
  static std::vector<std::string> KnownNames();

  bool operator==(MethodDescriptor const&) const = default;
  Json ToJson() const;
  static MethodDescriptor FromJson(Json const& j);
};

struct IntermediateAnswer {
  std::size_t batch_index = 0;
  std::string text;
  int relevance_score = 0;
};

struct Answer {
  std::string answer_id;
  std::string query_id;
  std::string query_text;
  MethodDescriptor method;
  std::string text;
  ContextBundle context;
  UsageTotals usage;
  /// Set when retrieval found nothing and the answer fell back to direct.
  std::optional<std::string> fallback;
  std::vector<IntermediateAnswer> intermediate;
  std::vector<std::string> diagnostics;

  Json ToJson() const;
  static Answer FromJson(Json const& j);
};

inline constexpr std::string_view kNoMatchMarker = "no-match";

struct RetrievalConfig {
  std::size_t batch_token_budget = 6000;
  std::size_t top_k = 10;
  std::size_t context_budget = 8000;
  std::size_t hop_limit = 1;
  std::size_t answer_max_tokens = 1024;
  std::size_t map_max_tokens = 500;
  std::size_t workers = 4;
  std::uint64_t seed = 0;
  std::size_t default_level = 2;
  std::size_t vector_k = 5;
};

// --- global search -------------------------------------------------------

/// Sequential packing: a report joins the current batch if it fits within
/// `budget` tokens, otherwise starts a new batch. A report larger than the
/// budget forms a singleton batch and adds a diagnostic.
std::vector<std::vector<std::size_t>> PackBatches(std::vector<std::size_t> const& token_counts,
                                                  std::size_t budget,
                                                  std::vector<std::string>* diagnostics = nullptr);

std::string RenderMapPrompt(PromptCatalog const& prompts, std::string_view query,
                            std::vector<ContextElement> const& batch);
std::string RenderReducePrompt(PromptCatalog const& prompts, std::string_view query,
                               std::vector<IntermediateAnswer> const& answers);

/// Parses {"answer": ..., "score": ...}; scores are clamped to 0..100.
/// Unparseable replies score 0 with a diagnostic.
IntermediateAnswer ParseMapReply(std::string_view reply, std::size_t batch_index,
                                 std::string* diagnostic = nullptr);

Answer GlobalSearch(Query const& query, std::vector<CommunityReport> const& reports,
                    std::size_t level, Gateway const& gateway, PromptCatalog const& prompts,
                    RetrievalConfig const& config);

// --- keyword retrieval ---------------------------------------------------

struct Keywords {
  std::vector<std::string> low_level;
  std::vector<std::string> high_level;
  std::vector<std::string> diagnostics;
};

/// Total parser for the keyword JSON block.
Keywords ParseKeywords(std::string_view reply);
Keywords LightKeywords(Query const& query, Gateway const& gateway, PromptCatalog const& prompts,
                       UsageTotals* usage = nullptr);

/// 2 for equal normalized token sequences, 1 when one is a contiguous
/// token run of the other, else 0.
int MatchSpecificity(std::string_view name, std::string_view keyword);

Answer LocalSearch(Query const& query, KnowledgeGraph const& graph,
                   std::vector<Community> const& communities,
                   std::vector<CommunityReport> const& reports, Gateway const& gateway,
                   PromptCatalog const& prompts, RetrievalConfig const& config);

Answer LightRetrieve(Query const& query, KnowledgeGraph const& graph, LightMode mode,
                     Gateway const& gateway, PromptCatalog const& prompts,
                     RetrievalConfig const& config);

// --- vector baseline -----------------------------------------------------

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  /// Unit-length vector (or all zeros for text without tokens).
  virtual std::vector<float> Embed(std::string_view text) const = 0;
};

/// Signed feature hashing of lower-cased tokens, L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 512) : dimension_(dimension) {}
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> Embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

double Cosine(std::vector<float> const& a, std::vector<float> const& b);

class VectorIndex {
 public:
  VectorIndex(std::shared_ptr<Embedder const> embedder, Corpus const& corpus);

  struct Hit {
    TextUnit const* unit;
    double similarity;
  };
  /// Top-k by cosine similarity, ties broken by unit_id. Throws kEmptyIndex.
  std::vector<Hit> Search(std::string_view text, std::size_t k) const;
  std::size_t size() const { return units_.size(); }

 private:
  std::shared_ptr<Embedder const> embedder_;
  std::vector<TextUnit const*> units_;
  std::vector<std::vector<float>> vectors_;
};

Answer VectorSearch(Query const& query, VectorIndex const& index, std::size_t k,
                    Gateway const& gateway, PromptCatalog const& prompts,
                    RetrievalConfig const& config);

Answer DirectAnswer(Query const& query, Gateway const& gateway, PromptCatalog const& prompts,
                    RetrievalConfig const& config);

// --- dispatch ------------------------------------------------------------

/// Everything a method may read. All references are to immutable snapshots.
struct RetrievalStores {
  Corpus const* corpus = nullptr;
  KnowledgeGraph const* graph = nullptr;
  std::vector<Community> const* communities = nullptr;
  std::vector<CommunityReport> const* reports = nullptr;
  VectorIndex const* vectors = nullptr;
};

/// Fills unset descriptor parameters from `config`.
MethodDescriptor ResolveDescriptor(MethodDescriptor descriptor, RetrievalConfig const& config);

/// Runs the path named by `descriptor` (which is first resolved).
Answer RunMethod(MethodDescriptor const& descriptor, Query const& query,
                 RetrievalStores const& stores, Gateway const& gateway,
                 PromptCatalog const& prompts, RetrievalConfig const& config);

}  // namespace tracegraph
