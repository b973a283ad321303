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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tracegraph/corpus.hpp"
#include "tracegraph/llm.hpp"
#include "tracegraph/prompts.hpp"

namespace tracegraph {

struct EntityRecord {
  std::string name;
  std::string type_label;
  std::string description;
};

struct RelationRecord {
  std::string source_name;
  std::string target_name;
  std::string description;
  int strength = 1;
};

using ExtractionRecord = std::variant<EntityRecord, RelationRecord>;

struct Diagnostic {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string message;
};

struct ParseResult {
  std::vector<ExtractionRecord> records;
  std::vector<Diagnostic> diagnostics;
};

struct RawExtraction {
  std::string unit_id;
  std::vector<ExtractionRecord> records;
  std::vector<Diagnostic> diagnostics;
};

/// Case-folded, whitespace-collapsed surface form used as entity identity.
std::string CanonicalName(std::string_view name);

/// Total parser for the delimiter-tuple extraction grammar. Malformed
/// records are skipped and reported with their byte span.
ParseResult ParseExtraction(std::string_view completion,
                            PromptCatalog::Delimiters const& delimiters = {});

/// One description contributed by one text unit.
struct Attributed {
  std::string unit_id;
  std::string text;
  auto operator<=>(Attributed const&) const = default;
};

struct Entity {
  std::string entity_id;
  std::string canonical_name;
  std::string type_label;
  std::set<Attributed> descriptions;
  std::set<std::string> source_unit_ids;
  /// Consolidated description written by augmentation; originals are kept.
  std::optional<std::string> summary;

  bool operator==(Entity const&) const = default;
  /// summary when present, else the descriptions joined.
  std::string Description() const;
};

/// Unordered pair, stored with first <= second.
using EntityPair = std::pair<std::string, std::string>;
EntityPair MakePair(std::string a, std::string b);

struct Relation {
  std::string source_name;
  std::string target_name;
  /// (unit_id, description, strength) contributions; weight is their sum.
  std::set<std::tuple<std::string, std::string, int>> contributions;
  std::set<std::string> source_unit_ids;
  std::optional<std::string> summary;

  bool operator==(Relation const&) const = default;
  double Weight() const;
  std::set<Attributed> Descriptions() const;
  std::string Description() const;
};

struct MergeDelta {
  std::set<std::string> entities_created;
  std::set<std::string> entities_updated;
  std::set<EntityPair> relations_created;
  std::set<EntityPair> relations_updated;
  std::vector<std::string> diagnostics;

  void Absorb(MergeDelta const& other);
  Json ToJson() const;
};

class KnowledgeGraph {
 public:
  std::map<std::string, Entity> const& entities() const { return entities_; }
  std::map<EntityPair, Relation> const& relations() const { return relations_; }
  std::uint64_t revision() const { return revision_; }
  /// Restores the counter persisted alongside the stores.
  void set_revision(std::uint64_t r) { revision_ = r; }
  bool empty() const { return entities_.empty(); }

  Entity const* FindEntity(std::string_view canonical_name) const;
  Relation const* FindRelation(std::string_view a, std::string_view b) const;

  /// Canonical names adjacent to `canonical_name`, sorted.
  std::vector<std::string> Neighbors(std::string_view canonical_name) const;
  std::size_t Degree(std::string_view canonical_name) const;
  /// Relations touching the entity.
  std::vector<Relation const*> IncidentRelations(std::string_view canonical_name) const;

  /// Union-merges one extraction. Entities by canonical name, relations by
  /// unordered endpoint pair. Conflicting type labels resolve to the
  /// lexicographically least label so the result is order-free.
  MergeDelta Merge(RawExtraction const& extraction);

  void SetEntitySummary(std::string const& canonical_name, std::string summary);
  void SetRelationSummary(EntityPair const& pair, std::string summary);

  /// Entity/relation content equality, ignoring the revision counter.
  bool SameContent(KnowledgeGraph const& other) const;

  /// Throws kStoreCorrupt on broken referential integrity.
  void CheckIntegrity() const;

  void Save(std::filesystem::path const& root) const;
  static KnowledgeGraph Load(std::filesystem::path const& root);

 private:
  void Bump() { ++revision_; }

  std::map<std::string, Entity> entities_;
  std::map<EntityPair, Relation> relations_;
  // adjacency cache: canonical name -> neighbour names
  std::map<std::string, std::set<std::string>> adjacency_;
  std::uint64_t revision_ = 0;
};

Json EntityToJson(Entity const& e);
Json RelationToJson(Relation const& r);

struct IndexConfig {
  ChunkConfig chunking;
  /// Items with at least this many descriptions get a consolidated one.
  std::size_t augment_threshold = 3;
  std::size_t summary_max_tokens = 300;
  std::size_t workers = 4;
};

/// Renders the extraction prompt for `unit`, calls the gateway, and parses.
/// Gateway errors propagate; malformed completions only add diagnostics.
RawExtraction ExtractUnit(TextUnit const& unit, Gateway const& gateway,
                          PromptCatalog const& prompts);

/// Extracts every unit (concurrently, up to `workers`) and returns the
/// extractions in input order.
std::vector<RawExtraction> ExtractUnits(std::vector<TextUnit const*> const& units,
                                        Gateway const& gateway, PromptCatalog const& prompts,
                                        std::size_t workers);

struct AugmentReport {
  std::size_t entities_summarized = 0;
  std::size_t relations_summarized = 0;
  std::vector<std::string> failures;
};

/// Summarizes every entity/relation whose description list has reached the
/// threshold. When `only` is given, only those entities (and relations
/// touching them) are considered. Per-item gateway failures are recorded and
/// skipped.
AugmentReport AugmentDescriptions(KnowledgeGraph& graph, Gateway const& gateway,
                                  PromptCatalog const& prompts, IndexConfig const& config,
                                  std::set<std::string> const* only = nullptr);

struct InsertReport {
  std::string doc_id;
  std::size_t units = 0;
  MergeDelta delta;
  AugmentReport augment;
};

/// Chunks, extracts, merges and augments one new document into an existing
/// graph and corpus. Throws kDuplicateDocument if the document is known.
InsertReport InsertIncremental(KnowledgeGraph& graph, Corpus& corpus, Document doc,
                               Gateway const& gateway, PromptCatalog const& prompts,
                               IndexConfig const& config);

}  // namespace tracegraph
