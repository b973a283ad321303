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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tracegraph/graph.hpp"
#include "tracegraph/llm.hpp"
#include "tracegraph/prompts.hpp"

namespace tracegraph {

struct Community {
  std::size_t community_id = 0;
  /// 0 is the coarsest level.
  std::size_t level = 0;
  std::optional<std::size_t> parent_id;
  std::set<std::string> member_entities;
  /// Only relations with both endpoints inside the community.
  std::set<EntityPair> member_relations;

  bool operator==(Community const&) const = default;
};

struct CommunityReport {
  std::size_t community_id = 0;
  std::size_t level = 0;
  std::string title;
  std::string summary;
  std::size_t token_count = 0;
  std::set<std::string> source_unit_ids;

  bool operator==(CommunityReport const&) const = default;
  /// Title and summary as fed to retrieval prompts.
  std::string Text() const;
};

struct HierarchyConfig {
  std::size_t max_level = 4;
  std::size_t min_subdivide_size = 5;
  std::uint64_t seed = 0;
  double resolution = 1.0;
};

/// Leiden at level 0 over the whole graph, then recursively inside every
/// community of at least `min_subdivide_size` entities until `max_level`.
/// A community whose re-clustering does not split it gets no children.
/// Result is sorted by (level, community_id); ids are assigned in that
/// order with ties broken by the community's least member name.
/// Throws kEmptyGraph for a graph without entities.
std::vector<Community> BuildHierarchy(KnowledgeGraph const& graph, HierarchyConfig const& config);

struct ReportConfig {
  std::size_t max_tokens = 500;
  std::size_t workers = 4;
};

struct ReportResult {
  std::vector<CommunityReport> reports;
  std::vector<std::string> failures;
};

/// One report per community via the gateway. Per-community failures are
/// recorded and skipped.
ReportResult GenerateReports(std::vector<Community> const& communities, KnowledgeGraph const& graph,
                             Gateway const& gateway, PromptCatalog const& prompts,
                             ReportConfig const& config);

/// Reports whose level is <= `level`, in input order.
std::vector<CommunityReport> ReportsAtOrBelow(std::vector<CommunityReport> const& reports,
                                              std::size_t level);

Json CommunityToJson(Community const& c);
Community CommunityFromJson(Json const& j);
Json ReportToJson(CommunityReport const& r);
CommunityReport ReportFromJson(Json const& j);

void SaveCommunities(std::filesystem::path const& root, std::vector<Community> const& communities,
                     std::vector<CommunityReport> const& reports);
std::vector<Community> LoadCommunities(std::filesystem::path const& root);
std::vector<CommunityReport> LoadReports(std::filesystem::path const& root);

}  // namespace tracegraph
