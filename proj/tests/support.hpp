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
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tracegraph/community.hpp"
#include "tracegraph/engine.hpp"
#include "tracegraph/retrieval.hpp"
#include "tracegraph/traceability.hpp"
#include "tracegraph/graph.hpp"
#include "tracegraph/llm.hpp"
#include "tracegraph/util.hpp"

namespace tracegraph::testing {

std::filesystem::path FixtureDir();
std::filesystem::path DataDir();
std::string ReadText(std::filesystem::path const& path);

RuleConfig FixtureRules();
ProviderConfig RuleProviderConfig();
std::shared_ptr<Gateway> RuleGateway();

using ReplyFn = std::function<std::string(ChatRequest const&)>;

/// Provider answering through a test callback.
class FnProvider final : public Provider {
 public:
  explicit FnProvider(ReplyFn fn) : fn_(std::move(fn)) {}
  ChatResponse Complete(ChatRequest const& request) override;

 private:
  ReplyFn fn_;
};

std::shared_ptr<Gateway> FnGateway(ReplyFn fn);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(TempDir const&) = delete;
  TempDir& operator=(TempDir const&) = delete;
  std::filesystem::path const& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Rule-based everything, small chunks, stores under `store_root`.
EngineConfig OfflineConfig(std::filesystem::path const& store_root);

/// Engine with the five-document synthetic corpus indexed.
std::unique_ptr<Engine> IndexedEngine(std::filesystem::path const& store_root);

/// Random extraction over a small name pool, for merge property tests.
RawExtraction RandomExtraction(SplitMix64& rng, std::size_t unit_index);

/// Ten entities in two loosely joined groups with distinctive relation
/// descriptions; used by the keyword-retrieval tests.
KnowledgeGraph TenEntityGraph();

}  // namespace tracegraph::testing

namespace tracegraph::testing {

struct Edge {
  std::size_t u;
  std::size_t v;
  double w;
};

/// Modularity computed straight from the edge list, independent of the
/// library's implementation.
double OracleModularity(std::size_t n, std::vector<Edge> const& edges,
                        std::vector<std::size_t> const& labels);

/// Every set partition of n nodes as restricted growth strings.
std::vector<std::vector<std::size_t>> AllPartitions(std::size_t n);

/// Maximum modularity over all partitions, and every partition attaining it
/// (within 1e-12).
std::pair<double, std::vector<std::vector<std::size_t>>> BestPartitions(
    std::size_t n, std::vector<Edge> const& edges);

/// Two disjoint unit-weight triangles over entities a..f.
KnowledgeGraph TwoTriangles();
std::vector<Edge> TwoTriangleEdges();

}  // namespace tracegraph::testing

namespace tracegraph::testing {

/// Map replies score each batch by the first key of `scores` found in its
/// report texts; reduce prompts are captured into `reduce_prompts`.
std::shared_ptr<Gateway> ScoredMapGateway(std::map<std::string, int> scores,
                                          std::shared_ptr<std::vector<std::string>> reduce_prompts);

/// Reports "Report <i>" at level 0 with one unit each.
std::vector<CommunityReport> NamedReports(std::size_t n);

struct KeywordScript {
  std::string query;
  std::vector<std::string> low;
  std::vector<std::string> high;
};

/// Keyword requests are answered from the script (by query text); answers
/// echo the query.
std::shared_ptr<Gateway> KeywordGateway(std::vector<KeywordScript> const& script);

/// Twenty keyword scripts over TenEntityGraph, mixing hits and misses.
std::vector<KeywordScript> HybridQueries();

std::set<std::string> RefIds(ContextBundle const& bundle);

}  // namespace tracegraph::testing

namespace tracegraph::testing {

/// Every bundle of at most `max_size` elements over the kinds report,
/// entity, relation and chunk with 0, 1 or 2 source units (chunks always
/// have exactly one).
std::vector<ContextBundle> AllBundles(std::size_t max_size);

/// The classification rule table, written out independently.
TraceLevel ExpectedTraceLevel(ContextBundle const& bundle);

}  // namespace tracegraph::testing
