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

#include "support.hpp"
#include "tracegraph/community.hpp"
#include "tracegraph/error.hpp"

using namespace tracegraph;

namespace {

void CheckHierarchyInvariants(KnowledgeGraph const& g, std::vector<Community> const& cs) {
  std::map<std::size_t, Community const*> by_id;
  std::map<std::string, int> level0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(cs[i].community_id == i);
    if (i > 0) CHECK(cs[i - 1].level <= cs[i].level);
    by_id[cs[i].community_id] = &cs[i];
    for (auto const& [a, b] : cs[i].member_relations) {
      CHECK(cs[i].member_entities.count(a) == 1);
      CHECK(cs[i].member_entities.count(b) == 1);
    }
    if (cs[i].level == 0) {
      CHECK(!cs[i].parent_id);
      for (auto const& m : cs[i].member_entities) ++level0[m];
    } else {
      REQUIRE(cs[i].parent_id);
      auto const* parent = by_id.at(*cs[i].parent_id);
      CHECK(parent->level + 1 == cs[i].level);
      for (auto const& m : cs[i].member_entities) CHECK(parent->member_entities.count(m) == 1);
    }
  }
  CHECK(level0.size() == g.entities().size());
  for (auto const& [name, count] : level0) CHECK(count == 1);
}

}  // namespace

TEST_CASE("empty graph is rejected") {
  try {
    BuildHierarchy(KnowledgeGraph{}, {});
    FAIL("expected EmptyGraph");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kEmptyGraph);
  }
}

TEST_CASE("two triangles reach the brute-force optimum") {
  auto g = testing::TwoTriangles();
  auto cs = BuildHierarchy(g, {});
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].member_entities == std::set<std::string>{"a", "b", "c"});
  CHECK(cs[1].member_entities == std::set<std::string>{"d", "e", "f"});
  CHECK(cs[0].member_relations.size() == 3);

  auto [best, arg] = testing::BestPartitions(6, testing::TwoTriangleEdges());
  REQUIRE(arg.size() == 1);
  CHECK(arg[0] == std::vector<std::size_t>{0, 0, 0, 1, 1, 1});
  CHECK(best == doctest::Approx(0.5));
}

TEST_CASE("hierarchy invariants on random graphs") {
  SplitMix64 rng(8);
  for (int iter = 0; iter < 30; ++iter) {
    KnowledgeGraph g;
    for (std::size_t u = 0; u < 40; ++u) {
      std::vector<ExtractionRecord> recs{EntityRecord{"n" + std::to_string(u), "X", "d"}};
      for (int k = 0; k < 2; ++k) {
        auto v = rng.Below(40);
        if (v != u) recs.push_back(RelationRecord{"n" + std::to_string(u), "n" + std::to_string(v), "r", 1});
      }
      g.Merge({"u" + std::to_string(u), recs, {}});
    }
    HierarchyConfig config;
    config.min_subdivide_size = 3;
    config.seed = iter;
    auto cs = BuildHierarchy(g, config);
    CheckHierarchyInvariants(g, cs);
    CHECK(cs == BuildHierarchy(g, config));
    for (auto const& c : cs) CHECK(c.level <= config.max_level);
  }
}

TEST_CASE("reports carry provenance and token counts") {
  auto g = testing::TenEntityGraph();
  auto cs = BuildHierarchy(g, {});
  auto result = GenerateReports(cs, g, *testing::RuleGateway(), PromptCatalog::Default(), {});
  CHECK(result.failures.empty());
  REQUIRE(result.reports.size() == cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto const& r = result.reports[i];
    CHECK(r.community_id == cs[i].community_id);
    CHECK(r.level == cs[i].level);
    CHECK(!r.source_unit_ids.empty());
    CHECK(r.token_count == CountTokens(r.summary));
    CHECK(r.title.rfind("Community " + std::to_string(r.community_id) + ":", 0) == 0);
  }
}

TEST_CASE("report failures are recorded and skipped") {
  auto g = testing::TwoTriangles();
  auto cs = BuildHierarchy(g, {});
  auto gw = testing::FnGateway([](ChatRequest const& r) -> std::string {
    if (r.payload.front().find("node a") != std::string::npos) {
      throw Error(ErrorCode::kProviderUnavailable, "down");
    }
    return "fine";
  });
  auto result = GenerateReports(cs, g, *gw, PromptCatalog::Default(), {});
  CHECK(result.reports.size() == 1);
  CHECK(result.failures.size() == 1);
}

TEST_CASE("level filtering follows the level counts") {
  std::vector<CommunityReport> reports;
  std::size_t counts[] = {67, 298, 444, 147, 10};
  std::size_t id = 0;
  for (std::size_t level = 0; level < 5; ++level) {
    for (std::size_t i = 0; i < counts[level]; ++i) reports.push_back({id++, level, "t", "s", 1, {"u"}});
  }
  std::size_t expected[] = {67, 365, 809, 956, 966};
  for (std::size_t c = 0; c < 5; ++c) CHECK(ReportsAtOrBelow(reports, c).size() == expected[c]);
  CHECK(ReportsAtOrBelow(reports, 99).size() == 966);
}

TEST_CASE("community store round trip is byte-stable") {
  testing::TempDir dir;
  auto g = testing::TenEntityGraph();
  auto cs = BuildHierarchy(g, {});
  auto reports = GenerateReports(cs, g, *testing::RuleGateway(), PromptCatalog::Default(), {}).reports;
  SaveCommunities(dir.path(), cs, reports);
  CHECK(LoadCommunities(dir.path()) == cs);
  CHECK(LoadReports(dir.path()) == reports);
  auto reversed = reports;
  std::reverse(reversed.begin(), reversed.end());
  SaveCommunities(dir.path() / "b", cs, reversed);
  CHECK(testing::ReadText(dir.path() / "reports.jsonl") ==
        testing::ReadText(dir.path() / "b" / "reports.jsonl"));
}
