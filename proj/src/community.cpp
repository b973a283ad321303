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

#include "tracegraph/community.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "tracegraph/error.hpp"
#include "tracegraph/leiden.hpp"

namespace tracegraph {

namespace {

constexpr char kCommunitiesFile[] = "communities.jsonl";
constexpr char kReportsFile[] = "reports.jsonl";

/// Runs Leiden over the subgraph induced by `names` (sorted) and returns the
/// groups, each sorted, ordered by least member.
std::vector<std::vector<std::string>> Partition(KnowledgeGraph const& graph,
                                                std::vector<std::string> const& names,
                                                HierarchyConfig const& config) {
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  leiden::WeightedGraph g(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (auto const& n : graph.Neighbors(names[i])) {
      auto it = index.find(n);
      if (it == index.end() || it->second <= i) continue;
      g.AddEdge(i, it->second, graph.FindRelation(names[i], n)->Weight());
    }
  }
  auto membership = leiden::Cluster(g, {config.resolution, config.seed, 64});
  std::size_t k = 0;
  for (auto c : membership) k = std::max(k, c + 1);
  std::vector<std::vector<std::string>> groups(k);
  for (std::size_t i = 0; i < names.size(); ++i) groups[membership[i]].push_back(names[i]);
  // Labels are already numbered by least node index, i.e. by least name.
  return groups;
}

std::set<EntityPair> InternalRelations(KnowledgeGraph const& graph,
                                       std::set<std::string> const& members) {
  std::set<EntityPair> out;
  for (auto const& name : members) {
    for (auto const& n : graph.Neighbors(name)) {
      if (name < n && members.count(n) != 0) out.insert(MakePair(name, n));
    }
  }
  return out;
}

}  // namespace

std::vector<Community> BuildHierarchy(KnowledgeGraph const& graph, HierarchyConfig const& config) {
  if (graph.empty()) throw Error(ErrorCode::kEmptyGraph, "cannot build communities: graph is empty");

  std::vector<std::string> all;
  for (auto const& [name, e] : graph.entities()) all.push_back(name);

  std::vector<Community> out;
  std::size_t next_id = 0;
  auto emit = [&](std::vector<std::string> const& members, std::size_t level,
                  std::optional<std::size_t> parent) {
    Community c;
    c.community_id = next_id++;
    c.level = level;
    c.parent_id = parent;
    c.member_entities.insert(members.begin(), members.end());
    c.member_relations = InternalRelations(graph, c.member_entities);
    out.push_back(std::move(c));
  };

  for (auto const& group : Partition(graph, all, config)) emit(group, 0, std::nullopt);

  // Breadth-first so that ids increase with level.
  std::size_t level_begin = 0;
  for (std::size_t level = 0; level < config.max_level; ++level) {
    std::size_t const level_end = out.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      if (out[i].member_entities.size() < config.min_subdivide_size) continue;
      std::vector<std::string> members(out[i].member_entities.begin(),
                                       out[i].member_entities.end());
      auto groups = Partition(graph, members, config);
      if (groups.size() < 2) continue;
      auto parent = out[i].community_id;
      for (auto const& group : groups) emit(group, level + 1, parent);
    }
    if (out.size() == level_end) break;
    level_begin = level_end;
  }
  return out;
}

std::string CommunityReport::Text() const { return title + "\n" + summary; }

ReportResult GenerateReports(std::vector<Community> const& communities, KnowledgeGraph const& graph,
                             Gateway const& gateway, PromptCatalog const& prompts,
                             ReportConfig const& config) {
  std::vector<std::optional<CommunityReport>> slots(communities.size());
  std::vector<std::string> errors(communities.size());

  auto build = [&](std::size_t i) {
    auto const& c = communities[i];
    CommunityReport report;
    report.community_id = c.community_id;
    report.level = c.level;

    std::string entity_lines;
    std::string relation_lines;
    std::vector<std::string> payload;
    for (auto const& name : c.member_entities) {
      auto const* e = graph.FindEntity(name);
      if (e == nullptr) {
        throw Error(ErrorCode::kInvalidArgument, "community references unknown entity " + name);
      }
      auto desc = e->Description();
      entity_lines += "- " + name + " (" + e->type_label + "): " + desc + "\n";
      if (!desc.empty()) payload.push_back(desc);
      report.source_unit_ids.insert(e->source_unit_ids.begin(), e->source_unit_ids.end());
    }
    for (auto const& pair : c.member_relations) {
      auto const* r = graph.FindRelation(pair.first, pair.second);
      auto desc = r->Description();
      relation_lines += "- " + pair.first + " -- " + pair.second + ": " + desc + "\n";
      if (!desc.empty()) payload.push_back(desc);
      report.source_unit_ids.insert(r->source_unit_ids.begin(), r->source_unit_ids.end());
    }

    std::vector<std::string> names(c.member_entities.begin(), c.member_entities.end());
    std::stable_sort(names.begin(), names.end(), [&](auto const& a, auto const& b) {
      return graph.Degree(a) > graph.Degree(b);
    });
    report.title = "Community " + std::to_string(c.community_id) + ":";
    for (std::size_t k = 0; k < std::min<std::size_t>(3, names.size()); ++k) {
      report.title += (k == 0 ? " " : ", ") + names[k];
    }

    auto prompt = prompts.Render(PromptCatalog::kCommunityReport,
                                 {{"entities", entity_lines}, {"relations", relation_lines}});
    auto request = MakeUserRequest(std::move(prompt), task::kReport, std::move(payload));
    request.max_output_tokens = config.max_tokens;
    report.summary = Trim(gateway.Complete(request).text);
    report.token_count = CountTokens(report.summary);
    slots[i] = std::move(report);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < communities.size(); i = next++) {
      try {
        build(i);
      } catch (Error const& e) {
        errors[i] = "community " + std::to_string(communities[i].community_id) + ": " + e.what();
      }
    }
  };
  std::size_t const workers =
      std::max<std::size_t>(1, std::min(config.workers, communities.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  ReportResult result;
  for (std::size_t i = 0; i < communities.size(); ++i) {
    if (slots[i]) result.reports.push_back(std::move(*slots[i]));
    if (!errors[i].empty()) result.failures.push_back(std::move(errors[i]));
  }
  return result;
}

std::vector<CommunityReport> ReportsAtOrBelow(std::vector<CommunityReport> const& reports,
                                              std::size_t level) {
  std::vector<CommunityReport> out;
  std::copy_if(reports.begin(), reports.end(), std::back_inserter(out),
               [&](CommunityReport const& r) { return r.level <= level; });
  return out;
}

Json CommunityToJson(Community const& c) {
  Json j;
  j["community_id"] = c.community_id;
  j["level"] = c.level;
  j["parent_id"] = c.parent_id ? Json(*c.parent_id) : Json(nullptr);
  j["member_entities"] = c.member_entities;
  j["member_relations"] = Json::array();
  for (auto const& [a, b] : c.member_relations) j["member_relations"].push_back(Json::array({a, b}));
  return j;
}

Community CommunityFromJson(Json const& j) {
  Community c;
  c.community_id = j.at("community_id").get<std::size_t>();
  c.level = j.at("level").get<std::size_t>();
  if (!j.at("parent_id").is_null()) c.parent_id = j.at("parent_id").get<std::size_t>();
  c.member_entities = j.at("member_entities").get<std::set<std::string>>();
  for (auto const& p : j.at("member_relations")) {
    c.member_relations.insert(MakePair(p.at(0).get<std::string>(), p.at(1).get<std::string>()));
  }
  return c;
}

Json ReportToJson(CommunityReport const& r) {
  Json j;
  j["community_id"] = r.community_id;
  j["level"] = r.level;
  j["title"] = r.title;
  j["summary"] = r.summary;
  j["token_count"] = r.token_count;
  j["source_unit_ids"] = r.source_unit_ids;
  return j;
}

CommunityReport ReportFromJson(Json const& j) {
  CommunityReport r;
  r.community_id = j.at("community_id").get<std::size_t>();
  r.level = j.at("level").get<std::size_t>();
  r.title = j.at("title").get<std::string>();
  r.summary = j.at("summary").get<std::string>();
  r.token_count = j.at("token_count").get<std::size_t>();
  r.source_unit_ids = j.at("source_unit_ids").get<std::set<std::string>>();
  return r;
}

void SaveCommunities(std::filesystem::path const& root, std::vector<Community> const& communities,
                     std::vector<CommunityReport> const& reports) {
  auto cs = communities;
  std::sort(cs.begin(), cs.end(), [](auto const& a, auto const& b) {
    return std::tie(a.level, a.community_id) < std::tie(b.level, b.community_id);
  });
  auto rs = reports;
  std::sort(rs.begin(), rs.end(), [](auto const& a, auto const& b) {
    return std::tie(a.level, a.community_id) < std::tie(b.level, b.community_id);
  });
  std::vector<Json> cj;
  for (auto const& c : cs) cj.push_back(CommunityToJson(c));
  std::vector<Json> rj;
  for (auto const& r : rs) rj.push_back(ReportToJson(r));
  WriteJsonLines(root / kCommunitiesFile, cj);
  WriteJsonLines(root / kReportsFile, rj);
}

std::vector<Community> LoadCommunities(std::filesystem::path const& root) {
  std::vector<Community> out;
  try {
    for (auto const& j : ReadJsonLines(root / kCommunitiesFile)) out.push_back(CommunityFromJson(j));
  } catch (nlohmann::json::exception const& e) {
    throw Error(ErrorCode::kStoreCorrupt, std::string("community store: ") + e.what());
  }
  return out;
}

std::vector<CommunityReport> LoadReports(std::filesystem::path const& root) {
  std::vector<CommunityReport> out;
  try {
    for (auto const& j : ReadJsonLines(root / kReportsFile)) out.push_back(ReportFromJson(j));
  } catch (nlohmann::json::exception const& e) {
    throw Error(ErrorCode::kStoreCorrupt, std::string("report store: ") + e.what());
  }
  return out;
}

}  // namespace tracegraph
