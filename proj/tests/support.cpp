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

#include "support.hpp"

#include <cstdlib>
#include <mutex>

#include "tracegraph/error.hpp"

namespace tracegraph::testing {

std::filesystem::path FixtureDir() { return TRACEGRAPH_FIXTURE_DIR; }
std::filesystem::path DataDir() { return TRACEGRAPH_DATA_DIR; }

std::string ReadText(std::filesystem::path const& path) { return ReadFile(path); }

RuleConfig FixtureRules() {
  return RuleConfig::FromJson(Json::parse(ReadFile(FixtureDir() / "rules.json")));
}

ProviderConfig RuleProviderConfig() {
  ProviderConfig c;
  c.kind = ProviderKind::kRuleBased;
  c.model_name = "rule-based";
  c.price_per_million_input = 2.5;
  c.price_per_million_output = 10.0;
  c.rules = FixtureRules();
  return c;
}

std::shared_ptr<Gateway> RuleGateway() { return Gateway::FromConfig(RuleProviderConfig()); }

ChatResponse FnProvider::Complete(ChatRequest const& request) {
  ChatResponse r;
  r.text = fn_(request);
  for (auto const& m : request.messages) r.prompt_tokens += CountTokens(m.text);
  r.completion_tokens = CountTokens(r.text);
  r.provider_tag = "fn";
  return r;
}

std::shared_ptr<Gateway> FnGateway(ReplyFn fn) {
  ProviderConfig c;
  c.kind = ProviderKind::kScripted;
  c.script_path = "<in-memory>";
  c.model_name = "fn";
  return std::make_shared<Gateway>(c, std::make_shared<FnProvider>(std::move(fn)));
}

TempDir::TempDir() {
  auto tmpl = (std::filesystem::temp_directory_path() / "tracegraph-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

EngineConfig OfflineConfig(std::filesystem::path const& store_root) {
  EngineConfig c;
  c.store_root = store_root;
  c.chunking = {40, 8};
  c.index.chunking = c.chunking;
  c.indexing = c.answering = c.judging = RuleProviderConfig();
  c.community.min_subdivide_size = 4;
  c.retrieval.default_level = 1;
  c.Validate();
  return c;
}

std::unique_ptr<Engine> IndexedEngine(std::filesystem::path const& store_root) {
  auto engine = std::make_unique<Engine>(OfflineConfig(store_root));
  engine->IndexDirectory(FixtureDir() / "corpus");
  return engine;
}

RawExtraction RandomExtraction(SplitMix64& rng, std::size_t unit_index) {
  static char const* const kNames[] = {"Alpha", "beta", "Gamma Ray", "delta", "EPSILON", "zeta"};
  static char const* const kTypes[] = {"GENE", "PROTEIN", ""};
  static char const* const kWords[] = {"binds", "inhibits", "cleaves", "tracks", "raises"};
  RawExtraction x;
  x.unit_id = "unit-" + std::to_string(unit_index);
  std::size_t n = rng.Below(6);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.Below(2) == 0) {
      x.records.push_back(EntityRecord{kNames[rng.Below(6)], kTypes[rng.Below(3)],
                                       std::string(kWords[rng.Below(5)]) + " things"});
    } else {
      auto a = rng.Below(6);
      auto b = rng.Below(6);
      if (a == b) b = (b + 1) % 6;
      x.records.push_back(RelationRecord{kNames[a], kNames[b],
                                         std::string(kNames[a]) + " " + kWords[rng.Below(5)],
                                         static_cast<int>(1 + rng.Below(10))});
    }
  }
  return x;
}

KnowledgeGraph TenEntityGraph() {
  KnowledgeGraph g;
  auto entity = [](std::string name, std::string type) {
    return EntityRecord{std::move(name), std::move(type), "about " + name};
  };
  auto rel = [](std::string a, std::string b, std::string desc, int w) {
    return RelationRecord{std::move(a), std::move(b), std::move(desc), w};
  };
  RawExtraction u1{"u1",
                   {entity("amyloid beta", "PROTEIN"), entity("APOE", "GENE"),
                    entity("microglia", "CELL"), entity("plasma", "TISSUE"),
                    entity("SILK", "METHOD"),
                    rel("amyloid beta", "APOE", "APOE slows amyloid clearance", 8),
                    rel("APOE", "microglia", "microglia express APOE as a risk factor", 5),
                    rel("amyloid beta", "SILK", "SILK measures protein turnover", 7),
                    rel("amyloid beta", "plasma", "plasma ratio is a downstream biomarker", 4)},
                   {}};
  RawExtraction u2{"u2",
                   {entity("tau", "PROTEIN"), entity("MAPT", "GENE"),
                    entity("astrocytes", "CELL"), entity("sleep", "FACTOR"),
                    entity("lecanemab", "DRUG"),
                    rel("tau", "MAPT", "MAPT encodes tau", 9),
                    rel("tau", "astrocytes", "astrocytes spread tau pathology", 3),
                    rel("tau", "sleep", "sleep regulation changes tau release", 4),
                    rel("lecanemab", "astrocytes", "anti-amyloid therapy alters astrocytes", 2)},
                   {}};
  RawExtraction u3{"u3",
                   {rel("amyloid beta", "tau", "amyloid beta accelerates tau protein turnover", 6),
                    rel("sleep", "amyloid beta", "sleep lowers amyloid beta", 5)},
                   {}};
  g.Merge(u1);
  g.Merge(u2);
  g.Merge(u3);
  return g;
}

}  // namespace tracegraph::testing

namespace tracegraph::testing {

double OracleModularity(std::size_t n, std::vector<Edge> const& edges,
                        std::vector<std::size_t> const& labels) {
  std::vector<double> k(n, 0.0);
  double m = 0;
  for (auto const& e : edges) {
    k[e.u] += e.w;
    k[e.v] += e.w;
    m += e.w;
  }
  double q = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] != labels[j]) continue;
      double a = 0;
      for (auto const& e : edges) {
        if ((e.u == i && e.v == j) || (e.u == j && e.v == i)) a += e.w;
      }
      q += a - k[i] * k[j] / (2 * m);
    }
  }
  return q / (2 * m);
}

std::vector<std::vector<std::size_t>> AllPartitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> rgs(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t max_label) {
    if (i == n) {
      out.push_back(rgs);
      return;
    }
    for (std::size_t c = 0; c <= max_label + 1; ++c) {
      rgs[i] = c;
      rec(i + 1, std::max(max_label, c));
    }
  };
  if (n == 0) return {{}};
  rgs[0] = 0;
  rec(1, 0);
  return out;
}

std::pair<double, std::vector<std::vector<std::size_t>>> BestPartitions(
    std::size_t n, std::vector<Edge> const& edges) {
  double best = -1e300;
  std::vector<std::vector<std::size_t>> arg;
  for (auto const& p : AllPartitions(n)) {
    double q = OracleModularity(n, edges, p);
    if (q > best + 1e-12) {
      best = q;
      arg = {p};
    } else if (q > best - 1e-12) {
      arg.push_back(p);
    }
  }
  return {best, arg};
}

std::vector<Edge> TwoTriangleEdges() {
  return {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}};
}

KnowledgeGraph TwoTriangles() {
  static char const* const kNames[] = {"a", "b", "c", "d", "e", "f"};
  KnowledgeGraph g;
  std::size_t unit = 0;
  for (auto const& e : TwoTriangleEdges()) {
    g.Merge({"u" + std::to_string(unit++),
             {EntityRecord{kNames[e.u], "NODE", std::string("node ") + kNames[e.u]},
              EntityRecord{kNames[e.v], "NODE", std::string("node ") + kNames[e.v]},
              RelationRecord{kNames[e.u], kNames[e.v], "edge", static_cast<int>(e.w)}},
             {}});
  }
  return g;
}

}  // namespace tracegraph::testing

namespace tracegraph::testing {

std::shared_ptr<Gateway> ScoredMapGateway(std::map<std::string, int> scores,
                                          std::shared_ptr<std::vector<std::string>> reduce_prompts) {
  auto mu = std::make_shared<std::mutex>();
  return FnGateway([scores, reduce_prompts, mu](ChatRequest const& r) -> std::string {
    if (r.task == task::kMap) {
      for (std::size_t i = 1; i < r.payload.size(); ++i) {
        for (auto const& [key, score] : scores) {
          if (r.payload[i].find(key) != std::string::npos) {
            return Json{{"answer", "finding from " + key}, {"score", score}}.dump();
          }
        }
      }
      return R"({"answer": "nothing", "score": 0})";
    }
    if (r.task == task::kReduce) {
      std::lock_guard lock(*mu);
      if (reduce_prompts) reduce_prompts->push_back(r.messages.front().text);
      return "final answer";
    }
    return "other";
  });
}

std::vector<CommunityReport> NamedReports(std::size_t n) {
  std::vector<CommunityReport> out;
  for (std::size_t i = 0; i < n; ++i) {
    CommunityReport r;
    r.community_id = i;
    r.level = 0;
    r.title = "Report " + std::to_string(i);
    r.summary = "Summary of community " + std::to_string(i) + ".";
    r.token_count = CountTokens(r.summary);
    r.source_unit_ids = {"u" + std::to_string(i)};
    out.push_back(std::move(r));
  }
  return out;
}

std::shared_ptr<Gateway> KeywordGateway(std::vector<KeywordScript> const& script) {
  std::map<std::string, std::string> table;
  for (auto const& s : script) {
    table[s.query] = Json{{"high_level_keywords", s.high}, {"low_level_keywords", s.low}}.dump();
  }
  return FnGateway([table](ChatRequest const& r) -> std::string {
    if (r.task == task::kKeywords) {
      auto it = table.find(r.payload.front());
      if (it == table.end()) throw Error(ErrorCode::kScriptMiss, "no keywords for " + r.payload.front());
      return it->second;
    }
    return "answer to " + (r.payload.empty() ? std::string() : r.payload.front());
  });
}

std::vector<KeywordScript> HybridQueries() {
  static char const* const kLow[] = {"amyloid beta", "APOE", "microglia", "plasma", "SILK",
                                     "tau", "MAPT", "astrocytes", "sleep", "lecanemab",
                                     "amyloid", "nothingness"};
  static char const* const kHigh[] = {"protein turnover", "risk factor", "downstream biomarker",
                                      "sleep regulation", "anti-amyloid therapy", "tau pathology",
                                      "clearance", "quantum gravity"};
  SplitMix64 rng(2024);
  std::vector<KeywordScript> out;
  for (std::size_t i = 0; i < 20; ++i) {
    KeywordScript s;
    s.query = "hybrid query " + std::to_string(i);
    auto nl = rng.Below(4);
    for (std::uint64_t k = 0; k < nl; ++k) s.low.push_back(kLow[rng.Below(12)]);
    auto nh = rng.Below(3);
    for (std::uint64_t k = 0; k < nh; ++k) s.high.push_back(kHigh[rng.Below(8)]);
    out.push_back(std::move(s));
  }
  return out;
}

std::set<std::string> RefIds(ContextBundle const& bundle) {
  std::set<std::string> out;
  for (auto const& e : bundle.elements) out.insert(e.ref_id);
  return out;
}

}  // namespace tracegraph::testing

namespace tracegraph::testing {

std::vector<ContextBundle> AllBundles(std::size_t max_size) {
  std::vector<ContextElement> shapes;
  std::size_t serial = 0;
  for (auto kind : {ContextKind::kReport, ContextKind::kEntity, ContextKind::kRelation,
                    ContextKind::kChunk}) {
    for (std::size_t sources = 0; sources <= 2; ++sources) {
      if (kind == ContextKind::kChunk && sources != 1) continue;
      ContextElement e;
      e.kind = kind;
      e.ref_id = std::string(ContextKindName(kind)) + ":" + std::to_string(serial++);
      e.text = "element";
      for (std::size_t s = 0; s < sources; ++s) e.source_unit_ids.insert("unit-" + std::to_string(s));
      shapes.push_back(e);
    }
  }
  std::vector<ContextBundle> out{ContextBundle{}};
  std::vector<std::vector<ContextElement>> layer{{}};
  for (std::size_t size = 1; size <= max_size; ++size) {
    std::vector<std::vector<ContextElement>> next;
    for (auto const& prefix : layer) {
      for (auto const& s : shapes) {
        auto els = prefix;
        els.push_back(s);
        out.push_back(MakeBundle(els));
        next.push_back(std::move(els));
      }
    }
    layer = std::move(next);
  }
  return out;
}

TraceLevel ExpectedTraceLevel(ContextBundle const& bundle) {
  if (bundle.elements.empty()) return TraceLevel::kNonTraceable;
  bool any_report = false;
  bool any_multi = false;
  for (auto const& e : bundle.elements) {
    if (e.source_unit_ids.empty()) return TraceLevel::kNonTraceable;
    any_report |= e.kind == ContextKind::kReport;
    any_multi |= e.source_unit_ids.size() > 1;
  }
  if (any_report) return TraceLevel::kClusterLevel;
  if (any_multi) return TraceLevel::kMultiParagraph;
  return TraceLevel::kSingleParagraph;
}

}  // namespace tracegraph::testing
