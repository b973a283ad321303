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

#include "tracegraph/graph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

constexpr char kEntitiesFile[] = "entities.jsonl";
constexpr char kRelationsFile[] = "relations.jsonl";

std::string StripQuotes(std::string_view s) {
  auto t = Trim(s);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = Trim(t.substr(1, t.size() - 2));
  return t;
}

std::vector<std::pair<std::size_t, std::size_t>> SplitOn(std::string_view text,
                                                         std::string_view delim, std::size_t base) {
  std::vector<std::pair<std::size_t, std::size_t>> parts;
  std::size_t start = 0;
  if (delim.empty()) {
    parts.emplace_back(base, base + text.size());
    return parts;
  }
  for (;;) {
    auto pos = text.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(base + start, base + text.size());
      return parts;
    }
    parts.emplace_back(base + start, base + pos);
    start = pos + delim.size();
  }
}

}  // namespace

std::string CanonicalName(std::string_view name) { return ToLowerAscii(CollapseWhitespace(name)); }

ParseResult ParseExtraction(std::string_view completion,
                            PromptCatalog::Delimiters const& delimiters) {
  ParseResult result;
  std::string_view body = completion;
  if (auto pos = body.find(delimiters.completion); pos != std::string_view::npos) {
    body = body.substr(0, pos);
  }
  for (auto [seg_begin, seg_end] : SplitOn(body, delimiters.record, 0)) {
    std::string_view seg = completion.substr(seg_begin, seg_end - seg_begin);
    // Trim whitespace and keep offsets aligned with the original completion.
    while (!seg.empty() && std::isspace(static_cast<unsigned char>(seg.front()))) {
      seg.remove_prefix(1);
      ++seg_begin;
    }
    while (!seg.empty() && std::isspace(static_cast<unsigned char>(seg.back()))) {
      seg.remove_suffix(1);
      --seg_end;
    }
    if (seg.empty()) continue;
    auto fail = [&](std::string msg) {
      result.diagnostics.push_back({seg_begin, seg_end, std::move(msg)});
    };
    if (seg.front() != '(' || seg.back() != ')') {
      fail("record is not enclosed in parentheses");
      continue;
    }
    auto inner = seg.substr(1, seg.size() - 2);
    std::vector<std::string> fields;
    for (auto [b, e] : SplitOn(inner, delimiters.tuple, 0)) {
      fields.push_back(Trim(inner.substr(b, e - b)));
    }
    auto kind = ToLowerAscii(StripQuotes(fields.front()));
    if (kind == "entity") {
      if (fields.size() != 4) {
        fail("entity record has " + std::to_string(fields.size()) + " fields, expected 4");
        continue;
      }
      EntityRecord rec{CollapseWhitespace(StripQuotes(fields[1])),
                       CollapseWhitespace(StripQuotes(fields[2])), CollapseWhitespace(fields[3])};
      if (CanonicalName(rec.name).empty()) {
        fail("entity name is empty");
        continue;
      }
      result.records.emplace_back(std::move(rec));
    } else if (kind == "relationship") {
      if (fields.size() != 5) {
        fail("relationship record has " + std::to_string(fields.size()) + " fields, expected 5");
        continue;
      }
      RelationRecord rec{CollapseWhitespace(StripQuotes(fields[1])),
                         CollapseWhitespace(StripQuotes(fields[2])), CollapseWhitespace(fields[3]),
                         1};
      if (CanonicalName(rec.source_name).empty() || CanonicalName(rec.target_name).empty()) {
        fail("relationship endpoint name is empty");
        continue;
      }
      if (CanonicalName(rec.source_name) == CanonicalName(rec.target_name)) {
        fail("relationship connects an entity to itself");
        continue;
      }
      auto strength_text = StripQuotes(fields[4]);
      char* end = nullptr;
      double value = std::strtod(strength_text.c_str(), &end);
      if (strength_text.empty() || end != strength_text.c_str() + strength_text.size() ||
          !std::isfinite(value)) {
        fail("relationship strength '" + strength_text + "' is not a number");
        continue;
      }
      long rounded = std::lround(value);
      if (rounded < 1 || rounded > 10) {
        result.diagnostics.push_back(
            {seg_begin, seg_end,
             "relationship strength " + strength_text + " clamped to the range 1..10"});
        rounded = std::clamp(rounded, 1L, 10L);
      }
      rec.strength = static_cast<int>(rounded);
      result.records.emplace_back(std::move(rec));
    } else {
      fail("unknown record kind '" + kind + "'");
    }
  }
  return result;
}

namespace {

std::string JoinDescriptions(std::set<Attributed> const& descriptions) {
  std::vector<std::string> seen;
  std::string out;
  for (auto const& d : descriptions) {
    if (d.text.empty() || std::find(seen.begin(), seen.end(), d.text) != seen.end()) continue;
    seen.push_back(d.text);
    if (!out.empty()) out += ' ';
    out += d.text;
  }
  return out;
}

}  // namespace

std::string Entity::Description() const {
  return summary ? *summary : JoinDescriptions(descriptions);
}

EntityPair MakePair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

double Relation::Weight() const {
  double w = 0;
  for (auto const& c : contributions) w += std::get<2>(c);
  return w;
}

std::set<Attributed> Relation::Descriptions() const {
  std::set<Attributed> out;
  for (auto const& [unit, text, strength] : contributions) out.insert({unit, text});
  return out;
}

std::string Relation::Description() const {
  return summary ? *summary : JoinDescriptions(Descriptions());
}

void MergeDelta::Absorb(MergeDelta const& other) {
  for (auto const& e : other.entities_created) {
    entities_created.insert(e);
    entities_updated.erase(e);
  }
  for (auto const& e : other.entities_updated) {
    if (entities_created.count(e) == 0) entities_updated.insert(e);
  }
  for (auto const& r : other.relations_created) {
    relations_created.insert(r);
    relations_updated.erase(r);
  }
  for (auto const& r : other.relations_updated) {
    if (relations_created.count(r) == 0) relations_updated.insert(r);
  }
  diagnostics.insert(diagnostics.end(), other.diagnostics.begin(), other.diagnostics.end());
}

Json MergeDelta::ToJson() const {
  Json j;
  j["entities_created"] = entities_created;
  j["entities_updated"] = entities_updated;
  auto pairs = [](std::set<EntityPair> const& s) {
    Json a = Json::array();
    for (auto const& [x, y] : s) a.push_back(Json::array({x, y}));
    return a;
  };
  j["relations_created"] = pairs(relations_created);
  j["relations_updated"] = pairs(relations_updated);
  j["diagnostics"] = diagnostics;
  return j;
}

Entity const* KnowledgeGraph::FindEntity(std::string_view canonical_name) const {
  auto it = entities_.find(std::string(canonical_name));
  return it == entities_.end() ? nullptr : &it->second;
}

Relation const* KnowledgeGraph::FindRelation(std::string_view a, std::string_view b) const {
  auto it = relations_.find(MakePair(std::string(a), std::string(b)));
  return it == relations_.end() ? nullptr : &it->second;
}

std::vector<std::string> KnowledgeGraph::Neighbors(std::string_view canonical_name) const {
  auto it = adjacency_.find(std::string(canonical_name));
  if (it == adjacency_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t KnowledgeGraph::Degree(std::string_view canonical_name) const {
  auto it = adjacency_.find(std::string(canonical_name));
  return it == adjacency_.end() ? 0 : it->second.size();
}

std::vector<Relation const*> KnowledgeGraph::IncidentRelations(
    std::string_view canonical_name) const {
  std::vector<Relation const*> out;
  for (auto const& n : Neighbors(canonical_name)) {
    if (auto const* r = FindRelation(canonical_name, n)) out.push_back(r);
  }
  return out;
}

MergeDelta KnowledgeGraph::Merge(RawExtraction const& extraction) {
  MergeDelta delta;
  auto const& unit = extraction.unit_id;

  auto upsert_entity = [&](std::string const& surface, std::string const& type_label,
                           std::string const& description) {
    auto name = CanonicalName(surface);
    auto [it, created] = entities_.try_emplace(name);
    Entity& e = it->second;
    bool changed = created;
    if (created) {
      e.canonical_name = name;
      e.entity_id = "ent-" + Sha256Hex(name).substr(0, 12);
      adjacency_.try_emplace(name);
    }
    if (!type_label.empty() && type_label != e.type_label) {
      if (e.type_label.empty() || type_label < e.type_label) {
        if (!e.type_label.empty()) {
          delta.diagnostics.push_back("type label conflict for '" + name + "': '" + e.type_label +
                                      "' vs '" + type_label + "', keeping '" + type_label + "'");
        }
        e.type_label = type_label;
        changed = true;
      } else {
        delta.diagnostics.push_back("type label conflict for '" + name + "': '" + e.type_label +
                                    "' vs '" + type_label + "', keeping '" + e.type_label + "'");
      }
    }
    if (e.descriptions.insert({unit, description}).second) {
      changed = true;
      e.summary.reset();
    }
    e.source_unit_ids.insert(unit);
    if (created) {
      delta.entities_created.insert(name);
      delta.entities_updated.erase(name);
    } else if (changed && delta.entities_created.count(name) == 0) {
      delta.entities_updated.insert(name);
    }
    return name;
  };

  for (auto const& record : extraction.records) {
    if (auto const* er = std::get_if<EntityRecord>(&record)) {
      upsert_entity(er->name, er->type_label, er->description);
    }
  }
  for (auto const& record : extraction.records) {
    auto const* rr = std::get_if<RelationRecord>(&record);
    if (rr == nullptr) continue;
    // Every endpoint gets an empty description attributed to this unit, which
    // also materializes endpoints missing from the graph. Doing it
    // unconditionally keeps the merge independent of extraction order.
    auto a = CanonicalName(rr->source_name);
    auto b = CanonicalName(rr->target_name);
    if (a == b || a.empty() || b.empty()) continue;
    upsert_entity(rr->source_name, "", "");
    upsert_entity(rr->target_name, "", "");
    auto pair = MakePair(a, b);
    auto [it, created] = relations_.try_emplace(pair);
    Relation& r = it->second;
    if (created) {
      r.source_name = pair.first;
      r.target_name = pair.second;
      adjacency_[a].insert(b);
      adjacency_[b].insert(a);
    }
    bool changed = r.contributions.insert({unit, rr->description, rr->strength}).second;
    if (changed) r.summary.reset();
    r.source_unit_ids.insert(unit);
    if (created) {
      delta.relations_created.insert(pair);
    } else if (changed && delta.relations_created.count(pair) == 0) {
      delta.relations_updated.insert(pair);
    }
  }
  Bump();
  return delta;
}

void KnowledgeGraph::SetEntitySummary(std::string const& canonical_name, std::string summary) {
  auto it = entities_.find(canonical_name);
  if (it == entities_.end()) throw Error(ErrorCode::kNotFound, "no entity " + canonical_name);
  it->second.summary = std::move(summary);
  Bump();
}

void KnowledgeGraph::SetRelationSummary(EntityPair const& pair, std::string summary) {
  auto it = relations_.find(pair);
  if (it == relations_.end()) {
    throw Error(ErrorCode::kNotFound, "no relation " + pair.first + " -- " + pair.second);
  }
  it->second.summary = std::move(summary);
  Bump();
}

bool KnowledgeGraph::SameContent(KnowledgeGraph const& other) const {
  return entities_ == other.entities_ && relations_ == other.relations_;
}

void KnowledgeGraph::CheckIntegrity() const {
  for (auto const& [pair, r] : relations_) {
    if (entities_.count(pair.first) == 0 || entities_.count(pair.second) == 0) {
      throw Error(ErrorCode::kStoreCorrupt,
                  "relation endpoint missing: " + pair.first + " -- " + pair.second);
    }
    if (r.source_unit_ids.empty()) {
      throw Error(ErrorCode::kStoreCorrupt, "relation without provenance: " + pair.first);
    }
  }
  for (auto const& [name, e] : entities_) {
    if (e.source_unit_ids.empty()) {
      throw Error(ErrorCode::kStoreCorrupt, "entity without provenance: " + name);
    }
  }
}

Json EntityToJson(Entity const& e) {
  Json j;
  j["entity_id"] = e.entity_id;
  j["canonical_name"] = e.canonical_name;
  j["type_label"] = e.type_label;
  j["descriptions"] = Json::array();
  for (auto const& d : e.descriptions) {
    j["descriptions"].push_back({{"unit_id", d.unit_id}, {"text", d.text}});
  }
  j["source_unit_ids"] = e.source_unit_ids;
  j["summary"] = e.summary ? Json(*e.summary) : Json(nullptr);
  return j;
}

Json RelationToJson(Relation const& r) {
  Json j;
  j["source_name"] = r.source_name;
  j["target_name"] = r.target_name;
  j["weight"] = r.Weight();
  j["contributions"] = Json::array();
  for (auto const& [unit, text, strength] : r.contributions) {
    j["contributions"].push_back({{"unit_id", unit}, {"text", text}, {"strength", strength}});
  }
  j["source_unit_ids"] = r.source_unit_ids;
  j["summary"] = r.summary ? Json(*r.summary) : Json(nullptr);
  return j;
}

void KnowledgeGraph::Save(std::filesystem::path const& root) const {
  std::vector<Json> ents;
  for (auto const& [name, e] : entities_) ents.push_back(EntityToJson(e));
  std::vector<Json> rels;
  for (auto const& [pair, r] : relations_) rels.push_back(RelationToJson(r));
  WriteJsonLines(root / kEntitiesFile, ents);
  WriteJsonLines(root / kRelationsFile, rels);
}

KnowledgeGraph KnowledgeGraph::Load(std::filesystem::path const& root) {
  KnowledgeGraph g;
  try {
    for (auto const& j : ReadJsonLines(root / kEntitiesFile)) {
      Entity e;
      e.entity_id = j.at("entity_id").get<std::string>();
      e.canonical_name = j.at("canonical_name").get<std::string>();
      e.type_label = j.at("type_label").get<std::string>();
      for (auto const& d : j.at("descriptions")) {
        e.descriptions.insert({d.at("unit_id").get<std::string>(), d.at("text").get<std::string>()});
      }
      e.source_unit_ids = j.at("source_unit_ids").get<std::set<std::string>>();
      if (!j.at("summary").is_null()) e.summary = j.at("summary").get<std::string>();
      g.adjacency_.try_emplace(e.canonical_name);
      auto name = e.canonical_name;
      g.entities_.emplace(std::move(name), std::move(e));
    }
    for (auto const& j : ReadJsonLines(root / kRelationsFile)) {
      Relation r;
      r.source_name = j.at("source_name").get<std::string>();
      r.target_name = j.at("target_name").get<std::string>();
      for (auto const& c : j.at("contributions")) {
        r.contributions.insert({c.at("unit_id").get<std::string>(),
                                c.at("text").get<std::string>(), c.at("strength").get<int>()});
      }
      r.source_unit_ids = j.at("source_unit_ids").get<std::set<std::string>>();
      if (!j.at("summary").is_null()) r.summary = j.at("summary").get<std::string>();
      g.adjacency_[r.source_name].insert(r.target_name);
      g.adjacency_[r.target_name].insert(r.source_name);
      auto pair = MakePair(r.source_name, r.target_name);
      g.relations_.emplace(std::move(pair), std::move(r));
    }
  } catch (nlohmann::json::exception const& e) {
    throw Error(ErrorCode::kStoreCorrupt, std::string("graph store: ") + e.what());
  }
  g.CheckIntegrity();
  return g;
}

// ---------------------------------------------------------------------------
// Indexing operations

RawExtraction ExtractUnit(TextUnit const& unit, Gateway const& gateway,
                          PromptCatalog const& prompts) {
  if (Trim(unit.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "text unit " + unit.unit_id + " is empty");
  }
  auto prompt = prompts.Render(PromptCatalog::kExtract,
                               {{"tuple_delimiter", prompts.delimiters.tuple},
                                {"record_delimiter", prompts.delimiters.record},
                                {"completion_delimiter", prompts.delimiters.completion},
                                {"input_text", unit.text}});
  auto request = MakeUserRequest(std::move(prompt), task::kExtract, {unit.text});
  request.max_output_tokens = 4096;
  auto response = gateway.Complete(request);
  auto parsed = ParseExtraction(response.text, prompts.delimiters);
  return {unit.unit_id, std::move(parsed.records), std::move(parsed.diagnostics)};
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<RawExtraction> ExtractUnits(std::vector<TextUnit const*> const& units,
                                        Gateway const& gateway, PromptCatalog const& prompts,
                                        std::size_t workers) {
  std::vector<RawExtraction> out(units.size());
  ParallelFor(units.size(), workers,
              [&](std::size_t i) { out[i] = ExtractUnit(*units[i], gateway, prompts); });
  return out;
}

AugmentReport AugmentDescriptions(KnowledgeGraph& graph, Gateway const& gateway,
                                  PromptCatalog const& prompts, IndexConfig const& config,
                                  std::set<std::string> const* only) {
  AugmentReport report;
  auto summarize = [&](std::string_view kind, std::string const& name,
                       std::set<Attributed> const& descriptions) -> std::optional<std::string> {
    std::vector<std::string> texts;
    for (auto const& d : descriptions) {
      if (!d.text.empty() && std::find(texts.begin(), texts.end(), d.text) == texts.end()) {
        texts.push_back(d.text);
      }
    }
    if (texts.size() < config.augment_threshold) return std::nullopt;
    std::string listing;
    for (auto const& t : texts) listing += "- " + t + "\n";
    auto prompt = prompts.Render(PromptCatalog::kSummarizeDescriptions,
                                 {{"item_kind", std::string(kind)},
                                  {"item_name", name},
                                  {"descriptions", listing}});
    auto request = MakeUserRequest(std::move(prompt), task::kSummarize, texts);
    request.max_output_tokens = config.summary_max_tokens;
    try {
      return Trim(gateway.Complete(request).text);
    } catch (Error const& e) {
      report.failures.push_back(std::string(kind) + " '" + name + "': " + e.what());
      return std::nullopt;
    }
  };

  std::vector<std::pair<std::string, std::string>> entity_updates;
  for (auto const& [name, e] : graph.entities()) {
    if (only != nullptr && only->count(name) == 0) continue;
    if (e.summary) continue;
    if (auto s = summarize("entity", name, e.descriptions)) entity_updates.emplace_back(name, *s);
  }
  std::vector<std::pair<EntityPair, std::string>> relation_updates;
  for (auto const& [pair, r] : graph.relations()) {
    if (only != nullptr && only->count(pair.first) == 0 && only->count(pair.second) == 0) continue;
    if (r.summary) continue;
    if (auto s = summarize("relationship", pair.first + " -- " + pair.second, r.Descriptions())) {
      relation_updates.emplace_back(pair, *s);
    }
  }
  for (auto& [name, s] : entity_updates) graph.SetEntitySummary(name, std::move(s));
  for (auto& [pair, s] : relation_updates) graph.SetRelationSummary(pair, std::move(s));
  report.entities_summarized = entity_updates.size();
  report.relations_summarized = relation_updates.size();
  return report;
}

InsertReport InsertIncremental(KnowledgeGraph& graph, Corpus& corpus, Document doc,
                               Gateway const& gateway, PromptCatalog const& prompts,
                               IndexConfig const& config) {
  if (corpus.Contains(doc.doc_id)) {
    throw Error(ErrorCode::kDuplicateDocument,
                "document already indexed: " + doc.doc_id + " (" + doc.title + ")");
  }
  InsertReport report;
  report.doc_id = doc.doc_id;
  auto units = ChunkDocument(doc, config.chunking);
  report.units = units.size();
  std::vector<TextUnit const*> ptrs;
  for (auto const& u : units) ptrs.push_back(&u);
  // Extract before touching any state so a gateway failure leaves the graph
  // and corpus unchanged.
  auto extractions = ExtractUnits(ptrs, gateway, prompts, config.workers);
  corpus.Add(std::move(doc), std::move(units));
  for (auto const& x : extractions) report.delta.Absorb(graph.Merge(x));
  std::set<std::string> touched = report.delta.entities_created;
  touched.insert(report.delta.entities_updated.begin(), report.delta.entities_updated.end());
  for (auto const& [a, b] : report.delta.relations_created) {
    touched.insert(a);
    touched.insert(b);
  }
  for (auto const& [a, b] : report.delta.relations_updated) {
    touched.insert(a);
    touched.insert(b);
  }
  report.augment = AugmentDescriptions(graph, gateway, prompts, config, &touched);
  return report;
}

}  // namespace tracegraph
