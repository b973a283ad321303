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

#include "tracegraph/traceability.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "tracegraph/error.hpp"

namespace tracegraph {

std::string_view TraceLevelName(TraceLevel level) {
  switch (level) {
    case TraceLevel::kNonTraceable: return "NonTraceable";
    case TraceLevel::kClusterLevel: return "ClusterLevel";
    case TraceLevel::kMultiParagraph: return "MultiParagraph";
    case TraceLevel::kSingleParagraph: return "SingleParagraph";
  }
  return "NonTraceable";
}

TraceLevel ParseTraceLevel(std::string_view name) {
  for (auto l : {TraceLevel::kNonTraceable, TraceLevel::kClusterLevel, TraceLevel::kMultiParagraph,
                 TraceLevel::kSingleParagraph}) {
    if (TraceLevelName(l) == name) return l;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown trace level '" + std::string(name) + "'");
}

TraceLevel ClassifyElement(ContextElement const& element) {
  if (element.source_unit_ids.empty()) return TraceLevel::kNonTraceable;
  if (element.kind == ContextKind::kReport) return TraceLevel::kClusterLevel;
  return element.source_unit_ids.size() == 1 ? TraceLevel::kSingleParagraph
                                             : TraceLevel::kMultiParagraph;
}

TraceLevel ClassifyBundle(ContextBundle const& bundle) {
  if (bundle.elements.empty()) return TraceLevel::kNonTraceable;
  auto level = TraceLevel::kSingleParagraph;
  for (auto const& e : bundle.elements) level = std::min(level, ClassifyElement(e));
  return level;
}

TraceLevel ClassifyTrace(Answer const& answer) { return ClassifyBundle(answer.context); }

Json ProvenanceChain::ToJson() const {
  Json j;
  j["answer_id"] = answer_id;
  j["links"] = Json::array();
  for (auto const& link : links) {
    Json l;
    l["ref_id"] = link.ref_id;
    l["unit_ids"] = link.unit_ids;
    l["spans"] = Json::array();
    for (auto const& s : link.spans) {
      l["spans"].push_back({{"unit_id", s.unit_id},
                            {"doc_id", s.doc_id},
                            {"char_start", s.char_start},
                            {"char_end", s.char_end}});
    }
    j["links"].push_back(std::move(l));
  }
  return j;
}

ProvenanceChain ResolveProvenance(Answer const& answer, Corpus const& corpus) {
  ProvenanceChain chain;
  chain.answer_id = answer.answer_id;
  for (auto const& e : answer.context.elements) {
    ProvenanceLink link;
    link.ref_id = e.ref_id;
    link.unit_ids = e.source_unit_ids;
    for (auto const& id : e.source_unit_ids) {
      auto const* unit = corpus.FindUnit(id);
      if (unit == nullptr) {
        throw Error(ErrorCode::kDanglingProvenance,
                    "element " + e.ref_id + " references missing unit " + id);
      }
      auto const* doc = corpus.FindDocument(unit->doc_id);
      if (doc == nullptr || unit->char_start > unit->char_end ||
          unit->char_end > doc->body.size()) {
        throw Error(ErrorCode::kDanglingProvenance,
                    "unit " + id + " does not resolve to a span of document " + unit->doc_id);
      }
      link.spans.push_back({id, unit->doc_id, unit->char_start, unit->char_end});
    }
    chain.links.push_back(std::move(link));
  }
  return chain;
}

std::vector<Json> ProvenanceLedgerRecords(ProvenanceChain const& chain, TraceLevel level) {
  std::vector<Json> out;
  auto full = chain.ToJson();
  for (auto const& link : full["links"]) {
    Json r;
    r["answer_id"] = chain.answer_id;
    r["ref_id"] = link["ref_id"];
    r["unit_ids"] = link["unit_ids"];
    r["spans"] = link["spans"];
    r["trace_level"] = TraceLevelName(level);
    out.push_back(std::move(r));
  }
  return out;
}

void AppendProvenanceLedger(std::filesystem::path const& path, ProvenanceChain const& chain,
                            TraceLevel level) {
  for (auto const& r : ProvenanceLedgerRecords(chain, level)) AppendJsonLine(path, r);
}

Json CitationMap::ToJson() const {
  Json j;
  j["answer_id"] = answer_id;
  j["claims"] = Json::array();
  for (auto const& c : claims) {
    j["claims"].push_back({{"index", c.index},
                           {"span", {c.span.begin, c.span.end}},
                           {"ref_ids", c.ref_ids}});
  }
  j["diagnostics"] = diagnostics;
  return j;
}

CitationMap CitationMap::FromJson(Json const& j) {
  CitationMap m;
  m.answer_id = j.at("answer_id").get<std::string>();
  for (auto const& c : j.at("claims")) {
    Claim claim;
    claim.index = c.at("index").get<std::size_t>();
    claim.span = {c.at("span").at(0).get<std::size_t>(), c.at("span").at(1).get<std::size_t>()};
    claim.ref_ids = c.at("ref_ids").get<std::vector<std::string>>();
    m.claims.push_back(std::move(claim));
  }
  m.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return m;
}

std::vector<Span> AnswerClaims(std::string_view answer_text) { return SplitSentences(answer_text); }

std::string RenderCitePrompt(PromptCatalog const& prompts, Answer const& answer) {
  std::string claims;
  auto spans = AnswerClaims(answer.text);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    claims += std::to_string(i + 1) + ". " +
              answer.text.substr(spans[i].begin, spans[i].end - spans[i].begin) + "\n";
  }
  return prompts.Render(PromptCatalog::kCite,
                        {{"claims", claims}, {"context", RenderContext(answer.context.elements)}});
}

CitationMap ParseCitationReply(std::string_view reply, Answer const& answer) {
  static std::regex const kLine(R"(^\s*CLAIM\s+(\d+)\s*:\s*ELEMENTS?\s+([0-9,\s]*[0-9])\s*$)",
                                std::regex::icase);
  CitationMap map;
  map.answer_id = answer.answer_id;
  auto spans = AnswerClaims(answer.text);
  auto const& elements = answer.context.elements;

  std::map<std::size_t, std::vector<std::string>> links;
  std::size_t records = 0;
  std::size_t pos = 0;
  std::string text(reply);
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!std::regex_match(line, m, kLine)) continue;
    ++records;
    std::size_t claim = std::stoul(m[1].str());
    if (claim == 0 || claim > spans.size()) {
      map.diagnostics.push_back("claim " + m[1].str() + " is out of range (answer has " +
                                std::to_string(spans.size()) + " sentences)");
      continue;
    }
    std::string list = m[2].str();
    std::regex const kNum(R"(\d+)");
    for (auto it = std::sregex_iterator(list.begin(), list.end(), kNum); it != std::sregex_iterator();
         ++it) {
      std::size_t e = std::stoul(it->str());
      if (e == 0 || e > elements.size()) {
        map.diagnostics.push_back("claim " + std::to_string(claim) + " cites element " + it->str() +
                                  " out of range (context has " +
                                  std::to_string(elements.size()) + " elements)");
        continue;
      }
      auto& refs = links[claim];
      auto const& ref = elements[e - 1].ref_id;
      if (std::find(refs.begin(), refs.end(), ref) == refs.end()) refs.push_back(ref);
    }
  }
  if (records == 0 && !Trim(reply).empty()) {
    map.diagnostics.push_back("citation reply contains no CLAIM records");
  }
  for (auto& [claim, refs] : links) {
    if (refs.empty()) continue;
    map.claims.push_back({claim, spans[claim - 1], std::move(refs)});
  }
  return map;
}

CitationMap AttributeCitations(Answer const& answer, Gateway const& gateway,
                               PromptCatalog const& prompts) {
  if (answer.context.elements.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "answer " + answer.answer_id + " has no context to attribute citations to");
  }
  std::vector<std::string> payload{answer.text};
  for (auto const& e : answer.context.elements) payload.push_back(e.text);
  auto request = MakeUserRequest(RenderCitePrompt(prompts, answer), task::kCite, std::move(payload));
  return ParseCitationReply(gateway.Complete(request).text, answer);
}

}  // namespace tracegraph
