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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracegraph/corpus.hpp"
#include "tracegraph/llm.hpp"
#include "tracegraph/prompts.hpp"
#include "tracegraph/retrieval.hpp"

namespace tracegraph {

/// Ordered from least to most precise.
enum class TraceLevel { kNonTraceable = 0, kClusterLevel = 1, kMultiParagraph = 2, kSingleParagraph = 3 };
std::string_view TraceLevelName(TraceLevel level);
TraceLevel ParseTraceLevel(std::string_view name);

TraceLevel ClassifyElement(ContextElement const& element);
/// Weakest element level; an empty bundle is NonTraceable.
TraceLevel ClassifyBundle(ContextBundle const& bundle);
TraceLevel ClassifyTrace(Answer const& answer);

struct SourceSpan {
  std::string unit_id;
  std::string doc_id;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  bool operator==(SourceSpan const&) const = default;
};

struct ProvenanceLink {
  std::string ref_id;
  std::set<std::string> unit_ids;
  std::vector<SourceSpan> spans;
};

struct ProvenanceChain {
  std::string answer_id;
  std::vector<ProvenanceLink> links;
  Json ToJson() const;
};

/// Resolves each context element to document byte spans. Throws
/// kDanglingProvenance naming the first unit id that does not resolve.
ProvenanceChain ResolveProvenance(Answer const& answer, Corpus const& corpus);

/// One ledger record per link.
std::vector<Json> ProvenanceLedgerRecords(ProvenanceChain const& chain, TraceLevel level);
void AppendProvenanceLedger(std::filesystem::path const& path, ProvenanceChain const& chain,
                            TraceLevel level);

struct Claim {
  std::size_t index = 0;  // 1-based sentence number
  Span span;              // byte range in the answer text
  std::vector<std::string> ref_ids;
};

struct CitationMap {
  std::string answer_id;
  std::vector<Claim> claims;
  std::vector<std::string> diagnostics;
  Json ToJson() const;
  static CitationMap FromJson(Json const& j);
};

/// Claims are the answer's sentences, numbered from 1.
std::vector<Span> AnswerClaims(std::string_view answer_text);

std::string RenderCitePrompt(PromptCatalog const& prompts, Answer const& answer);

/// Line-anchored parse of `CLAIM <n>: ELEMENTS <i,j,...>` records. Out of
/// range claims or elements are dropped with a diagnostic.
CitationMap ParseCitationReply(std::string_view reply, Answer const& answer);

/// Asks the gateway which context elements each answer sentence draws on.
/// Throws kInvalidArgument when the answer has no context.
CitationMap AttributeCitations(Answer const& answer, Gateway const& gateway,
                               PromptCatalog const& prompts);

}  // namespace tracegraph
