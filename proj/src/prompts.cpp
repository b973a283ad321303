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

#include "tracegraph/prompts.hpp"

#include <algorithm>

#include "tracegraph/error.hpp"
#include "tracegraph/util.hpp"

namespace tracegraph {

namespace {

bool IsIdentStart(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool IsIdent(char c) { return IsIdentStart(c) || (c >= '0' && c <= '9'); }

/// Length of a placeholder starting at tmpl[i] == '{', or 0.
std::size_t PlaceholderLength(std::string_view tmpl, std::size_t i) {
  if (i + 2 >= tmpl.size() || !IsIdentStart(tmpl[i + 1])) return 0;
  std::size_t j = i + 2;
  while (j < tmpl.size() && IsIdent(tmpl[j])) ++j;
  if (j < tmpl.size() && tmpl[j] == '}') return j - i + 1;
  return 0;
}

constexpr char kExtractTemplate[] = R"(-Goal-
Given a text document, identify all entities in the text and all relationships among the identified entities.

-Steps-
1. Identify all entities. For each identified entity, extract the following information:
- entity_name: Name of the entity, capitalized
- entity_type: A short type label for the entity
- entity_description: Comprehensive description of the entity's attributes and activities
Format each entity as ("entity"{tuple_delimiter}<entity_name>{tuple_delimiter}<entity_type>{tuple_delimiter}<entity_description>)

2. From the entities identified in step 1, identify all pairs of (source_entity, target_entity) that are *clearly related* to each other.
For each pair of related entities, extract the following information:
- source_entity: name of the source entity, as identified in step 1
- target_entity: name of the target entity, as identified in step 1
- relationship_description: explanation as to why you think the source entity and the target entity are related to each other
- relationship_strength: an integer from 1 to 10 indicating strength of the relationship
Format each relationship as ("relationship"{tuple_delimiter}<source_entity>{tuple_delimiter}<target_entity>{tuple_delimiter}<relationship_description>{tuple_delimiter}<relationship_strength>)

3. Return output as a single list of all the entities and relationships identified in steps 1 and 2. Use {record_delimiter} as the list delimiter.

4. When finished, output {completion_delimiter}

-Text-
{input_text}

Output:
)";

constexpr char kSummarizeTemplate[] = R"(You are given several descriptions of the same {item_kind}: {item_name}.
Write a single consolidated description that keeps every distinct fact and resolves wording differences. Do not add facts that are not in the descriptions.

Descriptions:
{descriptions}

Consolidated description:
)";

constexpr char kReportTemplate[] = R"(You are writing a report about a community of related entities in a scientific knowledge graph.
Summarize what the entities are, how they relate to each other, and which findings they support. Use only the information below.

Entities:
{entities}

Relationships:
{relations}

Report:
)";

constexpr char kKeywordsTemplate[] = R"(---Role---
You identify both high-level and low-level keywords in the user's query.

---Goal---
High-level keywords name overarching concepts or themes. Low-level keywords name specific entities, details, or concrete terms.

---Instructions---
Output the keywords as a JSON object with two keys:
- "high_level_keywords" for overarching concepts or themes
- "low_level_keywords" for specific entities or details
Example: {"high_level_keywords": ["protein turnover"], "low_level_keywords": ["APOE", "isoforms"]}

Query: {query}
Output:
)";

constexpr char kMapTemplate[] = R"(---Role---
You are a helpful assistant responding to questions about data in the tables provided.

---Goal---
Answer the question using only the community reports below, then rate how useful the reports are for answering it.
Respond with a JSON object of the form {"answer": "<answer text>", "score": <integer from 0 to 100>}.
A score of 0 means the reports contain nothing relevant to the question.

---Data tables---
{context}

---Question---
{query}
)";

constexpr char kReduceTemplate[] = R"(---Role---
You are a helpful assistant synthesizing reports from several analysts who each studied a different part of a dataset.

---Goal---
Write a single answer to the question that integrates the analyst reports below. The reports are ordered from most to least relevant. Drop information that is not relevant and do not invent facts.

---Analyst reports---
{intermediate_answers}

---Question---
{query}
)";

constexpr char kLocalAnswerTemplate[] = R"(---Role---
You are a helpful assistant responding to questions about the entities, relationships, and community reports provided.

---Data tables---
{context}

---Question---
{query}
)";

constexpr char kLightAnswerTemplate[] = R"(---Role---
You are a helpful assistant responding to questions using the knowledge graph entities and relationships provided.

---Knowledge graph data---
{context}

---Question---
{query}
)";

constexpr char kVectorAnswerTemplate[] = R"(---Role---
You are a helpful assistant responding to questions using the document excerpts provided.

---Document excerpts---
{context}

---Question---
{query}
)";

constexpr char kDirectAnswerTemplate[] = "{query}";

constexpr char kCiteTemplate[] = R"(Below is an answer followed by the numbered context elements that were given to the model that wrote it.
For each numbered answer sentence, list the context elements it draws on, one line per sentence, exactly in the form
CLAIM <sentence number>: ELEMENTS <element number>,<element number>,...
Omit sentences that use no context element.

---Answer sentences---
{claims}

---Context elements---
{context}
)";

constexpr char kJudgeComprehensivenessTemplate[] =
    R"(You are tasked with evaluating the comprehensiveness of two answers to a scientific question. Comprehensiveness is defined as how much detail the answer provides to cover all aspects and details of the question.

Here is the question: <question>{QUESTION}</question>

Here is the answer generated by the Graph RAG system:

```
<graph_rag_answer>
{GRAPH_RAG_ANSWER}
</graph_rag_answer>
```

Here is the answer generated by the Chat LLM model:

```
<chat_llm_answer>
{CHAT_LLM_ANSWER}
</chat_llm_answer>
```

Carefully analyze both answers, focusing on their comprehensiveness. Consider the following:

1. How thoroughly does each answer address all aspects of the question?
2. Which answer provides more relevant details and explanations?
3. Does either answer miss any important points related to the question?

Based on your analysis, choose the answer that demonstrates better comprehensiveness. Provide a brief explanation for your choice, highlighting the key factors that made the chosen answer more comprehensive.

Present your evaluation in the following format:

```
<evaluation>
<reasoning>
[Your explanation for why the chosen answer is more comprehensive]
</reasoning>
<choice>
[State which answer is more comprehensive: "Graph RAG" or "Chat LLM"]
</choice>
</evaluation>
```)";

constexpr char kJudgeEmpowermentTemplate[] =
    R"(You are tasked with evaluating the potential of using a graph RAG system for scientific question answering compared to a normal chat model. Your role is to act as a judge and determine which of two given answers better demonstrates empowerment. Empowerment is defined as: How well does the answer help the reader understand and make informed judgments about the topic?

Here is the question that was asked: <question>{QUESTION}</question>

Here is the answer generated by the Graph RAG system: <graph_rag_answer>{GRAPH_RAG_ANSWER}</graph_rag_answer>

Here is the answer generated by the Chat LLM model: <chat_llm_answer>{CHAT_LLM_ANSWER}</chat_llm_answer>

To evaluate the empowerment of these two answers:

1. Carefully read and analyze both answers.
2. Consider how well each answer helps the reader understand the topic.
3. Assess how effectively each answer enables the reader to make informed judgments about the topic.
4. Compare the two answers based on their empowerment potential.

After your evaluation, provide your reasoning and final judgment. Your response should include:

1. A brief explanation of why you believe one answer demonstrates better empowerment than the other.
2. Your final judgment on which answer is better in terms of empowerment.

Present your evaluation in the following format:

```
<evaluation>
<reasoning>
[Your explanation for why the chosen answer is better]
</reasoning>
<choice>
[State which answer is more empowerment for user: "Graph RAG" or "Chat LLM"]
</choice>
</evaluation>
```)";

// Diversity and directness follow the comprehensiveness layout with their
// own definitions.
constexpr char kJudgeDiversityTemplate[] =
    R"(You are tasked with evaluating the diversity of two answers to a scientific question. Diversity is defined as how varied and rich the answer is in providing different perspectives and insights on the question.

Here is the question: <question>{QUESTION}</question>

Here is the answer generated by the Graph RAG system:

```
<graph_rag_answer>
{GRAPH_RAG_ANSWER}
</graph_rag_answer>
```

Here is the answer generated by the Chat LLM model:

```
<chat_llm_answer>
{CHAT_LLM_ANSWER}
</chat_llm_answer>
```

Carefully analyze both answers, focusing on their diversity. Consider the following:

1. How many different perspectives does each answer offer on the question?
2. Which answer provides richer and more varied insights?
3. Does either answer overlook perspectives that are relevant to the question?

Based on your analysis, choose the answer that demonstrates better diversity. Provide a brief explanation for your choice, highlighting the key factors that made the chosen answer more diverse.

Present your evaluation in the following format:

```
<evaluation>
<reasoning>
[Your explanation for why the chosen answer is more diverse]
</reasoning>
<choice>
[State which answer is more diverse: "Graph RAG" or "Chat LLM"]
</choice>
</evaluation>
```)";

constexpr char kJudgeDirectnessTemplate[] =
    R"(You are tasked with evaluating the directness of two answers to a scientific question. Directness is defined as how specifically and clearly the answer addresses the question.

Here is the question: <question>{QUESTION}</question>

Here is the answer generated by the Graph RAG system:

```
<graph_rag_answer>
{GRAPH_RAG_ANSWER}
</graph_rag_answer>
```

Here is the answer generated by the Chat LLM model:

```
<chat_llm_answer>
{CHAT_LLM_ANSWER}
</chat_llm_answer>
```

Carefully analyze both answers, focusing on their directness. Consider the following:

1. How specifically does each answer respond to what the question asks?
2. Which answer states its main point more clearly?
3. Does either answer include peripheral material that was not asked for?

Based on your analysis, choose the answer that demonstrates better directness. Provide a brief explanation for your choice, highlighting the key factors that made the chosen answer more direct.

Present your evaluation in the following format:

```
<evaluation>
<reasoning>
[Your explanation for why the chosen answer is more direct]
</reasoning>
<choice>
[State which answer is more direct: "Graph RAG" or "Chat LLM"]
</choice>
</evaluation>
```)";

}  // namespace

std::string RenderTemplate(std::string_view tmpl,
                           std::map<std::string, std::string, std::less<>> const& values) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out.push_back('{');
      i += 2;
    } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out.push_back('}');
      i += 2;
    } else if (c == '{') {
      if (auto len = PlaceholderLength(tmpl, i); len != 0) {
        auto name = tmpl.substr(i + 1, len - 2);
        auto it = values.find(name);
        if (it == values.end()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "template placeholder {" + std::string(name) + "} has no value");
        }
        out += it->second;
        i += len;
      } else {
        out.push_back(c);
        ++i;
      }
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> TemplatePlaceholders(std::string_view tmpl) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      ++i;
      continue;
    }
    if (tmpl[i] != '{') continue;
    if (auto len = PlaceholderLength(tmpl, i); len != 0) {
      std::string name(tmpl.substr(i + 1, len - 2));
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      i += len - 1;
    }
  }
  return names;
}

PromptCatalog PromptCatalog::Default() {
  PromptCatalog c;
  c.templates_.emplace(kExtract, kExtractTemplate);
  c.templates_.emplace(kSummarizeDescriptions, kSummarizeTemplate);
  c.templates_.emplace(kCommunityReport, kReportTemplate);
  c.templates_.emplace(kKeywords, kKeywordsTemplate);
  c.templates_.emplace(kMap, kMapTemplate);
  c.templates_.emplace(kReduce, kReduceTemplate);
  c.templates_.emplace(kLocalAnswer, kLocalAnswerTemplate);
  c.templates_.emplace(kLightAnswer, kLightAnswerTemplate);
  c.templates_.emplace(kVectorAnswer, kVectorAnswerTemplate);
  c.templates_.emplace(kDirectAnswer, kDirectAnswerTemplate);
  c.templates_.emplace(kCite, kCiteTemplate);
  c.templates_.emplace(kJudgeComprehensiveness, kJudgeComprehensivenessTemplate);
  c.templates_.emplace(kJudgeDiversity, kJudgeDiversityTemplate);
  c.templates_.emplace(kJudgeEmpowerment, kJudgeEmpowermentTemplate);
  c.templates_.emplace(kJudgeDirectness, kJudgeDirectnessTemplate);
  return c;
}

PromptCatalog PromptCatalog::Load(std::filesystem::path const& dir) {
  auto catalog = Default();
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "prompt catalog directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (auto const& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (auto const& f : files) catalog.Set(f.stem().string(), ReadFile(f));
  auto delim = dir / "delimiters.json";
  if (std::filesystem::exists(delim)) {
    auto j = Json::parse(ReadFile(delim));
    catalog.delimiters.tuple = j.value("tuple", catalog.delimiters.tuple);
    catalog.delimiters.record = j.value("record", catalog.delimiters.record);
    catalog.delimiters.completion = j.value("completion", catalog.delimiters.completion);
  }
  return catalog;
}

void PromptCatalog::Save(std::filesystem::path const& dir) const {
  for (auto const& [name, text] : templates_) WriteFile(dir / (name + ".txt"), text);
  Json j;
  j["tuple"] = delimiters.tuple;
  j["record"] = delimiters.record;
  j["completion"] = delimiters.completion;
  WriteFile(dir / "delimiters.json", j.dump(2) + "\n");
}

std::string const& PromptCatalog::Template(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kNotFound, "no prompt template named '" + std::string(name) + "'");
  }
  return it->second;
}

void PromptCatalog::Set(std::string name, std::string text) {
  templates_[std::move(name)] = std::move(text);
}

std::vector<std::string> PromptCatalog::Names() const {
  std::vector<std::string> out;
  for (auto const& [k, v] : templates_) out.push_back(k);
  return out;
}

std::string PromptCatalog::Render(
    std::string_view name, std::map<std::string, std::string, std::less<>> const& values) const {
  return RenderTemplate(Template(name), values);
}

}  // namespace tracegraph
