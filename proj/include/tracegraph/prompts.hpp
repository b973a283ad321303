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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tracegraph {

/// Named prompt templates. Placeholders are `{identifier}`; `{{` and `}}`
/// produce literal braces. Any other brace is copied through unchanged, so
/// JSON examples inside templates need no escaping.
class PromptCatalog {
 public:
  static inline constexpr std::string_view kExtract = "extract";
  static inline constexpr std::string_view kSummarizeDescriptions = "summarize_descriptions";
  static inline constexpr std::string_view kCommunityReport = "community_report";
  static inline constexpr std::string_view kKeywords = "keywords";
  static inline constexpr std::string_view kMap = "global_map";
  static inline constexpr std::string_view kReduce = "global_reduce";
  static inline constexpr std::string_view kLocalAnswer = "local_answer";
  static inline constexpr std::string_view kLightAnswer = "light_answer";
  static inline constexpr std::string_view kVectorAnswer = "vector_answer";
  static inline constexpr std::string_view kDirectAnswer = "direct_answer";
  static inline constexpr std::string_view kCite = "cite";
  static inline constexpr std::string_view kJudgeComprehensiveness = "judge_comprehensiveness";
  static inline constexpr std::string_view kJudgeDiversity = "judge_diversity";
  static inline constexpr std::string_view kJudgeEmpowerment = "judge_empowerment";
  static inline constexpr std::string_view kJudgeDirectness = "judge_directness";

  /// The built-in templates.
  static PromptCatalog Default();

  /// Default catalog overlaid with every `<name>.txt` found in `dir`.
  static PromptCatalog Load(std::filesystem::path const& dir);
  void Save(std::filesystem::path const& dir) const;

  /// Throws kNotFound for unknown names.
  std::string const& Template(std::string_view name) const;
  void Set(std::string name, std::string text);
  std::vector<std::string> Names() const;

  /// Fills the named template; throws kInvalidArgument if a placeholder has
  /// no value.
  std::string Render(std::string_view name,
                     std::map<std::string, std::string, std::less<>> const& values) const;

  /// Delimiters of the extraction grammar, substituted into the extraction
  /// template and used by the parser.
  struct Delimiters {
    std::string tuple = "<|>";
    std::string record = "##";
    std::string completion = "<|COMPLETE|>";
  };
  Delimiters delimiters;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

/// Single-pass placeholder substitution (see PromptCatalog).
std::string RenderTemplate(std::string_view tmpl,
                           std::map<std::string, std::string, std::less<>> const& values);

/// Placeholder names referenced by a template, in order of first use.
std::vector<std::string> TemplatePlaceholders(std::string_view tmpl);

}  // namespace tracegraph
