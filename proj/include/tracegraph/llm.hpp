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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracegraph/util.hpp"

namespace tracegraph {

enum class Role { kSystem, kUser, kAssistant };
std::string_view RoleName(Role role);

struct Message {
  Role role = Role::kUser;
  std::string text;
};

/// Task tags let offline providers recognise what a request is for. Remote
/// providers ignore them; they never participate in the request digest.
namespace task {
inline constexpr std::string_view kExtract = "extract";
inline constexpr std::string_view kSummarize = "summarize";
inline constexpr std::string_view kReport = "report";
inline constexpr std::string_view kKeywords = "keywords";
inline constexpr std::string_view kMap = "map";
inline constexpr std::string_view kReduce = "reduce";
inline constexpr std::string_view kAnswer = "answer";
inline constexpr std::string_view kJudge = "judge";
inline constexpr std::string_view kCite = "cite";
}  // namespace task

struct ChatRequest {
  std::vector<Message> messages;
  std::size_t max_output_tokens = 1024;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  std::string task;
  /// Raw material the prompt was rendered from (chunk text, query, items).
  std::vector<std::string> payload;

  /// Throws kInvalidArgument unless there is at least one user message and a
  /// positive output budget.
  void Validate() const;
};

ChatRequest MakeUserRequest(std::string prompt, std::string_view task,
                            std::vector<std::string> payload = {});

struct ChatResponse {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::string provider_tag;
};

/// Hex SHA-256 over the role-tagged message list. Any byte change in any
/// message changes the digest.
std::string RequestDigest(ChatRequest const& request);

enum class ProviderKind { kRemote, kScripted, kRuleBased };
std::string_view ProviderKindName(ProviderKind kind);
ProviderKind ParseProviderKind(std::string_view name);

struct DictionaryTerm {
  std::string name;
  std::string type_label;
};

/// Behaviour table for the rule-based provider.
struct RuleConfig {
  std::vector<DictionaryTerm> terms;
  /// Lower-cased trigger phrase -> high-level concepts.
  std::map<std::string, std::vector<std::string>> concepts;
  std::set<std::string> stopwords;
  /// Metric name -> choice text; "*" is the fallback.
  std::map<std::string, std::string> verdicts{{"*", "Graph RAG"}};

  static std::set<std::string> DefaultStopwords();
  static RuleConfig FromJson(Json const& j);
  Json ToJson() const;
};

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kRuleBased;
  std::optional<std::string> endpoint;
  std::string model_name = "rule-based";
  double price_per_million_input = 0.0;
  double price_per_million_output = 0.0;
  std::size_t max_inflight = 4;
  std::size_t retry_limit = 3;
  std::chrono::milliseconds backoff_initial{200};
  std::chrono::milliseconds backoff_max{5000};
  std::optional<std::string> api_token;
  std::optional<std::string> script_path;
  RuleConfig rules;

  void Validate() const;
  static ProviderConfig FromJson(Json const& j);
  Json ToJson() const;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse Complete(ChatRequest const& request) = 0;
};

class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::map<std::string, std::string> table)
      : table_(std::move(table)) {}

  /// Loads line-delimited {request_digest, response_text} records.
  static ScriptedProvider FromFile(std::filesystem::path const& path);

  /// Throws kScriptMiss naming the digest when no entry exists.
  ChatResponse Complete(ChatRequest const& request) override;

 private:
  std::map<std::string, std::string> table_;
};

class RuleBasedProvider final : public Provider {
 public:
  explicit RuleBasedProvider(RuleConfig rules) : rules_(std::move(rules)) {}
  ChatResponse Complete(ChatRequest const& request) override;

  RuleConfig const& rules() const { return rules_; }

 private:
  std::string Extract(ChatRequest const& request) const;
  std::string Summarize(ChatRequest const& request) const;
  std::string Keywords(ChatRequest const& request) const;
  std::string MapAnswer(ChatRequest const& request) const;
  std::string Answer(ChatRequest const& request) const;
  std::string Judge(ChatRequest const& request) const;
  std::string Cite(ChatRequest const& request) const;

  RuleConfig rules_;
};

/// Non-stopword word tokens of `text` in first-seen order, case preserved,
/// deduplicated case-insensitively.
std::vector<std::string> ContentWords(std::string_view text,
                                      std::set<std::string> const& stopwords);

struct HttpReply {
  int status = 0;
  std::string body;
};

/// Minimal POST transport so tests can substitute an instrumented fake.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws std::runtime_error on connection-level failures.
  virtual HttpReply Post(std::string const& url,
                         std::vector<std::pair<std::string, std::string>> const& headers,
                         std::string const& body) = 0;
};

std::unique_ptr<HttpTransport> MakeHttpTransport();

class RemoteProvider final : public Provider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RemoteProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                 Sleeper sleeper = {});
  ChatResponse Complete(ChatRequest const& request) override;

  static Json BuildRequestBody(ChatRequest const& request, ProviderConfig const& config);
  static ChatResponse ParseResponseBody(std::string const& body, std::string const& tag);

 private:
  ProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t inflight_ = 0;
};

struct UsageTotals {
  std::size_t calls = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double cost = 0.0;

  void Add(UsageTotals const& other);
  Json ToJson() const;
  static UsageTotals FromJson(Json const& j);
};

struct UsageEntry {
  std::uint64_t sequence = 0;
  std::string provider_tag;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double price_per_million_input = 0.0;
  double price_per_million_output = 0.0;

  double Cost() const;
};

/// Append-only record of every response issued in a session.
class UsageLedger {
 public:
  void Append(UsageEntry entry);
  /// Entries in sequence order.
  std::vector<UsageEntry> Entries() const;

 private:
  mutable std::mutex mu_;
  std::uint64_t next_sequence_ = 0;
  std::vector<UsageEntry> entries_;
};

std::map<std::string, UsageTotals> UsageReport(std::vector<UsageEntry> const& entries);
std::map<std::string, UsageTotals> UsageReport(UsageLedger const& ledger);

/// Shareable front door to one configured provider. Every response is
/// recorded in the ledger.
class Gateway {
 public:
  Gateway(ProviderConfig config, std::shared_ptr<Provider> provider,
          std::shared_ptr<UsageLedger> ledger = nullptr);

  /// Builds the provider described by `config` (remote uses the HTTP
  /// transport; scripted loads `script_path`).
  static std::shared_ptr<Gateway> FromConfig(ProviderConfig const& config,
                                             std::shared_ptr<UsageLedger> ledger = nullptr);

  ChatResponse Complete(ChatRequest const& request) const;
  /// Same, also accumulating the call into `usage`.
  ChatResponse Complete(ChatRequest const& request, UsageTotals& usage) const;

  ProviderConfig const& config() const { return config_; }
  UsageLedger& ledger() const { return *ledger_; }

 private:
  ProviderConfig config_;
  std::shared_ptr<Provider> provider_;
  std::shared_ptr<UsageLedger> ledger_;
};

}  // namespace tracegraph
