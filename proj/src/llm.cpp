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

#include "tracegraph/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "tracegraph/corpus.hpp"
#include "tracegraph/error.hpp"

namespace tracegraph {

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

void ChatRequest::Validate() const {
  bool has_user = std::any_of(messages.begin(), messages.end(),
                              [](Message const& m) { return m.role == Role::kUser; });
  if (!has_user) throw Error(ErrorCode::kInvalidArgument, "chat request has no user message");
  if (max_output_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be positive");
  }
  if (temperature < 0) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
}

ChatRequest MakeUserRequest(std::string prompt, std::string_view task_tag,
                            std::vector<std::string> payload) {
  ChatRequest r;
  r.messages.push_back({Role::kUser, std::move(prompt)});
  r.task = std::string(task_tag);
  r.payload = std::move(payload);
  return r;
}

std::string RequestDigest(ChatRequest const& request) {
  // Length-prefixed so message boundaries cannot be forged by content.
  std::string canonical;
  for (auto const& m : request.messages) {
    canonical += RoleName(m.role);
    canonical += ':';
    canonical += std::to_string(m.text.size());
    canonical += ':';
    canonical += m.text;
    canonical += '\n';
  }
  return Sha256Hex(canonical);
}

std::string_view ProviderKindName(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kRemote: return "remote";
    case ProviderKind::kScripted: return "scripted";
    case ProviderKind::kRuleBased: return "rule-based";
  }
  return "rule-based";
}

ProviderKind ParseProviderKind(std::string_view name) {
  if (name == "remote") return ProviderKind::kRemote;
  if (name == "scripted") return ProviderKind::kScripted;
  if (name == "rule-based") return ProviderKind::kRuleBased;
  throw Error(ErrorCode::kInvalidArgument, "unknown provider kind: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Configuration

std::set<std::string> RuleConfig::DefaultStopwords() {
  return {"a",     "about", "all",   "an",    "and",   "any",   "are",  "as",
          "at",    "be",    "been",  "between", "by",  "can",   "could", "did",
          "do",    "does",  "for",   "from",  "has",   "have",  "how",  "i",
          "in",    "into",  "is",    "it",    "its",   "me",    "more", "most",
          "of",    "on",    "one",   "or",    "other", "please", "s",   "should",
          "so",    "some",  "such",  "t",     "tell",  "than",  "that", "the",
          "their", "them",  "then",  "there", "these", "they",  "this", "those",
          "to",    "up",    "was",   "we",    "were",  "what",  "when", "where",
          "which", "while", "who",   "whom",  "why",   "will",  "with", "would",
          "you",   "your"};
}

RuleConfig RuleConfig::FromJson(Json const& j) {
  RuleConfig r;
  r.stopwords = DefaultStopwords();
  if (j.contains("terms")) {
    for (auto const& t : j.at("terms")) {
      if (t.is_string()) {
        r.terms.push_back({t.get<std::string>(), "CONCEPT"});
      } else {
        r.terms.push_back({t.at("name").get<std::string>(), t.value("type", "CONCEPT")});
      }
    }
  }
  if (j.contains("concepts")) {
    for (auto const& [k, v] : j.at("concepts").items()) {
      r.concepts[ToLowerAscii(k)] = v.get<std::vector<std::string>>();
    }
  }
  if (j.contains("stopwords")) {
    r.stopwords.clear();
    for (auto const& s : j.at("stopwords")) r.stopwords.insert(ToLowerAscii(s.get<std::string>()));
  }
  if (j.contains("verdicts")) {
    r.verdicts.clear();
    for (auto const& [k, v] : j.at("verdicts").items()) r.verdicts[k] = v.get<std::string>();
  }
  return r;
}

Json RuleConfig::ToJson() const {
  Json j;
  j["terms"] = Json::array();
  for (auto const& t : terms) j["terms"].push_back({{"name", t.name}, {"type", t.type_label}});
  j["concepts"] = Json::object();
  for (auto const& [k, v] : concepts) j["concepts"][k] = v;
  j["verdicts"] = Json::object();
  for (auto const& [k, v] : verdicts) j["verdicts"][k] = v;
  return j;
}

void ProviderConfig::Validate() const {
  if (kind == ProviderKind::kRemote && (!endpoint || endpoint->empty())) {
    throw Error(ErrorCode::kInvalidArgument, "remote provider requires an endpoint");
  }
  if (kind == ProviderKind::kScripted && (!script_path || script_path->empty())) {
    throw Error(ErrorCode::kInvalidArgument, "scripted provider requires script_path");
  }
  if (price_per_million_input < 0 || price_per_million_output < 0) {
    throw Error(ErrorCode::kInvalidArgument, "prices must be non-negative");
  }
  if (max_inflight == 0) throw Error(ErrorCode::kInvalidArgument, "max_inflight must be positive");
}

ProviderConfig ProviderConfig::FromJson(Json const& j) {
  ProviderConfig c;
  c.kind = ParseProviderKind(j.value("kind", std::string("rule-based")));
  if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
  c.model_name = j.value("model_name", std::string(ProviderKindName(c.kind)));
  c.price_per_million_input = j.value("price_per_million_input", 0.0);
  c.price_per_million_output = j.value("price_per_million_output", 0.0);
  c.max_inflight = j.value("max_inflight", std::size_t{4});
  c.retry_limit = j.value("retry_limit", std::size_t{3});
  c.backoff_initial = std::chrono::milliseconds(j.value("backoff_initial_ms", 200));
  c.backoff_max = std::chrono::milliseconds(j.value("backoff_max_ms", 5000));
  if (j.contains("script_path")) c.script_path = j.at("script_path").get<std::string>();
  if (j.contains("rules")) {
    c.rules = RuleConfig::FromJson(j.at("rules"));
  } else {
    c.rules.stopwords = RuleConfig::DefaultStopwords();
  }
  c.Validate();
  return c;
}

Json ProviderConfig::ToJson() const {
  Json j;
  j["kind"] = ProviderKindName(kind);
  if (endpoint) j["endpoint"] = *endpoint;
  j["model_name"] = model_name;
  j["price_per_million_input"] = price_per_million_input;
  j["price_per_million_output"] = price_per_million_output;
  j["max_inflight"] = max_inflight;
  j["retry_limit"] = retry_limit;
  j["backoff_initial_ms"] = backoff_initial.count();
  j["backoff_max_ms"] = backoff_max.count();
  if (script_path) j["script_path"] = *script_path;
  if (kind == ProviderKind::kRuleBased) j["rules"] = rules.ToJson();
  return j;
}

namespace {

std::size_t PromptTokens(ChatRequest const& request) {
  std::size_t n = 0;
  for (auto const& m : request.messages) n += CountTokens(m.text);
  return n;
}

ChatResponse MakeResponse(ChatRequest const& request, std::string text, std::string tag) {
  ChatResponse r;
  r.prompt_tokens = PromptTokens(request);
  r.completion_tokens = CountTokens(text);
  r.text = std::move(text);
  r.provider_tag = std::move(tag);
  return r;
}

/// Cuts `text` after its `max_tokens`-th token.
std::string TruncateTokens(std::string_view text, std::size_t max_tokens) {
  auto tokens = DefaultTokenizer().Tokenize(text);
  if (tokens.size() <= max_tokens) return std::string(text);
  if (max_tokens == 0) return {};
  return std::string(text.substr(0, tokens[max_tokens - 1].end));
}

bool IsAlnum(char c) {
  auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

/// Case-insensitive whole-word search.
bool ContainsWord(std::string_view haystack_lower, std::string_view needle_lower) {
  if (needle_lower.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack_lower.find(needle_lower, pos)) != std::string_view::npos) {
    bool left_ok = pos == 0 || !IsAlnum(haystack_lower[pos - 1]);
    std::size_t end = pos + needle_lower.size();
    bool right_ok = end == haystack_lower.size() || !IsAlnum(haystack_lower[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

/// Removes the extraction grammar's delimiters from free text.
std::string Sanitize(std::string_view text) {
  std::string s = CollapseWhitespace(text);
  for (std::string_view bad : {"<|>", "##", "<|COMPLETE|>"}) {
    std::size_t pos;
    while ((pos = s.find(bad)) != std::string::npos) s.replace(pos, bad.size(), " ");
  }
  std::replace(s.begin(), s.end(), '(', '[');
  std::replace(s.begin(), s.end(), ')', ']');
  return CollapseWhitespace(s);
}

std::string JoinItems(std::vector<std::string> const& items, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < items.size(); ++i) {
    auto t = CollapseWhitespace(items[i]);
    if (t.empty()) continue;
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

std::vector<std::string> ContentWords(std::string_view text,
                                      std::set<std::string> const& stopwords) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto const& tok : DefaultTokenizer().Tokenize(text)) {
    auto word = std::string(text.substr(tok.begin, tok.end - tok.begin));
    if (!IsAlnum(word.front())) continue;
    auto lower = ToLowerAscii(word);
    if (stopwords.count(lower) != 0 || !seen.insert(lower).second) continue;
    out.push_back(std::move(word));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedProvider ScriptedProvider::FromFile(std::filesystem::path const& path) {
  std::map<std::string, std::string> table;
  for (auto const& j : ReadJsonLines(path)) {
    table[j.at("request_digest").get<std::string>()] = j.at("response_text").get<std::string>();
  }
  return ScriptedProvider(std::move(table));
}

ChatResponse ScriptedProvider::Complete(ChatRequest const& request) {
  auto digest = RequestDigest(request);
  auto it = table_.find(digest);
  if (it == table_.end()) {
    throw Error(ErrorCode::kScriptMiss, "no scripted response for request digest " + digest +
                                            " (task '" + request.task + "')");
  }
  return MakeResponse(request, it->second, "scripted");
}

// ---------------------------------------------------------------------------
// Rule-based

ChatResponse RuleBasedProvider::Complete(ChatRequest const& request) {
  std::string text;
  std::string_view t = request.task;
  if (t == task::kExtract) {
    text = Extract(request);
  } else if (t == task::kSummarize || t == task::kReport) {
    text = Summarize(request);
  } else if (t == task::kKeywords) {
    text = Keywords(request);
  } else if (t == task::kMap) {
    text = MapAnswer(request);
  } else if (t == task::kReduce || t == task::kAnswer) {
    text = Answer(request);
  } else if (t == task::kJudge) {
    text = Judge(request);
  } else if (t == task::kCite) {
    text = Cite(request);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "rule-based provider cannot handle task '" + request.task + "'");
  }
  return MakeResponse(request, std::move(text), "rule-based");
}

std::string RuleBasedProvider::Extract(ChatRequest const& request) const {
  std::string_view chunk = request.payload.empty() ? std::string_view{} : request.payload[0];
  auto lower = ToLowerAscii(chunk);
  auto sentences = SplitSentences(chunk);

  struct Found {
    DictionaryTerm const* term;
    std::vector<std::size_t> sentence_ids;
  };
  std::vector<Found> found;
  for (auto const& term : rules_.terms) {
    auto needle = ToLowerAscii(term.name);
    if (!ContainsWord(lower, needle)) continue;
    Found f{&term, {}};
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      auto sent = std::string_view(lower).substr(sentences[s].begin,
                                                 sentences[s].end - sentences[s].begin);
      if (ContainsWord(sent, needle)) f.sentence_ids.push_back(s);
    }
    found.push_back(std::move(f));
  }

  auto sentence_text = [&](std::size_t s) {
    return Sanitize(chunk.substr(sentences[s].begin, sentences[s].end - sentences[s].begin));
  };

  std::vector<std::string> records;
  for (auto const& f : found) {
    std::string desc = f.sentence_ids.empty() ? "Mentioned in the text."
                                              : sentence_text(f.sentence_ids.front());
    records.push_back("(\"entity\"<|>" + Sanitize(f.term->name) + "<|>" +
                      Sanitize(f.term->type_label) + "<|>" + desc + ")");
  }
  for (std::size_t a = 0; a < found.size(); ++a) {
    for (std::size_t b = a + 1; b < found.size(); ++b) {
      std::vector<std::size_t> shared;
      std::set_intersection(found[a].sentence_ids.begin(), found[a].sentence_ids.end(),
                            found[b].sentence_ids.begin(), found[b].sentence_ids.end(),
                            std::back_inserter(shared));
      if (shared.empty()) continue;
      auto strength = std::min<std::size_t>(10, shared.size());
      records.push_back("(\"relationship\"<|>" + Sanitize(found[a].term->name) + "<|>" +
                        Sanitize(found[b].term->name) + "<|>" + sentence_text(shared.front()) +
                        "<|>" + std::to_string(strength) + ")");
    }
  }
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i != 0) out += "##";
    out += records[i];
  }
  out += "<|COMPLETE|>";
  return out;
}

std::string RuleBasedProvider::Summarize(ChatRequest const& request) const {
  return TruncateTokens(JoinItems(request.payload, 0), request.max_output_tokens);
}

std::string RuleBasedProvider::Keywords(ChatRequest const& request) const {
  std::string_view query = request.payload.empty() ? std::string_view{} : request.payload[0];
  Json j;
  auto lower = ToLowerAscii(query);
  std::vector<std::string> high;
  for (auto const& [trigger, concepts] : rules_.concepts) {
    if (!ContainsWord(lower, trigger)) continue;
    for (auto const& c : concepts) {
      if (std::find(high.begin(), high.end(), c) == high.end()) high.push_back(c);
    }
  }
  j["high_level_keywords"] = high;
  j["low_level_keywords"] = ContentWords(query, rules_.stopwords);
  return j.dump();
}

std::string RuleBasedProvider::MapAnswer(ChatRequest const& request) const {
  std::string_view query = request.payload.empty() ? std::string_view{} : request.payload[0];
  auto words = ContentWords(query, rules_.stopwords);
  std::string batch_lower;
  for (std::size_t i = 1; i < request.payload.size(); ++i) {
    batch_lower += ToLowerAscii(request.payload[i]);
    batch_lower += '\n';
  }
  std::size_t hits = 0;
  for (auto const& w : words) hits += ContainsWord(batch_lower, ToLowerAscii(w)) ? 1 : 0;
  Json j;
  j["answer"] = hits == 0 ? std::string("The provided reports do not address the question.")
                          : TruncateTokens(JoinItems(request.payload, 1), request.max_output_tokens);
  j["score"] = std::min<std::size_t>(100, hits * 20);
  return j.dump();
}

std::string RuleBasedProvider::Answer(ChatRequest const& request) const {
  std::string_view query = request.payload.empty() ? std::string_view{} : request.payload[0];
  std::string out = "Answer to \"" + CollapseWhitespace(query) + "\":";
  auto body = JoinItems(request.payload, 1);
  out += body.empty() ? std::string(" no retrieved context was available.") : " " + body;
  return TruncateTokens(out, request.max_output_tokens);
}

std::string RuleBasedProvider::Judge(ChatRequest const& request) const {
  std::string metric = request.payload.empty() ? std::string{} : request.payload[0];
  auto it = rules_.verdicts.find(metric);
  if (it == rules_.verdicts.end()) it = rules_.verdicts.find("*");
  std::string choice = it == rules_.verdicts.end() ? "Graph RAG" : it->second;
  return "<evaluation>\n<reasoning>\nRule-based verdict for " + metric +
         ".\n</reasoning>\n<choice>\n" + choice + "\n</choice>\n</evaluation>";
}

std::string RuleBasedProvider::Cite(ChatRequest const& request) const {
  if (request.payload.empty()) return {};
  std::string_view answer = request.payload[0];
  std::vector<std::string> element_lower;
  for (std::size_t i = 1; i < request.payload.size(); ++i) {
    element_lower.push_back(ToLowerAscii(request.payload[i]));
  }
  std::string out;
  auto sentences = SplitSentences(answer);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    auto claim = answer.substr(sentences[s].begin, sentences[s].end - sentences[s].begin);
    auto words = ContentWords(claim, rules_.stopwords);
    std::string cited;
    for (std::size_t e = 0; e < element_lower.size(); ++e) {
      std::size_t shared = 0;
      for (auto const& w : words) shared += ContainsWord(element_lower[e], ToLowerAscii(w)) ? 1 : 0;
      if (shared >= 2) {
        if (!cited.empty()) cited += ',';
        cited += std::to_string(e + 1);
      }
    }
    if (!cited.empty()) out += "CLAIM " + std::to_string(s + 1) + ": ELEMENTS " + cited + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Remote

RemoteProvider::RemoteProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                               Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  config_.Validate();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!config_.api_token) {
    if (char const* env = std::getenv("TRACEGRAPH_LLM_TOKEN")) config_.api_token = env;
  }
}

Json RemoteProvider::BuildRequestBody(ChatRequest const& request, ProviderConfig const& config) {
  Json body;
  body["model"] = config.model_name;
  body["messages"] = Json::array();
  for (auto const& m : request.messages) {
    body["messages"].push_back({{"role", RoleName(m.role)}, {"content", m.text}});
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

ChatResponse RemoteProvider::ParseResponseBody(std::string const& body, std::string const& tag) {
  auto j = Json::parse(body);
  ChatResponse r;
  r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  if (j.contains("usage")) {
    r.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
    r.completion_tokens = j["usage"].value("completion_tokens", std::size_t{0});
  }
  r.provider_tag = tag;
  return r;
}

ChatResponse RemoteProvider::Complete(ChatRequest const& request) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return inflight_ < config_.max_inflight; });
    ++inflight_;
  }
  struct Release {
    RemoteProvider* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->inflight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  auto const body = BuildRequestBody(request, config_).dump();
  std::vector<std::pair<std::string, std::string>> headers;
  if (config_.api_token) headers.emplace_back("Authorization", "Bearer " + *config_.api_token);
  std::string tag = "remote:" + config_.model_name;

  std::string last_error;
  auto delay = config_.backoff_initial;
  for (std::size_t attempt = 0; attempt <= config_.retry_limit; ++attempt) {
    if (attempt > 0) {
      sleeper_(delay);
      delay = std::min(delay * 2, config_.backoff_max);
    }
    HttpReply reply;
    try {
      reply = transport_->Post(*config_.endpoint, headers, body);
    } catch (std::exception const& e) {
      last_error = e.what();
      continue;
    }
    if (reply.status == 200) {
      try {
        return ParseResponseBody(reply.body, tag);
      } catch (std::exception const& e) {
        throw Error(ErrorCode::kProviderUnavailable,
                    "malformed chat-completion response: " + std::string(e.what()));
      }
    }
    last_error = "HTTP " + std::to_string(reply.status);
    if (reply.status != 429 && reply.status < 500) break;
  }
  throw Error(ErrorCode::kProviderUnavailable,
              "provider " + config_.model_name + " unavailable: " + last_error);
}

// ---------------------------------------------------------------------------
// Usage accounting

void UsageTotals::Add(UsageTotals const& other) {
  calls += other.calls;
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  cost += other.cost;
}

Json UsageTotals::ToJson() const {
  Json j;
  j["calls"] = calls;
  j["prompt_tokens"] = prompt_tokens;
  j["completion_tokens"] = completion_tokens;
  j["cost"] = cost;
  return j;
}

UsageTotals UsageTotals::FromJson(Json const& j) {
  UsageTotals u;
  u.calls = j.value("calls", std::size_t{0});
  u.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
  u.completion_tokens = j.value("completion_tokens", std::size_t{0});
  u.cost = j.value("cost", 0.0);
  return u;
}

double UsageEntry::Cost() const {
  return static_cast<double>(prompt_tokens) * price_per_million_input / 1e6 +
         static_cast<double>(completion_tokens) * price_per_million_output / 1e6;
}

void UsageLedger::Append(UsageEntry entry) {
  std::lock_guard lock(mu_);
  entry.sequence = next_sequence_++;
  entries_.push_back(std::move(entry));
}

std::vector<UsageEntry> UsageLedger::Entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::map<std::string, UsageTotals> UsageReport(std::vector<UsageEntry> const& entries) {
  std::map<std::string, UsageTotals> out;
  for (auto const& e : entries) {
    auto& t = out[e.provider_tag];
    t.calls += 1;
    t.prompt_tokens += e.prompt_tokens;
    t.completion_tokens += e.completion_tokens;
  }
  // Cost is computed from the per-entry sums in sequence order so the result
  // does not depend on the order entries were appended.
  auto sorted = entries;
  std::sort(sorted.begin(), sorted.end(),
            [](UsageEntry const& a, UsageEntry const& b) { return a.sequence < b.sequence; });
  for (auto const& e : sorted) out[e.provider_tag].cost += e.Cost();
  return out;
}

std::map<std::string, UsageTotals> UsageReport(UsageLedger const& ledger) {
  return UsageReport(ledger.Entries());
}

Gateway::Gateway(ProviderConfig config, std::shared_ptr<Provider> provider,
                 std::shared_ptr<UsageLedger> ledger)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<UsageLedger>()) {}

std::shared_ptr<Gateway> Gateway::FromConfig(ProviderConfig const& config,
                                             std::shared_ptr<UsageLedger> ledger) {
  config.Validate();
  std::shared_ptr<Provider> provider;
  switch (config.kind) {
    case ProviderKind::kRemote:
      provider = std::make_shared<RemoteProvider>(config, MakeHttpTransport());
      break;
    case ProviderKind::kScripted:
      provider = std::make_shared<ScriptedProvider>(ScriptedProvider::FromFile(*config.script_path));
      break;
    case ProviderKind::kRuleBased:
      provider = std::make_shared<RuleBasedProvider>(config.rules);
      break;
  }
  return std::make_shared<Gateway>(config, std::move(provider), std::move(ledger));
}

ChatResponse Gateway::Complete(ChatRequest const& request) const {
  UsageTotals ignored;
  return Complete(request, ignored);
}

ChatResponse Gateway::Complete(ChatRequest const& request, UsageTotals& usage) const {
  request.Validate();
  auto response = provider_->Complete(request);
  UsageEntry entry;
  entry.provider_tag = response.provider_tag;
  entry.prompt_tokens = response.prompt_tokens;
  entry.completion_tokens = response.completion_tokens;
  entry.price_per_million_input = config_.price_per_million_input;
  entry.price_per_million_output = config_.price_per_million_output;
  usage.calls += 1;
  usage.prompt_tokens += entry.prompt_tokens;
  usage.completion_tokens += entry.completion_tokens;
  usage.cost += entry.Cost();
  ledger_->Append(std::move(entry));
  return response;
}

}  // namespace tracegraph
