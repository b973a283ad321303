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

// tracegraph: command-line front end for indexing, querying, evaluation and
// the HTTP service.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "tracegraph/engine.hpp"
#include "tracegraph/error.hpp"
#include "tracegraph/server.hpp"

namespace {

using namespace tracegraph;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

ApiServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

struct QueryFlags {
  std::string text;
  std::string method = "direct";
  std::optional<std::size_t> level;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> hops;
  std::optional<std::string> conversation;
  bool json = false;
};

MethodDescriptor DescriptorFrom(QueryFlags const& f) {
  std::string name = f.method;
  if (name == "lightrag") name += "-" + f.mode.value_or("hybrid");
  auto d = MethodDescriptor::Parse(name);
  if (f.mode && d.family != MethodFamily::kLightRag) {
    throw Error(ErrorCode::kInvalidArgument, "--mode only applies to lightrag methods");
  }
  if (f.mode && f.method != "lightrag" && name != "lightrag-" + *f.mode) {
    throw Error(ErrorCode::kInvalidArgument, "--mode conflicts with --method " + f.method);
  }
  d.level = f.level;
  d.k = f.k;
  d.seed = f.seed;
  d.hop_limit = f.hops;
  return d;
}

EngineConfig LoadConfig(std::string const& path, std::string const& store) {
  EngineConfig config = path.empty() ? EngineConfig{} : EngineConfig::Load(path);
  if (!store.empty()) config.store_root = store;
  if (path.empty()) config.Validate();
  return config;
}

void PrintWarnings(std::vector<std::string> const& warnings) {
  for (auto const& w : warnings) std::cerr << "warning: " << w << "\n";
}

void PrintQuery(QueryResult const& r, Corpus const& corpus, bool json) {
  if (json) {
    Json j = r.answer.ToJson();
    j["trace_level"] = TraceLevelName(r.trace_level);
    j["provenance"] = r.provenance.ToJson();
    j["warnings"] = r.warnings;
    std::cout << j.dump(2) << "\n";
    return;
  }
  PrintWarnings(r.warnings);
  std::cout << "answer_id:   " << r.answer.answer_id << "\n"
            << "method:      " << r.answer.method.Label() << "\n"
            << "trace_level: " << TraceLevelName(r.trace_level) << "\n";
  if (r.answer.fallback) std::cout << "fallback:    " << *r.answer.fallback << "\n";
  std::cout << "\n" << r.answer.text << "\n";
  if (r.provenance.links.empty()) {
    std::cout << "\nprovenance: none (no retrieved context)\n";
    return;
  }
  std::cout << "\nprovenance:\n";
  for (std::size_t i = 0; i < r.provenance.links.size(); ++i) {
    auto const& link = r.provenance.links[i];
    std::set<std::string> docs;
    for (auto const& s : link.spans) docs.insert(s.doc_id);
    std::cout << "  [" << i + 1 << "] " << link.ref_id << ": " << link.unit_ids.size()
              << " unit(s) in " << docs.size() << " document(s)";
    if (link.spans.size() == 1) {
      auto const& s = link.spans[0];
      auto const* doc = corpus.FindDocument(s.doc_id);
      std::cout << " (" << (doc ? doc->title : s.doc_id) << " bytes " << s.char_start << "-"
                << s.char_end << ")";
    }
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Provenance-first graph retrieval-augmented generation engine"};
  app.require_subcommand(1);
  std::string config_path;
  std::string store;
  app.add_option("-c,--config", config_path, "Engine configuration file (JSON)");
  app.add_option("-s,--store", store, "Store root (overrides the configuration)");

  auto* index = app.add_subcommand("index", "Index every file of a directory, replacing the stores");
  std::string corpus_dir;
  index->add_option("dir", corpus_dir, "Corpus directory")->required();

  auto* insert = app.add_subcommand("insert", "Insert one document incrementally");
  std::string insert_file;
  insert->add_option("file", insert_file, "Text file")->required();

  app.add_subcommand("reindex", "Rebuild communities and reports from the current graph");
  app.add_subcommand("status", "Print store statistics");

  auto* query = app.add_subcommand("query", "Answer one question");
  QueryFlags qf;
  query->add_option("text", qf.text, "Question text")->required();
  query->add_option("-m,--method", qf.method,
                    "direct, vector, graphrag-global, graphrag-local, lightrag[-local|-global|-hybrid]");
  query->add_option("--level", qf.level, "Community level for graphrag-global");
  query->add_option("--mode", qf.mode, "lightrag mode")->check(CLI::IsMember({"local", "global", "hybrid"}));
  query->add_option("-k,--k", qf.k, "Top-k entities or chunks");
  query->add_option("--seed", qf.seed, "Shuffle seed for graphrag-global");
  query->add_option("--hops", qf.hops, "Neighbourhood expansion for lightrag");
  query->add_option("--conversation", qf.conversation, "Append the turn to this conversation");
  query->add_flag("--json", qf.json, "Print the full answer record as JSON");

  auto* eval = app.add_subcommand("eval", "Pairwise LLM-as-judge evaluation");
  std::string candidate = "graphrag-global";
  std::string baseline = "direct";
  std::string order = "both_orders";
  std::string questions;
  std::optional<std::size_t> eval_level;
  eval->add_option("--candidate", candidate, "Candidate method");
  eval->add_option("--baseline", baseline, "Baseline method");
  eval->add_option("--order-policy", order, "fixed or both_orders")
      ->check(CLI::IsMember({"fixed", "both_orders"}));
  eval->add_option("--questions", questions, "Question file (line-delimited JSON)")->required();
  eval->add_option("--level", eval_level, "Community level for a graphrag-global candidate");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("-p,--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    Engine engine(LoadConfig(config_path, store));

    if (index->parsed()) {
      auto summary = engine.IndexDirectory(corpus_dir);
      PrintWarnings(summary.warnings);
      std::cout << "indexed " << summary.documents << " documents, " << summary.units
                << " units, " << summary.entities << " entities, " << summary.relations
                << " relations, " << summary.communities << " communities, " << summary.reports
                << " reports\n";
    } else if (insert->parsed()) {
      auto r = engine.InsertFile(insert_file);
      PrintWarnings(r.augment.failures);
      std::cout << "inserted " << r.doc_id << ": " << r.units << " units, "
                << r.delta.entities_created.size() << " new entities, "
                << r.delta.entities_updated.size() << " updated entities\n"
                << "communities are now stale; run 'tracegraph reindex' to refresh reports\n";
    } else if (app.got_subcommand("reindex")) {
      auto summary = engine.RebuildCommunities();
      PrintWarnings(summary.warnings);
      std::cout << "rebuilt " << summary.communities << " communities, " << summary.reports
                << " reports\n";
    } else if (app.got_subcommand("status")) {
      std::cout << engine.Status().dump(2) << "\n";
    } else if (query->parsed()) {
      auto result = engine.Ask(qf.text, DescriptorFrom(qf), qf.conversation);
      PrintQuery(result, engine.corpus(), qf.json);
    } else if (eval->parsed()) {
      auto cand = MethodDescriptor::Parse(candidate);
      if (eval_level) cand.level = eval_level;
      auto summary =
          engine.Evaluate(questions, cand, MethodDescriptor::Parse(baseline), ParseOrderPolicy(order));
      std::cout << RenderWinRateTable(summary.table) << "\n"
                << summary.run.verdicts.size() << " verdicts written to "
                << summary.report_dir.string() << "\n";
    } else if (serve->parsed()) {
      ApiServer server(engine);
      g_server = &server;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!server.Listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitRuntime;
      }
      g_server = nullptr;
    }
  } catch (Error const& e) {
    std::cerr << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    bool const usage = e.code() == ErrorCode::kUnknownMethod ||
                       e.code() == ErrorCode::kUnknownMetric ||
                       (e.code() == ErrorCode::kInvalidArgument && query->parsed());
    return usage ? kExitUsage : kExitRuntime;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
