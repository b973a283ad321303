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

#include "tracegraph/server.hpp"

#include <httplib.h>

#include <vector>

namespace tracegraph {

namespace {

ApiResponse ErrorResponse(int status, std::string_view code, std::string const& message) {
  return {status, Json{{"code", code}, {"message", message}}};
}

std::vector<std::string_view> Segments(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    while (pos < path.size() && path[pos] == '/') ++pos;
    auto end = path.find('/', pos);
    if (end == std::string_view::npos) end = path.size();
    if (end > pos) out.push_back(path.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

Json ParseBody(std::string const& body) {
  if (Trim(body).empty()) return Json::object();
  Json j;
  try {
    j = Json::parse(body);
  } catch (Json::parse_error const& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be an object");
  return j;
}

std::string RequireString(Json const& j, char const* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

MethodDescriptor DescriptorFromRequest(Json const& j) {
  auto d = MethodDescriptor::Parse(j.contains("method") ? RequireString(j, "method") : "direct");
  if (j.contains("params")) {
    auto const& p = j.at("params");
    if (!p.is_object()) throw Error(ErrorCode::kInvalidArgument, "params must be an object");
    if (p.contains("level")) d.level = p.at("level").get<std::size_t>();
    if (p.contains("k")) d.k = p.at("k").get<std::size_t>();
    if (p.contains("seed")) d.seed = p.at("seed").get<std::uint64_t>();
    if (p.contains("hop_limit")) d.hop_limit = p.at("hop_limit").get<std::size_t>();
  }
  return d;
}

Json MethodsBody(RetrievalConfig const& config) {
  Json out = Json::array();
  for (auto const& name : MethodDescriptor::KnownNames()) {
    auto d = ResolveDescriptor(MethodDescriptor::Parse(name), config);
    Json m = d.ToJson();
    m["reference_kind"] = ReferenceKind(d);
    out.push_back(std::move(m));
  }
  return out;
}

Json DeltaBody(InsertReport const& r) {
  Json j;
  j["doc_id"] = r.doc_id;
  j["units"] = r.units;
  j["delta"] = r.delta.ToJson();
  j["entities_summarized"] = r.augment.entities_summarized;
  j["relations_summarized"] = r.augment.relations_summarized;
  j["warnings"] = r.augment.failures;
  j["stale_communities"] = true;
  return j;
}

ApiResponse Route(Engine& engine, std::string_view method, std::string_view path,
                  std::string const& body) {
  auto seg = Segments(path);
  auto not_found = [&] {
    return ErrorResponse(404, "NotFound", "no route for " + std::string(method) + " " +
                                              std::string(path));
  };
  if (seg.empty()) return not_found();

  if (seg[0] == "health" && seg.size() == 1 && method == "GET") {
    Json j = engine.Status();
    j["status"] = "ok";
    return {200, j};
  }
  if (seg[0] == "methods" && seg.size() == 1 && method == "GET") {
    return {200, MethodsBody(engine.config().retrieval)};
  }
  if (seg[0] == "documents" && seg.size() == 1 && method == "POST") {
    auto j = ParseBody(body);
    auto text = RequireString(j, "text");
    auto title = j.contains("title") ? RequireString(j, "title") : std::string("untitled");
    auto source = j.contains("source_path") ? RequireString(j, "source_path") : std::string();
    return {201, DeltaBody(engine.InsertText(text, title, source))};
  }
  if (seg[0] == "query" && seg.size() == 1 && method == "POST") {
    auto j = ParseBody(body);
    auto text = RequireString(j, "text");
    std::optional<std::string> conversation;
    if (j.contains("conversation_id") && !j.at("conversation_id").is_null()) {
      conversation = RequireString(j, "conversation_id");
    }
    auto result = engine.Ask(text, DescriptorFromRequest(j), conversation);
    Json out;
    out["answer_id"] = result.answer.answer_id;
    out["text"] = result.answer.text;
    out["trace_level"] = TraceLevelName(result.trace_level);
    out["method"] = result.answer.method.ToJson();
    out["reference_kind"] = ReferenceKind(result.answer.method);
    out["fallback"] = result.answer.fallback ? Json(*result.answer.fallback) : Json(nullptr);
    out["warnings"] = result.warnings;
    out["conversation_id"] = conversation ? Json(*conversation) : Json(nullptr);
    return {200, out};
  }
  if (seg[0] == "answers" && (seg.size() == 2 || seg.size() == 3) && method == "GET") {
    std::string id(seg[1]);
    auto answer = engine.FindAnswer(id);
    if (!answer) return ErrorResponse(404, "NotFound", "unknown answer " + id);
    if (seg.size() == 2) {
      Json j = answer->ToJson();
      j["trace_level"] = TraceLevelName(ClassifyTrace(*answer));
      j["reference_kind"] = ReferenceKind(answer->method);
      return {200, j};
    }
    if (seg[2] == "provenance") {
      Json j = engine.Provenance(id).ToJson();
      j["trace_level"] = TraceLevelName(ClassifyTrace(*answer));
      return {200, j};
    }
    if (seg[2] == "citations") return {200, engine.Citations(id).ToJson()};
    return not_found();
  }
  if (seg[0] == "conversations") {
    if (seg.size() == 1 && method == "GET") {
      Json out = Json::array();
      for (auto const& c : engine.Conversations()) out.push_back(c.ToJson());
      return {200, out};
    }
    if (seg.size() == 1 && method == "POST") {
      auto j = ParseBody(body);
      auto title = j.contains("title") ? RequireString(j, "title") : std::string();
      return {201, engine.CreateConversation(title).ToJson()};
    }
    if (seg.size() == 2 && method == "GET") {
      auto c = engine.FindConversation(std::string(seg[1]));
      if (!c) return ErrorResponse(404, "NotFound", "unknown conversation " + std::string(seg[1]));
      return {200, c->ToJson()};
    }
  }
  return not_found();
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kEmptyDocument:
    case ErrorCode::kUnknownMethod:
    case ErrorCode::kUnknownMetric:
    case ErrorCode::kNoMatch:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kDuplicateDocument:
      return 409;
    case ErrorCode::kEmptyGraph:
    case ErrorCode::kNoContext:
    case ErrorCode::kEmptyIndex:
      return 422;
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kScriptMiss:
      return 502;
    case ErrorCode::kDanglingProvenance:
    case ErrorCode::kStoreCorrupt:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

std::string_view ReferenceKind(MethodDescriptor const& method) {
  switch (method.family) {
    case MethodFamily::kVector: return "chunks";
    case MethodFamily::kGraphRagGlobal:
    case MethodFamily::kGraphRagLocal: return "communities";
    case MethodFamily::kLightRag: return "entities_relations";
    case MethodFamily::kDirect: return "none";
  }
  return "none";
}

ApiResponse HandleApiRequest(Engine& engine, std::string_view method, std::string_view path,
                             std::string const& body) {
  try {
    return Route(engine, method, path, body);
  } catch (Error const& e) {
    return ErrorResponse(HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.what());
  } catch (Json::exception const& e) {
    return ErrorResponse(400, ErrorCodeName(ErrorCode::kInvalidArgument), e.what());
  } catch (std::exception const& e) {
    return ErrorResponse(500, "Internal", e.what());
  }
}

struct ApiServer::Impl {
  Engine& engine;
  httplib::Server server;

  explicit Impl(Engine& e) : engine(e) {
    auto handler = [this](httplib::Request const& req, httplib::Response& res) {
      auto r = HandleApiRequest(engine, req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/.*)", handler);
    server.Post(R"(/.*)", handler);
  }
};

ApiServer::ApiServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}
ApiServer::~ApiServer() = default;

bool ApiServer::Listen(std::string const& host, int port) { return impl_->server.listen(host, port); }

int ApiServer::BindToAnyPort(std::string const& host) { return impl_->server.bind_to_any_port(host); }

bool ApiServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void ApiServer::Stop() { impl_->server.stop(); }

}  // namespace tracegraph
