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

#include <memory>
#include <string>
#include <string_view>

#include "tracegraph/engine.hpp"
#include "tracegraph/error.hpp"

namespace tracegraph {

struct ApiResponse {
  int status = 200;
  Json body;
};

/// HTTP status used for a library error code.
int HttpStatusFor(ErrorCode code);

/// Which reference panel a method's answers feed: chunks, communities,
/// entities_relations or none.
std::string_view ReferenceKind(MethodDescriptor const& method);

/// Routes one request against the engine. Never throws; failures become
/// {code, message} bodies with a 4xx/5xx status.
ApiResponse HandleApiRequest(Engine& engine, std::string_view method, std::string_view path,
                             std::string const& body);

/// Serves HandleApiRequest over HTTP.
class ApiServer {
 public:
  explicit ApiServer(Engine& engine);
  ~ApiServer();
  ApiServer(ApiServer const&) = delete;
  ApiServer& operator=(ApiServer const&) = delete;

  /// Binds and blocks until Stop(). Returns false if the port is unavailable.
  bool Listen(std::string const& host, int port);
  /// Binds to a free port and returns it (or -1); follow with ListenAfterBind().
  int BindToAnyPort(std::string const& host);
  bool ListenAfterBind();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tracegraph
