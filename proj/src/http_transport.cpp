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

#include <httplib.h>

#include <stdexcept>

#include "tracegraph/llm.hpp"

namespace tracegraph {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpReply Post(std::string const& url,
                 std::vector<std::pair<std::string, std::string>> const& headers,
                 std::string const& body) override {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::runtime_error("endpoint is not a URL: " + url);
    auto path_begin = url.find('/', scheme_end + 3);
    std::string base = path_begin == std::string::npos ? url : url.substr(0, path_begin);
    std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(300);
    httplib::Headers h;
    for (auto const& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<HttpTransport> MakeHttpTransport() { return std::make_unique<HttplibTransport>(); }

}  // namespace tracegraph
