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

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "support.hpp"

using namespace tracegraph;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Quote(std::string const& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run Cli(testing::TempDir const& dir, std::string const& args) {
  auto out = dir.path() / "stdout.txt";
  auto err = dir.path() / "stderr.txt";
  std::string cmd = Quote(TRACEGRAPH_CLI) + " " + args + " >" + Quote(out.string()) + " 2>" +
                    Quote(err.string());
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testing::ReadText(out);
  r.err = testing::ReadText(err);
  return r;
}

/// Writes the offline configuration and returns the arguments selecting it.
std::string ConfigArgs(testing::TempDir const& dir) {
  auto config = testing::OfflineConfig(dir.path() / "store");
  auto path = dir.path() / "engine.json";
  std::ofstream(path) << config.ToJson().dump(2);
  return "--config " + Quote(path.string());
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  testing::TempDir dir;
  CHECK(Cli(dir, "").code == 1);
  CHECK(Cli(dir, "frobnicate").code == 1);
  CHECK(Cli(dir, "query").code == 1);
  CHECK(Cli(dir, "query hi --mode sideways").code == 1);
  auto unknown = Cli(dir, ConfigArgs(dir) + " query hi --method telepathy");
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("UnknownMethod") != std::string::npos);
  CHECK(Cli(dir, ConfigArgs(dir) + " query hi --method vector --mode local").code == 1);
  CHECK(Cli(dir, "--help").code == 0);
}

TEST_CASE("index, query and status round trip through the stores") {
  testing::TempDir dir;
  auto cfg = ConfigArgs(dir);
  auto index = Cli(dir, cfg + " index " + Quote((testing::FixtureDir() / "corpus").string()));
  REQUIRE(index.code == 0);
  CHECK(index.out.find("indexed 5 documents") == 0);

  auto status = Cli(dir, cfg + " status");
  REQUIRE(status.code == 0);
  CHECK(Json::parse(status.out)["documents"] == 5);

  auto q = Cli(dir, cfg + " query 'How does APOE4 affect amyloid plaques?' --method vector -k 1");
  REQUIRE(q.code == 0);
  CHECK(q.out.find("trace_level: SingleParagraph") != std::string::npos);
  CHECK(q.out.find("provenance:\n  [1] chunk:") != std::string::npos);

  auto j = Cli(dir, cfg + " query 'What is tau?' --method lightrag --mode local --hops 0 --json");
  REQUIRE(j.code == 0);
  auto body = Json::parse(j.out);
  CHECK(body["method"]["name"] == "lightrag-local");
  CHECK(body.contains("provenance"));

  auto d = Cli(dir, cfg + " query 'What is tau?'");
  REQUIRE(d.code == 0);
  CHECK(d.out.find("provenance: none") != std::string::npos);
}

TEST_CASE("runtime failures exit with 2") {
  testing::TempDir dir;
  auto cfg = ConfigArgs(dir);
  CHECK(Cli(dir, cfg + " index " + Quote((dir.path() / "absent").string())).code == 2);
  auto empty = Cli(dir, cfg + " query 'What is tau?' --method graphrag-global");
  CHECK(empty.code == 2);
  CHECK(empty.err.find("NoContext") != std::string::npos);
  CHECK(Cli(dir, "--config " + Quote((dir.path() / "missing.json").string()) + " status").code == 2);
}
