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

// Python bindings. Structured values cross the boundary as JSON text and are
// decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

#include "tracegraph/engine.hpp"
#include "tracegraph/error.hpp"
#include "tracegraph/evaluation.hpp"
#include "tracegraph/server.hpp"

namespace py = pybind11;
using namespace tracegraph;

namespace {

std::string Dump(Json const& j) { return j.dump(); }

MethodDescriptor Descriptor(std::string const& method, std::optional<std::size_t> level,
                            std::optional<std::size_t> k, std::optional<std::uint64_t> seed,
                            std::optional<std::size_t> hop_limit) {
  auto d = MethodDescriptor::Parse(method);
  d.level = level;
  d.k = k;
  d.seed = seed;
  d.hop_limit = hop_limit;
  return d;
}

Json QueryJson(QueryResult const& r) {
  Json j = r.answer.ToJson();
  j["trace_level"] = TraceLevelName(r.trace_level);
  j["provenance"] = r.provenance.ToJson();
  j["warnings"] = r.warnings;
  j["reference_kind"] = ReferenceKind(r.answer.method);
  return j;
}

Json EvalJson(EvalSummary const& s) {
  Json j;
  j["verdicts"] = Json::array();
  for (auto const& v : s.run.verdicts) j["verdicts"].push_back(v.ToJson());
  j["win_rates"] = WinRateRecords(s.table);
  j["report_dir"] = s.report_dir.string();
  return j;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tracegraph native core";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> error_type(m, "NativeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (Error const& e) {
      py::tuple args = py::make_tuple(std::string(ErrorCodeName(e.code())), std::string(e.what()));
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def("method_names", [] { return MethodDescriptor::KnownNames(); });
  m.def("default_config", [] { return Dump(EngineConfig{}.ToJson()); });
  m.def("count_tokens", [](std::string const& s) { return CountTokens(s); });

  m.def("estimate_cost",
        [](std::map<std::size_t, std::size_t> counts, std::size_t avg_tokens, double price,
           std::size_t level_a, std::size_t level_b) {
          CostScenario s{std::move(counts), avg_tokens, price, level_a, level_b};
          auto e = EstimateCost(s);
          return Dump(Json{{"tokens_a", e.tokens_a},
                           {"tokens_b", e.tokens_b},
                           {"cost_a", e.cost_a},
                           {"cost_b", e.cost_b},
                           {"extra", e.extra}});
        });

  m.def("parse_verdict", [](std::string const& reply) -> std::optional<std::string> {
    auto v = ParseVerdict(reply);
    if (v.choice == Slot::kFirst) return std::string("Graph RAG");
    if (v.choice == Slot::kSecond) return std::string("Chat LLM");
    return std::nullopt;
  });

  m.def("render_judge_prompt", [](std::string const& metric, std::string const& question,
                                  std::string const& a, std::string const& b) {
    return RenderJudgePrompt(PromptCatalog::Default(), ParseMetric(metric), question, a, b);
  });

  m.def("classify_bundle", [](std::string const& elements_json) {
    std::vector<ContextElement> els;
    for (auto const& e : Json::parse(elements_json)) els.push_back(ContextElement::FromJson(e));
    return std::string(TraceLevelName(ClassifyBundle(MakeBundle(std::move(els)))));
  });

  m.def("load_questions", [](std::string const& path) {
    Json out = Json::array();
    for (auto const& q : LoadQuestions(path)) {
      out.push_back({{"index", q.index},
                     {"text", q.text},
                     {"subtype", q.subtype ? Json(SubtypeName(*q.subtype)) : Json(nullptr)}});
    }
    return Dump(out);
  });

  py::class_<Engine, std::shared_ptr<Engine>>(m, "Engine")
      .def(py::init([](std::string const& config_json, std::string const& base_dir) {
             return std::make_shared<Engine>(EngineConfig::FromJson(Json::parse(config_json), base_dir));
           }),
           py::arg("config_json"), py::arg("base_dir") = "")
      .def("index_directory",
           [](Engine& e, std::string const& dir) {
             py::gil_scoped_release release;
             return Dump(e.IndexDirectory(dir).ToJson());
           })
      .def("insert_text",
           [](Engine& e, std::string const& text, std::string const& title, std::string const& source) {
             py::gil_scoped_release release;
             auto r = e.InsertText(text, title, source);
             return Dump(Json{{"doc_id", r.doc_id}, {"units", r.units}, {"delta", r.delta.ToJson()}});
           },
           py::arg("text"), py::arg("title"), py::arg("source_path") = "")
      .def("rebuild_communities",
           [](Engine& e) {
             py::gil_scoped_release release;
             return Dump(e.RebuildCommunities().ToJson());
           })
      .def("ask",
           [](Engine& e, std::string const& text, std::string const& method,
              std::optional<std::size_t> level, std::optional<std::size_t> k,
              std::optional<std::uint64_t> seed, std::optional<std::size_t> hop_limit,
              std::optional<std::string> conversation_id) {
             auto d = Descriptor(method, level, k, seed, hop_limit);
             py::gil_scoped_release release;
             return Dump(QueryJson(e.Ask(text, d, conversation_id)));
           },
           py::arg("text"), py::arg("method") = "direct", py::arg("level") = py::none(),
           py::arg("k") = py::none(), py::arg("seed") = py::none(), py::arg("hop_limit") = py::none(),
           py::arg("conversation_id") = py::none())
      .def("answer",
           [](Engine& e, std::string const& id) -> std::optional<std::string> {
             auto a = e.FindAnswer(id);
             if (!a) return std::nullopt;
             return Dump(a->ToJson());
           })
      .def("provenance", [](Engine& e, std::string const& id) { return Dump(e.Provenance(id).ToJson()); })
      .def("citations",
           [](Engine& e, std::string const& id) {
             py::gil_scoped_release release;
             return Dump(e.Citations(id).ToJson());
           })
      .def("create_conversation",
           [](Engine& e, std::string const& title) { return Dump(e.CreateConversation(title).ToJson()); })
      .def("evaluate",
           [](Engine& e, std::string const& questions, std::string const& candidate,
              std::string const& baseline, std::string const& order) {
             auto c = MethodDescriptor::Parse(candidate);
             auto b = MethodDescriptor::Parse(baseline);
             auto o = ParseOrderPolicy(order);
             py::gil_scoped_release release;
             return Dump(EvalJson(e.Evaluate(questions, c, b, o)));
           },
           py::arg("questions"), py::arg("candidate") = "graphrag-global",
           py::arg("baseline") = "direct", py::arg("order_policy") = "both_orders")
      .def("status", [](Engine const& e) { return Dump(e.Status()); })
      .def("request", [](Engine& e, std::string const& method, std::string const& path,
                         std::string const& body) {
        ApiResponse r;
        {
          py::gil_scoped_release release;
          r = HandleApiRequest(e, method, path, body);
        }
        return py::make_tuple(r.status, Dump(r.body));
      });
}
