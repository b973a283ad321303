# Copyright 2026 The TraceGraph Authors
# SPDX-License-Identifier: Apache-2.0

"""Provenance-first graph retrieval-augmented generation."""

from __future__ import annotations

import json
import os
from typing import Any, Optional

from . import _core

__version__ = _core.__version__
__all__ = [
    "Engine",
    "TracegraphError",
    "classify_bundle",
    "count_tokens",
    "default_config",
    "estimate_cost",
    "load_questions",
    "method_names",
    "parse_verdict",
    "render_judge_prompt",
]


class TracegraphError(Exception):
    """A library error; ``code`` is the error name, e.g. ``"NoContext"``."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


def _call(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except _core.NativeError as e:
        code, message = e.args if len(e.args) == 2 else ("Internal", str(e))
        raise TracegraphError(code, message) from None


def _json(fn, *args, **kwargs):
    return json.loads(_call(fn, *args, **kwargs))


def method_names() -> list[str]:
    return list(_core.method_names())


def default_config() -> dict:
    return json.loads(_core.default_config())


def count_tokens(text: str) -> int:
    return _core.count_tokens(text)


def estimate_cost(counts: dict[int, int], avg_report_tokens: int, price_per_million: float,
                  level_a: int, level_b: int) -> dict:
    return _json(_core.estimate_cost, counts, avg_report_tokens, price_per_million, level_a, level_b)


def parse_verdict(reply: str) -> Optional[str]:
    """"Graph RAG", "Chat LLM" or None."""
    return _core.parse_verdict(reply)


def render_judge_prompt(metric: str, question: str, answer_a: str, answer_b: str) -> str:
    return _call(_core.render_judge_prompt, metric, question, answer_a, answer_b)


def classify_bundle(elements: list[dict]) -> str:
    return _call(_core.classify_bundle, json.dumps(elements))


def load_questions(path: str | os.PathLike) -> list[dict]:
    return _json(_core.load_questions, os.fspath(path))


class Engine:
    """Stores under ``config["store_root"]``; see ``configs/offline.json``."""

    def __init__(self, config: dict | str | os.PathLike, store_root: str | os.PathLike | None = None):
        base = ""
        if not isinstance(config, dict):
            path = os.fspath(config)
            with open(path, encoding="utf-8") as f:
                config = json.load(f)
            base = os.path.dirname(os.path.abspath(path))
        config = dict(config)
        if store_root is not None:
            config["store_root"] = os.path.abspath(os.fspath(store_root))
        self._engine = _call(_core.Engine, json.dumps(config), base)

    def index_directory(self, path: str | os.PathLike) -> dict:
        return _json(self._engine.index_directory, os.fspath(path))

    def insert_text(self, text: str, title: str, source_path: str = "") -> dict:
        return _json(self._engine.insert_text, text, title, source_path)

    def rebuild_communities(self) -> dict:
        return _json(self._engine.rebuild_communities)

    def ask(self, text: str, method: str = "direct", *, level: int | None = None,
            k: int | None = None, seed: int | None = None, hop_limit: int | None = None,
            conversation_id: str | None = None) -> dict:
        return _json(self._engine.ask, text, method, level, k, seed, hop_limit, conversation_id)

    def answer(self, answer_id: str) -> Optional[dict]:
        raw = self._engine.answer(answer_id)
        return None if raw is None else json.loads(raw)

    def provenance(self, answer_id: str) -> dict:
        return _json(self._engine.provenance, answer_id)

    def citations(self, answer_id: str) -> dict:
        return _json(self._engine.citations, answer_id)

    def create_conversation(self, title: str = "") -> dict:
        return _json(self._engine.create_conversation, title)

    def evaluate(self, questions: str | os.PathLike, candidate: str = "graphrag-global",
                 baseline: str = "direct", order_policy: str = "both_orders") -> dict:
        return _json(self._engine.evaluate, os.fspath(questions), candidate, baseline, order_policy)

    def status(self) -> dict:
        return json.loads(self._engine.status())

    def request(self, method: str, path: str, body: Any = None) -> tuple[int, Any]:
        """Routes one HTTP-shaped request, as the service would."""
        payload = "" if body is None else json.dumps(body)
        status, out = self._engine.request(method, path, payload)
        return status, json.loads(out)
