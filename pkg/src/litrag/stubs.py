"""Deterministic offline providers.

These back the default configuration (no network, no credentials) and give
tests bit-reproducible behavior. The hash embedder is fully specified so an
independent reimplementation must produce identical vectors:

* seed: 64-bit FNV-1a hash of the UTF-8 bytes of the text
* values: ``dimension`` draws from the splitmix64 sequence, each mapped
  linearly from [0, 2**64 - 1] onto [-1, 1]
* normalization: divide by the Euclidean norm (float64)
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Sequence

from .models import MoleculeRecord
from .providers import (
    TASK_ANSWER,
    TASK_CLEAN,
    TASK_MERGE,
    TASK_OVERVIEW,
    TASK_QUESTIONS,
    TASK_RELEVANCE,
    TASK_SCREEN,
    TASK_SUBQUESTIONS,
    TASK_SYNTHESIS,
    task_of,
)

_MASK64 = 0xFFFFFFFFFFFFFFFF
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def splitmix64(state: int) -> tuple[int, int]:
    """Advance the splitmix64 generator once; returns (new_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return state, z


class HashEmbedder:
    """Deterministic text embedder: identical text, identical vector,
    across processes and platforms."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def available(self) -> bool:
        return True

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._embed_one(text) for text in texts]

    def _embed_one(self, text: str) -> list[float]:
        state = fnv1a64(text.encode("utf-8"))
        values = []
        for _ in range(self.dimension):
            state, z = splitmix64(state)
            values.append(z / _MASK64 * 2.0 - 1.0)
        norm = sum(v * v for v in values) ** 0.5
        if norm == 0.0:  # unreachable for non-degenerate dimensions; keep safe
            values[0] = 1.0
            norm = 1.0
        return [v / norm for v in values]


class StaticTextProvider:
    """Always returns the same completion. Handy in tests."""

    def __init__(self, text: str):
        self.text = text
        self.calls = 0

    def available(self) -> bool:
        return True

    def complete(self, prompt: str, system: str | None = None) -> str:
        self.calls += 1
        return self.text


_SECTION_RE = re.compile(r"--- SECTION ---\n(.*)\n--- END SECTION ---", re.DOTALL)
_PASSAGE_RE = re.compile(r"--- PASSAGE ---\n(.*)\n--- END PASSAGE ---", re.DOTALL)
_HEADING_LINE_RE = re.compile(r"^Heading: (.*)$", re.MULTILINE)
_TOPIC_LINE_RE = re.compile(r"^Topic: (.*)$", re.MULTILINE)
_QUESTION_LINE_RE = re.compile(r"^Question: (.*)$", re.MULTILINE)


class OfflineTextProvider:
    """Rule-based stand-in for a text LLM.

    Dispatches on the task marker the pipeline puts on the first prompt
    line and produces deterministic, minimally useful output: cleaning is
    the identity, question generation derives two questions from the
    heading, answers point at the cited references.
    """

    def available(self) -> bool:
        return True

    def complete(self, prompt: str, system: str | None = None) -> str:
        task = task_of(prompt)
        if task == TASK_CLEAN:
            match = _SECTION_RE.search(prompt)
            return match.group(1) if match else ""
        if task == TASK_MERGE:
            return ""
        if task == TASK_QUESTIONS:
            return self._questions(prompt)
        if task == TASK_RELEVANCE:
            return "no"
        if task == TASK_SCREEN:
            return "yes"
        if task == TASK_ANSWER:
            if "[ref 1]" in prompt:
                return (
                    "The indexed literature addresses this question; the most "
                    "relevant passages are cited above, starting with [ref 1]."
                )
            return "The knowledge base provides no direct support for this question."
        if task in (TASK_SUBQUESTIONS, TASK_OVERVIEW):
            topic_match = _TOPIC_LINE_RE.search(prompt)
            topic = topic_match.group(1).strip() if topic_match else "the topic"
            if task == TASK_OVERVIEW:
                return f"Collected review material on {topic}.\nSUB-QUESTIONS:\n{topic}"
            return topic
        if task == TASK_SYNTHESIS:
            topic_match = _TOPIC_LINE_RE.search(prompt)
            topic = topic_match.group(1).strip() if topic_match else "the topic"
            return f"Synthesis of the documented sub-answers on {topic}."
        return ""

    @staticmethod
    def _questions(prompt: str) -> str:
        heading_match = _HEADING_LINE_RE.search(prompt)
        subject = heading_match.group(1).strip() if heading_match else ""
        if not subject or subject == "(none)":
            passage = _PASSAGE_RE.search(prompt)
            words = (passage.group(1).split() if passage else [])[:6]
            subject = " ".join(words) or "this passage"
        return (
            f"What does the passage on {subject} describe?\n"
            f"Which findings are reported under {subject}?"
        )


class RandomChoiceProvider:
    """Answers multiple-choice prompts with a uniformly random letter.

    Seeded, so a full run is reproducible; used for statistical sanity
    checks of the benchmark harness.
    """

    def __init__(self, seed: int = 0):
        import random

        self._rng = random.Random(seed)

    def available(self) -> bool:
        return True

    def complete(self, prompt: str, system: str | None = None) -> str:
        return self._rng.choice("ABCD")


class ConstantChoiceProvider:
    """Always answers the same letter."""

    def __init__(self, letter: str = "A"):
        self.letter = letter.strip().upper()[:1] or "A"

    def available(self) -> bool:
        return True

    def complete(self, prompt: str, system: str | None = None) -> str:
        return self.letter


class FixtureCompoundProvider:
    """Compound lookup backed by a local table file.

    The table is a JSON list of ``{"name", "smiles", "url"?}`` records; a
    record matches when its name occurs in the query, case-insensitively.
    """

    def __init__(self, records: Sequence[MoleculeRecord] = (), *, limit: int = 10):
        self.records = list(records)
        self.limit = limit

    @classmethod
    def from_file(cls, path: str | Path, *, limit: int = 10) -> "FixtureCompoundProvider":
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
        records = [
            MoleculeRecord(
                name=row["name"],
                smiles=row["smiles"],
                detail_url=row.get("url") or row.get("detail_url"),
            )
            for row in rows
        ]
        return cls(records, limit=limit)

    def available(self) -> bool:
        return True

    def lookup(self, query: str) -> list[MoleculeRecord]:
        needle = query.lower()
        matches = [rec for rec in self.records if rec.name.lower() in needle]
        return matches[: self.limit]
