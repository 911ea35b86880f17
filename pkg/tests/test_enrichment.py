from __future__ import annotations

import math

import numpy as np
import pytest

from litrag.enrichment import EMBED_CHAR_LIMIT, embed_texts, generate_questions
from litrag.errors import EmbeddingDimensionError, ProviderError
from litrag.models import Chunk
from litrag.providers import TASK_QUESTIONS
from litrag.stubs import HashEmbedder, fnv1a64

from helpers import RoutingTextProvider, ref_fnv1a64, ref_hash_embedding


def make_chunk(text: str = "some knowledge") -> Chunk:
    return Chunk.build("doc1#0001", "doc1", ["A"], text)


class TestGenerateQuestions:
    def test_surplus_lines_truncate_to_cap(self):
        provider = RoutingTextProvider(
            {TASK_QUESTIONS: "\n".join(f"Question {i}?" for i in range(6))}
        )
        questions = generate_questions(make_chunk(), provider, max_q=4)
        assert len(questions) == 4

    def test_empty_output_warns(self):
        warnings: list[str] = []
        questions = generate_questions(
            make_chunk(), RoutingTextProvider({TASK_QUESTIONS: ""}), warnings=warnings
        )
        assert questions == []
        assert warnings

    def test_id_scheme(self):
        provider = RoutingTextProvider({TASK_QUESTIONS: "First?\nSecond?"})
        questions = generate_questions(make_chunk(), provider)
        assert [q.question_id for q in questions] == ["doc1#0001/q1", "doc1#0001/q2"]
        assert all(q.chunk_id == "doc1#0001" for q in questions)

    def test_blank_lines_dropped(self):
        provider = RoutingTextProvider({TASK_QUESTIONS: "One?\n\n   \nTwo?"})
        questions = generate_questions(make_chunk(), provider)
        assert [q.text for q in questions] == ["One?", "Two?"]

    def test_provider_failure_degrades_to_empty(self):
        class Failing:
            def complete(self, prompt, system=None):
                raise ProviderError("down", retryable=True)

        warnings: list[str] = []
        assert generate_questions(make_chunk(), Failing(), warnings=warnings) == []
        assert warnings


class TestEmbedTexts:
    def test_deterministic_across_calls(self):
        embedder = HashEmbedder(32)
        first = embed_texts(["same text"], embedder)[0]
        second = embed_texts(["same text"], embedder)[0]
        assert np.array_equal(first, second)

    def test_unit_norm_within_tolerance(self):
        embedder = HashEmbedder(2048)
        vectors = embed_texts(["a", "bb", "ccc"], embedder)
        for vec in vectors:
            assert abs(float(np.linalg.norm(vec)) - 1.0) <= 1e-6

    def test_order_preserving(self):
        embedder = HashEmbedder(16)
        texts = ["alpha", "beta", "gamma"]
        vectors = embed_texts(texts, embedder)
        singles = [embed_texts([t], embedder)[0] for t in texts]
        for batched, single in zip(vectors, singles):
            assert np.array_equal(batched, single)

    def test_dimension_mismatch_is_configuration_error(self):
        embedder = HashEmbedder(16)
        with pytest.raises(EmbeddingDimensionError):
            embed_texts(["text"], embedder, dimension=32)

    def test_overlong_text_embeds_only_the_head(self):
        embedder = HashEmbedder(16)
        head = "x" * EMBED_CHAR_LIMIT
        long_text = head + "tail that must be ignored"
        assert np.array_equal(
            embed_texts([long_text], embedder)[0], embed_texts([head], embedder)[0]
        )


class TestHashEmbedderReference:
    """The deterministic embedder recipe, checked against an independent
    from-scratch reimplementation (seed, fill, normalize)."""

    def test_seed_hash_matches_reference(self):
        for text in ["", "abc", "The quick brown fox", "über-α"]:
            assert fnv1a64(text.encode("utf-8")) == ref_fnv1a64(text.encode("utf-8"))

    @pytest.mark.parametrize("text", ["abc", "", "hypothetical question?", "日本語テキスト"])
    @pytest.mark.parametrize("dimension", [8, 64, 2048])
    def test_vector_matches_reference_reimplementation(self, text: str, dimension: int):
        produced = HashEmbedder(dimension).embed([text])[0]
        expected = ref_hash_embedding(text, dimension)
        assert len(produced) == dimension
        # Normalization may differ in summation order; everything else is exact.
        assert np.allclose(produced, expected, rtol=0.0, atol=1e-12)
        assert math.copysign(1, produced[0]) == math.copysign(1, expected[0])

    def test_distinct_texts_are_not_collinear(self):
        embedder = HashEmbedder(64)
        a, b = embedder.embed(["one text", "another text"])
        cos = float(np.dot(a, b))
        assert abs(cos) < 0.9
