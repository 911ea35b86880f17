"""Multiple-choice benchmark harness.

Protocol: every model answers every question ``n_trials`` times (default
five). Refinement drops the questions every compared model got right on
every trial, isolating the discriminative items. Accuracy is per-trial on
the refined set, with parse failures counted as incorrect.

Trial results persist as append-only JSON lines, so an interrupted run
resumes where it stopped and a persisted log can be re-scored without the
test set file.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

from .errors import ProviderError, ValidationError
from .models import (
    DEFAULT_EVAL_TRIALS,
    EvalReport,
    MCQuestion,
    SearchParams,
    TrialResult,
)
from .providers import TextProvider
from .qa import PipelineDeps, build_citations, embed_query, format_reference_blocks

logger = logging.getLogger(__name__)

LETTERS = "ABCD"

EvalMode = Literal["baseline", "rag"]


@dataclass(frozen=True)
class ModelSpec:
    """A model under evaluation: an id for reporting plus its provider."""

    model_id: str
    provider: TextProvider


def load_testset(path: str | Path) -> list[MCQuestion]:
    """Load a JSONL test set, validating every record.

    Errors name the offending qid (or line) so bad records are fixable.
    """
    questions: list[MCQuestion] = []
    seen: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
        qid = record.get("qid", f"<line {lineno}>")
        try:
            question = MCQuestion(**record)
        except ValueError as exc:
            raise ValidationError(f"{path}: question {qid} is invalid: {exc}") from exc
        if question.qid in seen:
            raise ValidationError(f"{path}: duplicate qid {question.qid}")
        seen.add(question.qid)
        questions.append(question)
    return questions


_STANDALONE_LETTER_RE = re.compile(r"(?<![A-Za-z0-9])([A-D])(?![A-Za-z0-9])")
_ANSWER_PATTERN_RE = re.compile(r"answer\s*(?:is|:|=)?\s*\(?([A-Da-d])\)?", re.IGNORECASE)


def parse_choice(completion: str) -> int | None:
    """Extract a single option letter from a completion.

    Standalone A-D tokens win when they all agree; several distinct letters
    are ambiguous. Without any standalone token, an "Answer: X" pattern is
    accepted. Anything else parses as no choice.
    """
    letters = set(_STANDALONE_LETTER_RE.findall(completion))
    if len(letters) == 1:
        return LETTERS.index(letters.pop())
    if len(letters) > 1:
        return None
    match = _ANSWER_PATTERN_RE.search(completion)
    if match:
        return LETTERS.index(match.group(1).upper())
    return None


def build_question_prompt(question: MCQuestion) -> str:
    lines = [
        "Answer the multiple-choice question. Reply with the single letter of "
        "the correct option.",
        f"Question: {question.stem}",
    ]
    for letter, option in zip(LETTERS, question.options):
        lines.append(f"{letter}. {option}")
    lines.append("Answer:")
    return "\n".join(lines)


def build_rag_prompt(
    question: MCQuestion,
    deps: PipelineDeps,
    params: SearchParams | None = None,
) -> str:
    """Prepend retrieved reference blocks to the question, mirroring the
    context injection of the expert Q&A pipeline."""
    base = build_question_prompt(question)
    qvec = embed_query(f"{question.stem}\n" + "\n".join(question.options), deps)
    hits = deps.store.hierarchical_search(qvec, params or SearchParams())
    citations = build_citations(hits, deps.store)
    chunk_texts = {hit.chunk_id: deps.store.chunk_text(hit.chunk_id) for hit in hits}
    blocks = format_reference_blocks(
        hits, chunk_texts, citations, deps.prompt_budget, overhead=len(base) + 64
    )
    if not blocks:
        return base
    return "\n".join(blocks) + "\n" + base


def load_trial_log(path: str | Path) -> list[TrialResult]:
    log_path = Path(path)
    if not log_path.exists():
        return []
    results = []
    for lineno, line in enumerate(log_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            results.append(TrialResult(**json.loads(line)))
        except (json.JSONDecodeError, ValueError) as exc:
            raise ValidationError(f"{path}:{lineno}: bad trial record: {exc}") from exc
    return results


def run_trials(
    models: Sequence[ModelSpec],
    questions: Sequence[MCQuestion],
    n_trials: int = DEFAULT_EVAL_TRIALS,
    mode: EvalMode = "baseline",
    deps: PipelineDeps | None = None,
    log_path: str | Path | None = None,
) -> list[TrialResult]:
    """Run every (model, question, trial) cell, appending to the log as
    cells complete so an interrupted run resumes without repeating work."""
    if mode == "rag" and deps is None:
        raise ValidationError("rag mode requires pipeline deps with a loaded store")

    done: dict[tuple[str, str, int], TrialResult] = {}
    if log_path is not None:
        for result in load_trial_log(log_path):
            done[(result.model_id, result.qid, result.run_index)] = result

    log_file = open(log_path, "a", encoding="utf-8") if log_path is not None else None
    results: list[TrialResult] = []
    try:
        for model in models:
            for question in questions:
                prompt = (
                    build_rag_prompt(question, deps)
                    if mode == "rag"
                    else build_question_prompt(question)
                )
                for run_index in range(1, n_trials + 1):
                    key = (model.model_id, question.qid, run_index)
                    if key in done:
                        results.append(done[key])
                        continue
                    result = _run_cell(model, question, run_index, prompt)
                    results.append(result)
                    if log_file is not None:
                        log_file.write(result.model_dump_json() + "\n")
                        log_file.flush()
    finally:
        if log_file is not None:
            log_file.close()
    return results


def _run_cell(model: ModelSpec, question: MCQuestion, run_index: int, prompt: str) -> TrialResult:
    try:
        completion = model.provider.complete(prompt)
        chosen = parse_choice(completion)
    except ProviderError as exc:
        logger.warning("trial %s/%s/%d failed: %s", model.model_id, question.qid, run_index, exc)
        chosen = None
    return TrialResult(
        qid=question.qid,
        model_id=model.model_id,
        run_index=run_index,
        chosen=chosen,
        parse_failed=chosen is None,
        correct_index=question.correct,
        discipline=question.discipline,
    )


def _expected_cells(
    results: Iterable[TrialResult], models: Sequence[str]
) -> tuple[set[str], int]:
    qids = {r.qid for r in results}
    n_trials = max((r.run_index for r in results), default=0)
    return qids, n_trials


def refine_testset(results: Sequence[TrialResult], models: Sequence[str]) -> set[str]:
    """Drop questions that every compared model answered correctly on every
    trial; return the qids that remain discriminative.

    Requires full coverage of all (model, question, trial) cells.
    """
    qids, n_trials = _expected_cells(results, models)
    present = {(r.model_id, r.qid, r.run_index) for r in results}
    missing = [
        (model, qid, trial)
        for model in models
        for qid in sorted(qids)
        for trial in range(1, n_trials + 1)
        if (model, qid, trial) not in present
    ]
    if missing:
        preview = ", ".join(f"{m}/{q}/run{t}" for m, q, t in missing[:5])
        raise ValidationError(f"trial coverage incomplete; {len(missing)} missing cells: {preview}")

    compared = set(models)
    all_correct: dict[str, bool] = {qid: True for qid in qids}
    for result in results:
        if result.model_id not in compared:
            continue
        if not result.is_correct:
            all_correct[result.qid] = False
    return {qid for qid, unanimous in all_correct.items() if not unanimous}


def score(results: Sequence[TrialResult], refined: set[str]) -> EvalReport:
    """Per-trial accuracy over the refined set; parse failures count as
    incorrect. Includes a per-discipline breakdown for each model."""
    if not refined:
        raise ValidationError("refined question set is empty; nothing to score")
    qids = {r.qid for r in results}
    unknown = refined - qids
    if unknown:
        raise ValidationError(f"refined set references unknown qids: {sorted(unknown)}")

    trials: dict[str, int] = {}
    correct: dict[str, int] = {}
    disc_trials: dict[str, dict[str, int]] = {}
    disc_correct: dict[str, dict[str, int]] = {}
    for result in results:
        if result.qid not in refined:
            continue
        model = result.model_id
        trials[model] = trials.get(model, 0) + 1
        correct[model] = correct.get(model, 0) + (1 if result.is_correct else 0)
        by_disc_t = disc_trials.setdefault(model, {})
        by_disc_c = disc_correct.setdefault(model, {})
        by_disc_t[result.discipline] = by_disc_t.get(result.discipline, 0) + 1
        by_disc_c[result.discipline] = by_disc_c.get(result.discipline, 0) + (
            1 if result.is_correct else 0
        )

    accuracy = {model: correct[model] / trials[model] for model in trials}
    discipline_accuracy = {
        model: {
            disc: disc_correct[model][disc] / count
            for disc, count in disc_trials[model].items()
        }
        for model in disc_trials
    }
    return EvalReport(
        refined_qids=sorted(refined),
        model_accuracy=accuracy,
        trial_counts=trials,
        correct_counts=correct,
        discipline_accuracy=discipline_accuracy,
    )


def format_report(report: EvalReport) -> str:
    """Human-readable accuracy table."""
    lines = [
        f"refined questions: {len(report.refined_qids)}",
        f"{'model':<24} {'accuracy':>8} {'correct':>8} {'trials':>7}",
    ]
    for model in sorted(report.model_accuracy):
        lines.append(
            f"{model:<24} {report.model_accuracy[model]:>8.3f} "
            f"{report.correct_counts[model]:>8d} {report.trial_counts[model]:>7d}"
        )
        for disc in sorted(report.discipline_accuracy.get(model, {})):
            acc = report.discipline_accuracy[model][disc]
            lines.append(f"  {disc:<22} {acc:>8.3f}")
    return "\n".join(lines)
