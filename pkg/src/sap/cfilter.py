"""Candidate Filtering: re-rank prune candidates by measured damage.

Each candidate head is pruned alone and scored by an evaluation oracle;
candidates are re-ordered by ascending degradation and then pruned
cumulatively until the metric drops below a tolerance fraction of the
dense metric. Oracles are plain callables PruneMask -> float (higher is
better) and must be deterministic; evaluations are memoized on the
canonical mask JSON so no mask is ever evaluated twice.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, OracleError
from .formats import PruneMask, write_mask
from .pruner import collapse_layers

Head = tuple[int, int]


@dataclass(frozen=True)
class CandidateRecord:
    """Solo evaluation of one candidate head."""

    head: Head
    solo_metric: float
    degradation: float  # dense_metric - solo_metric


@dataclass(frozen=True)
class StepRecord:
    """One cumulative pruning step; accepted=False marks the stop step."""

    head: Head
    metric: float
    accepted: bool


@dataclass(frozen=True)
class CFReport:
    """Everything Candidate Filtering measured, in evaluation order.

    candidates are sorted by ascending degradation (ties by ascending
    (layer, head)); prune_order repeats their heads for convenience.
    oracle_requests counts metric lookups including memo hits,
    oracle_calls counts actual oracle invocations.
    """

    dense_metric: float
    candidates: tuple[CandidateRecord, ...]
    steps: tuple[StepRecord, ...] = ()
    stop_reason: str | None = None
    tolerance_fraction: float | None = None
    oracle_requests: int = 0
    oracle_calls: int = 0

    @property
    def prune_order(self) -> tuple[Head, ...]:
        return tuple(record.head for record in self.candidates)

    @property
    def accepted_heads(self) -> tuple[Head, ...]:
        return tuple(step.head for step in self.steps if step.accepted)

    def to_json_dict(self) -> dict:
        return {
            "dense_metric": self.dense_metric,
            "tolerance_fraction": self.tolerance_fraction,
            "candidates": [
                {
                    "layer": record.head[0],
                    "head": record.head[1],
                    "solo_metric": record.solo_metric,
                    "degradation": record.degradation,
                }
                for record in self.candidates
            ],
            "steps": [
                {
                    "layer": step.head[0],
                    "head": step.head[1],
                    "metric": step.metric,
                    "accepted": step.accepted,
                }
                for step in self.steps
            ],
            "stop_reason": self.stop_reason,
            "oracle_requests": self.oracle_requests,
            "oracle_calls": self.oracle_calls,
        }


class _MemoOracle:
    """Memoizing wrapper; keys are the canonical mask JSON bytes."""

    def __init__(self, oracle):
        self._oracle = oracle
        self._cache: dict[bytes, float] = {}
        self._lock = threading.Lock()
        self.requests = 0
        self.calls = 0

    @property
    def parallel_safe(self) -> bool:
        return bool(getattr(self._oracle, "parallel_safe", False))

    def evaluate(self, mask: PruneMask, head: Head | None = None) -> float:
        key = write_mask(mask)
        with self._lock:
            self.requests += 1
            if key in self._cache:
                return self._cache[key]
        try:
            metric = float(self._oracle(mask))
        except OracleError:
            raise
        except Exception as exc:
            raise OracleError(f"oracle crashed: {exc}", head=head) from exc
        if not math.isfinite(metric):
            raise OracleError(f"oracle returned non-finite metric {metric}", head=head)
        with self._lock:
            self.calls += 1
            self._cache[key] = metric
        return metric


def _validate_candidates(candidates, layers: int, heads_per_layer: int) -> list[Head]:
    heads = [(int(l), int(h)) for l, h in candidates]
    if not heads:
        raise ConfigError("candidate list must be non-empty")
    if len(set(heads)) != len(heads):
        raise ConfigError("candidate heads must be unique")
    for layer, head in heads:
        if not (0 <= layer < layers and 0 <= head < heads_per_layer):
            raise ConfigError(
                f"candidate ({layer}, {head}) outside a {layers}x{heads_per_layer} model"
            )
    return heads


def _rank(memo: _MemoOracle, heads: list[Head], layers: int, heads_per_layer: int):
    dense = memo.evaluate(PruneMask.empty(layers, heads_per_layer))
    solo_masks = [
        PruneMask(layers, heads_per_layer, frozenset([head])) for head in heads
    ]
    if memo.parallel_safe and len(heads) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(heads))) as pool:
            metrics = list(
                pool.map(lambda pair: memo.evaluate(pair[0], pair[1]), zip(solo_masks, heads))
            )
    else:
        metrics = [memo.evaluate(mask, head) for mask, head in zip(solo_masks, heads)]
    records = [
        CandidateRecord(head, metric, dense - metric)
        for head, metric in zip(heads, metrics)
    ]
    records.sort(key=lambda record: (record.degradation, record.head))
    return dense, tuple(records)


def rank_candidates(
    candidates,
    oracle,
    *,
    layers: int,
    heads_per_layer: int,
) -> tuple[list[Head], CFReport]:
    """Order candidates by ascending solo performance degradation.

    Evaluates the dense mask first, then each candidate with exactly that
    one head pruned: |candidates| + 1 oracle calls in total.
    """
    heads = _validate_candidates(candidates, layers, heads_per_layer)
    memo = _MemoOracle(oracle)
    dense, records = _rank(memo, heads, layers, heads_per_layer)
    report = CFReport(
        dense_metric=dense,
        candidates=records,
        oracle_requests=memo.requests,
        oracle_calls=memo.calls,
    )
    return [record.head for record in records], report


def filter_prune(
    candidates,
    oracle,
    tolerance_fraction: float,
    *,
    layers: int,
    heads_per_layer: int,
    layer_collapse_fraction: float = 1.0,
) -> tuple[PruneMask, CFReport]:
    """Prune candidates in degradation order until tolerance is breached.

    Starting from the empty mask, heads are added one at a time in
    rank_candidates order and the cumulative mask is re-evaluated. The
    first step whose metric falls below tolerance_fraction * dense_metric
    is rolled back and iteration stops; otherwise every candidate is
    accepted. Layer collapse is applied to the final mask.

    On oracle failure the raised OracleError carries the partial CFReport
    in its ``report`` attribute.
    """
    if not 0.0 < tolerance_fraction <= 1.0:
        raise ConfigError(
            f"tolerance_fraction must be in (0, 1], got {tolerance_fraction}"
        )
    heads = _validate_candidates(candidates, layers, heads_per_layer)
    memo = _MemoOracle(oracle)
    try:
        dense, records = _rank(memo, heads, layers, heads_per_layer)
    except OracleError as exc:
        exc.report = CFReport(
            dense_metric=math.nan,
            candidates=(),
            stop_reason="aborted",
            tolerance_fraction=tolerance_fraction,
            oracle_requests=memo.requests,
            oracle_calls=memo.calls,
        )
        raise
    floor = tolerance_fraction * dense
    accepted: list[Head] = []
    steps: list[StepRecord] = []
    stop_reason = "exhausted"
    for record in records:
        trial = frozenset(accepted) | {record.head}
        mask = PruneMask(layers, heads_per_layer, trial)
        try:
            metric = memo.evaluate(mask, record.head)
        except OracleError as exc:
            exc.report = CFReport(
                dense_metric=dense,
                candidates=records,
                steps=tuple(steps),
                stop_reason="aborted",
                tolerance_fraction=tolerance_fraction,
                oracle_requests=memo.requests,
                oracle_calls=memo.calls,
            )
            raise
        if metric < floor:
            steps.append(StepRecord(record.head, metric, accepted=False))
            stop_reason = "tolerance"
            break
        steps.append(StepRecord(record.head, metric, accepted=True))
        accepted.append(record.head)
    final = PruneMask(layers, heads_per_layer, frozenset(accepted))
    final = collapse_layers(final, layer_collapse_fraction)
    report = CFReport(
        dense_metric=dense,
        candidates=records,
        steps=tuple(steps),
        stop_reason=stop_reason,
        tolerance_fraction=tolerance_fraction,
        oracle_requests=memo.requests,
        oracle_calls=memo.calls,
    )
    return final, report


class SubprocessOracle:
    """Evaluation oracle backed by one process invocation per mask.

    The command template must contain the placeholder ``{mask}``; for
    each evaluation the candidate mask JSON is written to a temporary
    file, the placeholder is replaced by its path, and the command's
    standard output must be a single line holding one decimal real.
    Non-zero exit status or unparsable output counts as oracle failure.
    """

    parallel_safe = True

    def __init__(self, command: str, timeout: float | None = None):
        if "{mask}" not in command:
            raise ConfigError("oracle command must contain the {mask} placeholder")
        self.command = command
        self.timeout = timeout

    def __call__(self, mask: PruneMask) -> float:
        with tempfile.TemporaryDirectory(prefix="sap-oracle-") as tmp:
            path = Path(tmp) / "mask.json"
            path.write_bytes(write_mask(mask))
            argv = [token.replace("{mask}", str(path)) for token in shlex.split(self.command)]
            try:
                proc = subprocess.run(
                    argv, capture_output=True, text=True, timeout=self.timeout
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise OracleError(f"oracle command failed to run: {exc}") from exc
        if proc.returncode != 0:
            tail = proc.stderr.strip().splitlines()[-1:] or ["<no stderr>"]
            raise OracleError(
                f"oracle exited with status {proc.returncode}: {tail[0]}"
            )
        text = proc.stdout.strip()
        try:
            return float(text)
        except ValueError:
            raise OracleError(f"oracle printed no parsable metric: {text!r}") from None
