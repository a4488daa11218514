"""The four prediction engines: DG, PPM, MP, and the Naive baseline.

All four share the same life cycle: ``train(config, sequence)`` builds a
model, ``model.predict(context)`` ranks candidate next requests, and
``model.update(key)`` feeds one more observed request into the model (the
dynamic update the replay engine performs after scoring each test request).

Training is implemented as a direct batch pass over the sequence, while
updates are incremental; the two are required to land on bit-identical
model state (train == fold(update) from an empty model), which the test
suite checks by comparing canonical serializations.

Ranking is deterministic everywhere: candidates sort by score descending,
then lexicographically by url_key. The Naive baseline is the exception by
definition: it predicts every previously seen key in first-seen order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

ALGORITHMS = ("dg", "ppm", "mp", "naive")

# Stand-ins for the originally published tunings; every value is
# configurable and the run report records what was used.
DEFAULT_LOOKAHEAD_WINDOW = 4
DEFAULT_DG_THRESHOLD = 0.25
DEFAULT_PPM_THRESHOLD = 0.1
DEFAULT_PPM_ORDER = 2
DEFAULT_TOP_N = 5

MODEL_FORMAT = "prefetchlab-model/v1"


@dataclass(frozen=True)
class PredictorConfig:
    """Algorithm choice plus its thresholds.

    ``confidence_threshold`` of None means the per-algorithm default
    (0.25 for DG arc weights, 0.1 for PPM branch probabilities). Fields
    irrelevant to the chosen algorithm are validated but ignored.
    """

    algorithm: str
    lookahead_window: int = DEFAULT_LOOKAHEAD_WINDOW
    confidence_threshold: float | None = None
    ppm_order: int = DEFAULT_PPM_ORDER
    top_n: int = DEFAULT_TOP_N

    def __post_init__(self):
        object.__setattr__(self, "algorithm", self.algorithm.lower())
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if self.lookahead_window < 1:
            raise ValueError("lookahead_window must be >= 1")
        if self.confidence_threshold is not None and not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must lie in [0, 1]")
        if self.ppm_order < 1:
            raise ValueError("ppm_order must be >= 1")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")

    @property
    def effective_threshold(self) -> float:
        if self.confidence_threshold is not None:
            return self.confidence_threshold
        return DEFAULT_DG_THRESHOLD if self.algorithm == "dg" else DEFAULT_PPM_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "lookahead_window": self.lookahead_window,
            "confidence_threshold": self.effective_threshold,
            "ppm_order": self.ppm_order,
            "top_n": self.top_n,
        }


def _ranked(scored: dict[str, float], threshold: float | None = None) -> list[str]:
    """Scores -> url_keys, score descending then lexicographic."""
    items = scored.items()
    if threshold is not None:
        items = [(k, s) for k, s in items if s >= threshold]
    return [k for k, _ in sorted(items, key=lambda kv: (-kv[1], kv[0]))]


class DGModel:
    """Directed dependency graph: arc (a, b) counts how often b followed a
    within the lookahead window; arc weight is count / occurrences(a)."""

    algorithm = "dg"

    def __init__(self, config: PredictorConfig):
        self.config = config
        self.node_counts: dict[str, int] = {}
        self.arc_counts: dict[str, dict[str, int]] = {}
        self.pending_window: deque[str] = deque(maxlen=config.lookahead_window)

    def update(self, key: str) -> None:
        for source in self.pending_window:
            targets = self.arc_counts.setdefault(source, {})
            targets[key] = targets.get(key, 0) + 1
        self.node_counts[key] = self.node_counts.get(key, 0) + 1
        self.pending_window.append(key)

    def predict(self, context: Sequence[str]) -> list[str]:
        if not context:
            return []
        source = context[-1]
        targets = self.arc_counts.get(source)
        occurrences = self.node_counts.get(source)
        if not targets or not occurrences:
            return []
        weights = {t: n / occurrences for t, n in targets.items()}
        return _ranked(weights, self.config.effective_threshold)

    def state_dict(self) -> dict:
        return {
            "node_counts": dict(sorted(self.node_counts.items())),
            "arc_counts": {s: dict(sorted(t.items()))
                           for s, t in sorted(self.arc_counts.items())},
            "pending_window": list(self.pending_window),
        }


class _TrieNode:
    __slots__ = ("count", "children")

    def __init__(self):
        self.count = 0
        self.children: dict[str, _TrieNode] = {}


class PPMModel:
    """Order-m Markov predictor over a trie of request contexts.

    Every contiguous subsequence of length <= ppm_order + 1 is a path in
    the trie; a node's count is the number of occurrences of its path.
    Prediction matches the longest trailing context suffix whose node has
    children, falling back to shorter suffixes when a node is missing or
    childless. The match length of the last prediction is kept on
    ``last_match_length`` for analysis.
    """

    algorithm = "ppm"

    def __init__(self, config: PredictorConfig):
        self.config = config
        self.root = _TrieNode()
        self.recent_context: deque[str] = deque(maxlen=config.ppm_order)
        self.last_match_length = 0

    def update(self, key: str) -> None:
        self.root.count += 1
        context = list(self.recent_context)
        # paths of length 1..order+1, all ending at `key`
        for start in range(len(context), -1, -1):
            node = self.root
            for ctx_key in context[start:]:
                node = node.children.setdefault(ctx_key, _TrieNode())
            child = node.children.setdefault(key, _TrieNode())
            child.count += 1
        self.recent_context.append(key)

    def _lookup(self, path: Sequence[str]) -> _TrieNode | None:
        node = self.root
        for key in path:
            node = node.children.get(key)
            if node is None:
                return None
        return node

    def predict(self, context: Sequence[str]) -> list[str]:
        tail = list(context)[-self.config.ppm_order:]
        for length in range(len(tail), 0, -1):
            node = self._lookup(tail[-length:])
            if node is None or not node.children:
                continue
            self.last_match_length = length
            probs = {key: child.count / node.count for key, child in node.children.items()}
            return _ranked(probs, self.config.effective_threshold)
        self.last_match_length = 0
        return []

    def state_dict(self) -> dict:
        def encode(node: _TrieNode) -> dict:
            return {
                "count": node.count,
                "children": {k: encode(c) for k, c in sorted(node.children.items())},
            }
        return {
            "trie": encode(self.root),
            "recent_context": list(self.recent_context),
        }


class MPModel:
    """Per-request table of the most popular successors within the window."""

    algorithm = "mp"

    def __init__(self, config: PredictorConfig):
        self.config = config
        self.successor_lists: dict[str, dict[str, int]] = {}
        self.pending_window: deque[str] = deque(maxlen=config.lookahead_window)

    def update(self, key: str) -> None:
        for source in self.pending_window:
            successors = self.successor_lists.setdefault(source, {})
            successors[key] = successors.get(key, 0) + 1
        self.pending_window.append(key)

    def predict(self, context: Sequence[str]) -> list[str]:
        if not context:
            return []
        successors = self.successor_lists.get(context[-1])
        if not successors:
            return []
        counts = {k: float(n) for k, n in successors.items()}
        return _ranked(counts)[: self.config.top_n]

    def state_dict(self) -> dict:
        return {
            "successor_lists": {s: dict(sorted(t.items()))
                                for s, t in sorted(self.successor_lists.items())},
            "pending_window": list(self.pending_window),
        }


class NaiveModel:
    """Baseline: every request seen in the past is predicted to reappear."""

    algorithm = "naive"

    def __init__(self, config: PredictorConfig):
        self.config = config
        self.seen: dict[str, None] = {}  # insertion-ordered set

    def update(self, key: str) -> None:
        self.seen.setdefault(key, None)

    def predict(self, context: Sequence[str]) -> list[str]:
        return list(self.seen)

    def state_dict(self) -> dict:
        return {"seen": list(self.seen)}


PredictionModel = DGModel | PPMModel | MPModel | NaiveModel

_MODEL_CLASSES = {"dg": DGModel, "ppm": PPMModel, "mp": MPModel, "naive": NaiveModel}


def empty_model(config: PredictorConfig) -> PredictionModel:
    return _MODEL_CLASSES[config.algorithm](config)


def train(config: PredictorConfig, training: Iterable[str]) -> PredictionModel:
    """Build a model from a (possibly empty) training sequence in one batch pass."""
    sequence = list(training)
    model = empty_model(config)
    if config.algorithm == "dg":
        window = config.lookahead_window
        for i, key in enumerate(sequence):
            for source in sequence[max(0, i - window):i]:
                targets = model.arc_counts.setdefault(source, {})
                targets[key] = targets.get(key, 0) + 1
            model.node_counts[key] = model.node_counts.get(key, 0) + 1
        model.pending_window.extend(sequence[-window:])
    elif config.algorithm == "mp":
        window = config.lookahead_window
        for i, key in enumerate(sequence):
            for source in sequence[max(0, i - window):i]:
                successors = model.successor_lists.setdefault(source, {})
                successors[key] = successors.get(key, 0) + 1
        model.pending_window.extend(sequence[-window:])
    elif config.algorithm == "ppm":
        order = config.ppm_order
        model.root.count = len(sequence)
        for i, key in enumerate(sequence):
            for start in range(max(0, i - order), i + 1):
                node = model.root
                for ctx_key in sequence[start:i]:
                    node = node.children.setdefault(ctx_key, _TrieNode())
                child = node.children.setdefault(key, _TrieNode())
                child.count += 1
        model.recent_context.extend(sequence[-order:])
    else:
        for key in sequence:
            model.seen.setdefault(key, None)
    return model


def predict(model: PredictionModel, context: Sequence[str]) -> list[str]:
    """Rank candidate next requests given the most-recent-last context."""
    return model.predict(context)


def update_model(model: PredictionModel, key: str) -> PredictionModel:
    """Feed one more request into the model (in place); returns the model."""
    model.update(key)
    return model


def model_to_dict(model: PredictionModel) -> dict:
    """Versioned, JSON-ready snapshot of the full model state."""
    return {
        "format": MODEL_FORMAT,
        "algorithm": model.algorithm,
        "config": model.config.to_dict(),
        "state": model.state_dict(),
    }


def model_to_json(model: PredictionModel) -> str:
    """Canonical JSON serialization (stable key order) for fixture pinning."""
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
