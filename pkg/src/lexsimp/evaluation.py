"""Shared-task dataset loading and the full metric suite.

Matching everywhere is case-folded exact string equality after trimming:
no accent stripping, no lemmatization. Anything smarter would silently
inflate scores.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import errors

MAP_KS = (3, 5, 10)
POTENTIAL_KS = (3, 5, 10)
TOP1_NS = (1, 2, 3)


def fold(text: str) -> str:
    """The single normalization used for all gold/prediction matching."""
    return text.strip().casefold()


@dataclass(frozen=True)
class GoldInstance:
    """One dataset row: context, complex word, and annotator-voted substitutes."""

    context: str
    complex_word: str
    gold: Mapping[str, int]  # folded substitute -> vote count

    def __post_init__(self) -> None:
        if not self.gold:
            raise ValueError("gold substitute set must be non-empty")
        if any(c < 1 for c in self.gold.values()):
            raise ValueError("gold vote counts must be >= 1")

    def top_voted(self) -> frozenset[str]:
        """Every maximally-voted substitute; ties all count as "the most frequent"."""
        peak = max(self.gold.values())
        return frozenset(w for w, c in self.gold.items() if c == peak)


@dataclass(frozen=True)
class Prediction:
    """Ordered distinct substitutes (at most 10) for one instance.

    ``skipped`` marks instances the generator could not process
    (misaligned span, unlocatable complex word); they score 0 everywhere
    and are tallied separately.
    """

    words: tuple[str, ...] = ()
    skipped: bool = False

    def __post_init__(self) -> None:
        folded = [fold(w) for w in self.words]
        if len(set(folded)) != len(folded):
            raise ValueError("prediction contains case-folded duplicates")
        if len(self.words) > 10:
            raise ValueError("prediction holds more than 10 substitutes")

    def folded(self) -> list[str]:
        return [fold(w) for w in self.words]


@dataclass
class TsarDataset:
    instances: list[GoldInstance]
    malformed: list[tuple[int, str]] = field(default_factory=list)  # (line_no, reason)


def load_tsar(path: str) -> TsarDataset:
    """Parse a TSV dataset: context<TAB>complex_word<TAB>substitute...

    Repeated substitutes aggregate into vote counts. Malformed lines are
    collected with their 1-based line numbers and skipped.
    """
    dataset = TsarDataset(instances=[])
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                dataset.malformed.append((line_no, "expected context, complex word, and substitutes"))
                continue
            context, complex_word = parts[0].strip(), parts[1].strip()
            subs = [fold(p) for p in parts[2:] if p.strip()]
            if not context or not complex_word or not subs:
                dataset.malformed.append((line_no, "empty context, complex word, or substitute list"))
                continue
            dataset.instances.append(
                GoldInstance(context=context, complex_word=complex_word, gold=dict(Counter(subs)))
            )
    return dataset


# -- per-instance metrics ---------------------------------------------------


def potential_at_k(pred: Prediction, gold: GoldInstance, k: int) -> int:
    """1 iff any of the first k predictions case-folds to a gold substitute."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return int(any(w in gold.gold for w in pred.folded()[:k]))


def acc_at_n_top1(pred: Prediction, gold: GoldInstance, n: int) -> int:
    """1 iff any of the first n predictions is a maximally-voted gold substitute."""
    if n < 1:
        raise ValueError("n must be >= 1")
    top = gold.top_voted()
    return int(any(w in top for w in pred.folded()[:n]))


def map_at_k(pred: Prediction, gold: GoldInstance, k: int) -> float:
    """Average precision at k with binary relevance against the gold set.

    AP@k = (sum over hit positions i<=k of Precision@i) / min(k, |gold|).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = 0
    ap = 0.0
    for i, word in enumerate(pred.folded()[:k], start=1):
        if word in gold.gold:
            hits += 1
            ap += hits / i
    return ap / min(k, len(gold.gold))


# -- dataset-level report ---------------------------------------------------


@dataclass(frozen=True)
class MetricsReport:
    acc_at_1: float
    map_at_k: Mapping[int, float]
    potential_at_k: Mapping[int, float]
    acc_at_n_top1: Mapping[int, float]
    instance_count: int
    skipped_count: int

    def as_dict(self) -> dict[str, float | int]:
        out: dict[str, float | int] = {"acc@1": self.acc_at_1}
        for n in TOP1_NS:
            out[f"acc@{n}@top1"] = self.acc_at_n_top1[n]
        for k in MAP_KS:
            out[f"map@{k}"] = self.map_at_k[k]
        for k in POTENTIAL_KS:
            out[f"potential@{k}"] = self.potential_at_k[k]
        out["instance_count"] = self.instance_count
        out["skipped_count"] = self.skipped_count
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False)

    def to_text(self) -> str:
        rows = [(name, value) for name, value in self.as_dict().items()]
        width = max(len(name) for name, _ in rows)
        lines = []
        for name, value in rows:
            if isinstance(value, int):
                lines.append(f"{name:<{width}}  {value}")
            else:
                lines.append(f"{name:<{width}}  {value:.12f}")
        return "\n".join(lines)

    def to_tsv(self) -> str:
        lines = []
        for name, value in self.as_dict().items():
            lines.append(f"{name}\t{value!r}")
        return "\n".join(lines)


def evaluate(predictions: Sequence[Prediction], golds: Sequence[GoldInstance]) -> MetricsReport:
    """Means of the per-instance metrics over an index-aligned corpus."""
    if len(predictions) != len(golds):
        raise errors.LengthMismatch(
            f"{len(predictions)} predictions vs {len(golds)} gold instances"
        )
    n = len(golds)
    if n == 0:
        raise errors.LengthMismatch("cannot evaluate an empty dataset")

    def mean(values: Iterable[float]) -> float:
        return sum(values) / n

    effective = [Prediction() if p.skipped else p for p in predictions]
    for p in effective:
        folded = p.folded()
        assert len(set(folded)) == len(folded), "Prediction invariant violated"
    report = MetricsReport(
        acc_at_1=mean(potential_at_k(p, g, 1) for p, g in zip(effective, golds)),
        map_at_k={k: mean(map_at_k(p, g, k) for p, g in zip(effective, golds)) for k in MAP_KS},
        potential_at_k={
            k: mean(potential_at_k(p, g, k) for p, g in zip(effective, golds))
            for k in POTENTIAL_KS
        },
        acc_at_n_top1={
            n_: mean(acc_at_n_top1(p, g, n_) for p, g in zip(effective, golds))
            for n_ in TOP1_NS
        },
        instance_count=n,
        skipped_count=sum(1 for p in predictions if p.skipped),
    )
    return report
