"""Command-line entry point: simplify, evaluate, score, and sweep.

Exit codes are fixed for scripting: 0 success, 2 input error, 3 backend
failure. Primary output goes to stdout and is byte-identical across runs
with the same effective config; warnings go to stderr. The effective
config is echoed into every report header.
"""

from __future__ import annotations

import dataclasses
import json
import os
import re
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import click

from . import errors
from .backends import Backend, RemoteBackend, ToyBackend, demo_lexicon
from .evaluation import GoldInstance, MetricsReport, Prediction, evaluate, fold, load_tsar
from .generator import GeneratorConfig, SimplificationTask, generate_candidates
from .ranker import (
    LexicalResources,
    RankingWeights,
    compute_features,
    load_resources,
    rank,
    rank_passthrough,
    weights_for_language,
)

REMOTE_URL_ENV = "LEXSIMP_REMOTE_URL"
SWEEP_K_VALUES = (5, 10, 20, 50)
SWEEP_SUFFIX_LENGTHS = (0, 1, 2, 3, 4, 5)
FEATURE_SETS = ("prediction-only", "+freq", "+embed", "+both")


@dataclass
class RunConfig:
    backend: str = "toy"
    url: str | None = None
    lang: str | None = None
    k: int = 50
    lookahead: int = 3
    no_ranking: bool = False
    weights: tuple[float, float, float] | None = None
    embeddings: str | None = None
    freq: str | None = None
    top_n: int = 10
    format: str = "text"
    workers: int | None = None

    def payload(self) -> dict:
        out = dataclasses.asdict(self)
        out["weights"] = list(self.weights) if self.weights else None
        # worker count is an execution detail: results are aggregated by
        # input index, so output bytes must not depend on it
        out.pop("workers")
        return out

    def echo_line(self) -> str:
        return "# config: " + json.dumps(self.payload(), sort_keys=True)

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            k=self.k,
            lookahead_words=self.lookahead,
            first_token_pool=max(200, self.k),
        )


_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def _die(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _warn(message: str) -> None:
    click.echo(f"warning: {message}", err=True)


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError("expected three comma-separated numbers: prediction,frequency,similarity")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def resolve_config(config_path: str | None, overrides: dict) -> RunConfig:
    """Hard defaults, overlaid by the JSON config file, overlaid by CLI flags."""
    cfg = RunConfig()
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config file {config_path}: {exc}") from exc
        unknown = set(file_values) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "weights" in file_values and file_values["weights"] is not None:
            file_values["weights"] = tuple(float(v) for v in file_values["weights"])
        for key, value in file_values.items():
            setattr(cfg, key, value)
    for key, value in overrides.items():
        if value is not None and value is not False:
            setattr(cfg, key, value)
    if cfg.url is None:
        cfg.url = os.environ.get(REMOTE_URL_ENV)
    if cfg.lang is None and cfg.backend == "toy":
        cfg.lang = "toy"
    if cfg.backend == "remote" and not cfg.url:
        raise ValueError(f"remote backend requires --url or ${REMOTE_URL_ENV}")
    if cfg.lang is None:
        raise ValueError("--lang is required for the remote backend")
    if not 1 <= cfg.top_n <= 10:
        raise ValueError("--top-n must be between 1 and 10")
    if cfg.workers is not None and cfg.workers < 1:
        raise ValueError("--workers must be >= 1")
    return cfg


def build_backend(cfg: RunConfig) -> Backend:
    if cfg.backend == "toy":
        return ToyBackend(demo_lexicon())
    return RemoteBackend(cfg.url)


@dataclass
class Ranking:
    """Resolved ranking mode: weighted features or generator-order passthrough."""

    mode: str  # "ranked" | "passthrough"
    weights: RankingWeights | None = None
    resources: LexicalResources | None = None


def resolve_ranking(cfg: RunConfig, require_ranked: bool = False) -> Ranking:
    if cfg.no_ranking:
        if require_ranked:
            raise ValueError("this command needs ranking features; drop --no-ranking")
        return Ranking(mode="passthrough")
    if not cfg.embeddings or not cfg.freq:
        if require_ranked:
            raise ValueError("ranking features need both --embeddings and --freq")
        _warn("no lexical resources configured; falling back to no-ranking mode")
        return Ranking(mode="passthrough")
    weights = RankingWeights(*cfg.weights) if cfg.weights else weights_for_language(cfg.lang)
    if weights is None:
        raise ValueError(
            f"no preset ranking weights for language {cfg.lang!r}; pass --weights p,f,s"
        )
    resources = load_resources(cfg.embeddings, cfg.freq)
    return Ranking(mode="ranked", weights=weights, resources=resources)


def locate_word(context: str, word: str) -> tuple[int, int] | None:
    """First case-insensitive occurrence of ``word`` aligned to word boundaries."""
    for match in re.finditer(re.escape(word), context, flags=re.IGNORECASE):
        start, end = match.span()
        if start > 0 and context[start - 1].isalnum():
            continue
        if end < len(context) and context[end].isalnum():
            continue
        return start, end
    return None


def predict_instance(
    backend: Backend,
    instance: GoldInstance,
    lang: str,
    gen_cfg: GeneratorConfig,
    ranking: Ranking,
    top_n: int,
) -> Prediction:
    """Generate and rank substitutes for one gold instance.

    Instances whose complex word cannot be located or tokenized cleanly
    are skipped; an exhausted candidate pool yields an empty prediction.
    """
    span = locate_word(instance.context, instance.complex_word)
    if span is None:
        return Prediction(skipped=True)
    try:
        task = SimplificationTask(text=instance.context, complex_span=span, lang=lang)
        candidates = generate_candidates(task, backend, gen_cfg)
    except errors.NoCandidates:
        return Prediction()
    except (errors.MisalignedSpan, ValueError):
        return Prediction(skipped=True)
    if ranking.mode == "ranked":
        features = compute_features(candidates, task.complex_word, ranking.resources)
        chosen = rank(candidates, features, ranking.weights, top_n)
    else:
        chosen = rank_passthrough(candidates, top_n)
    return Prediction(tuple(c.surface for c in chosen))


def run_dataset(
    backend: Backend,
    instances: Sequence[GoldInstance],
    cfg: RunConfig,
    ranking: Ranking,
    gen_cfg: GeneratorConfig | None = None,
) -> tuple[MetricsReport, list[Prediction]]:
    gen_cfg = gen_cfg or cfg.generator_config()
    workers = cfg.workers or os.cpu_count() or 1

    def job(instance: GoldInstance) -> Prediction:
        return predict_instance(backend, instance, cfg.lang, gen_cfg, ranking, cfg.top_n)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        predictions = list(pool.map(job, instances))
    return evaluate(predictions, instances), predictions


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _render_report(report: MetricsReport, cfg: RunConfig) -> str:
    if cfg.format == "json":
        return json.dumps({"config": cfg.payload(), "metrics": report.as_dict()}, indent=2)
    body = report.to_tsv() if cfg.format == "tsv" else report.to_text()
    return f"{cfg.echo_line()}\n{body}"


def common_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="JSON config file; CLI flags override its values."),
        click.option("--backend", type=click.Choice(["toy", "remote"]), default=None),
        click.option("--url", default=None, help=f"Remote server URL (or ${REMOTE_URL_ENV})."),
        click.option("--lang", default=None, help="Language code understood by the backend."),
        click.option("--k", type=int, default=None, help="Candidate words to generate."),
        click.option("--lookahead", type=int, default=None, help="Suffix words to re-score with."),
        click.option("--no-ranking", "no_ranking", is_flag=True, default=False,
                     help="Keep generator order instead of feature ranking."),
        click.option("--weights", default=None, help="Ranking weights 'p,f,s' (overrides presets)."),
        click.option("--embeddings", type=click.Path(), default=None, help="Word-vector text file."),
        click.option("--freq", type=click.Path(), default=None, help="Zipf frequency TSV."),
        click.option("--top-n", "top_n", type=int, default=None, help="Substitutes per prediction (<= 10)."),
        click.option("--format", "format_", type=click.Choice(["text", "json", "tsv"]), default=None),
        click.option("--workers", type=int, default=None, help="Worker threads for dataset runs."),
        click.option("--out", "out_path", type=click.Path(), default=None),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _gather(config_path, **kwargs) -> RunConfig:
    overrides = {
        "backend": kwargs.get("backend"),
        "url": kwargs.get("url"),
        "lang": kwargs.get("lang"),
        "k": kwargs.get("k"),
        "lookahead": kwargs.get("lookahead"),
        "no_ranking": kwargs.get("no_ranking"),
        "embeddings": kwargs.get("embeddings"),
        "freq": kwargs.get("freq"),
        "top_n": kwargs.get("top_n"),
        "format": kwargs.get("format_"),
        "workers": kwargs.get("workers"),
    }
    if kwargs.get("weights"):
        overrides["weights"] = _parse_weights(kwargs["weights"])
    try:
        return resolve_config(config_path, overrides)
    except ValueError as exc:
        _die(2, str(exc))


@click.group()
def main() -> None:
    """Generate, rank, score, and sweep simpler substitutes for complex words."""


@main.command()
@click.argument("sentence")
@click.argument("word_or_span")
@common_options
def simplify(sentence: str, word_or_span: str, config_path, out_path, **kwargs) -> None:
    """Print ranked substitutes for one complex word in SENTENCE.

    WORD_OR_SPAN is either the complex word itself (first case-insensitive
    occurrence is used) or an explicit character span START:END.
    """
    cfg = _gather(config_path, **kwargs)
    if re.fullmatch(r"\d+:\d+", word_or_span):
        start, end = (int(p) for p in word_or_span.split(":"))
        span = (start, end)
    else:
        span = locate_word(sentence, word_or_span)
        if span is None:
            _die(2, f"word {word_or_span!r} not found in the sentence")
    try:
        ranking = resolve_ranking(cfg)
        backend = build_backend(cfg)
        task = SimplificationTask(text=sentence, complex_span=span, lang=cfg.lang)
        candidates = generate_candidates(task, backend, cfg.generator_config())
        if ranking.mode == "ranked":
            features = compute_features(candidates, task.complex_word, ranking.resources)
            chosen = rank(candidates, features, ranking.weights, cfg.top_n)
        else:
            chosen = rank_passthrough(candidates, cfg.top_n)
    except (errors.MisalignedSpan, errors.NoCandidates, ValueError) as exc:
        _die(2, str(exc))
    except errors.BackendError as exc:
        _die(3, str(exc))

    rows = [
        {
            "rank": i,
            "word": c.surface,
            "total": c.total_score,
            "first_token": c.first_token_logprob,
            "own_continuation": c.own_continuation_logprob,
            "lookahead": c.lookahead_logprob,
        }
        for i, c in enumerate(chosen, start=1)
    ]
    if cfg.format == "json":
        payload = {"config": cfg.payload(), "candidates": rows}
        _emit(json.dumps(payload, indent=2), out_path)
        return
    lines = [cfg.echo_line()]
    if cfg.format == "tsv":
        lines.append("rank\tword\ttotal\tfirst_token\town_continuation\tlookahead")
        lines += [
            f"{r['rank']}\t{r['word']}\t{r['total']:.6f}\t{r['first_token']:.6f}"
            f"\t{r['own_continuation']:.6f}\t{r['lookahead']:.6f}"
            for r in rows
        ]
    else:
        width = max(len(r["word"]) for r in rows)
        lines.append(f"{'rank':<4}  {'word':<{width}}  {'total':>10}  {'first':>10}  {'own':>10}  {'lookahead':>10}")
        lines += [
            f"{r['rank']:<4}  {r['word']:<{width}}  {r['total']:>10.6f}  {r['first_token']:>10.6f}"
            f"  {r['own_continuation']:>10.6f}  {r['lookahead']:>10.6f}"
            for r in rows
        ]
    _emit("\n".join(lines), out_path)


@main.command(name="evaluate")
@click.argument("dataset", type=click.Path())
@common_options
def evaluate_cmd(dataset: str, config_path, out_path, **kwargs) -> None:
    """Run generate-rank-evaluate over a TSV dataset and print the report.

    With --out, the per-instance predictions are also written as
    context<TAB>complex_word<TAB>substitutes TSV.
    """
    cfg = _gather(config_path, **kwargs)
    try:
        data = load_tsar(dataset)
    except OSError as exc:
        _die(2, str(exc))
    for line_no, reason in data.malformed:
        _warn(f"{dataset}:{line_no}: skipped malformed line ({reason})")
    if not data.instances:
        _die(2, f"no usable instances in {dataset}")
    try:
        ranking = resolve_ranking(cfg)
        backend = build_backend(cfg)
        report, predictions = run_dataset(backend, data.instances, cfg, ranking)
    except errors.BackendError as exc:
        _die(3, str(exc))
    except (OSError, ValueError) as exc:
        _die(2, str(exc))
    if out_path:
        # skipped instances get no row, so re-scoring preserves the skip tally
        with open(out_path, "w", encoding="utf-8") as fh:
            for inst, pred in zip(data.instances, predictions):
                if pred.skipped:
                    continue
                cells = [inst.context, inst.complex_word, *pred.words]
                fh.write("\t".join(cells) + "\n")
    click.echo(_render_report(report, cfg))


def _load_prediction_rows(path: str) -> dict[tuple[str, str], deque[Prediction]]:
    rows: dict[tuple[str, str], deque[Prediction]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}: prediction rows need context<TAB>complex_word")
            key = (fold(parts[0]), fold(parts[1]))
            seen: list[str] = []
            for cell in parts[2:]:
                if cell.strip() and fold(cell) not in {fold(w) for w in seen}:
                    seen.append(cell.strip())
            rows.setdefault(key, deque()).append(Prediction(tuple(seen[:10])))
    return rows


@main.command()
@click.argument("dataset", type=click.Path())
@click.argument("predictions", type=click.Path())
@common_options
def score(dataset: str, predictions: str, config_path, out_path, **kwargs) -> None:
    """Score an externally produced predictions file against a dataset.

    Rows align on case-folded (context, complex_word). An instance without
    a row counts as skipped (scores 0 everywhere); rows matching no
    instance are an alignment error.
    """
    cfg = _gather(config_path, **kwargs)
    try:
        data = load_tsar(dataset)
        rows = _load_prediction_rows(predictions)
    except (OSError, ValueError) as exc:
        _die(2, str(exc))
    for line_no, reason in data.malformed:
        _warn(f"{dataset}:{line_no}: skipped malformed line ({reason})")
    if not data.instances:
        _die(2, f"no usable instances in {dataset}")
    aligned: list[Prediction] = []
    for inst in data.instances:
        key = (fold(inst.context), fold(inst.complex_word))
        queue = rows.get(key)
        # no row means the system never processed the instance
        aligned.append(queue.popleft() if queue else Prediction(skipped=True))
        if queue is not None and not queue:
            del rows[key]
    if rows:
        leftovers = ", ".join(f"({ctx[:40]!r}, {word!r})" for ctx, word in sorted(rows))
        _die(2, f"prediction rows match no dataset instance: {leftovers}")
    report = evaluate(aligned, data.instances)
    _emit(_render_report(report, cfg), out_path)


@main.command()
@click.argument("dataset", type=click.Path())
@click.option(
    "--axis",
    type=click.Choice(["suffix_length", "ranking_features", "k_candidates"]),
    required=True,
)
@common_options
def sweep(dataset: str, axis: str, config_path, out_path, **kwargs) -> None:
    """Evaluate once per axis value and emit a tidy axis_value/metric/value TSV."""
    cfg = _gather(config_path, **kwargs)
    try:
        data = load_tsar(dataset)
    except OSError as exc:
        _die(2, str(exc))
    if not data.instances:
        _die(2, f"no usable instances in {dataset}")
    try:
        backend = build_backend(cfg)
        runs: list[tuple[str, MetricsReport]] = []
        if axis == "suffix_length":
            ranking = resolve_ranking(cfg)
            for length in SWEEP_SUFFIX_LENGTHS:
                gen_cfg = GeneratorConfig(k=cfg.k, lookahead_words=length)
                report, _ = run_dataset(backend, data.instances, cfg, ranking, gen_cfg)
                runs.append((str(length), report))
        elif axis == "k_candidates":
            ranking = resolve_ranking(cfg)
            for k in SWEEP_K_VALUES:
                gen_cfg = GeneratorConfig(k=k, lookahead_words=cfg.lookahead)
                report, _ = run_dataset(backend, data.instances, cfg, ranking, gen_cfg)
                runs.append((str(k), report))
        else:
            full = resolve_ranking(cfg, require_ranked=True)
            masks = {
                "prediction-only": RankingWeights(full.weights.prediction, 0.0, 0.0),
                "+freq": RankingWeights(full.weights.prediction, full.weights.frequency, 0.0),
                "+embed": RankingWeights(full.weights.prediction, 0.0, full.weights.similarity),
                "+both": full.weights,
            }
            for label in FEATURE_SETS:
                ranking = Ranking(mode="ranked", weights=masks[label], resources=full.resources)
                report, _ = run_dataset(backend, data.instances, cfg, ranking)
                runs.append((label, report))
    except errors.BackendError as exc:
        _die(3, str(exc))
    except (OSError, ValueError) as exc:
        _die(2, str(exc))

    lines = [cfg.echo_line(), "axis_value\tmetric\tvalue"]
    for axis_value, report in runs:
        for metric, value in report.as_dict().items():
            lines.append(f"{axis_value}\t{metric}\t{value!r}")
    _emit("\n".join(lines), out_path)


if __name__ == "__main__":
    main()
