"""The four experimental options, end to end.

    option 1: normalize -> split -> fit/evaluate in the original space
    option 2: normalize -> split -> SMOTE(train) -> fit/evaluate
    option 3: normalize -> t-SNE(all rows) -> split -> fit/evaluate in 2-D
    option 4: normalize -> t-SNE(all rows) -> split -> SMOTE(train, 2-D) -> fit/evaluate

The split always works on row indices with one shared seed, so every option
is evaluated on the same test rows. t-SNE sees all rows (test rows included,
labels excluded) before the split; SMOTE and the classifiers never see test
rows.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import viz
from .classifiers import ClassifierSpec, Kind, default_classifiers, save_model
from .data import Dataset, SplitPair, normalize, save_csv, stratified_split
from .errors import EmbedVizError, PreconditionError, SingleClass, StageError
from .metrics import MetricsReport, evaluate, reports_to_csv, reports_to_json
from .smote import SmoteConfig, smote_oversample
from .tsne import Embedding, TsneConfig, perplexity_sweep, run_tsne, save_embedding_csv

log = logging.getLogger(__name__)

OPTIONS = (1, 2, 3, 4)
THREADS_ENV = "EMBEDVIZ_THREADS"


def worker_count() -> int:
    """Thread cap from EMBEDVIZ_THREADS; unset or 0 means one per CPU."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise PreconditionError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise PreconditionError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True)
class PipelineConfig:
    option: int = 1
    tsne: TsneConfig = field(default_factory=lambda: TsneConfig(perplexity=100.0))
    smote: SmoteConfig = field(default_factory=SmoteConfig)
    test_fraction: float = 0.25
    split_seed: int = 0
    classifiers: tuple = field(default_factory=lambda: tuple(default_classifiers()))
    output_dir: str | None = None
    resolution: int = 200
    figures: bool = True
    save_models: bool = True
    sweep_perplexities: tuple = ()

    def validate(self):
        if self.option not in OPTIONS:
            raise PreconditionError(f"option must be one of {OPTIONS}, got {self.option}")
        if not self.classifiers:
            raise PreconditionError("classifier list must be non-empty")

    @property
    def uses_tsne(self) -> bool:
        return self.option in (3, 4)

    @property
    def uses_smote(self) -> bool:
        return self.option in (2, 4)


@dataclass(eq=False)
class OptionResult:
    option: int
    reports: list
    split: SplitPair
    train: Dataset
    models: dict
    embedding: Embedding | None = None


@dataclass(eq=False)
class PipelineRun:
    reports: list
    results: dict

    def table_csv(self) -> str:
        return reports_to_csv(self.reports)

    def table_json(self) -> str:
        return reports_to_json(self.reports)


class _stage:
    """Re-raise package errors tagged with the stage they came from."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, EmbedVizError) and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def embed_dataset(ds: Dataset, cfg: TsneConfig) -> Embedding:
    """t-SNE of the normalized dataset (all rows)."""
    with _stage("normalize"):
        norm = normalize(ds)
    with _stage("tsne"):
        return run_tsne(norm.samples, cfg)


def _fit_eval(spec: ClassifierSpec, train: Dataset, test: Dataset, option: int):
    model = spec.build().fit(train.samples, train.labels)
    report = evaluate(test.labels, model.predict(test.samples), model.predict_score(test.samples),
                      classifier=spec.label, option=option)
    return model, report


def _out(cfg) -> Path | None:
    if cfg.output_dir is None:
        return None
    p = Path(cfg.output_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def run_option(ds: Dataset, cfg: PipelineConfig, embedding: Embedding | None = None) -> OptionResult:
    """Run one option and return its reports (one per classifier) plus the
    split, the training set handed to the classifiers and the fitted models.

    ``embedding`` lets options 3 and 4 share one t-SNE run.
    """
    cfg.validate()
    if ds.n_positive == 0 or ds.n_negative == 0:
        raise StageError("input", SingleClass("dataset must contain both classes"))
    with _stage("normalize"):
        rep = normalize(ds)
    emb = None
    if cfg.uses_tsne:
        if embedding is None:
            with _stage("tsne"):
                embedding = run_tsne(rep.samples, cfg.tsne)
        emb = embedding
        if emb.points.shape[0] != ds.n:
            raise StageError("tsne", PreconditionError("embedding row count does not match dataset"))
        rep = rep.with_samples(emb.points)
    with _stage("split"):
        split = stratified_split(rep, cfg.test_fraction, cfg.split_seed)
    train = split.train
    if cfg.uses_smote:
        with _stage("smote"):
            train = smote_oversample(train, cfg.smote)
    # test rows must never reach SMOTE or any fit call
    leaked = np.intersect1d(train.row_ids[train.row_ids >= 0], split.test.row_ids)
    if leaked.size:
        raise AssertionError(f"test rows leaked into training data: {leaked[:5]}")

    log.info("option %d: train %d (+%d/-%d), test %d", cfg.option, train.n,
             train.n_positive, train.n_negative, split.test.n)
    with _stage("classify"):
        workers = min(worker_count(), len(cfg.classifiers))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                fitted = list(pool.map(lambda s: _fit_eval(s, train, split.test, cfg.option),
                                       cfg.classifiers))
        else:
            fitted = [_fit_eval(s, train, split.test, cfg.option) for s in cfg.classifiers]
    models = {spec.label: m for spec, (m, _) in zip(cfg.classifiers, fitted)}
    reports = [r for _, r in fitted]
    result = OptionResult(cfg.option, reports, split, train, models, emb)

    out = _out(cfg)
    if out is not None:
        with _stage("write"):
            _write_option_artifacts(out, ds, cfg, result)
    return result


def _write_option_artifacts(out: Path, ds: Dataset, cfg: PipelineConfig, result: OptionResult):
    k = cfg.option
    if result.embedding is not None:
        save_embedding_csv(result.embedding.points, ds.labels, out / f"embedding_opt{k}.csv")
    if cfg.uses_smote:
        save_csv(result.train, out / f"train_resampled_opt{k}.csv")
    if cfg.save_models:
        mdir = out / "models"
        mdir.mkdir(exist_ok=True)
        for label, model in result.models.items():
            save_model(model, mdir / f"opt{k}_{label}.model")
    if cfg.uses_tsne and cfg.figures:
        write_option_figures(out, result, cfg.resolution)


def write_option_figures(out: Path, result: OptionResult, resolution: int = 200):
    """Training-set map and decision-surface grid for an embedded option."""
    k = result.option
    train, test = result.train, result.split.test
    state = "balanced (SMOTE)" if k == 4 else "imbalanced"
    (out / f"fig4_option{k}_train.svg").write_text(
        viz.scatter_svg(train.samples, train.labels, f"option {k}: training set, {state}"),
        encoding="utf-8",
    )
    bounds = viz.grid_bounds(np.vstack([train.samples, test.samples]))
    panels = []
    for label, model in result.models.items():
        grid = viz.decision_surface(model, bounds, resolution)
        panels.append((grid, train.samples, train.labels, test.samples, test.labels, label))
    (out / f"fig5_option{k}_surfaces.svg").write_text(
        viz.surface_grid_svg(panels, ncols=3, title=f"Classifier comparison, option {k}"),
        encoding="utf-8",
    )


def write_sweep_figures(out: Path, ds: Dataset, cfg: TsneConfig, values) -> list[Embedding]:
    """Perplexity sweep over the normalized data; one scatter per value."""
    with _stage("tsne-sweep"):
        embs = perplexity_sweep(normalize(ds).samples, cfg, values)
    for v, e in zip(values, embs):
        name = f"fig3_perplexity_{v:g}.svg"
        (out / name).write_text(viz.scatter_svg(e.points, ds.labels, f"perplexity = {v:g}"),
                                encoding="utf-8")
    return embs


def run_all(ds: Dataset, base_cfg: PipelineConfig | None = None, options=OPTIONS) -> PipelineRun:
    """Run the selected options with shared seeds and collect all reports.

    Options 3 and 4 reuse one t-SNE embedding. Reports are ordered by
    classifier, then option. With an output directory set, the metrics
    table is written as ``metrics_table.csv`` and ``metrics_table.json``.
    """
    base_cfg = base_cfg or PipelineConfig()
    options = tuple(sorted(set(options)))
    for o in options:
        if o not in OPTIONS:
            raise PreconditionError(f"unknown option {o}")
    embedding = None
    if any(o in (3, 4) for o in options):
        embedding = embed_dataset(ds, base_cfg.tsne)
    results = {}
    for o in options:
        results[o] = run_option(ds, replace(base_cfg, option=o), embedding if o in (3, 4) else None)
    labels = [s.label for s in base_cfg.classifiers]
    reports = sorted(
        (r for res in results.values() for r in res.reports),
        key=lambda r: (labels.index(r.classifier), r.option),
    )
    run = PipelineRun(reports, results)
    out = _out(base_cfg)
    if out is not None:
        (out / "metrics_table.csv").write_text(run.table_csv(), encoding="utf-8")
        (out / "metrics_table.json").write_text(run.table_json(), encoding="utf-8")
        if base_cfg.sweep_perplexities and base_cfg.figures:
            write_sweep_figures(out, ds, base_cfg.tsne, base_cfg.sweep_perplexities)
    return run


__all__ = [
    "PipelineConfig",
    "OptionResult",
    "PipelineRun",
    "run_option",
    "run_all",
    "embed_dataset",
    "write_option_figures",
    "write_sweep_figures",
    "worker_count",
    "MetricsReport",
    "Kind",
]
