"""Experiment orchestration: repeated random splits, the method matrix,
metric aggregation, noise sweeps and result files."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines, metrics
from .conformal import (
    Calibration,
    calibrate,
    predict_set_classification,
    predict_set_regression,
    quantile_rank,
    slot_predictions,
    union_sets,
)
from .dataset import Dataset, attach_counterfactuals, load_csv, split
from .errors import ConfigError, UnsupportedOperationError
from .models import FeatureMap, Predictor
from .rng import make_rng
from .scm import SynthClassification, SynthRegression
from .scores import AGGREGATORS, ScoreKind, calibration_score, symmetrize

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "SweepRow",
    "METHODS",
    "run_experiment",
    "run_single",
    "noise_sweep",
    "emit_results",
    "emit_sweep",
]

log = logging.getLogger(__name__)

METHODS = ("SplitCP", "PostHocUnion", "CFU", "CFR", "PCF",
           "CF-CP-mean", "CF-CP-max", "CF-CP-min")
_ALIASES = {
    "splitcp": "SplitCP", "split": "SplitCP", "split-cp": "SplitCP",
    "posthocunion": "PostHocUnion", "post-hoc union": "PostHocUnion", "union": "PostHocUnion",
    "post-hoc-union": "PostHocUnion",
    "cfu": "CFU", "cfr": "CFR", "pcf": "PCF",
}
_DATASETS = ("synth_regression", "synth_classification", "csv")
# fields that do not change any computed number
_UNHASHED = ("methods", "aggregators", "output", "cf_noise")


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment.

    ``methods`` may name ``"CF-CP"``, which expands to one entry per
    aggregator in ``aggregators``. ``cf_noise`` is either one noise level or a
    list of levels (used by :func:`noise_sweep`).
    """

    dataset: str = "synth_regression"
    csv_path: str | None = None
    csv_schema: dict | None = None
    task: str | None = None
    alpha: float = 0.1
    score: str | None = None
    raps_lambda: float = 0.5
    raps_k_reg: int = 2
    aps_greedy: bool = True
    methods: list = field(default_factory=lambda: ["SplitCP", "PostHocUnion", "CFU", "CFR",
                                                   "PCF", "CF-CP"])
    aggregators: list = field(default_factory=lambda: list(AGGREGATORS))
    n_train: int = 5000
    n_cal: int = 1000
    n_test: int = 5000
    runs: int = 10
    base_seed: int = 0
    cf_noise: float | list = 0.0
    nonempty: bool = True
    nonempty_cf_views: bool = True
    rescue: str = "if_empty"
    label_noise: float = 0.6
    label_noise_is_variance: bool = False
    l2: float = 1.0
    max_iter: int = 1000
    tol: float = 1e-6
    te_mode: str = "tv"
    attr_encoding: str = "auto"
    output: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def resolved_task(self) -> str:
        if self.task:
            return self.task
        if self.dataset == "synth_classification":
            return "classification"
        return "regression"

    @property
    def score_kind(self) -> ScoreKind:
        name = self.score or ("residual" if self.resolved_task == "regression" else "lac")
        return ScoreKind(name, lam=self.raps_lambda, k_reg=self.raps_k_reg, greedy=self.aps_greedy)

    @property
    def method_list(self) -> list:
        out = []
        for m in self.methods:
            key = _ALIASES.get(m.lower(), m)
            if key in ("CF-CP", "CFCP", "cf-cp"):
                out.extend(f"CF-CP-{a}" for a in self.aggregators)
            elif key in METHODS:
                out.append(key)
            else:
                raise ConfigError(f"unknown method {m!r}")
        seen = set()
        return [m for m in METHODS if m in out and not (m in seen or seen.add(m))]

    @property
    def noise_levels(self) -> list:
        return list(self.cf_noise) if isinstance(self.cf_noise, (list, tuple)) else [self.cf_noise]

    def validate(self) -> None:
        if self.dataset not in _DATASETS:
            raise ConfigError(f"dataset must be one of {_DATASETS}, got {self.dataset!r}")
        if self.dataset == "csv" and not self.csv_path:
            raise ConfigError("csv dataset needs csv_path")
        if self.resolved_task not in ("regression", "classification"):
            raise ConfigError(f"unknown task {self.task!r}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        for a in self.aggregators:
            if a not in AGGREGATORS:
                raise ConfigError(f"unknown aggregator {a!r}")
        if not self.method_list:
            raise ConfigError("no methods selected")
        try:
            kind = self.score_kind
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if kind.is_classification != (self.resolved_task == "classification"):
            raise ConfigError(f"score {kind.name!r} does not fit task {self.resolved_task!r}")
        if min(self.n_train, self.n_cal, self.n_test) < 1:
            raise ConfigError("split sizes must be positive")
        if quantile_rank(self.n_cal, self.alpha) > self.n_cal:
            raise ConfigError(
                f"n_cal={self.n_cal} is too small for alpha={self.alpha}: the conformal "
                "quantile would be infinite")
        if any(s < 0 for s in self.noise_levels):
            raise ConfigError("cf_noise must be non-negative")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")
        if self.rescue not in ("if_empty", "argmax"):
            raise ConfigError(f"rescue must be 'if_empty' or 'argmax', got {self.rescue!r}")
        if self.te_mode not in ("tv", "flip"):
            raise ConfigError(f"te_mode must be 'tv' or 'flip', got {self.te_mode!r}")

    def fingerprint(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ResultRow:
    method: str
    metric: str
    mean: float
    std: float
    runs: int
    config_hash: str


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    method: str
    csd_mean: float
    csd_std: float


_NEEDS_CF = {"PostHocUnion", "CFR", "PCF", "CF-CP-mean", "CF-CP-max", "CF-CP-min"}
_NEEDS_U = {"CFU"}


def _load_source(cfg: ExperimentConfig):
    if cfg.dataset == "csv":
        ds = load_csv(cfg.csv_path, task=cfg.task, schema=cfg.csv_schema)
        return ds, None
    return None, None


def _check_capabilities(cfg: ExperimentConfig, ds: Dataset | None) -> None:
    if ds is None:
        return
    for m in cfg.method_list:
        if m in _NEEDS_CF and not ds.has_cf:
            raise UnsupportedOperationError(f"method {m} needs counterfactual features (cf_* columns)")
        if m in _NEEDS_U and ds.U is None:
            raise UnsupportedOperationError(f"method {m} needs exogenous variables (u* columns)")
    n = cfg.n_train + cfg.n_cal + cfg.n_test
    if n > len(ds):
        raise ConfigError(f"split sizes need {n} rows, the CSV has {len(ds)}")


def _prepare_run(cfg: ExperimentConfig, r: int, sigma: float, source: Dataset | None):
    seed = int(cfg.base_seed)
    n_total = cfg.n_train + cfg.n_cal + cfg.n_test
    data_rng = make_rng(seed, f"run{r}/data")
    if cfg.dataset == "synth_regression":
        scm = SynthRegression(label_noise=cfg.label_noise,
                              label_noise_is_variance=cfg.label_noise_is_variance)
        ds = scm.generate(n_total, data_rng)
    elif cfg.dataset == "synth_classification":
        scm = SynthClassification.sample(data_rng.child("scm"))
        ds = scm.generate(n_total, data_rng)
    else:
        scm, ds = None, source
    if ds.has_cf or scm is not None:
        ds = attach_counterfactuals(ds, scm, sigma, make_rng(seed, f"run{r}/noise"))
    return split(ds, cfg.n_train, cfg.n_cal, cfg.n_test, make_rng(seed, f"run{r}/split"))


def _fit(cfg, X, A, y, features, task, K):
    return Predictor.fit(X, A, y, task, features, K=K, l2=cfg.l2, max_iter=cfg.max_iter,
                         tol=cfg.tol)


def run_single(cfg: ExperimentConfig, r: int, sigma: float | None = None,
               source: Dataset | None = None) -> dict:
    """Evaluate every configured method on run ``r``.

    Returns ``{(method, metric): value}``.
    """
    sigma = cfg.noise_levels[0] if sigma is None else sigma
    if source is None and cfg.dataset == "csv":
        source, _ = _load_source(cfg)
    train, cal, test = _prepare_run(cfg, r, sigma, source)
    task = test.task
    K = test.K if task == "classification" else None
    kind = cfg.score_kind
    domain = test.domain
    has_cf = test.has_cf
    views = [None] + (list(domain) if has_cf else [])
    tviews = {v: test.view(v) for v in views}
    cview = cal.view(None)
    methods = cfg.method_list

    base = _fit(cfg, train.X, train.A, train.Y, FeatureMap(True, domain, cfg.attr_encoding),
                task, K)
    base_own = {v: base.predict(tv.X, tv.A) for v, tv in tviews.items()}
    base_cal = base.predict(cview.X, cview.A)
    if has_cf:
        base_slots = {v: slot_predictions(base, tv) for v, tv in tviews.items()}
        base_cal_slots = slot_predictions(base, cview)

    out: dict = {}

    def nonempty_for(v):
        return cfg.nonempty if v is None else (cfg.nonempty and cfg.nonempty_cf_views)

    def point_metrics(name, own):
        if task == "regression":
            out[(name, "mse")] = metrics.mse(own[None], test.Y)
        else:
            out[(name, "accuracy")] = metrics.accuracy(own[None], test.Y)
        if has_cf:
            out[(name, "te")] = metrics.total_effect(
                own[None], {v: own[v] for v in domain}, test.A, task, cfg.te_mode)

    def set_metrics(name, sets):
        out[(name, "coverage")] = metrics.coverage(sets[None], test.Y)
        out[(name, "avg_size")] = metrics.avg_size(sets[None])
        if has_cf:
            out[(name, "csd")] = metrics.csd(sets[None], {v: sets[v] for v in domain}, test.A)

    def plain_sets(own, c: Calibration):
        if task == "regression":
            return {v: predict_set_regression(own[v], c) for v in views}
        return {v: predict_set_classification(own[v], c, kind, nonempty=nonempty_for(v),
                                              rescue=cfg.rescue)
                for v in views}

    def split_pipeline(name, cal_pred, own):
        c = calibrate(calibration_score(kind, cal_pred, cal.Y), cfg.alpha, kind)
        point_metrics(name, own)
        set_metrics(name, plain_sets(own, c))

    for name in methods:
        if name == "SplitCP":
            split_pipeline(name, base_cal, base_own)
        elif name == "PostHocUnion":
            c = calibrate(calibration_score(kind, base_cal, cal.Y), cfg.alpha, kind)
            point_metrics(name, base_own)
            set_metrics(name, {v: union_sets(task, base_slots[v], c, kind, nonempty_for(v),
                                                          cfg.rescue)
                               for v in views})
        elif name.startswith("CF-CP-"):
            agg = name[len("CF-CP-"):]
            c = calibrate(symmetrize(kind, agg, base_cal_slots, cal.Y,
                                     inclusive=kind.inclusive_calibration),
                          cfg.alpha, kind, agg)
            point_metrics(name, base_own)
            if task == "regression":
                sets = {v: predict_set_regression(base_slots[v], c, agg) for v in views}
            else:
                sets = {v: predict_set_classification(base_slots[v], c, kind, agg,
                                                      factual_probs=base_own[v],
                                                      nonempty=nonempty_for(v),
                                                      rescue=cfg.rescue)
                        for v in views}
            set_metrics(name, sets)
        elif name == "CFU":
            g = _fit(cfg, baselines.cfu_features(train.view(None)), None, train.Y,
                     FeatureMap(False), task, K)
            own = {v: g.predict(baselines.cfu_features(tv)) for v, tv in tviews.items()}
            split_pipeline(name, g.predict(baselines.cfu_features(cview)), own)
        elif name == "CFR":
            h = _fit(cfg, baselines.cfr_features(train.view(None)), None, train.Y,
                     FeatureMap(False), task, K)
            own = {v: h.predict(baselines.cfr_features(tv)) for v, tv in tviews.items()}
            split_pipeline(name, h.predict(baselines.cfr_features(cview)), own)
        elif name == "PCF":
            p_a = baselines.estimate_pa(train.A, domain)
            own = {v: baselines.pcf_predict(base_slots[v], p_a) for v in views}
            split_pipeline(name, baselines.pcf_predict(base_cal_slots, p_a), own)
    return out


def _metric_order(task):
    first = "mse" if task == "regression" else "accuracy"
    return (first, "te", "coverage", "avg_size", "csd")


def _aggregate(cfg: ExperimentConfig, per_run: list) -> list:
    runs = len(per_run)
    h = cfg.fingerprint()
    rows = []
    for m in cfg.method_list:
        for metric in _metric_order(cfg.resolved_task):
            if (m, metric) not in per_run[0]:
                continue
            vals = np.array([res[(m, metric)] for res in per_run])
            std = float(np.std(vals, ddof=1)) if runs > 1 else 0.0
            rows.append(ResultRow(m, metric, float(vals.mean()), std, runs, h))
    return rows


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, sigma: float | None = None) -> list:
    """Run ``cfg.runs`` independent splits and aggregate every metric.

    Returns :class:`ResultRow` records ordered by method, then metric.
    """
    cfg.validate()
    source, _ = _load_source(cfg)
    if source is not None:
        source = dataclasses.replace(source, task=cfg.resolved_task) if cfg.task else source
    _check_capabilities(cfg, source)
    sigma = cfg.noise_levels[0] if sigma is None else sigma
    if jobs > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_run = list(pool.map(run_single, [cfg] * cfg.runs, range(cfg.runs),
                                    [sigma] * cfg.runs, [source] * cfg.runs))
    else:
        per_run = [run_single(cfg, r, sigma, source) for r in range(cfg.runs)]
    log.info("finished %d runs (sigma=%s)", cfg.runs, sigma)
    return _aggregate(cfg, per_run)


def noise_sweep(cfg: ExperimentConfig, sigmas=None, jobs: int = 1) -> list:
    """CSD of every method at each counterfactual noise level.

    Returns long-format :class:`SweepRow` records. Data and splits are shared
    across noise levels, so ``sigma = 0`` reproduces the oracle experiment.
    """
    sigmas = cfg.noise_levels if sigmas is None else list(sigmas)
    out = []
    for s in sigmas:
        for row in run_experiment(cfg, jobs=jobs, sigma=float(s)):
            if row.metric == "csd":
                out.append(SweepRow(float(s), row.method, row.mean, row.std))
    return out


def _rows_as_dicts(rows) -> list:
    return [dataclasses.asdict(r) for r in rows]


def emit_results(rows, path, fmt: str = "csv") -> None:
    """Write result rows as CSV (``method,metric,mean,std,runs,config_hash``) or JSON."""
    _emit(rows, path, fmt, ["method", "metric", "mean", "std", "runs", "config_hash"])


def emit_sweep(rows, path, fmt: str = "csv") -> None:
    _emit(rows, path, fmt, ["sigma", "method", "csd_mean", "csd_std"])


def _emit(rows, path, fmt, header):
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    records = _rows_as_dicts(rows)
    if path is None or str(path) == "-":
        _write(records, sys.stdout, fmt, header)
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            _write(records, fh, fmt, header)


def _write(records, fh, fmt, header):
    if fmt == "json":
        json.dump(records, fh, indent=2)
        fh.write("\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow([repr(rec[k]) if isinstance(rec[k], float) else rec[k] for k in header])
