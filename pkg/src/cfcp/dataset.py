"""Dataset container, viewpoints, splitting and CSV exchange.

CSV layout (UTF-8, header row)::

    x0..x{d-1}, a, y [, u0..u{m-1}] [, cf_<a>_x0..cf_<a>_x{d-1} for each a]

The ``u`` and ``cf`` blocks are optional. Floats are written with ``repr``
so a save/load round trip is exact.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import CsvParseError, InvalidParameterError, UnsupportedOperationError
from .rng import Rng

__all__ = [
    "Dataset",
    "View",
    "split",
    "attach_counterfactuals",
    "load_csv",
    "save_csv",
]


class View(NamedTuple):
    """What a predictor sees for every row from one viewpoint.

    ``X, A, U`` are the viewpoint's own features, attribute and exogenous
    values. ``slots[k]`` holds the features under ``do(A = domain[k])`` as
    seen from this viewpoint (None when no counterfactuals are attached).
    """

    X: np.ndarray
    A: np.ndarray
    U: np.ndarray | None
    slots: list | None


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    A: np.ndarray
    Y: np.ndarray
    task: str = "regression"
    K: int | None = None
    U: np.ndarray | None = None
    CF: dict | None = None
    U_cf: np.ndarray | None = None
    E: np.ndarray | None = None
    domain: tuple | None = None
    cf_oracle: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        object.__setattr__(self, "X", X)
        n = X.shape[0]
        A = np.asarray(self.A)
        Y = np.asarray(self.Y)
        if self.task not in ("regression", "classification"):
            raise InvalidParameterError(f"unknown task {self.task!r}")
        if self.task == "classification":
            Y = Y.astype(np.int64)
            if self.K is None:
                object.__setattr__(self, "K", int(Y.max()) + 1 if n else 0)
        else:
            Y = Y.astype(np.float64)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Y", Y)
        if self.domain is None:
            object.__setattr__(self, "domain", tuple(np.unique(A).tolist()))
        else:
            object.__setattr__(self, "domain", tuple(sorted(self.domain)))
        for name in ("A", "Y", "U", "U_cf", "E"):
            v = getattr(self, name)
            if v is not None and len(v) != n:
                raise InvalidParameterError(f"{name} has {len(v)} rows, X has {n}")
        for cfs in (self.CF, self.cf_oracle):
            if cfs is None:
                continue
            if set(cfs) != set(self.domain):
                raise InvalidParameterError(
                    f"counterfactual keys {sorted(cfs)} do not match domain {self.domain}")
            for a, M in cfs.items():
                if M.shape != X.shape:
                    raise InvalidParameterError(f"counterfactual block {a} has shape {M.shape}")
        if self.CF is not None and self.U_cf is None and self.U is not None:
            object.__setattr__(self, "U_cf", self.U)

    def __len__(self):
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def has_cf(self) -> bool:
        return self.CF is not None

    def take(self, idx) -> "Dataset":
        """Row subset; every per-row field travels with the rows."""
        idx = np.asarray(idx)

        def sub(v):
            return None if v is None else v[idx]

        def sub_map(m):
            return None if m is None else {a: M[idx] for a, M in m.items()}

        return replace(self, X=self.X[idx], A=self.A[idx], Y=self.Y[idx], U=sub(self.U),
                       CF=sub_map(self.CF), U_cf=sub(self.U_cf), E=sub(self.E),
                       cf_oracle=sub_map(self.cf_oracle))

    def view(self, v=None) -> View:
        """Rows as seen from viewpoint ``v``.

        ``v=None`` is the factual viewpoint: the observed ``(X, A, U)``, with
        the factual slot holding ``X`` and the others holding counterfactuals.
        For an attribute value ``v``, rows whose factual attribute differs from
        ``v`` are replaced by their counterfactual world ``(CF[v], v, U_cf)``
        where every slot comes from ``CF``. Rows with ``A == v`` stay factual.
        """
        if v is None:
            if self.CF is None:
                return View(self.X, self.A, self.U, None)
            slots = [np.where((self.A == a)[:, None], self.X, self.CF[a]) for a in self.domain]
            return View(self.X, self.A, self.U, slots)
        if self.CF is None:
            raise UnsupportedOperationError("counterfactual viewpoints need counterfactual features")
        if v not in self.domain:
            raise InvalidParameterError(f"{v!r} is not in the attribute domain {self.domain}")
        own = (self.A == v)[:, None]
        fact = self.view(None)
        X = np.where(own, self.X, self.CF[v])
        A = np.full_like(self.A, v)
        U = None if self.U is None else np.where(own, self.U, self.U_cf)
        slots = [np.where(own, s, self.CF[a]) for s, a in zip(fact.slots, self.domain)]
        return View(X, A, U, slots)


def split(ds: Dataset, n_train: int, n_cal: int, n_test: int, rng: Rng):
    """Uniformly random disjoint train / calibration / test partition."""
    sizes = (n_train, n_cal, n_test)
    if min(sizes) < 0 or sum(sizes) > len(ds):
        raise InvalidParameterError(f"split sizes {sizes} do not fit {len(ds)} rows")
    perm = rng.permutation(len(ds))
    cuts = np.cumsum(sizes)
    return (ds.take(perm[:cuts[0]]), ds.take(perm[cuts[0]:cuts[1]]),
            ds.take(perm[cuts[1]:cuts[2]]))


def attach_counterfactuals(ds: Dataset, scm=None, sigma_u: float = 0.0,
                           rng: Rng | None = None) -> Dataset:
    """Populate ``CF`` for every attribute value.

    With an SCM and stored ``U``, counterfactuals come from the feature
    equation at ``U + N(0, sigma_u^2)``. Otherwise the dataset must carry
    precomputed counterfactuals (from CSV), and ``sigma_u`` is added as
    Gaussian noise directly to those features.
    """
    from .scm import counterfactual_matrices

    if sigma_u < 0:
        raise InvalidParameterError(f"sigma_u must be non-negative, got {sigma_u}")
    if sigma_u > 0 and rng is None:
        raise InvalidParameterError("noisy counterfactuals need an rng")
    if scm is not None and ds.U is not None:
        cf, U_tilde = counterfactual_matrices(scm, ds.U, sigma_u, rng)
        return replace(ds, CF=cf, U_cf=U_tilde)
    base = ds.cf_oracle if ds.cf_oracle is not None else ds.CF
    if base is None:
        raise UnsupportedOperationError(
            "no exogenous variables and no precomputed counterfactuals to attach")
    if sigma_u == 0:
        cf = dict(base)
    else:
        cf = {a: base[a] + rng.normal(0.0, sigma_u, base[a].shape) for a in ds.domain}
    return replace(ds, CF=cf, U_cf=ds.U, cf_oracle=base)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _attr_str(a) -> str:
    return str(int(a)) if float(a).is_integer() else repr(float(a))


def save_csv(ds: Dataset, path) -> None:
    header = [f"x{j}" for j in range(ds.d)] + ["a", "y"]
    cols = [ds.X[:, j] for j in range(ds.d)] + [ds.A, ds.Y]
    if ds.U is not None:
        header += [f"u{j}" for j in range(ds.U.shape[1])]
        cols += [ds.U[:, j] for j in range(ds.U.shape[1])]
    cf = ds.cf_oracle if ds.cf_oracle is not None else ds.CF
    if cf is not None:
        for a in ds.domain:
            header += [f"cf_{_attr_str(a)}_x{j}" for j in range(ds.d)]
            cols += [cf[a][:, j] for j in range(ds.d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(ds)):
            w.writerow([_fmt(c[i]) for c in cols])


_X_COL = re.compile(r"^x(\d+)$")
_U_COL = re.compile(r"^u(\d+)$")
_CF_COL = re.compile(r"^cf_(.+)_x(\d+)$")


def _parse_attr(s: str):
    f = float(s)
    return int(f) if f.is_integer() else f


def load_csv(path, task: str | None = None, schema: dict | None = None, K: int | None = None) -> Dataset:
    """Read a dataset written in the layout described in the module docstring.

    ``schema`` optionally renames source columns to the canonical names,
    e.g. ``{"race": "a", "fya": "y", "lsat": "x0", "gpa": "x1"}``.
    ``task`` defaults to classification when every label is a non-negative
    integer and regression otherwise.
    """
    schema = schema or {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [schema.get(h.strip(), h.strip()) for h in next(reader)]
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvParseError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            vals = []
            for col, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise CsvParseError(
                        f"{path}: row {lineno}, column {col!r}: non-numeric value {cell!r}") from None
            rows.append(vals)
    for req in ("a", "y"):
        if req not in header:
            raise CsvParseError(f"{path}: missing required column {req!r}")
    xs = sorted((int(m.group(1)), i) for i, h in enumerate(header) if (m := _X_COL.match(h)))
    if not xs:
        raise CsvParseError(f"{path}: no feature columns x0..x{{d-1}}")
    d = len(xs)
    if [j for j, _ in xs] != list(range(d)):
        raise CsvParseError(f"{path}: feature columns must be x0..x{d - 1}")
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    X = data[:, [i for _, i in xs]]
    a_raw = data[:, header.index("a")]
    A = a_raw.astype(np.int64) if np.all(np.mod(a_raw, 1) == 0) else a_raw
    Y = data[:, header.index("y")]
    if task is None:
        task = "classification" if np.all((Y >= 0) & (np.mod(Y, 1) == 0)) else "regression"
    us = sorted((int(m.group(1)), i) for i, h in enumerate(header) if (m := _U_COL.match(h)))
    U = data[:, [i for _, i in us]] if us else None
    cf_cols: dict = {}
    for i, h in enumerate(header):
        m = _CF_COL.match(h)
        if m:
            cf_cols.setdefault(_parse_attr(m.group(1)), {})[int(m.group(2))] = i
    domain = tuple(sorted(set(np.unique(A).tolist()) | set(cf_cols)))
    CF = None
    if cf_cols:
        CF = {}
        for a in domain:
            block = cf_cols.get(a)
            if block is None or sorted(block) != list(range(d)):
                raise CsvParseError(f"{path}: counterfactual block for a={a} needs cf_{a}_x0..x{d - 1}")
            CF[a] = data[:, [block[j] for j in range(d)]]
    return Dataset(X=X, A=A, Y=Y, task=task, K=K, U=U, CF=CF, domain=domain, cf_oracle=CF)
