"""Stacked spatial panels, model partitions and the implicit fixed-effects design.

All vectors are stacked location-fastest: entry ``t * N + i`` is unit ``i`` at
period ``t``.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from pltvsar.utils.errors import (
    DimensionError,
    InsufficientRegressors,
    InvalidSpec,
    MissingData,
    MissingInput,
    NonFiniteData,
    NonRectangularData,
)
from pltvsar.utils.messages import (
    DIMENSION_ERR,
    FILE_NOT_FOUND_ERR,
    INSUFFICIENT_REGRESSORS_ERR,
    INVALID_SPEC_ERR,
    MISSING_CELLS_ERR,
    MISSING_COLUMNS_ERR,
    MISSING_KEYS_ERR,
    NON_FINITE_ERR,
    NON_RECTANGULAR_ERR,
    PANEL_TOO_SMALL_ERR,
)

INTERCEPT = "intercept"


def time_grid(t_len: int) -> np.ndarray:
    """Normalized time points ``tau_t = t / T`` for ``t = 1..T``."""
    return np.arange(1, t_len + 1) / t_len


@dataclass(frozen=True)
class PanelData:
    y: np.ndarray
    x: np.ndarray
    n: int
    t_len: int
    column_names: Tuple[str, ...] = ()
    location_labels: Tuple = ()
    period_labels: Tuple = ()

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        size = self.n * self.t_len
        if y.shape[0] != size:
            raise DimensionError(DIMENSION_ERR.format(size, y.shape[0]))
        if x.shape[0] != size:
            raise DimensionError(DIMENSION_ERR.format(size, x.shape[0]))
        if x.shape[1] < 2:
            raise InsufficientRegressors(INSUFFICIENT_REGRESSORS_ERR.format(x.shape[1]))
        if not np.all(np.isfinite(y)):
            raise NonFiniteData(NON_FINITE_ERR.format("response", ["y"]))
        bad = np.flatnonzero(~np.all(np.isfinite(x), axis=0))
        if len(bad):
            raise NonFiniteData(NON_FINITE_ERR.format("design", bad.tolist()))
        names = tuple(self.column_names) or tuple(
            "x{}".format(j + 1) for j in range(x.shape[1])
        )
        if len(names) != x.shape[1]:
            raise DimensionError(DIMENSION_ERR.format(x.shape[1], len(names)))
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "column_names", names)
        if not self.location_labels:
            object.__setattr__(self, "location_labels", tuple(range(1, self.n + 1)))
        if not self.period_labels:
            object.__setattr__(self, "period_labels", tuple(range(1, self.t_len + 1)))

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def tau(self) -> np.ndarray:
        return time_grid(self.t_len)

    def with_response(self, y: np.ndarray) -> "PanelData":
        return replace(self, y=y)


@dataclass(frozen=True)
class ModelSpec:
    """Split of the design columns into a time-varying and a constant block."""

    varying_cols: Tuple[int, ...]
    constant_cols: Tuple[int, ...] = ()
    intercept_col: int = 0

    def __post_init__(self):
        object.__setattr__(self, "varying_cols", tuple(int(c) for c in self.varying_cols))
        object.__setattr__(self, "constant_cols", tuple(int(c) for c in self.constant_cols))
        if not self.varying_cols:
            raise InvalidSpec(INVALID_SPEC_ERR.format("at least one varying column"))
        if self.intercept_col not in self.varying_cols:
            raise InvalidSpec(
                INVALID_SPEC_ERR.format("intercept column must be time-varying")
            )
        if set(self.varying_cols) & set(self.constant_cols):
            raise InvalidSpec(
                INVALID_SPEC_ERR.format("varying and constant columns overlap")
            )

    @property
    def q(self) -> int:
        return len(self.varying_cols)

    def validate(self, p: int) -> "ModelSpec":
        cols = sorted(self.varying_cols + self.constant_cols)
        if cols != list(range(p)):
            raise InvalidSpec(
                INVALID_SPEC_ERR.format(
                    "columns {} do not partition 0..{}".format(cols, p - 1)
                )
            )
        return self

    @classmethod
    def all_varying(cls, p: int) -> "ModelSpec":
        return cls(varying_cols=tuple(range(p)))

    @classmethod
    def from_names(
        cls, column_names: Sequence[str], varying: Sequence[str], constant: Sequence[str]
    ) -> "ModelSpec":
        names = list(column_names)
        missing = [c for c in list(varying) + list(constant) if c not in names]
        if missing:
            raise InvalidSpec(
                INVALID_SPEC_ERR.format("unknown columns {}".format(missing))
            )
        if INTERCEPT in names and INTERCEPT not in varying:
            varying = [INTERCEPT] + list(varying)
        spec = cls(
            varying_cols=tuple(names.index(c) for c in varying),
            constant_cols=tuple(names.index(c) for c in constant),
            intercept_col=names.index(INTERCEPT) if INTERCEPT in names else 0,
        )
        return spec.validate(len(names))


class FixedEffectsDesign:
    """Implicit ``D = 1_T ⊗ E`` with ``E = (-1_{N-1}, I_{N-1})^T``.

    Works on vectors of length NT or matrices with NT rows. ``D^T D = T (I + J)``
    and ``(I + J)^{-1} = I - J / N`` give every projection in closed form.
    """

    def __init__(self, n: int, t_len: int):
        self.n = n
        self.t_len = t_len

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n * self.t_len, self.n - 1)

    def _blocks(self, v):
        v = np.asarray(v, dtype=float)
        return v.reshape((self.t_len, self.n) + v.shape[1:])

    def complete(self, psi: np.ndarray) -> np.ndarray:
        """Length-N effects with the first entry set by the sum-to-zero constraint."""
        psi = np.asarray(psi, dtype=float)
        first = -psi.sum(axis=0, keepdims=True)
        return np.concatenate([first, psi], axis=0)

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        """``D psi``."""
        effects = self.complete(psi)
        out = np.broadcast_to(effects, (self.t_len,) + effects.shape)
        return out.reshape((self.n * self.t_len,) + effects.shape[1:]).copy()

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        """``D^T v``."""
        total = self._blocks(v).sum(axis=0)
        return total[1:] - total[0]

    def gram(self) -> np.ndarray:
        m = self.n - 1
        return self.t_len * (np.eye(m) + np.ones((m, m)))

    def gram_solve(self, b: np.ndarray) -> np.ndarray:
        """``(D^T D)^{-1} b``."""
        b = np.asarray(b, dtype=float)
        return (b - b.sum(axis=0, keepdims=True) / self.n) / self.t_len

    def coefficients(self, v: np.ndarray) -> np.ndarray:
        """Least-squares coefficients ``(D^T D)^{-1} D^T v``."""
        means = self._blocks(v).mean(axis=0)
        centered = means - means.mean(axis=0, keepdims=True)
        return centered[1:]

    def project(self, v: np.ndarray) -> np.ndarray:
        """``P_D v``: the centered per-location time mean, repeated each period."""
        means = self._blocks(v).mean(axis=0)
        centered = means - means.mean(axis=0, keepdims=True)
        v = np.asarray(v)
        out = np.broadcast_to(centered, (self.t_len,) + centered.shape)
        return out.reshape(v.shape).copy()

    def annihilate(self, v: np.ndarray) -> np.ndarray:
        """``(I - P_D) v``."""
        return np.asarray(v, dtype=float) - self.project(v)

    def dense(self) -> np.ndarray:
        e = np.vstack([-np.ones((1, self.n - 1)), np.eye(self.n - 1)])
        return np.kron(np.ones((self.t_len, 1)), e)


@dataclass
class PanelLayout:
    """Column roles of a long-format panel CSV."""

    response: str
    covariates: List[str]
    location_col: str = "location"
    period_col: str = "period"
    add_intercept: bool = True
    comment: Optional[str] = "#"


def _sorted_labels(column: pd.Series) -> list:
    return pd.Series(pd.unique(column)).sort_values().tolist()


def load_panel_csv(path: str, layout: PanelLayout) -> PanelData:
    """One row per (location, period). Rows are re-sorted location-fastest."""
    try:
        frame = pd.read_csv(path, comment=layout.comment)
    except FileNotFoundError:
        raise MissingInput(FILE_NOT_FOUND_ERR.format(path))
    except pd.errors.EmptyDataError:
        raise MissingData(MISSING_CELLS_ERR.format(path, "all", "(?, ?)"))
    except pd.errors.ParserError as e:
        raise NonRectangularData(NON_RECTANGULAR_ERR.format(path, e))

    required = [layout.location_col, layout.period_col, layout.response]
    required += list(layout.covariates)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise MissingData(MISSING_COLUMNS_ERR.format(path, missing))
    if frame.empty:
        raise MissingData(MISSING_CELLS_ERR.format(path, "all", "(?, ?)"))

    for col in (layout.location_col, layout.period_col):
        blank = int(frame[col].isna().sum())
        if blank:
            raise MissingData(MISSING_KEYS_ERR.format(path, blank, col))
    locations = _sorted_labels(frame[layout.location_col])
    periods = _sorted_labels(frame[layout.period_col])
    n, t_len = len(locations), len(periods)
    if n < 2 or t_len < 2:
        raise MissingData(PANEL_TOO_SMALL_ERR.format(path, n, t_len))

    keys = [layout.location_col, layout.period_col]
    duplicated = frame.duplicated(subset=keys)
    if duplicated.any():
        example = tuple(frame.loc[duplicated, keys].iloc[0])
        raise NonRectangularData(
            NON_RECTANGULAR_ERR.format(path, "duplicate cell {}".format(example))
        )
    if len(frame) != n * t_len:
        full = pd.MultiIndex.from_product([locations, periods], names=keys)
        absent = full.difference(pd.MultiIndex.from_frame(frame[keys]))
        raise MissingData(MISSING_CELLS_ERR.format(path, len(absent), absent[0]))

    values = frame[[layout.response] + list(layout.covariates)].apply(
        pd.to_numeric, errors="coerce"
    )
    bad = [c for c in values.columns if not np.all(np.isfinite(values[c]))]
    if bad:
        raise NonFiniteData(NON_FINITE_ERR.format(path, bad))

    ordered = pd.concat([frame[keys], values], axis=1).sort_values(
        [layout.period_col, layout.location_col], kind="mergesort"
    )
    x = ordered[list(layout.covariates)].to_numpy(dtype=float)
    names = list(layout.covariates)
    if layout.add_intercept:
        x = np.column_stack([np.ones(len(ordered)), x])
        names = [INTERCEPT] + names

    return PanelData(
        y=ordered[layout.response].to_numpy(dtype=float),
        x=x,
        n=n,
        t_len=t_len,
        column_names=tuple(names),
        location_labels=tuple(locations),
        period_labels=tuple(periods),
    )
