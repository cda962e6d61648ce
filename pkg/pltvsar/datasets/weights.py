"""Spatial weight matrices: lattice contiguity, row standardization and the
block-diagonal ``I_T ⊗ W_N`` operator for location-fastest stacked panels."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.sparse.linalg import LinearOperator

from pltvsar.utils.classes import Nox
from pltvsar.utils.errors import (
    DiagonalNotZero,
    DimensionError,
    InvalidSpec,
    InvalidGrid,
    IsolatedLocation,
    MissingData,
    MissingInput,
    NonFiniteData,
    NonRectangularData,
    NonSquareWeights,
)
from pltvsar.utils.messages import (
    DIAGONAL_NOT_ZERO_ERR,
    DIMENSION_ERR,
    FILE_NOT_FOUND_ERR,
    INVALID_GRID_ERR,
    INVALID_SPEC_ERR,
    ISOLATED_LOCATION_ERR,
    MISSING_CELLS_ERR,
    NEGATIVE_WEIGHTS_ERR,
    NON_FINITE_ERR,
    NON_RECTANGULAR_ERR,
    NON_SQUARE_WEIGHTS_ERR,
)
from pltvsar.utils.registry import get_object, register_object

STANDARDIZED_TOL = 1e-12
SINGULAR_COND = 1e12


@dataclass(frozen=True)
class SpatialWeights:
    """N×N contiguity matrix with zero diagonal."""

    values: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise NonSquareWeights(NON_SQUARE_WEIGHTS_ERR.format("array", values.shape))
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise NonFiniteData(NEGATIVE_WEIGHTS_ERR)
        bad = np.flatnonzero(np.diag(values) != 0)
        if len(bad):
            raise DiagonalNotZero(DIAGONAL_NOT_ZERO_ERR.format(bad.tolist()))
        if self.standardized:
            sums = values.sum(axis=1)
            active = sums > 0
            if not np.allclose(sums[active], 1.0, rtol=0, atol=STANDARDIZED_TOL):
                raise InvalidSpec(
                    INVALID_SPEC_ERR.format("standardized rows must sum to one")
                )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_locations(self) -> int:
        return self.values.shape[0]


class Lattice(Nox):
    """Neighbor offsets on a square grid."""

    offsets: Tuple[Tuple[int, int], ...] = ()


@register_object("rook", "lattice")
class RookLattice(Lattice):
    offsets = ((-1, 0), (1, 0), (0, -1), (0, 1))


@register_object("queen", "lattice")
class QueenLattice(Lattice):
    offsets = RookLattice.offsets + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def build_lattice_weights(m: int, scheme: str = "rook") -> SpatialWeights:
    """Binary contiguity on an m×m grid, cells numbered row-major.

    Args:
        m (int): grid side length, N = m**2
        scheme (str): registered lattice name (rook, queen)

    Returns:
        SpatialWeights: symmetric 0/1 matrix, not standardized
    """
    if m < 2:
        raise InvalidGrid(INVALID_GRID_ERR.format(m))
    lattice = get_object(scheme.lower(), "lattice")
    values = np.zeros((m * m, m * m))
    for r in range(m):
        for c in range(m):
            for dr, dc in lattice.offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < m and 0 <= cc < m:
                    values[r * m + c, rr * m + cc] = 1.0
    return SpatialWeights(values)


def row_standardize(w: SpatialWeights) -> SpatialWeights:
    if w.standardized:
        return w
    sums = w.values.sum(axis=1)
    isolated = np.flatnonzero(sums <= 0)
    if len(isolated):
        row = int(isolated[0])
        raise IsolatedLocation(ISOLATED_LOCATION_ERR.format(row), row=row)
    return SpatialWeights(w.values / sums[:, None], standardized=True)


@lru_cache(maxsize=16)
def lattice_weights(m: int, scheme: str) -> SpatialWeights:
    """Row-standardized lattice weights, cached per (m, scheme)."""
    return row_standardize(build_lattice_weights(m, scheme))


class BlockDiagonalOperator(LinearOperator):
    """``I_T ⊗ W_N`` applied period by period on location-fastest vectors."""

    def __init__(self, w: np.ndarray, t_len: int):
        self.w = np.asarray(w, dtype=float)
        self.n = self.w.shape[0]
        self.t_len = t_len
        size = self.n * t_len
        super().__init__(dtype=self.w.dtype, shape=(size, size))

    def _matvec(self, x):
        x = np.asarray(x).reshape(self.t_len, self.n)
        return (x @ self.w.T).reshape(-1)

    def _rmatvec(self, x):
        x = np.asarray(x).reshape(self.t_len, self.n)
        return (x @ self.w).reshape(-1)

    def _matmat(self, x):
        x = np.asarray(x)
        blocks = x.reshape(self.t_len, self.n, x.shape[1])
        return np.einsum("ij,tjk->tik", self.w, blocks).reshape(x.shape)

    def _adjoint(self):
        return BlockDiagonalOperator(self.w.T, self.t_len)

    def todense(self) -> np.ndarray:
        return np.kron(np.eye(self.t_len), self.w)


def expand_over_time(w: SpatialWeights, t_len: int) -> BlockDiagonalOperator:
    return BlockDiagonalOperator(w.values, t_len)


def spatial_lag(w_big: LinearOperator, y: np.ndarray) -> np.ndarray:
    """Neighbor-weighted response ``W·Y``."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] != w_big.shape[1]:
        raise DimensionError(DIMENSION_ERR.format(w_big.shape[1], y.shape[0]))
    if y.ndim == 1:
        return w_big.matvec(y)
    return w_big.matmat(y)


class SarSystem:
    """Blockwise solver for ``(I - ρ_NT W) y = b`` with ``ρ_NT = diag(ρ_t) ⊗ I_N``.

    Each period is an independent N×N system, LU-factored once at construction.
    """

    def __init__(self, w: SpatialWeights, rho: np.ndarray, error_cls, message):
        rho = np.asarray(rho, dtype=float)
        self.n = w.n_locations
        self.t_len = len(rho)
        self.factors = []
        eye = np.eye(self.n)
        for t, rho_t in enumerate(rho):
            a = eye - rho_t * w.values
            if not np.all(np.isfinite(a)) or np.linalg.cond(a) > SINGULAR_COND:
                max_rho = float(np.max(np.abs(rho)))
                raise error_cls(message.format(t, max_rho), max_rho)
            self.factors.append(scipy.linalg.lu_factor(a))

    def solve(self, b: np.ndarray) -> np.ndarray:
        blocks = np.asarray(b, dtype=float).reshape(self.t_len, self.n)
        out = np.empty_like(blocks)
        for t, lu in enumerate(self.factors):
            out[t] = scipy.linalg.lu_solve(lu, blocks[t])
        return out.reshape(-1)


def _is_numeric(values) -> bool:
    return bool(pd.to_numeric(pd.Series(values), errors="coerce").notna().all())


def load_weights_csv(path: str) -> SpatialWeights:
    """Read an N×N weights matrix, tolerating a header row and/or an index column.

    Lines starting with ``#`` are treated as comments. A matrix whose rows already
    sum to one is flagged as standardized.
    """
    try:
        frame = pd.read_csv(path, header=None, dtype=str, comment="#")
    except FileNotFoundError:
        raise MissingInput(FILE_NOT_FOUND_ERR.format(path))
    except pd.errors.EmptyDataError:
        raise MissingData(MISSING_CELLS_ERR.format(path, "all", "(0, 0)"))
    except pd.errors.ParserError as e:
        raise NonRectangularData(NON_RECTANGULAR_ERR.format(path, e))

    if len(frame) and not _is_numeric(frame.iloc[0].dropna()):
        frame = frame.iloc[1:]
    if frame.shape[1] and not _is_numeric(frame.iloc[:, 0].dropna()):
        frame = frame.iloc[:, 1:]
    # a numeric header row or index column must read 1..N (or 0..N-1)
    rows, cols = frame.shape
    if rows == cols + 1 and _is_label_sequence(frame.iloc[0]):
        frame = frame.iloc[1:]
    elif cols == rows + 1 and _is_label_sequence(frame.iloc[:, 0]):
        frame = frame.iloc[:, 1:]
    elif rows == cols and rows > 1 and _looks_like_labels(frame):
        frame = frame.iloc[1:, 1:]

    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    if values.size == 0:
        raise MissingData(MISSING_CELLS_ERR.format(path, "all", "(0, 0)"))
    if values.shape[0] != values.shape[1]:
        raise NonSquareWeights(NON_SQUARE_WEIGHTS_ERR.format(path, values.shape))
    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.all(np.isfinite(values), axis=0))
        raise NonFiniteData(NON_FINITE_ERR.format(path, bad.tolist()))
    bad = np.flatnonzero(np.diag(values) != 0)
    if len(bad):
        raise DiagonalNotZero(DIAGONAL_NOT_ZERO_ERR.format(bad.tolist()))

    sums = values.sum(axis=1)
    standardized = bool(
        np.all(sums > 0) and np.allclose(sums, 1.0, rtol=0, atol=STANDARDIZED_TOL)
    )
    return SpatialWeights(values, standardized=standardized)


def _looks_like_labels(frame: pd.DataFrame) -> bool:
    """True when the first row and column are 1..n style labels and the corner is blank."""
    corner = frame.iloc[0, 0]
    if not (pd.isna(corner) or str(corner).strip() == ""):
        return False
    n = frame.shape[0] - 1
    labels = np.arange(1, n + 1, dtype=float)
    top = pd.to_numeric(frame.iloc[0, 1:], errors="coerce").to_numpy(dtype=float)
    left = pd.to_numeric(frame.iloc[1:, 0], errors="coerce").to_numpy(dtype=float)
    return np.array_equal(top, labels) and np.array_equal(left, labels)


def _is_label_sequence(values) -> bool:
    labels = pd.to_numeric(pd.Series(values), errors="coerce").to_numpy(dtype=float)
    n = len(labels)
    return np.array_equal(labels, np.arange(1, n + 1)) or np.array_equal(
        labels, np.arange(n)
    )
