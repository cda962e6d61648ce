"""Local-linear dummy-variable smoothing over the normalized time grid.

For a grid point ``tau0`` the local system is

    M = [Z, ((tau - tau0) / h) * Z],   W_h = diag(k_t) ⊗ I_N,
    (a; b) = (M^T W_h* M)^{-1} M^T W_h* v,   W_h* = K^T W_h K,

where ``K = I - D (D^T W_h D)^{-1} D^T W_h`` sweeps out the fixed effects. ``K`` is
never formed: with ``D = 1_T ⊗ E`` it subtracts the centered, kernel-weighted
time mean of every location.
"""

from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from pltvsar.datasets.panel import FixedEffectsDesign
from pltvsar.loggers.console import log
from pltvsar.models.kernels import as_bandwidth, get_kernel
from pltvsar.utils.errors import InvalidSpec, SingularLocalSystem, SingularWeights
from pltvsar.utils.messages import (
    INVALID_SPEC_ERR,
    SINGULAR_LOCAL_ERR,
    SINGULAR_WEIGHTS_ERR,
)

RCOND_TOL = 1e-12


def kernel_weight_vector(tau_grid, tau0, h, n, kernel="gaussian") -> np.ndarray:
    """Diagonal of ``W_h(tau0)``; the 1/h factor is omitted."""
    h = as_bandwidth(h).h
    k = get_kernel(kernel)((np.asarray(tau_grid, dtype=float) - tau0) / h)
    return np.repeat(k, n)


def _period_weights(d: FixedEffectsDesign, w_diag) -> np.ndarray:
    w = np.asarray(w_diag, dtype=float).reshape(-1)
    if w.size == d.t_len:
        return w
    if w.size != d.n * d.t_len:
        raise InvalidSpec(
            INVALID_SPEC_ERR.format(
                "weight vector of length {} for N={}, T={}".format(w.size, d.n, d.t_len)
            )
        )
    blocks = w.reshape(d.t_len, d.n)
    if not np.allclose(blocks, blocks[:, :1], rtol=1e-12, atol=0):
        raise InvalidSpec(
            INVALID_SPEC_ERR.format("kernel weights must be constant within a period")
        )
    return blocks[:, 0].copy()


def within_projection_apply(d: FixedEffectsDesign, w_diag, v) -> np.ndarray:
    """``K(tau0) v`` for a vector or a matrix with NT rows."""
    k = _period_weights(d, w_diag)
    total = k.sum()
    if not total > 0:
        raise SingularWeights(SINGULAR_WEIGHTS_ERR.format(k.tolist()))
    v = np.asarray(v, dtype=float)
    blocks = v.reshape((d.t_len, d.n) + v.shape[1:])
    weighted_mean = np.tensordot(k, blocks, axes=1) / total
    weighted_mean = weighted_mean - weighted_mean.mean(axis=0, keepdims=True)
    return (blocks - weighted_mean[None]).reshape(v.shape)


def local_design(z, tau_grid, tau0, h) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    tau_grid = np.asarray(tau_grid, dtype=float)
    n = z.shape[0] // len(tau_grid)
    scale = np.repeat((tau_grid - tau0) / as_bandwidth(h).h, n)
    return np.hstack([z, scale[:, None] * z])


def _stage_prefix(stage: Optional[str]) -> str:
    return "[{}] ".format(stage) if stage else ""


def _local_operator(
    z, tau_grid, tau0, h, d, kernel="gaussian", stage=None, weights=None
) -> Tuple[np.ndarray, np.ndarray]:
    """Period weights and the 2r×NT map ``G`` with ``(a; b) = G K v``.

    ``G = (M~^T W M~)^{-1} M~^T W`` with ``M~ = K M``, obtained from a pivoted QR
    of the whitened design.
    """
    if weights is None:
        weights = kernel_weight_vector(tau_grid, tau0, h, d.n, kernel)
    k = _period_weights(d, weights)
    design = within_projection_apply(d, k, local_design(z, tau_grid, tau0, h))
    sqrt_w = np.repeat(np.sqrt(k), d.n)

    q, r, piv = scipy.linalg.qr(
        sqrt_w[:, None] * design, mode="economic", pivoting=True
    )
    sv = scipy.linalg.svdvals(r)
    # fewer rows than coefficients is rank deficient whatever the spectrum says
    wide = r.shape[0] < r.shape[1]
    rcond = (sv[-1] / sv[0]) ** 2 if sv[0] > 0 and not wide else 0.0
    if not rcond >= RCOND_TOL:
        raise SingularLocalSystem(
            SINGULAR_LOCAL_ERR.format(_stage_prefix(stage), tau0, rcond, RCOND_TOL),
            tau0=tau0,
            stage=stage,
        )
    operator = np.empty((design.shape[1], design.shape[0]))
    operator[piv] = scipy.linalg.solve_triangular(r, q.T * sqrt_w[None, :])
    return k, operator


def local_linear_fit(
    z, response, tau_grid, tau0, h, d, kernel="gaussian", weights=None
) -> Tuple[np.ndarray, np.ndarray]:
    """Local level ``a`` and scaled slope ``b`` (h times the derivative) at tau0."""
    k, operator = _local_operator(z, tau_grid, tau0, h, d, kernel, weights=weights)
    coef = operator @ within_projection_apply(d, k, response)
    r = coef.shape[0] // 2
    return coef[:r], coef[r:]


class LocalSmoother:
    """Smoother ``S(h)`` stored as one local operator per grid point.

    Rows of period t of ``S(h)`` are ``Z_t Phi(tau_t)`` where
    ``Phi(tau_t) = (I_r, 0) G_t K(tau_t)``.
    """

    def __init__(
        self,
        z: np.ndarray,
        tau_grid: np.ndarray,
        h,
        d: FixedEffectsDesign,
        period_weights: List[np.ndarray],
        operators: List[np.ndarray],
    ):
        self.z = z
        self.tau = np.asarray(tau_grid, dtype=float)
        self.h = as_bandwidth(h)
        self.d = d
        self.r = z.shape[1]
        self.period_weights = period_weights
        self.operators = operators

    @property
    def size(self) -> int:
        return self.d.n * self.d.t_len

    def coefficients(self, t: int, v) -> np.ndarray:
        """Local (a; b) at grid point t for response v (vector or matrix)."""
        return self.operators[t] @ within_projection_apply(
            self.d, self.period_weights[t], v
        )

    def phi_apply(self, t: int, v) -> np.ndarray:
        return self.coefficients(t, v)[: self.r]

    def curves(self, v) -> np.ndarray:
        """T×r matrix whose row t is ``Phi(tau_t) v``."""
        return np.stack([self.phi_apply(t, v) for t in range(self.d.t_len)])

    def apply(self, v) -> np.ndarray:
        """``S(h) v`` for a vector or a matrix with NT rows."""
        v = np.asarray(v, dtype=float)
        n = self.d.n
        out = np.empty(v.shape)
        for t in range(self.d.t_len):
            rows = slice(t * n, (t + 1) * n)
            out[rows] = self.z[rows] @ self.phi_apply(t, v)
        return out

    def phi_matrix(self, t: int) -> np.ndarray:
        return self.phi_apply(t, np.eye(self.size))

    def row_block(self, t: int) -> np.ndarray:
        n = self.d.n
        return self.z[t * n : (t + 1) * n] @ self.phi_matrix(t)

    def dense(self) -> np.ndarray:
        return np.vstack([self.row_block(t) for t in range(self.d.t_len)])


def build_smoother(z, tau_grid, h, d, kernel="gaussian", stage=None) -> LocalSmoother:
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    weights, operators = [], []
    for tau0 in np.asarray(tau_grid, dtype=float):
        k, operator = _local_operator(z, tau_grid, tau0, h, d, kernel, stage=stage)
        weights.append(k)
        operators.append(operator)
    log.debug(
        "%sbuilt smoother over %d columns at %d grid points",
        _stage_prefix(stage),
        z.shape[1],
        len(operators),
    )
    return LocalSmoother(z, tau_grid, h, d, weights, operators)
