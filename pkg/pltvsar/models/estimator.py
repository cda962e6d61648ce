"""Two-stage least-squares profile local-linear dummy-variable estimation.

Stage 1 fits the spatial lag ``W Y`` on the instruments ``H = (X, W X_-1, W^2 X_-1)``
with time-varying coefficients and fixed effects. Stage 2 replaces ``W Y`` by its
fitted value and profiles out the time-varying block to estimate the constant
coefficients, the fixed effects and the coefficient curves.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator

from pltvsar.datasets.panel import FixedEffectsDesign, ModelSpec, PanelData
from pltvsar.datasets.weights import SpatialWeights, expand_over_time, spatial_lag
from pltvsar.loggers.console import log
from pltvsar.models.kernels import Bandwidth, as_bandwidth, get_kernel, rot_bandwidth
from pltvsar.models.smoother import LocalSmoother, build_smoother
from pltvsar.utils.errors import (
    CollinearConstantBlock,
    InsufficientRegressors,
    InvalidSpec,
)
from pltvsar.utils.messages import (
    COLLINEAR_CONSTANT_ERR,
    INSUFFICIENT_REGRESSORS_ERR,
    INTERCEPT_ERR,
    NONSTATIONARY_MSG,
)

RCOND_TOL = 1e-12
STAGE_1 = "stage 1"
STAGE_2 = "stage 2"
STAGE_TV = "full tv"


@dataclass(frozen=True)
class InstrumentSet:
    h_matrix: np.ndarray
    p: int

    @property
    def n_columns(self) -> int:
        return self.h_matrix.shape[1]


@dataclass
class Stage1Fit:
    eta_curves: np.ndarray
    psi_hat: np.ndarray
    y_w: np.ndarray
    y_w_hat: np.ndarray
    smoother: LocalSmoother
    instruments: InstrumentSet
    w_big: LinearOperator

    @property
    def b_hat(self) -> np.ndarray:
        """``B(H, eta)`` evaluated at the fitted curves."""
        return self.y_w_hat - self.smoother.d.matvec(self.psi_hat)


@dataclass
class FitResult:
    beta_c: np.ndarray
    gamma_v: np.ndarray
    alpha: np.ndarray
    residuals: np.ndarray
    rss: float
    fitted: np.ndarray
    bandwidth: Bandwidth
    stage1: Stage1Fit
    spec: ModelSpec
    kernel: str = "gaussian"
    column_names: tuple = field(default_factory=tuple)

    @property
    def rho_hat(self) -> np.ndarray:
        return self.gamma_v[:, 0]

    @property
    def beta_v(self) -> np.ndarray:
        return self.gamma_v[:, 1:]

    @property
    def nonstationary(self) -> bool:
        return bool(np.any(np.abs(self.rho_hat) >= 1.0))

    def beta_c_named(self) -> Dict[str, float]:
        names = [self.column_names[c] for c in self.spec.constant_cols]
        return {name: float(b) for name, b in zip(names, self.beta_c)}

    def curve_names(self):
        return ["rho_hat"] + [
            "beta_{}".format(self.column_names[c]) for c in self.spec.varying_cols
        ]


@dataclass
class TvFitResult:
    gamma_full: np.ndarray
    alpha: np.ndarray
    residuals: np.ndarray
    rss: float
    bandwidth: Bandwidth

    @property
    def rho_hat(self) -> np.ndarray:
        return self.gamma_full[:, 0]


def build_instruments(x: np.ndarray, w_big: LinearOperator) -> InstrumentSet:
    x = np.asarray(x, dtype=float)
    p = x.shape[1]
    if p < 2:
        raise InsufficientRegressors(INSUFFICIENT_REGRESSORS_ERR.format(p))
    if not np.all(x[:, 0] == 1.0):
        raise InvalidSpec(INTERCEPT_ERR.format(0))
    wx = spatial_lag(w_big, x[:, 1:])
    w2x = spatial_lag(w_big, wx)
    return InstrumentSet(h_matrix=np.hstack([x, wx, w2x]), p=p)


def stage1_from_smoother(
    smoother: LocalSmoother,
    instruments: InstrumentSet,
    w_big: LinearOperator,
    y: np.ndarray,
) -> Stage1Fit:
    """Stage 1 for a new response with the instrument smoother held fixed."""
    d = smoother.d
    y_w = spatial_lag(w_big, y)
    b_hat = smoother.apply(y_w)
    psi_hat = d.coefficients(y_w - b_hat)
    return Stage1Fit(
        eta_curves=smoother.curves(y_w),
        psi_hat=psi_hat,
        y_w=y_w,
        y_w_hat=b_hat + d.matvec(psi_hat),
        smoother=smoother,
        instruments=instruments,
        w_big=w_big,
    )


def stage1_fit(data: PanelData, w: SpatialWeights, h, kernel="gaussian") -> Stage1Fit:
    d = FixedEffectsDesign(data.n, data.t_len)
    w_big = expand_over_time(w, data.t_len)
    instruments = build_instruments(data.x, w_big)
    smoother = build_smoother(
        instruments.h_matrix, data.tau, h, d, kernel, stage=STAGE_1
    )
    fit = stage1_from_smoother(smoother, instruments, w_big, data.y)
    log.info("stage 1 done with %d instrument columns", instruments.n_columns)
    return fit


def _profile_least_squares(
    x_bar: np.ndarray, y_bar: np.ndarray, x_raw: np.ndarray
) -> np.ndarray:
    """Least squares on the swept constant block.

    Conditioning is measured against the unswept block so a column that the
    sweeps reduce to rounding noise counts as collinear.
    """
    scale = scipy.linalg.svdvals(x_raw)[0]
    sv = scipy.linalg.svdvals(x_bar)
    rcond = (sv[-1] / scale) ** 2 if scale > 0 else 0.0
    if not rcond >= RCOND_TOL:
        raise CollinearConstantBlock(COLLINEAR_CONSTANT_ERR.format(rcond))
    coef, *_ = scipy.linalg.lstsq(x_bar, y_bar)
    return coef


def stage2_fit(
    data: PanelData, spec: ModelSpec, stage1: Stage1Fit, h, kernel="gaussian"
) -> FitResult:
    spec.validate(data.p)
    h = as_bandwidth(h)
    d = FixedEffectsDesign(data.n, data.t_len)
    y = data.y
    z_v = np.column_stack([stage1.y_w_hat, data.x[:, list(spec.varying_cols)]])
    smoother = build_smoother(z_v, data.tau, h, d, kernel, stage=STAGE_2)

    y_tilde = y - smoother.apply(y)
    y_bar = d.annihilate(y_tilde)
    if spec.constant_cols:
        x_c = data.x[:, list(spec.constant_cols)]
        x_c_tilde = x_c - smoother.apply(x_c)
        x_c_bar = d.annihilate(x_c_tilde)
        beta_c = _profile_least_squares(x_c_bar, y_bar, x_c)
        residuals = y_bar - x_c_bar @ beta_c
        partial = y - x_c @ beta_c
        alpha_free = d.coefficients(y_tilde - x_c_tilde @ beta_c)
    else:
        beta_c = np.zeros(0)
        residuals = y_bar
        partial = y
        alpha_free = d.coefficients(y_tilde)

    return FitResult(
        beta_c=beta_c,
        gamma_v=smoother.curves(partial),
        alpha=d.complete(alpha_free),
        residuals=residuals,
        rss=float(residuals @ residuals),
        fitted=y - residuals,
        bandwidth=h,
        stage1=stage1,
        spec=spec,
        kernel=get_kernel(kernel).name,
        column_names=data.column_names,
    )


def fit_full_tv(data: PanelData, stage1: Stage1Fit, h, kernel="gaussian") -> TvFitResult:
    h = as_bandwidth(h)
    d = FixedEffectsDesign(data.n, data.t_len)
    z = np.column_stack([stage1.y_w_hat, data.x])
    smoother = build_smoother(z, data.tau, h, d, kernel, stage=STAGE_TV)
    y_tilde = data.y - smoother.apply(data.y)
    residuals = d.annihilate(y_tilde)
    return TvFitResult(
        gamma_full=smoother.curves(data.y),
        alpha=d.complete(d.coefficients(y_tilde)),
        residuals=residuals,
        rss=float(residuals @ residuals),
        bandwidth=h,
    )


def fit(
    data: PanelData,
    spec: ModelSpec,
    w: SpatialWeights,
    kernel="gaussian",
    h: Optional[float] = None,
) -> FitResult:
    """Run both stages; ``h`` defaults to the rule-of-thumb bandwidth."""
    h = rot_bandwidth(data.n, data.t_len) if h is None else as_bandwidth(h)
    stage1 = stage1_fit(data, w, h, kernel)
    result = stage2_fit(data, spec, stage1, h, kernel)
    log.info("stage 2 done, RSS_PL=%.6g", result.rss)
    # bootstrap refits call stage2_fit directly and stay quiet
    if result.nonstationary:
        log.warning(NONSTATIONARY_MSG.format(np.max(np.abs(result.rho_hat))))
    return result
