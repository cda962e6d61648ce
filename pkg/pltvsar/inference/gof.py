"""Residual-bootstrap goodness-of-fit test of constant against time-varying
coefficients for the designated constant block."""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pltvsar.datasets.panel import FixedEffectsDesign, ModelSpec, PanelData
from pltvsar.datasets.weights import SarSystem, SpatialWeights
from pltvsar.loggers.console import log
from pltvsar.models.estimator import (
    FitResult,
    TvFitResult,
    fit_full_tv,
    stage1_from_smoother,
    stage2_fit,
)
from pltvsar.utils.errors import ExplosiveBootstrapDgp, InvalidRss, PreconditionViolation
from pltvsar.utils.messages import EXPLOSIVE_DGP_ERR, INVALID_RSS_ERR, PRECONDITION_ERR
from pltvsar.utils.parallel import replicate_rng, run_replicates


class Decision(enum.Enum):
    REJECT = "reject"
    FAIL_TO_REJECT = "fail_to_reject"


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class

    n_bootstrap: int = 500
    seed: int = 0
    parallel: int = 1
    strict: bool = False
    progress: bool = False

    def __post_init__(self):
        if self.n_bootstrap < 1:
            raise PreconditionViolation(
                PRECONDITION_ERR.format("n_bootstrap must be >= 1")
            )


@dataclass
class TestResult:
    __test__ = False

    w_observed: float
    w_bootstrap: np.ndarray
    p_value: float
    k: int
    seed: int

    def to_dict(self, include_bootstrap: bool = False) -> dict:
        out = {
            "w_observed": float(self.w_observed),
            "p_value": float(self.p_value),
            "k": int(self.k),
            "seed": int(self.seed),
        }
        if include_bootstrap:
            out["w_bootstrap"] = [float(v) for v in self.w_bootstrap]
        return out


def w_statistic(rss_pl: float, rss_tv: float, n: int, t_len: int) -> float:
    """``(NT / 2) (RSS_PL - RSS_TV) / RSS_TV``; not truncated at zero."""
    if not rss_tv > 0:
        raise InvalidRss(INVALID_RSS_ERR.format(rss_tv))
    return n * t_len / 2.0 * (rss_pl - rss_tv) / rss_tv


def count_p_value(w_observed: float, w_bootstrap: np.ndarray, strict: bool = False):
    w_bootstrap = np.asarray(w_bootstrap)
    hits = w_bootstrap > w_observed if strict else w_bootstrap >= w_observed
    return int(np.count_nonzero(hits)) / len(w_bootstrap)


def null_mean(data: PanelData, fit: FitResult) -> np.ndarray:
    """``B(X_v, beta_v) + X_c beta_c + D alpha`` under the partially linear fit."""
    spec = fit.spec
    x_v = data.x[:, list(spec.varying_cols)].reshape(data.t_len, data.n, spec.q)
    mean = np.einsum("tnq,tq->tn", x_v, fit.beta_v).reshape(-1)
    if spec.constant_cols:
        mean = mean + data.x[:, list(spec.constant_cols)] @ fit.beta_c
    d = FixedEffectsDesign(data.n, data.t_len)
    return mean + d.matvec(fit.alpha[1:])


def residual_pool(residuals) -> np.ndarray:
    """Fully time-varying residuals centered to mean zero for resampling."""
    residuals = np.asarray(residuals, dtype=float)
    return residuals - residuals.mean()


def bootstrap_response(
    pool: np.ndarray, mean: np.ndarray, system: SarSystem, rng: np.random.Generator
) -> np.ndarray:
    """``Y* = (I - rho W)^{-1} (mean + eps*)`` with ``eps*`` drawn from the pool."""
    size = len(pool)
    eps = pool[rng.integers(0, size, size=size)]
    return system.solve(mean + eps)


class _BootstrapReplicate:
    """One bootstrap draw: resample, regenerate Y*, refit both models, return W*."""

    def __init__(self, data, spec, kernel, fit, pool, mean, system, seed):
        self.data = data
        self.spec = spec
        self.kernel = kernel
        self.fit = fit
        self.pool = pool
        self.mean = mean
        self.system = system
        self.seed = seed

    def __call__(self, j: int) -> float:
        rng = replicate_rng(self.seed, j)
        y_star = bootstrap_response(self.pool, self.mean, self.system, rng)
        data_star = self.data.with_response(y_star)
        stage1 = self.fit.stage1
        stage1_star = stage1_from_smoother(
            stage1.smoother, stage1.instruments, stage1.w_big, y_star
        )
        h = self.fit.bandwidth
        pl = stage2_fit(data_star, self.spec, stage1_star, h, self.kernel)
        tv = fit_full_tv(data_star, stage1_star, h, self.kernel)
        return w_statistic(pl.rss, tv.rss, self.data.n, self.data.t_len)


def bootstrap_test(
    data: PanelData,
    spec: ModelSpec,
    w: SpatialWeights,
    kernel,
    fit: FitResult,
    tv: TvFitResult,
    cfg: Optional[TestConfig] = None,
) -> TestResult:
    cfg = cfg or TestConfig()
    w_observed = w_statistic(fit.rss, tv.rss, data.n, data.t_len)
    pool = residual_pool(tv.residuals)
    system = SarSystem(w, fit.rho_hat, ExplosiveBootstrapDgp, EXPLOSIVE_DGP_ERR)
    replicate = _BootstrapReplicate(
        data, spec, kernel, fit, pool, null_mean(data, fit), system, cfg.seed
    )
    log.info("bootstrap started: k=%d, seed=%d", cfg.n_bootstrap, cfg.seed)
    w_bootstrap = np.asarray(
        run_replicates(
            replicate,
            range(cfg.n_bootstrap),
            num_workers=cfg.parallel,
            desc="bootstrap",
            progress=cfg.progress,
        ),
        dtype=float,
    )
    p_value = count_p_value(w_observed, w_bootstrap, cfg.strict)
    log.info("bootstrap finished: W=%.6g, p=%.4f", w_observed, p_value)
    return TestResult(
        w_observed=w_observed,
        w_bootstrap=w_bootstrap,
        p_value=p_value,
        k=cfg.n_bootstrap,
        seed=cfg.seed,
    )


def decide(result: TestResult, alpha: float) -> Decision:
    if not 0.0 < alpha < 1.0:
        raise PreconditionViolation(PRECONDITION_ERR.format("alpha must be in (0, 1)"))
    return Decision.REJECT if result.p_value < alpha else Decision.FAIL_TO_REJECT
