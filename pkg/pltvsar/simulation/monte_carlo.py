"""Monte-Carlo drivers: estimation accuracy, empirical size and power."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from pltvsar.inference.gof import TestConfig, bootstrap_test
from pltvsar.loggers.console import log
from pltvsar.models.estimator import fit, fit_full_tv
from pltvsar.simulation.dgp import DgpConfig, TrueCurves, generate, true_curves
from pltvsar.utils.errors import PreconditionViolation
from pltvsar.utils.messages import PRECONDITION_ERR
from pltvsar.utils.parallel import derive_seed, run_replicates
from pltvsar.utils.registry import get_object

DEFAULT_ALPHAS = (0.01, 0.05, 0.10)
BOOTSTRAP_STREAM = 1


@dataclass
class McSummary:
    amse_rho: float
    amse_beta1: float
    amse_beta2: float
    bias_beta3: float
    sd_beta3: float
    bias_beta4: float
    sd_beta4: float
    n_sim: int
    config: DgpConfig
    truth: TrueCurves
    gamma_hats: np.ndarray = field(repr=False)
    beta_c_hats: np.ndarray = field(repr=False)

    def metrics(self) -> Dict[str, float]:
        return {
            "amse_rho": self.amse_rho,
            "amse_beta1": self.amse_beta1,
            "amse_beta2": self.amse_beta2,
            "bias_beta3": self.bias_beta3,
            "sd_beta3": self.sd_beta3,
            "bias_beta4": self.bias_beta4,
            "sd_beta4": self.sd_beta4,
        }

    def curve_frame(self) -> pd.DataFrame:
        means = self.gamma_hats.mean(axis=0)
        truth = self.truth.varying()
        frame = {"tau": self.truth.tau}
        for j, name in enumerate(("rho", "beta1", "beta2")):
            frame["{}_true".format(name)] = truth[:, j]
            frame["{}_mean".format(name)] = means[:, j]
        return pd.DataFrame(frame)


@dataclass
class RejectionSummary:
    rates: Dict[float, float]
    p_values: np.ndarray
    n_sim: int
    k: int
    config: DgpConfig


class _EstimationReplicate:
    def __init__(self, cfg: DgpConfig, kernel, bandwidth=None):
        self.cfg = cfg
        self.kernel = kernel
        self.bandwidth = bandwidth

    def __call__(self, j: int):
        sim = generate(self.cfg, j)
        result = fit(sim.data, sim.spec, sim.weights, self.kernel, self.bandwidth)
        return result.gamma_v, result.beta_c


class _TestReplicate:
    def __init__(self, cfg: DgpConfig, kernel, k: int, strict: bool, bandwidth=None):
        self.cfg = cfg
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.k = k
        self.strict = strict

    def __call__(self, j: int) -> float:
        sim = generate(self.cfg, j)
        result = fit(sim.data, sim.spec, sim.weights, self.kernel, self.bandwidth)
        tv = fit_full_tv(sim.data, result.stage1, result.bandwidth, self.kernel)
        test_cfg = TestConfig(
            n_bootstrap=self.k,
            seed=derive_seed(self.cfg.seed, j, BOOTSTRAP_STREAM),
            parallel=1,
            strict=self.strict,
        )
        test = bootstrap_test(
            sim.data, sim.spec, sim.weights, self.kernel, result, tv, test_cfg
        )
        return test.p_value


def _check_n_sim(n_sim: int) -> None:
    if n_sim < 1:
        raise PreconditionViolation(PRECONDITION_ERR.format("n_sim must be >= 1"))


def mc_estimation(
    cfg: DgpConfig,
    n_sim: int,
    parallel: Optional[int] = None,
    kernel="gaussian",
    progress: bool = True,
    bandwidth: Optional[float] = None,
) -> McSummary:
    _check_n_sim(n_sim)
    outputs = run_replicates(
        _EstimationReplicate(cfg, kernel, bandwidth),
        range(n_sim),
        num_workers=parallel,
        desc="mc estimate",
        progress=progress,
    )
    gamma_hats = np.stack([g for g, _ in outputs])
    beta_c_hats = np.stack([b for _, b in outputs])

    truth = true_curves(cfg)
    amse = get_object("amse", "metric")()
    bias_sd = get_object("bias_sd", "metric")()
    beta3 = bias_sd(beta_c_hats[:, 0], truth.beta3.mean())
    beta4 = bias_sd(beta_c_hats[:, 1], truth.beta4.mean())
    summary = McSummary(
        amse_rho=amse(gamma_hats[:, :, 0], truth.rho),
        amse_beta1=amse(gamma_hats[:, :, 1], truth.beta1),
        amse_beta2=amse(gamma_hats[:, :, 2], truth.beta2),
        bias_beta3=beta3["bias"],
        sd_beta3=beta3["sd"],
        bias_beta4=beta4["bias"],
        sd_beta4=beta4["sd"],
        n_sim=n_sim,
        config=cfg,
        truth=truth,
        gamma_hats=gamma_hats,
        beta_c_hats=beta_c_hats,
    )
    log.info("mc estimate %s: %s", cfg, summary.metrics())
    return summary


def _rejections(
    cfg, n_sim, k, alphas, parallel, kernel, strict, progress, desc, bandwidth=None
):
    _check_n_sim(n_sim)
    p_values = np.asarray(
        run_replicates(
            _TestReplicate(cfg, kernel, k, strict, bandwidth),
            range(n_sim),
            num_workers=parallel,
            desc=desc,
            progress=progress,
        ),
        dtype=float,
    )
    rates = get_object("rejection_rate", "metric")()(p_values, alphas)
    log.info("%s %s: %s", desc, cfg, rates)
    return RejectionSummary(rates=rates, p_values=p_values, n_sim=n_sim, k=k, config=cfg)


def mc_size(
    cfg: DgpConfig,
    n_sim: int,
    k: int,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    parallel: Optional[int] = None,
    kernel="gaussian",
    strict: bool = False,
    progress: bool = True,
    bandwidth: Optional[float] = None,
) -> RejectionSummary:
    if cfg.c != 0:
        raise PreconditionViolation(PRECONDITION_ERR.format("size runs need c = 0"))
    return _rejections(
        cfg, n_sim, k, alphas, parallel, kernel, strict, progress, "mc size", bandwidth
    )


def mc_power(
    cfg: DgpConfig,
    n_sim: int,
    k: int,
    alpha: float = 0.05,
    parallel: Optional[int] = None,
    kernel="gaussian",
    strict: bool = False,
    progress: bool = True,
    bandwidth: Optional[float] = None,
) -> RejectionSummary:
    if not cfg.c > 0:
        raise PreconditionViolation(PRECONDITION_ERR.format("power runs need c > 0"))
    return _rejections(
        cfg, n_sim, k, (alpha,), parallel, kernel, strict, progress, "mc power", bandwidth
    )
