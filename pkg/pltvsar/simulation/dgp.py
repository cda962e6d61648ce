"""Simulated SAR panels on square lattices.

    y_it = rho(tau_t) sum_j w_ij y_jt + beta1(tau_t) + beta2(tau_t) x2_it
           + beta3 x3_it + beta4 x4_it + alpha_i + eps_it

with ``beta1 = 4 tau``, ``beta2 = (tau + 1)^2``, ``beta3 = -5 + c exp(tau)`` and
``beta4 = 5 + c g(tau)``. ``c = 0`` is the constant-coefficient null.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats

from pltvsar.datasets.panel import FixedEffectsDesign, ModelSpec, PanelData, time_grid
from pltvsar.datasets.weights import SarSystem, SpatialWeights, lattice_weights
from pltvsar.utils.classes import Nox
from pltvsar.utils.errors import DgpSingular, PreconditionViolation
from pltvsar.utils.messages import DGP_SINGULAR_ERR, PRECONDITION_ERR
from pltvsar.utils.parallel import replicate_rng
from pltvsar.utils.registry import get_object, register_object

COLUMNS = ("intercept", "x2", "x3", "x4")


# -------------------------------------
# Spatial lag coefficient shapes
# -------------------------------------


class RhoShape(Nox):
    def __call__(self, tau, amplitude):
        raise NotImplementedError

    @staticmethod
    def add_args(parser) -> None:
        parser.add_argument(
            "--rho_amplitude",
            type=float,
            default=0.6,
            help="Peak |rho(tau)| of the sin^2 shapes [default: 0.6]",
        )


@register_object("rho1", "rho_shape")
class NegativeRho(RhoShape):
    def __call__(self, tau, amplitude=0.6):
        return -amplitude * np.sin(2 * np.pi * np.asarray(tau)) ** 2


@register_object("rho2", "rho_shape")
class PositiveRho(RhoShape):
    def __call__(self, tau, amplitude=0.6):
        return amplitude * np.sin(2 * np.pi * np.asarray(tau)) ** 2


@register_object("zero", "rho_shape")
class ZeroRho(RhoShape):
    def __call__(self, tau, amplitude=0.6):
        return np.zeros(np.shape(tau))


# -------------------------------------
# Error laws, all mean 0 and variance 1
# -------------------------------------


class ErrorLaw(Nox):
    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@register_object("normal", "error_law")
class NormalErrors(ErrorLaw):
    def draw(self, rng, size):
        return stats.norm.rvs(size=size, random_state=rng)


@register_object("uniform", "error_law")
class UniformErrors(ErrorLaw):
    def draw(self, rng, size):
        return stats.uniform.rvs(
            loc=-np.sqrt(3.0), scale=2 * np.sqrt(3.0), size=size, random_state=rng
        )


@register_object("chisq", "error_law")
class ChiSquareErrors(ErrorLaw):
    """(1/2) chi^2(2) - 1."""

    def draw(self, rng, size):
        return 0.5 * stats.chi2.rvs(df=2, size=size, random_state=rng) - 1.0


@register_object("zero", "error_law")
class ZeroErrors(ErrorLaw):
    def draw(self, rng, size):
        return np.zeros(size)


# -------------------------------------
# Alternative shapes for beta4
# -------------------------------------


class Beta4Shape(Nox):
    def __call__(self, tau):
        raise NotImplementedError


@register_object("sin2pi", "beta4_shape")
class Sin2PiShape(Beta4Shape):
    def __call__(self, tau):
        return np.sin(2 * np.pi * np.asarray(tau))


@register_object("sinpi", "beta4_shape")
class SinPiShape(Beta4Shape):
    def __call__(self, tau):
        return np.sin(np.pi * np.asarray(tau))


@dataclass(frozen=True)
class DgpConfig:
    m: int = 10
    t_len: int = 5
    scheme: str = "rook"
    rho_shape: str = "rho1"
    error_law: str = "normal"
    c: float = 0.0
    seed: int = 0
    beta4_shape: str = "sin2pi"
    rho_amplitude: float = 0.6

    def __post_init__(self):
        if self.c < 0:
            raise PreconditionViolation(PRECONDITION_ERR.format("c must be >= 0"))
        if self.m < 2 or self.t_len < 2:
            raise PreconditionViolation(
                PRECONDITION_ERR.format("need m >= 2 and t_len >= 2")
            )
        for name, kind in (
            (self.scheme, "lattice"),
            (self.rho_shape, "rho_shape"),
            (self.error_law, "error_law"),
            (self.beta4_shape, "beta4_shape"),
        ):
            get_object(name, kind)

    @property
    def n(self) -> int:
        return self.m * self.m

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrueCurves:
    tau: np.ndarray
    rho: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray
    beta4: np.ndarray

    def varying(self) -> np.ndarray:
        """T×3 truth aligned with ``FitResult.gamma_v`` columns (rho, beta1, beta2)."""
        return np.column_stack([self.rho, self.beta1, self.beta2])


@dataclass(frozen=True)
class SimulatedPanel:
    data: PanelData
    weights: SpatialWeights
    truth: TrueCurves
    alpha: np.ndarray
    spec: ModelSpec


def true_curves(cfg: DgpConfig) -> TrueCurves:
    tau = time_grid(cfg.t_len)
    return TrueCurves(
        tau=tau,
        rho=get_object(cfg.rho_shape, "rho_shape")()(tau, cfg.rho_amplitude),
        beta1=4.0 * tau,
        beta2=(tau + 1.0) ** 2,
        beta3=-5.0 + cfg.c * np.exp(tau),
        beta4=5.0 + cfg.c * get_object(cfg.beta4_shape, "beta4_shape")()(tau),
    )


def generate(
    cfg: DgpConfig, replicate: int = 0, weights: Optional[SpatialWeights] = None
) -> SimulatedPanel:
    """Draw replicate ``replicate``; depends only on ``(cfg.seed, replicate)``."""
    w = weights if weights is not None else lattice_weights(cfg.m, cfg.scheme)
    n, t_len = w.n_locations, cfg.t_len
    size = n * t_len
    rng = replicate_rng(cfg.seed, replicate)

    covariates = rng.standard_normal((size, 3))
    x = np.column_stack([np.ones(size), covariates])
    alpha_free = rng.uniform(size=n - 1)
    eps = get_object(cfg.error_law, "error_law")().draw(rng, size)

    truth = true_curves(cfg)
    coef = np.column_stack([truth.beta1, truth.beta2, truth.beta3, truth.beta4])
    signal = np.einsum("tnp,tp->tn", x.reshape(t_len, n, 4), coef).reshape(-1)
    d = FixedEffectsDesign(n, t_len)
    system = SarSystem(w, truth.rho, DgpSingular, DGP_SINGULAR_ERR)
    y = system.solve(signal + d.matvec(alpha_free) + eps)

    data = PanelData(y=y, x=x, n=n, t_len=t_len, column_names=COLUMNS)
    return SimulatedPanel(
        data=data,
        weights=w,
        truth=truth,
        alpha=d.complete(alpha_free),
        spec=ModelSpec(varying_cols=(0, 1), constant_cols=(2, 3)),
    )
