from dataclasses import dataclass

import numpy as np

from pltvsar.datasets.panel import time_grid
from pltvsar.utils.classes import Nox
from pltvsar.utils.errors import DegenerateGrid, InvalidSpec
from pltvsar.utils.messages import DEGENERATE_GRID_ERR, INVALID_SPEC_ERR
from pltvsar.utils.registry import get_object, register_object

SQRT_2PI = np.sqrt(2.0 * np.pi)


class KernelSpec(Nox):
    """Symmetric non-negative kernel ``K(u)``."""

    def __call__(self, u):
        raise NotImplementedError

    @staticmethod
    def add_args(parser) -> None:
        parser.add_argument(
            "--bandwidth",
            type=float,
            default=None,
            help="Override the rule-of-thumb bandwidth h.",
        )


@register_object("gaussian", "kernel")
class GaussianKernel(KernelSpec):
    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(-0.5 * u**2) / SQRT_2PI


@register_object("epanechnikov", "kernel")
class EpanechnikovKernel(KernelSpec):
    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u**2), 0.0)


def get_kernel(kernel="gaussian") -> KernelSpec:
    """Accept a registered name or a kernel instance."""
    if isinstance(kernel, KernelSpec):
        return kernel
    return get_object(kernel, "kernel")()


def kernel_eval(spec, u):
    return get_kernel(spec)(u)


@dataclass(frozen=True)
class Bandwidth:
    h: float

    def __post_init__(self):
        h = float(self.h)
        if not np.isfinite(h) or h <= 0:
            raise InvalidSpec(INVALID_SPEC_ERR.format("bandwidth must be positive"))
        object.__setattr__(self, "h", h)

    def __float__(self) -> float:
        return self.h


def rot_bandwidth(n: int, t_len: int) -> Bandwidth:
    """Rule of thumb ``h = s_tau (N T)^(-1/5)``, ``s_tau`` with denominator T - 1."""
    if t_len < 2:
        raise DegenerateGrid(DEGENERATE_GRID_ERR.format(t_len))
    s_tau = np.std(time_grid(t_len), ddof=1)
    return Bandwidth(s_tau * (n * t_len) ** -0.2)


def as_bandwidth(h) -> Bandwidth:
    return h if isinstance(h, Bandwidth) else Bandwidth(h)
