from typing import Dict, Sequence

import numpy as np

from pltvsar.utils.classes import Nox
from pltvsar.utils.registry import register_object


@register_object("amse", "metric")
class Amse(Nox):
    def __call__(self, estimates, truth) -> float:
        """
        Average mean squared error of a coefficient curve

        Args:
            estimates (np.ndarray): n_sim × T estimated curves
            truth (np.ndarray): length-T true curve

        Returns:
            float: mean over the grid of the per-point mean squared error over replicates
        """
        estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
        squared = (estimates - np.asarray(truth, dtype=float)[None, :]) ** 2
        return float(squared.mean(axis=0).mean())


@register_object("bias_sd", "metric")
class BiasSd(Nox):
    def __call__(self, estimates, truth) -> Dict[str, float]:
        """
        Bias and standard deviation (denominator n_sim - 1) of a scalar estimate

        Args:
            estimates (np.ndarray): n_sim estimates
            truth (float): true value

        Returns:
            dict: bias and sd
        """
        estimates = np.asarray(estimates, dtype=float)
        sd = float(np.std(estimates, ddof=1)) if len(estimates) > 1 else 0.0
        return {"bias": float(estimates.mean() - truth), "sd": sd}


@register_object("rejection_rate", "metric")
class RejectionRate(Nox):
    def __call__(self, p_values, alphas: Sequence[float]) -> Dict[float, float]:
        """Fraction of p-values strictly below each significance level.

        A level of 1 or more rejects every replicate, p = 1 included.
        """
        p_values = np.asarray(p_values, dtype=float)
        return {
            float(a): 1.0
            if a >= 1
            else float(np.count_nonzero(p_values < a)) / len(p_values)
            for a in alphas
        }
