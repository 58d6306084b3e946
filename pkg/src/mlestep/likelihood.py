"""Conditional log-likelihood terms and the normalized score statistic.

A transition j pairs observations (X_{j-1}, X_j); valid j run from 1 to n.
The initial-value density is never part of these quantities: everything is
conditional on X_0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec
from .simulate import Trajectory

__all__ = [
    "ScoreWindow",
    "loglik",
    "loglik_grad",
    "loglik_hess",
    "grad_terms",
    "hess_terms",
    "normalized_score",
]


@dataclass(frozen=True)
class ScoreWindow:
    """Inclusive range [start, end] of transition indices entering a sum."""

    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise ValueError(f"invalid window [{self.start}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def _theta_vec(theta) -> np.ndarray:
    return np.atleast_1d(np.asarray(theta, dtype=float))


def loglik(theta, x_prev, x_next, model: ModelSpec):
    """Log transition density: log g(x_next - S(theta, x_prev)).

    Vectorized over paired x arrays; returns the same shape as the inputs.
    """
    theta = _theta_vec(theta)
    u = np.asarray(x_next, dtype=float) - model.drift.S(theta, x_prev)
    return model.noise.log_g(u)


def loglik_grad(theta, x_prev, x_next, model: ModelSpec) -> np.ndarray:
    """Gradient in theta of ``loglik``: -psi(u) * dS(theta, x_prev).

    Shape: x.shape + (d,). For Gaussian noise this is (x_next - S) * dS.
    """
    theta = _theta_vec(theta)
    u = np.asarray(x_next, dtype=float) - model.drift.S(theta, x_prev)
    psi = np.asarray(model.noise.psi(u), dtype=float)
    return -psi[..., np.newaxis] * np.asarray(model.drift.dS(theta, x_prev), dtype=float)


def loglik_hess(theta, x_prev, x_next, model: ModelSpec) -> np.ndarray:
    """Hessian in theta of ``loglik``; shape x.shape + (d, d).

    Equals dpsi(u) * dS dS^T - psi(u) * d2S with u = x_next - S(theta, x_prev);
    for Gaussian noise, -dS dS^T + (x_next - S) * d2S.
    """
    theta = _theta_vec(theta)
    u = np.asarray(x_next, dtype=float) - model.drift.S(theta, x_prev)
    psi = np.asarray(model.noise.psi(u), dtype=float)
    dpsi = np.asarray(model.noise.dpsi(u), dtype=float)
    grad = np.asarray(model.drift.dS(theta, x_prev), dtype=float)
    hess = np.asarray(model.drift.d2S(theta, x_prev), dtype=float)
    outer = grad[..., :, np.newaxis] * grad[..., np.newaxis, :]
    return dpsi[..., np.newaxis, np.newaxis] * outer - psi[..., np.newaxis, np.newaxis] * hess


def _window_pairs(traj: Trajectory, window: ScoreWindow):
    if window.end > traj.n:
        raise ValueError(
            f"window end {window.end} exceeds the trajectory's {traj.n} transitions"
        )
    obs = traj.observations
    return obs[window.start - 1 : window.end], obs[window.start : window.end + 1]


def grad_terms(theta, traj: Trajectory, window: ScoreWindow, model: ModelSpec) -> np.ndarray:
    """Per-transition score contributions over the window; shape (length, d)."""
    xp, xn = _window_pairs(traj, window)
    return loglik_grad(theta, xp, xn, model)


def hess_terms(theta, traj: Trajectory, window: ScoreWindow, model: ModelSpec) -> np.ndarray:
    """Per-transition Hessian contributions over the window; shape (length, d, d)."""
    xp, xn = _window_pairs(traj, window)
    return loglik_hess(theta, xp, xn, model)


def normalized_score(theta, traj: Trajectory, window: ScoreWindow, model: ModelSpec) -> np.ndarray:
    """Sum of score terms over the window divided by sqrt(window.end).

    The normalization uses the absolute end index k of the window, not the
    window length, so partial-sum statistics stay comparable across windows
    with different starting points.
    """
    g = grad_terms(theta, traj, window, model)
    return g.sum(axis=0) / np.sqrt(window.end)
