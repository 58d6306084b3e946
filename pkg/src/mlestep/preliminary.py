"""Preliminary estimators on the learning interval [0, N].

These provide the consistent (but rate-suboptimal) starting point that the
estimator processes later correct. Three kinds are implemented for scalar
parameters: a grid-plus-golden-section likelihood maximizer, a posterior mean
under a prior, and a method-of-moments map. All estimates are projected into
the parameter box shrunk by a small margin so that information matrices stay
evaluable in the interior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import EstimationError
from .likelihood import loglik
from .models import ModelSpec
from .simulate import Trajectory

__all__ = [
    "PreliminaryEstimate",
    "learning_length",
    "mle",
    "bayes",
    "emm",
]

_GOLDEN_TOL = 1e-8
_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PreliminaryEstimate:
    """A preliminary parameter estimate with its provenance."""

    theta: np.ndarray
    kind: str
    learning_length: int
    diagnostics: dict

    def __post_init__(self):
        object.__setattr__(
            self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float))
        )

    def to_json_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "kind": self.kind,
            "learning_length": int(self.learning_length),
            "diagnostics": {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.diagnostics.items()
            },
        }


def learning_length(n: int, delta: float) -> int:
    """Length of the learning interval: nearest integer to n**delta, at least 2."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if n < 2:
        raise ValueError("n must be >= 2")
    return max(2, int(np.floor(float(n) ** delta + 0.5)))


def _require_scalar(model: ModelSpec, what: str) -> None:
    if model.dim != 1:
        raise EstimationError(
            f"{what} supports scalar parameters only (model has d={model.dim})"
        )


def _learning_loglik(theta, traj: Trajectory, N: int, model: ModelSpec) -> float:
    """Conditional log-likelihood of transitions 1..N at theta."""
    obs = traj.observations
    return float(np.sum(loglik(theta, obs[:N], obs[1 : N + 1], model)))


def _golden_max(f, a: float, b: float, tol: float) -> float:
    """Golden-section maximizer on [a, b]; ties resolve toward smaller values."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _grid(model: ModelSpec, grid_points: int) -> np.ndarray:
    lo = float(model.domain.project(model.domain.lower)[0])
    hi = float(model.domain.project(model.domain.upper)[0])
    return np.linspace(lo, hi, grid_points)


def mle(traj: Trajectory, N: int, model: ModelSpec, grid_points: int = 512) -> PreliminaryEstimate:
    """Maximize the conditional log-likelihood of the first N transitions.

    Coarse grid scan followed by golden-section refinement of the bracketing
    cell to 1e-8 in theta; grid ties break toward the smaller value. A flat
    likelihood (no information in the window) skips refinement and is flagged
    in the diagnostics.
    """
    _require_scalar(model, "mle")
    if N > traj.n:
        raise ValueError(f"learning length {N} exceeds the trajectory's {traj.n} transitions")
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")
    grid = _grid(model, grid_points)
    values = np.array([_learning_loglik(np.array([t]), traj, N, model) for t in grid])
    if np.all(np.isneginf(values)):
        raise EstimationError("conditional likelihood is -inf on the entire grid")
    top = float(values.max())
    flat = top - float(values.min()) <= 1e-12 * max(1.0, abs(top))
    if flat:
        theta = model.domain.project(np.array([grid[0]]))
        return PreliminaryEstimate(
            theta, "mle", N, {"loglik": float(values[0]), "flat_likelihood": True}
        )
    best = int(np.argmax(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid_points - 1)]
    t = _golden_max(lambda t: _learning_loglik(np.array([t]), traj, N, model), a, b, _GOLDEN_TOL)
    theta = model.domain.project(np.array([t]))
    return PreliminaryEstimate(
        theta,
        "mle",
        N,
        {"loglik": _learning_loglik(theta, traj, N, model), "flat_likelihood": False},
    )


def bayes(
    traj: Trajectory,
    N: int,
    model: ModelSpec,
    prior=None,
    grid_points: int = 512,
) -> PreliminaryEstimate:
    """Posterior mean over the parameter box under the prior (default uniform).

    The posterior weights combine the conditional likelihood of the first N
    transitions with the prior on a uniform grid; integration is Simpson
    quadrature on weights rescaled by the maximum log-weight, so very small
    likelihood values do not underflow.
    """
    _require_scalar(model, "bayes")
    if N > traj.n:
        raise ValueError(f"learning length {N} exceeds the trajectory's {traj.n} transitions")
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")
    # Simpson quadrature wants an odd point count
    pts = grid_points if grid_points % 2 == 1 else grid_points + 1
    grid = _grid(model, pts)
    logw = np.array([_learning_loglik(np.array([t]), traj, N, model) for t in grid])
    if prior is not None:
        pvals = np.array([float(prior(t)) for t in grid])
        if np.any(pvals < 0.0):
            raise ValueError("prior must be nonnegative on the domain")
        with np.errstate(divide="ignore"):
            logw = logw + np.log(pvals)
    peak = float(np.max(logw))
    if not np.isfinite(peak):
        raise EstimationError("all posterior weights underflowed")
    w = np.exp(logw - peak)
    den = float(integrate.simpson(w, x=grid))
    num = float(integrate.simpson(w * grid, x=grid))
    if not np.isfinite(den) or den <= 0.0:
        raise EstimationError("posterior mass quadrature failed")
    theta = model.domain.project(np.array([num / den]))
    return PreliminaryEstimate(
        theta, "bayes", N, {"log_posterior_mass": peak + float(np.log(den))}
    )


def emm(traj: Trajectory, N: int, model: ModelSpec, q=None, h=None) -> PreliminaryEstimate:
    """Method of moments: h applied to the sample mean of q(X_j), j = 1..N.

    Both maps default to the identity, which matches location-type models
    whose invariant law is symmetric about the parameter. The result is
    projected onto the closure of the parameter box.
    """
    if N > traj.n:
        raise ValueError(f"learning length {N} exceeds the trajectory's {traj.n} transitions")
    xs = traj.observations[1 : N + 1]
    moments = np.mean(q(xs), axis=0) if q is not None else np.mean(xs)
    try:
        value = h(moments) if h is not None else moments
    except Exception as exc:
        raise EstimationError(f"moment map is undefined at {moments!r}: {exc}") from exc
    value = np.atleast_1d(np.asarray(value, dtype=float))
    if value.shape != (model.dim,) or not np.all(np.isfinite(value)):
        raise EstimationError(f"moment map produced an unusable value {value!r}")
    theta = model.domain.project(value)
    moment_diag = moments.tolist() if isinstance(moments, np.ndarray) else float(moments)
    return PreliminaryEstimate(theta, "emm", N, {"moment": moment_diag})
