"""Estimator processes: score-corrected paths built from a preliminary estimate.

Given a preliminary estimate on the learning interval [0, N], each operation
produces a sequence of estimates indexed by k = N+1..n. The corrections differ
in which transitions feed the score sum and where the information matrix is
evaluated:

    one_step_path            score over [N+1, k], information frozen at the
                             preliminary estimate
    second_preliminary_path  score over [1, k], information frozen at the
                             preliminary estimate
    two_step_path            second preliminary value re-corrected with the
                             information re-estimated at it on [1, k]
    recurrent_path           online O(1)-per-step recursion equal to the
                             batch values
    full_mle_path            expensive reference: the grid MLE recomputed at
                             checkpoints (comparison oracle only)
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .fisher import FISHER_METHODS, invert_fisher
from .likelihood import ScoreWindow, grad_terms, loglik_grad
from .models import ModelSpec
from .preliminary import PreliminaryEstimate, mle as _grid_mle
from .simulate import Trajectory

__all__ = [
    "EstimatorPath",
    "one_step_path",
    "second_preliminary_path",
    "two_step_path",
    "recurrent_path",
    "full_mle_path",
    "write_path_csv",
    "path_to_json_dict",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorPath:
    """Sequence of estimates (k, theta_k), k > N, for one estimator kind."""

    ks: np.ndarray
    thetas: np.ndarray
    kind: str
    N: int
    preliminary: PreliminaryEstimate | None
    n: int

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=int)
        thetas = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        if ks.ndim != 1 or ks.size == 0 or thetas.shape[0] != ks.size:
            raise ValueError("ks and thetas must be non-empty and aligned")
        if np.any(np.diff(ks) <= 0):
            raise ValueError("ks must be strictly increasing")
        if ks[0] <= self.N:
            raise ValueError("every index must exceed the learning length")
        if not np.all(np.isfinite(thetas)):
            raise ValueError("path contains non-finite estimates")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "thetas", thetas)

    @property
    def terminal(self) -> np.ndarray:
        return self.thetas[-1]

    def s_values(self) -> np.ndarray:
        """Fraction of the sample used at each index: s = k / n."""
        return self.ks / float(self.n)

    def at(self, k: int) -> np.ndarray:
        idx = np.searchsorted(self.ks, k)
        if idx >= self.ks.size or self.ks[idx] != k:
            raise KeyError(f"index {k} was not emitted on this path")
        return self.thetas[idx]


def _emitted_ks(N: int, n: int, stride: int | None) -> np.ndarray:
    if stride is None:
        stride = 1 if n <= 10_000 else max(1, n // 1000)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    ks = np.arange(N + 1, n + 1, stride, dtype=int)
    if ks[-1] != n:
        ks = np.append(ks, n)
    return ks


def _interior_start(prelim: PreliminaryEstimate, model: ModelSpec) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(prelim.theta, dtype=float))
    proj = model.domain.project(theta)
    if not np.array_equal(proj, theta):
        logger.info("preliminary estimate %s projected into the domain", theta)
    return proj


def _frozen_information(theta0, traj: Trajectory, model: ModelSpec, fisher_method: str):
    # Estimated once on the full sample: a learning window of a few dozen
    # points gives an estimate noisy enough to destabilize the correction.
    return FISHER_METHODS[fisher_method](theta0, traj, ScoreWindow(1, traj.n), model)


def _frozen_correction(
    traj: Trajectory,
    model: ModelSpec,
    prelim: PreliminaryEstimate,
    fisher_method: str,
    stride: int | None,
    score_start: int,
    kind: str,
) -> EstimatorPath:
    """Shared engine: correction with the information frozen at the preliminary."""
    n, N = traj.n, prelim.learning_length
    if N >= n:
        raise ValueError("learning interval leaves no observations to process")
    theta0 = _interior_start(prelim, model)
    inv = invert_fisher(_frozen_information(theta0, traj, model, fisher_method))
    grads = grad_terms(theta0, traj, ScoreWindow(score_start, n), model)
    csum = np.cumsum(grads, axis=0)
    ks = _emitted_ks(N, n, stride)
    acc = csum[ks - score_start]
    thetas = theta0[np.newaxis, :] + (acc @ inv.T) / ks[:, np.newaxis]
    return EstimatorPath(ks, thetas, kind, N, prelim, n)


def one_step_path(
    traj: Trajectory,
    model: ModelSpec,
    prelim: PreliminaryEstimate,
    fisher_method: str = "observed",
    stride: int | None = None,
) -> EstimatorPath:
    """Score-corrected path using transitions after the learning interval.

    For each emitted k (every stride-th index from N+1, always including n):

        theta_k = prelim + (1/k) I(prelim)^{-1} sum_{j=N+1..k} loglik_grad

    with I estimated once by ``fisher_method`` at the preliminary value.
    """
    return _frozen_correction(
        traj, model, prelim, fisher_method, stride, prelim.learning_length + 1, "one-step"
    )


def second_preliminary_path(
    traj: Trajectory,
    model: ModelSpec,
    prelim: PreliminaryEstimate,
    fisher_method: str = "observed",
    stride: int | None = None,
) -> EstimatorPath:
    """Same correction as ``one_step_path`` but the score sums over [1, k].

    Intended as the intermediate stage when the learning interval is short
    (delta in (1/4, 1/2]); its values feed the two-step correction.
    """
    return _frozen_correction(
        traj, model, prelim, fisher_method, stride, 1, "second-preliminary"
    )


def two_step_path(
    traj: Trajectory,
    model: ModelSpec,
    prelim: PreliminaryEstimate,
    fisher_method: str = "observed",
    stride: int | None = None,
) -> EstimatorPath:
    """Second preliminary pass followed by a re-centered score correction.

    At each emitted k the second preliminary value is projected into the
    domain if needed (logged), the information matrix is re-estimated at it
    on the window [1, k], and the correction is applied there:

        theta_k = theta2_k + (1/k) I(theta2_k)^{-1} sum_{j=1..k} loglik_grad
    """
    base = second_preliminary_path(traj, model, prelim, fisher_method, stride)
    fisher_fn = FISHER_METHODS[fisher_method]
    thetas = np.empty_like(base.thetas)
    for i, k in enumerate(base.ks):
        mid = model.domain.project(base.thetas[i])
        if not np.array_equal(mid, base.thetas[i]):
            logger.info(
                "second preliminary estimate %s at k=%d projected into the domain",
                base.thetas[i],
                k,
            )
        window = ScoreWindow(1, int(k))
        inv = invert_fisher(fisher_fn(mid, traj, window, model))
        total = grad_terms(mid, traj, window, model).sum(axis=0)
        thetas[i] = mid + inv @ total / k
    return EstimatorPath(base.ks, thetas, "two-step", base.N, prelim, base.n)


def two_step_terminal(
    traj: Trajectory,
    model: ModelSpec,
    prelim: PreliminaryEstimate,
    fisher_method: str = "observed",
) -> np.ndarray:
    """The two-step estimate at k = n only, skipping intermediate emissions."""
    n, N = traj.n, prelim.learning_length
    if N >= n:
        raise ValueError("learning interval leaves no observations to process")
    theta0 = _interior_start(prelim, model)
    inv = invert_fisher(_frozen_information(theta0, traj, model, fisher_method))
    window = ScoreWindow(1, n)
    total = grad_terms(theta0, traj, window, model).sum(axis=0)
    mid = model.domain.project(theta0 + inv @ total / n)
    inv2 = invert_fisher(FISHER_METHODS[fisher_method](mid, traj, window, model))
    total2 = grad_terms(mid, traj, window, model).sum(axis=0)
    return mid + inv2 @ total2 / n


def recurrent_path(
    traj: Trajectory,
    model: ModelSpec,
    prelim: PreliminaryEstimate,
    fisher_method: str = "observed",
    full_window: bool = True,
) -> EstimatorPath:
    """Online recursion reproducing the batch corrected path at every k.

    Each update uses only the previous value, the preliminary estimate, and
    the newest pair of observations:

        theta_{k+1} = (k theta_k + prelim + I^{-1} loglik_grad(prelim, X_k, X_{k+1})) / (k+1)

    With ``full_window=True`` the accumulation starts at transition 1 and the
    values match ``second_preliminary_path``; otherwise the recursion is
    seeded at k = N+1 with the single windowed term and matches
    ``one_step_path``.
    """
    n, N = traj.n, prelim.learning_length
    if N >= n:
        raise ValueError("learning interval leaves no observations to process")
    theta0 = _interior_start(prelim, model)
    inv = invert_fisher(_frozen_information(theta0, traj, model, fisher_method))
    obs = traj.observations
    k0 = N + 1
    if full_window:
        head = grad_terms(theta0, traj, ScoreWindow(1, k0), model).sum(axis=0)
    else:
        head = loglik_grad(theta0, obs[k0 - 1], obs[k0], model)
    ks = np.arange(k0, n + 1, dtype=int)
    thetas = np.empty((ks.size, model.dim))
    current = theta0 + inv @ head / k0
    thetas[0] = current
    for k in range(k0, n):
        step = loglik_grad(theta0, obs[k], obs[k + 1], model)
        current = (k * current + theta0 + inv @ step) / (k + 1)
        thetas[k - k0 + 1] = current
    kind = "recurrent" if full_window else "recurrent-windowed"
    return EstimatorPath(ks, thetas, kind, N, prelim, n)


def full_mle_path(
    traj: Trajectory,
    model: ModelSpec,
    grid_points: int = 512,
    checkpoints=None,
) -> EstimatorPath:
    """Reference path: the grid MLE recomputed at each checkpoint.

    This is the expensive estimator the corrected paths are meant to avoid;
    it exists as a comparison oracle.
    """
    n = traj.n
    ks = np.array(sorted({int(k) for k in (checkpoints if checkpoints is not None else [n])}))
    if ks.size == 0 or ks[0] < 1 or ks[-1] > n:
        raise ValueError("checkpoints must lie in [1, n]")
    thetas = np.array(
        [_grid_mle(traj, int(k), model, grid_points).theta for k in ks]
    )
    return EstimatorPath(ks, thetas, "full-mle", 0, None, n)


# --- Serialization --------------------------------------------------------------


def write_path_csv(path_obj: EstimatorPath, file_path, config: dict | None = None) -> None:
    """Write `k,s,theta_1..theta_d,kind` rows with a leading # config line."""
    d = path_obj.thetas.shape[1]
    header = "k,s," + ",".join(f"theta_{i + 1}" for i in range(d)) + ",kind"
    with open(file_path, "w") as fh:
        fh.write("# " + json.dumps(config if config is not None else path_to_json_dict(path_obj, with_entries=False)) + "\n")
        fh.write(header + "\n")
        for k, s, theta in zip(path_obj.ks, path_obj.s_values(), path_obj.thetas):
            values = ",".join(f"{t:.17g}" for t in theta)
            fh.write(f"{k},{s:.17g},{values},{path_obj.kind}\n")


def path_to_json_dict(path_obj: EstimatorPath, config: dict | None = None, with_entries: bool = True) -> dict:
    payload = {
        "kind": path_obj.kind,
        "N": int(path_obj.N),
        "n": int(path_obj.n),
        "preliminary": path_obj.preliminary.to_json_dict() if path_obj.preliminary else None,
    }
    if with_entries:
        payload["entries"] = [
            {"k": int(k), "s": float(k) / path_obj.n, "theta": theta.tolist()}
            for k, theta in zip(path_obj.ks, path_obj.thetas)
        ]
    if config is not None:
        payload["config"] = config
    return payload
