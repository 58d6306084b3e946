"""Seeded simulation of the Markov sequence with burn-in toward stationarity.

The chain is started at a fixed point and run for ``burn_in`` extra steps
before observations are retained, approximating the strictly stationary
regime. Noise streams come from numpy's seeded PCG64 generator, so every
trajectory is a pure function of (seed, arguments).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SimulationDiverged
from .models import ModelSpec

__all__ = [
    "Trajectory",
    "simulate",
    "simulate_paths",
    "write_trajectory_csv",
    "write_trajectory_json",
    "read_trajectory_json",
]


@dataclass(frozen=True)
class Trajectory:
    """Observed states X_0..X_n plus the configuration that generated them."""

    observations: np.ndarray
    true_theta: np.ndarray
    seed: int
    burn_in: int
    model_name: str

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        theta = np.atleast_1d(np.asarray(self.true_theta, dtype=float))
        if obs.ndim != 1 or obs.size < 2:
            raise ValueError("a trajectory needs at least two observations")
        if not np.all(np.isfinite(obs)):
            raise ValueError("trajectory contains non-finite values")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "true_theta", theta)

    @property
    def n(self) -> int:
        """Number of transitions, i.e. observations minus one."""
        return self.observations.size - 1

    def meta(self) -> dict:
        return {
            "model_name": self.model_name,
            "true_theta": self.true_theta.tolist(),
            "seed": int(self.seed),
            "burn_in": int(self.burn_in),
        }


def simulate_paths(
    model: ModelSpec,
    theta,
    n: int,
    seeds: Sequence[int],
    burn_in: int = 1000,
    x_init: float = 0.0,
) -> np.ndarray:
    """Simulate one trajectory per seed, stepping all replications in lockstep.

    Returns an array of shape (len(seeds), n + 1); row i is exactly the
    observation vector that ``simulate`` produces for seeds[i], because each
    row consumes its own generator stream and the recursion is elementwise.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if not model.domain.contains(theta):
        raise ValueError(f"theta {theta} is not interior to the domain of {model.name!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if len(seeds) < 1:
        raise ValueError("at least one seed is required")

    total = burn_in + n + 1
    noise = np.empty((len(seeds), total))
    for i, seed in enumerate(seeds):
        rng = np.random.default_rng(int(seed))
        noise[i] = model.noise.sampler(rng, total)

    S = model.drift.S
    out = np.empty((len(seeds), n + 1))
    x = np.full(len(seeds), float(x_init))
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(total):
            x = S(theta, x) + noise[:, step]
            if step >= burn_in:
                out[:, step - burn_in] = x
    if not np.all(np.isfinite(out)):
        row = int(np.where(~np.all(np.isfinite(out), axis=1))[0][0])
        step = _first_bad_step(S, theta, noise[row], x_init)
        raise SimulationDiverged(
            f"state became non-finite at generation step {step} "
            f"(seed {int(seeds[row])}); the parameter may be non-ergodic",
            step=step,
        )
    return out


def _first_bad_step(S, theta, noise_row, x_init) -> int:
    """Replay one noise stream to locate the first non-finite state (1-based)."""
    # numpy scalars keep overflow as inf instead of raising like python floats
    x = np.float64(x_init)
    with np.errstate(over="ignore", invalid="ignore"):
        for step, eps in enumerate(noise_row, start=1):
            x = np.float64(S(theta, x) + eps)
            if not np.isfinite(x):
                return step
    return len(noise_row)


def simulate(
    model: ModelSpec,
    theta,
    n: int,
    seed: int = 0,
    burn_in: int = 1000,
    x_init: float = 0.0,
) -> Trajectory:
    """Generate X_0..X_n from the model at theta, discarding a burn-in prefix.

    The chain starts at ``x_init`` and runs burn_in + n + 1 steps; the first
    burn_in generated states are dropped and X_0 is the first retained one.
    Deterministic given (seed, arguments). Raises SimulationDiverged, naming
    the generation step, if a state leaves the finite range.
    """
    obs = simulate_paths(model, theta, n, [seed], burn_in=burn_in, x_init=x_init)[0]
    return Trajectory(
        observations=obs,
        true_theta=np.atleast_1d(np.asarray(theta, dtype=float)),
        seed=int(seed),
        burn_in=int(burn_in),
        model_name=model.name,
    )


# --- Serialization --------------------------------------------------------------


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write `index,x` rows; the generating config rides in a leading # line."""
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(traj.meta()) + "\n")
        fh.write("index,x\n")
        for i, x in enumerate(traj.observations):
            fh.write(f"{i},{x:.17g}\n")


def write_trajectory_json(traj: Trajectory, path) -> None:
    payload = dict(traj.meta(), observations=traj.observations.tolist())
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def read_trajectory_json(path) -> Trajectory:
    with open(path) as fh:
        payload = json.load(fh)
    return Trajectory(
        observations=np.asarray(payload["observations"], dtype=float),
        true_theta=np.asarray(payload["true_theta"], dtype=float),
        seed=int(payload["seed"]),
        burn_in=int(payload["burn_in"]),
        model_name=str(payload["model_name"]),
    )
