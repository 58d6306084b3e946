"""Monte Carlo study harness for the estimator pipelines.

A study runs M independent replications of simulate -> preliminary ->
process, collects the terminal errors normalized by sqrt(n), and compares
their spread against the inverse of a long-run reference information matrix.
Replications use seeds base_seed + i, so a report is a pure function of its
configuration.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .errors import MlestepError, StudyError
from .fisher import FisherMatrix, plugin_fisher, invert_fisher
from .likelihood import ScoreWindow
from .models import ModelSpec, get_model
from .preliminary import PreliminaryEstimate, bayes, emm, learning_length, mle
from .process import (
    full_mle_path,
    one_step_path,
    second_preliminary_path,
    two_step_path,
    two_step_terminal,
)
from .simulate import simulate

__all__ = [
    "McConfig",
    "McReport",
    "run_study",
    "compare_estimators",
    "oracle_information",
    "mc_config_from_dict",
    "report_to_json_dict",
    "write_report_json",
    "write_report_csv",
]

PRELIMINARY_KINDS = ("mle", "bayes", "emm")
PROCESS_KINDS = ("none", "one-step", "second-preliminary", "two-step", "full-mle")
QUANTILE_LEVELS = (5, 25, 50, 75, 95)

ORACLE_LENGTH = 1_000_000
_ORACLE_SEED = 20_240_001
_oracle_cache: dict = {}


@dataclass(frozen=True)
class McConfig:
    """Configuration of one Monte Carlo study."""

    model_name: str
    theta0: np.ndarray
    n: int
    delta: float
    preliminary: str = "emm"
    process: str = "one-step"
    fisher_method: str = "observed"
    replications: int = 300
    base_seed: int = 0
    stride: int | None = None
    burn_in: int = 1000
    x_init: float = 0.0
    grid_points: int = 512
    # explicit d x d reference information; skips the long oracle run when set
    reference_information: tuple | None = None

    def __post_init__(self):
        theta0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
        object.__setattr__(self, "theta0", theta0)
        if self.replications < 2:
            raise ValueError("a study needs at least 2 replications")
        if self.preliminary not in PRELIMINARY_KINDS:
            raise ValueError(f"preliminary must be one of {PRELIMINARY_KINDS}")
        if self.process not in PROCESS_KINDS:
            raise ValueError(f"process must be one of {PROCESS_KINDS}")
        model = get_model(self.model_name)
        if not model.domain.contains(theta0):
            raise ValueError(f"theta0 {theta0} is not interior to the domain of {self.model_name!r}")

    def pipeline(self) -> str:
        return f"{self.preliminary}+{self.process}"

    def to_json_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "theta0": self.theta0.tolist(),
            "n": int(self.n),
            "delta": float(self.delta),
            "preliminary": self.preliminary,
            "process": self.process,
            "fisher_method": self.fisher_method,
            "replications": int(self.replications),
            "base_seed": int(self.base_seed),
            "stride": self.stride,
            "burn_in": int(self.burn_in),
            "x_init": float(self.x_init),
            "grid_points": int(self.grid_points),
            "reference_information": (
                np.asarray(self.reference_information).tolist()
                if self.reference_information is not None
                else None
            ),
        }


def mc_config_from_dict(payload: dict) -> McConfig:
    known = {f for f in McConfig.__dataclass_fields__}
    extra = set(payload) - known
    if extra:
        raise ValueError(f"unknown study config fields: {sorted(extra)}")
    return McConfig(**payload)


@dataclass(frozen=True)
class McReport:
    """Aggregate result of a Monte Carlo study."""

    config: McConfig
    terminal_errors: np.ndarray
    empirical_covariance: np.ndarray
    reference_information_inverse: np.ndarray
    quantiles: dict
    seeds: np.ndarray
    failures: tuple = field(default_factory=tuple)

    @property
    def replications_used(self) -> int:
        return self.terminal_errors.shape[0]


def oracle_information(model: ModelSpec, theta0, n_oracle: int = ORACLE_LENGTH) -> FisherMatrix:
    """Plug-in information at theta0 from one long simulated trajectory.

    Cached per (model name, theta0, n_oracle) because the long run is the
    expensive part of a study.
    """
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    key = (model.name, tuple(theta0.tolist()), int(n_oracle))
    if key not in _oracle_cache:
        traj = simulate(model, theta0, int(n_oracle), seed=_ORACLE_SEED, burn_in=1000)
        _oracle_cache[key] = plugin_fisher(theta0, traj, ScoreWindow(1, int(n_oracle)), model)
    return _oracle_cache[key]


def _preliminary(cfg: McConfig, traj, N: int, model: ModelSpec) -> PreliminaryEstimate:
    if cfg.preliminary == "mle":
        return mle(traj, N, model, cfg.grid_points)
    if cfg.preliminary == "bayes":
        return bayes(traj, N, model, grid_points=cfg.grid_points)
    return emm(traj, N, model)


def _replicate(cfg: McConfig, seed: int) -> np.ndarray:
    """One replication; returns the terminal estimate."""
    model = get_model(cfg.model_name)
    traj = simulate(
        model, cfg.theta0, cfg.n, seed=seed, burn_in=cfg.burn_in, x_init=cfg.x_init
    )
    if cfg.process == "full-mle":
        return full_mle_path(traj, model, cfg.grid_points, [cfg.n]).terminal
    N = learning_length(cfg.n, cfg.delta)
    prelim = _preliminary(cfg, traj, N, model)
    if cfg.process == "none":
        return prelim.theta
    if cfg.process == "two-step":
        # terminal-only studies skip the per-k information re-estimation
        if cfg.stride is None:
            return two_step_terminal(traj, model, prelim, cfg.fisher_method)
        return two_step_path(traj, model, prelim, cfg.fisher_method, cfg.stride).terminal
    stride = cfg.stride if cfg.stride is not None else cfg.n
    fn = one_step_path if cfg.process == "one-step" else second_preliminary_path
    return fn(traj, model, prelim, cfg.fisher_method, stride).terminal


def _replicate_safe(cfg: McConfig, index: int) -> tuple:
    seed = int(cfg.base_seed + index)
    try:
        return index, _replicate(cfg, seed), None
    except (MlestepError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def _quantile_table(errors: np.ndarray, ref_inv: np.ndarray) -> dict:
    sd = np.sqrt(np.diag(ref_inv))
    empirical = {
        p: np.percentile(errors, p, axis=0).tolist() for p in QUANTILE_LEVELS
    }
    gaussian = {p: (norm.ppf(p / 100.0) * sd).tolist() for p in QUANTILE_LEVELS}
    return {"empirical": empirical, "gaussian": gaussian}


def run_study(cfg: McConfig, workers: int = 1) -> McReport:
    """Run the configured study and aggregate the terminal errors.

    Replication i uses seed base_seed + i. Failed replications are recorded
    and skipped; the study errors out if more than 10 percent fail. The
    report is identical whichever worker count executes it.
    """
    model = get_model(cfg.model_name)
    if cfg.reference_information is not None:
        reference = FisherMatrix(
            np.asarray(cfg.reference_information, dtype=float), "reference", 0
        )
    else:
        reference = oracle_information(model, cfg.theta0)
    ref_inv = invert_fisher(reference)
    indices = range(cfg.replications)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_replicate_safe, [cfg] * cfg.replications, indices))
    else:
        outcomes = [_replicate_safe(cfg, i) for i in indices]
    outcomes.sort(key=lambda item: item[0])

    rows, failures = [], []
    for index, theta, message in outcomes:
        if message is None:
            rows.append(theta)
        else:
            failures.append((index, message))
    if len(failures) > 0.1 * cfg.replications:
        raise StudyError(
            f"{len(failures)} of {cfg.replications} replications failed; "
            f"first: {failures[0][1]}"
        )
    terminals = np.asarray(rows, dtype=float)
    errors = np.sqrt(cfg.n) * (terminals - cfg.theta0[np.newaxis, :])
    cov = np.atleast_2d(np.cov(errors, rowvar=False))
    return McReport(
        config=cfg,
        terminal_errors=errors,
        empirical_covariance=cov,
        reference_information_inverse=ref_inv,
        quantiles=_quantile_table(errors, ref_inv),
        seeds=cfg.base_seed + np.arange(cfg.replications),
        failures=tuple(failures),
    )


def compare_estimators(cfgs: Sequence[McConfig], workers: int = 1) -> list[dict]:
    """Run several pipelines over a shared model/theta0/n and tabulate them."""
    if not cfgs:
        raise ValueError("no study configurations given")
    base = cfgs[0]
    for cfg in cfgs[1:]:
        if (
            cfg.model_name != base.model_name
            or not np.array_equal(cfg.theta0, base.theta0)
            or cfg.n != base.n
        ):
            raise ValueError("compared studies must share model, theta0, and n")
    rows = []
    for cfg in cfgs:
        report = run_study(cfg, workers=workers)
        rows.append(
            {
                "pipeline": cfg.pipeline(),
                "delta": float(cfg.delta),
                "variance": report.empirical_covariance.tolist(),
                "quantiles": report.quantiles["empirical"],
                "replications_used": report.replications_used,
            }
        )
    return rows


# --- Serialization --------------------------------------------------------------


def report_to_json_dict(report: McReport) -> dict:
    return {
        "config": report.config.to_json_dict(),
        "terminal_errors": report.terminal_errors.tolist(),
        "empirical_covariance": report.empirical_covariance.tolist(),
        "reference_information_inverse": report.reference_information_inverse.tolist(),
        "quantiles": {
            side: {str(p): v for p, v in table.items()}
            for side, table in report.quantiles.items()
        },
        "seeds": report.seeds.tolist(),
        "failures": [list(f) for f in report.failures],
    }


def write_report_json(report: McReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_json_dict(report), fh)
        fh.write("\n")


def write_report_csv(report: McReport, path) -> None:
    """One row per successful replication, config echo in a leading # line."""
    d = report.terminal_errors.shape[1]
    ok_indices = sorted(
        set(range(report.config.replications)) - {i for i, _ in report.failures}
    )
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(report.config.to_json_dict()) + "\n")
        fh.write("replication,seed," + ",".join(f"err_{i + 1}" for i in range(d)) + "\n")
        for row, index in enumerate(ok_indices):
            values = ",".join(f"{v:.17g}" for v in report.terminal_errors[row])
            fh.write(f"{index},{report.seeds[index]},{values}\n")
