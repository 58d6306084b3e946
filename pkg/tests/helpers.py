"""Shared fixtures-in-code for the test suite: finite differences and toy models."""

import numpy as np

from mlestep.models import Drift, ModelSpec, NoiseDensity, ParamDomain, gaussian_noise
from mlestep.simulate import Trajectory


def fd_grad(f, theta, h=1e-6):
    """Central-difference gradient of a scalar function of theta."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        out[i] = (f(up) - f(down)) / (2.0 * h)
    return out


def fd_jac(f, theta, h=1e-5):
    """Central-difference Jacobian of a vector function of theta."""
    theta = np.asarray(theta, dtype=float)
    cols = []
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        cols.append((np.asarray(f(up)) - np.asarray(f(down))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def assert_close_rel(actual, expected, rtol, atol=1e-9):
    np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)


def make_traj(observations, theta=0.0, model_name="fixture", seed=0, burn_in=0):
    return Trajectory(
        observations=np.asarray(observations, dtype=float),
        true_theta=np.atleast_1d(np.asarray(theta, dtype=float)),
        seed=seed,
        burn_in=burn_in,
        model_name=model_name,
    )


# --- Toy drifts (module-level so specs stay picklable) ---


def _zero_S(theta, x):
    return np.zeros(np.shape(x)) if np.shape(x) else 0.0


def _zero_dS(theta, x):
    return np.zeros(np.shape(x) + (1,))


def _zero_d2S(theta, x):
    return np.zeros(np.shape(x) + (1, 1))


def zero_model():
    """Drift identically zero: observations are i.i.d. noise, no information."""
    return ModelSpec(
        drift=Drift(_zero_S, _zero_dS, _zero_d2S),
        noise=gaussian_noise(),
        domain=ParamDomain([-1.0], [1.0]),
        name="zero",
    )


def _cubic_S(theta, x):
    return theta[0] * x**3


def _cubic_dS(theta, x):
    return np.asarray(x, dtype=float)[..., np.newaxis] ** 3


def _cubic_d2S(theta, x):
    return np.zeros(np.shape(x) + (1, 1))


def cubic_model():
    """Explosive drift theta * x^3: diverges once |x| grows past 1/sqrt(theta)."""
    return ModelSpec(
        drift=Drift(_cubic_S, _cubic_dS, _cubic_d2S),
        noise=gaussian_noise(),
        domain=ParamDomain([0.4], [0.6]),
        name="cubic",
    )


def _pair_w(x):
    return x / (1.0 + np.asarray(x, dtype=float) ** 2)


def _pair_S(theta, x):
    return np.exp(theta[0] + 2.0 * theta[1]) * _pair_w(x)


def _pair_dS(theta, x):
    s = np.asarray(_pair_S(theta, x))[..., np.newaxis]
    return s * np.array([1.0, 2.0])


def _pair_d2S(theta, x):
    s = np.asarray(_pair_S(theta, x))[..., np.newaxis, np.newaxis]
    return s * np.array([[1.0, 2.0], [2.0, 4.0]])


def pair_model():
    """Two-parameter fixture with a non-trivial, exactly known theta-Hessian."""
    return ModelSpec(
        drift=Drift(_pair_S, _pair_dS, _pair_d2S),
        noise=gaussian_noise(),
        domain=ParamDomain([-0.5, -0.5], [0.5, 0.5]),
        name="pair",
    )


def _box_pdf(u, half=1.0):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= half, 0.5 / half, 0.0)


def _box_logpdf(u, half=1.0):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(np.abs(u) <= half, np.log(0.5 / half), -np.inf)


def _box_zero(u, half=1.0):
    return np.zeros(np.shape(u))


def _box_sampler(rng, size=None, half=1.0):
    return rng.uniform(-half, half, size)


def box_noise(half=1.0):
    """Uniform noise on [-half, half]: zero density outside a bounded support."""
    return NoiseDensity(
        g=_box_pdf,
        log_g=_box_logpdf,
        psi=_box_zero,
        dpsi=_box_zero,
        sampler=_box_sampler,
        support=(-half, half),
    )


def box_model():
    """Zero drift with bounded-support noise; likelihood is -inf off-support."""
    return ModelSpec(
        drift=Drift(_zero_S, _zero_dS, _zero_d2S),
        noise=box_noise(),
        domain=ParamDomain([-1.0], [1.0]),
        name="box",
    )


def noiseless_linear_traj(theta0=0.5, n=200, x_init=2.0):
    """Exact zero-residual linear trajectory: X_j = theta0 * X_{j-1}."""
    obs = np.empty(n + 1)
    obs[0] = x_init
    for j in range(1, n + 1):
        obs[j] = theta0 * obs[j - 1]
    return make_traj(obs, theta=theta0, model_name="linear")
