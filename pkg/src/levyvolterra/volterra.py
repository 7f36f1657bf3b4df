"""Moving-average (Volterra) paths driven by Levy increments.

``Y(t) = integral of g(t - s) dL(s)`` is discretized with a left-endpoint
Euler rule: increment j receives weight ``g(t_k - t_j)``.  For kernels that
blow up at zero the terminal cell instead carries the cell-averaged weight
``(1/dt) * integral of g over (0, dt]``, evaluated in closed form for the
power part, so the singular mass is kept without ever evaluating g at 0.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import levy
from .kernels import lp_mass


@dataclass(frozen=True)
class VolterraPath:
    """Sampled values Y(t_k) of a kernel moving average of one driver path."""

    grid: levy.PathGrid
    values: np.ndarray
    kernel: str = "kernel"
    driver_seed: object = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n + 1,):
            raise ValueError("values must have length grid.n + 1")
        object.__setattr__(self, "values", vals)

    def to_csv(self, path_or_buffer):
        buf = path_or_buffer
        own = isinstance(path_or_buffer, (str, bytes)) or hasattr(path_or_buffer, "__fspath__")
        if own:
            buf = open(path_or_buffer, "w", encoding="utf-8")
        try:
            buf.write(f"# kernel={self.kernel} seed={self.driver_seed!r}\n")
            buf.write("t,value\n")
            for t, v in zip(self.grid.nodes, self.values):
                buf.write(f"{t:.12g},{v:.17g}\n")
        finally:
            if own:
                buf.close()


def euler_weights(kernel, grid):
    """Lag weights of the Euler scheme, as supplied by the kernel.

    Power-exponential kernels provide exact per-cell averages from their
    closed-form antiderivative; generic kernels fall back to left-endpoint
    evaluation with a cell-averaged first lag when singular.
    """
    w = np.asarray(kernel.lag_weights(grid), dtype=float)
    if w.shape != (grid.n,) or not np.all(np.isfinite(w)):
        raise ValueError(
            "kernel produced invalid lag weights; singular kernels need "
            "power_at_zero metadata"
        )
    return w


def simulate_volterra(kernel, path):
    """Build the moving-average path Y from a kernel and a driver path."""
    w = euler_weights(kernel, path.grid)
    values = np.empty(path.grid.n + 1)
    values[0] = 0.0
    values[1:] = np.convolve(w, path.increments)[: path.grid.n]
    return VolterraPath(
        grid=path.grid,
        values=values,
        kernel=kernel.describe(),
        driver_seed=path.seed,
    )


class LeftLimitResult(NamedTuple):
    value: float
    deltas: tuple
    estimates: tuple
    diffs: tuple


def left_limit(path, t, delta_sequence=None):
    """Estimate Y(t-) from grid values along a shrinking delta sequence.

    Returns the value at the finest admissible delta (at least one grid
    cell) together with the successive differences of the estimates as a
    convergence diagnostic.
    """
    grid = path.grid
    dt = grid.dt
    k = int(round(t / dt))
    if not (0 < k <= grid.n) or abs(k * dt - t) > 1e-9 * max(dt, 1.0):
        raise ValueError("t must coincide with a grid node in (0, T]")
    if delta_sequence is None:
        delta_sequence = [m * dt for m in (8, 4, 2, 1) if m < k] or [dt]
    deltas, estimates = [], []
    for delta in sorted(delta_sequence, reverse=True):
        m = max(1, int(round(delta / dt)))
        if m >= k:
            continue
        deltas.append(m * dt)
        estimates.append(float(path.values[k - m]))
    if not estimates:
        deltas = [k * dt]
        estimates = [float(path.values[0])]
    diffs = tuple(abs(b - a) for a, b in zip(estimates, estimates[1:]))
    return LeftLimitResult(
        value=estimates[-1], deltas=tuple(deltas), estimates=tuple(estimates), diffs=diffs
    )


class MCDistance(NamedTuple):
    estimate: float
    std_error: float
    n_paths: int


def _check_integrability(kernel, triplet, t, p):
    triplet.require_p_moment_regime(p)
    if np.isinf(lp_mass(kernel, t, p)):
        raise ValueError("kernel is not in L_p on [0, t]")


def mc_terminal_values(kernel, triplet, t, n_paths, seed, n_steps=4096,
                       n_terms=levy.DEFAULT_SERIES_TERMS):
    """Monte-Carlo samples of Y(t), one replication stream per path."""
    grid = levy.PathGrid(T=t, n=n_steps)
    w_rev = euler_weights(kernel, grid)[::-1].copy()
    out = np.empty(n_paths)
    for r in range(n_paths):
        rng = levy.replication_stream(seed, r)
        path = levy.sample_path(triplet, grid, rng, n_terms=n_terms)
        out[r] = w_rev @ path.increments
    return out


def mc_lp_distance(k1, k2, triplet, t, p, n_paths, seed, n_steps=4096,
                   n_terms=levy.DEFAULT_SERIES_TERMS, n_boot=200):
    """Estimate E|Y_1(t) - Y_2(t)|**p by common-random-number Monte Carlo.

    Both kernels are applied to the same driver path in every replication,
    so identical kernels give exactly zero.  The standard error is a
    bootstrap over replications.
    """
    _check_integrability(k1, triplet, t, p)
    _check_integrability(k2, triplet, t, p)
    grid = levy.PathGrid(T=t, n=n_steps)
    dw_rev = (euler_weights(k1, grid) - euler_weights(k2, grid))[::-1].copy()
    samples = np.empty(n_paths)
    for r in range(n_paths):
        rng = levy.replication_stream(seed, r)
        path = levy.sample_path(triplet, grid, rng, n_terms=n_terms)
        samples[r] = np.abs(dw_rev @ path.increments) ** p
    estimate = float(samples.mean())
    boot_rng = levy.replication_stream(seed, 0, substream=1)
    idx = boot_rng.integers(0, n_paths, size=(n_boot, n_paths))
    se = float(np.std(samples[idx].mean(axis=1), ddof=1))
    return MCDistance(estimate=estimate, std_error=se, n_paths=n_paths)


@dataclass(frozen=True)
class DistanceExperiment:
    """MC distances E|Y_eps(t) - Y(t)|**p over an epsilon grid."""

    eps_grid: tuple
    estimates: tuple
    std_errors: tuple
    n_paths: int
    p: float

    def rows(self):
        for eps, est, se in zip(self.eps_grid, self.estimates, self.std_errors):
            yield {"epsilon": eps, "estimate": est, "std_error": se, "n_paths": self.n_paths}


def mc_distance_experiment(kernel_factory, eps_grid, triplet, t, p, n_paths, seed,
                           n_steps=4096, n_terms=levy.DEFAULT_SERIES_TERMS):
    """Run mc_lp_distance for a base kernel against each of its perturbations.

    ``kernel_factory(eps)`` must return the perturbed kernel for eps > 0 and
    the base kernel for eps = 0.
    """
    base = kernel_factory(0.0)
    estimates, ses = [], []
    for eps in eps_grid:
        res = mc_lp_distance(base, kernel_factory(eps), triplet, t, p, n_paths, seed,
                             n_steps=n_steps, n_terms=n_terms)
        estimates.append(res.estimate)
        ses.append(res.std_error)
    return DistanceExperiment(
        eps_grid=tuple(eps_grid), estimates=tuple(estimates), std_errors=tuple(ses),
        n_paths=n_paths, p=p,
    )
