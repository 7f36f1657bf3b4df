"""Convolution kernels, their perturbations and L_p geometry.

The kernels here are the deterministic weights of moving-average processes
``Y(t) = integral of g(t - s) dL(s)``.  The module evaluates kernels and
their shifted perturbations ``g_eps(u) = g(u + eps)``, computes L_p norms
and distances with singularity-aware quadrature, and fits empirical
convergence exponents of the perturbation distance as eps -> 0.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc

from ._power import adaptive_quad, power_transformed_quad

#: log-uniform default epsilon grid for rate experiments
DEFAULT_EPS_GRID = tuple(10.0 ** (-k / 2.0) for k in range(2, 9))

#: width of the closed-form cell at the singularity, as a fraction of t
HEAD_CELL_FRACTION = 1e-3


class Kernel:
    """A deterministic kernel g(u) for u > 0.

    Parameters
    ----------
    fn : callable
        Vectorized evaluation u -> g(u).
    deriv : callable, optional
        Derivative u -> g'(u) where defined.
    singular_at_zero : bool
        Whether g blows up as u -> 0.
    power_at_zero : float, optional
        Leading exponent beta of g(u) ~ c*u**beta near 0.  Required (and in
        (-1, 0)) when the kernel is singular.
    """

    def __init__(self, fn, deriv=None, singular_at_zero=False, power_at_zero=None):
        if singular_at_zero:
            if power_at_zero is None:
                raise ValueError("singular kernels need power_at_zero metadata")
            if not -1.0 < power_at_zero < 0.0:
                raise ValueError("power_at_zero must lie in (-1, 0) for singular kernels")
        # object.__setattr__ so frozen dataclass subclasses can share this init
        object.__setattr__(self, "_fn", fn)
        object.__setattr__(self, "_deriv", deriv)
        object.__setattr__(self, "singular_at_zero", bool(singular_at_zero))
        object.__setattr__(self, "power_at_zero", power_at_zero)

    def __call__(self, u):
        return self._fn(np.asarray(u, dtype=float))

    def deriv(self, u):
        if self._deriv is None:
            raise ValueError("kernel has no derivative metadata")
        return self._deriv(np.asarray(u, dtype=float))

    # -- building blocks used by the quadrature layer ----------------------

    def head_integral(self, delta):
        """Signed integral of g over (0, delta]."""
        power = self.power_at_zero if self.singular_at_zero else 0.0
        return power_transformed_quad(lambda u: float(self(u)), 0.0, delta, power)

    def abs_power_mass(self, delta, p):
        """Integral of |g|**p over (0, delta]; inf when the power diverges."""
        if self.singular_at_zero and 1.0 + self.power_at_zero * p <= 0.0:
            return np.inf
        power = self.power_at_zero * p if self.singular_at_zero else 0.0
        return power_transformed_quad(lambda u: abs(float(self(u))) ** p, 0.0, delta, power)

    def lag_weights(self, grid):
        """Euler lag weights for the moving-average scheme.

        Generic kernels evaluate at the cell's left (time) endpoint, with the
        first lag replaced by the cell average when the kernel is singular;
        kernels with a closed-form antiderivative override this with exact
        per-cell averages.
        """
        lags = np.arange(1, grid.n + 1) * grid.dt
        w = np.asarray(self(lags), dtype=float)
        if self.singular_at_zero:
            w[0] = self.head_integral(grid.dt) / grid.dt
        return w

    def describe(self):
        return getattr(self, "_label", "kernel")


@dataclass(frozen=True)
class GammaKernel(Kernel):
    """g(u) = u**beta * exp(-lam*u), the workhorse power-exponential kernel."""

    beta: float
    lam: float = 0.0

    def __post_init__(self):
        if self.beta == 0:
            raise ValueError("beta must be nonzero")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        Kernel.__init__(
            self,
            fn=None,
            singular_at_zero=self.beta < 0,
            power_at_zero=self.beta,
        )

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return u**self.beta * np.exp(-self.lam * u)

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return u ** (self.beta - 1.0) * np.exp(-self.lam * u) * (self.beta - self.lam * u)

    def head_integral(self, delta):
        """Closed form: lower incomplete gamma when lam > 0, pure power otherwise."""
        return self._power_exp_integral(self.beta, self.lam, delta)

    def abs_power_mass(self, delta, p):
        if 1.0 + self.beta * p <= 0.0:
            return np.inf
        return self._power_exp_integral(self.beta * p, self.lam * p, delta)

    @staticmethod
    def _power_exp_integral(power, rate, delta):
        # integral of u**power * exp(-rate*u) over (0, delta], power > -1;
        # delta may be an array
        if 1.0 + power <= 0.0:
            return np.inf
        a = 1.0 + power
        delta = np.maximum(np.asarray(delta, dtype=float), 0.0)
        if rate == 0.0:
            out = delta**a / a
        else:
            out = gamma_fn(a) * gammainc(a, rate * delta) / rate**a
        return float(out) if out.ndim == 0 else out

    def cumulative(self, x):
        """Antiderivative: integral of g over (0, x], vectorized in x."""
        return self._power_exp_integral(self.beta, self.lam, x)

    def lag_weights(self, grid):
        """Exact per-cell averages of the kernel, from the closed antiderivative."""
        edges = np.arange(grid.n + 1) * grid.dt
        return np.diff(self.cumulative(edges)) / grid.dt

    def describe(self):
        return f"gamma(beta={self.beta:g},lam={self.lam:g})"


@dataclass(frozen=True)
class PerturbedKernel(Kernel):
    """Shifted kernel g_eps(u) = base(u + eps); bounded near zero for eps > 0."""

    base: Kernel
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        Kernel.__init__(self, fn=None, singular_at_zero=False, power_at_zero=None)

    def __call__(self, u):
        return self.base(np.asarray(u, dtype=float) + self.epsilon)

    def deriv(self, u):
        return self.base.deriv(np.asarray(u, dtype=float) + self.epsilon)

    def head_integral(self, delta):
        return adaptive_quad(lambda u: float(self(u)), 0.0, delta)

    def abs_power_mass(self, delta, p):
        return adaptive_quad(lambda u: abs(float(self(u))) ** p, 0.0, delta)

    def lag_weights(self, grid):
        if hasattr(self.base, "cumulative"):
            edges = self.epsilon + np.arange(grid.n + 1) * grid.dt
            return np.diff(self.base.cumulative(edges)) / grid.dt
        return Kernel.lag_weights(self, grid)

    def describe(self):
        return f"perturbed({self.base.describe()},eps={self.epsilon:g})"


def constant_kernel(value=1.0):
    """Kernel g(u) = value, handy for telescoping checks."""
    k = Kernel(lambda u: np.full_like(np.asarray(u, dtype=float), value))
    k._label = f"const({value:g})"
    return k


def zero_kernel():
    k = Kernel(lambda u: np.zeros_like(np.asarray(u, dtype=float)))
    k._label = "zero"
    return k


# ---------------------------------------------------------------------------
# L_p geometry
# ---------------------------------------------------------------------------


def lp_mass(kernel, t, p):
    """Integral of |g|**p over (0, t]; inf when the kernel is not in L_p."""
    if t <= 0:
        raise ValueError("t must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    if kernel.singular_at_zero:
        if 1.0 + kernel.power_at_zero * p <= 0.0:
            return np.inf
        delta = min(t, HEAD_CELL_FRACTION * t)
        head = kernel.abs_power_mass(delta, p)
        tail = adaptive_quad(lambda u: abs(float(kernel(u))) ** p, delta, t)
        return head + tail
    return adaptive_quad(lambda u: abs(float(kernel(u))) ** p, 0.0, t)


def lp_norm(kernel, t, p):
    """L_p[0, t] norm of the kernel; inf when divergent."""
    mass = lp_mass(kernel, t, p)
    return mass if np.isinf(mass) else mass ** (1.0 / p)


def _head_cell_width(k1, k2, t):
    # closed-form cell [0, min(t, 10*eps, 1e-3*t)]; the cell shrinks with the
    # perturbation scale when one of the kernels is a PerturbedKernel
    delta = min(t, HEAD_CELL_FRACTION * t)
    eps = min((k.epsilon for k in (k1, k2) if isinstance(k, PerturbedKernel)), default=None)
    if eps is not None:
        delta = min(delta, 10.0 * eps)
    return max(delta, 1e-12 * t)


def lp_distance_mass(k1, k2, t, p):
    """Integral of |k1 - k2|**p over (0, t]."""
    if t <= 0:
        raise ValueError("t must be positive")
    m1, m2 = lp_mass(k1, t, p), lp_mass(k2, t, p)
    if np.isinf(m1) or np.isinf(m2):
        return np.inf

    def diff_p(u):
        return abs(float(k1(u)) - float(k2(u))) ** p

    singular = [k for k in (k1, k2) if k.singular_at_zero]
    if not singular:
        points = [k.epsilon for k in (k1, k2) if isinstance(k, PerturbedKernel)]
        return adaptive_quad(diff_p, 0.0, t, points=points or None)

    # cell adjacent to the singularity: integrate with the dominating power
    # split out, which is exact for the leading term and avoids blow-up
    delta = _head_cell_width(k1, k2, t)
    power = min(k.power_at_zero for k in singular) * p
    head = power_transformed_quad(diff_p, 0.0, delta, power)
    points = [k.epsilon for k in (k1, k2) if isinstance(k, PerturbedKernel)]
    tail = adaptive_quad(diff_p, delta, t, points=points or None)
    return head + tail


def lp_distance(k1, k2, t, p):
    """L_p[0, t] distance between two kernels; inf when either norm diverges."""
    mass = lp_distance_mass(k1, k2, t, p)
    return mass if np.isinf(mass) else mass ** (1.0 / p)


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------


class RateFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def rate_fit(eps_values, distances):
    """Least-squares line through (log eps, log distance)."""
    eps_values = np.asarray(eps_values, dtype=float)
    distances = np.asarray(distances, dtype=float)
    if eps_values.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(eps_values <= 0) or np.any(distances <= 0):
        raise ValueError("eps values and distances must be positive")
    x = np.log(eps_values)
    y = np.log(distances)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), float(r2))


def theoretical_rate(beta, lam, p):
    """Decay exponent of integral |g_eps - g|**p as eps -> 0, per regime.

    Returns 1 - |beta|*p on beta in (-1, 0) (needs 1 + beta*p > 0), p on
    beta >= 1, and min(p, 1 + beta*p) on beta in (0, 1).  For beta in (0, 1)
    with lam = 0 the observable slope can exceed the returned bound because
    the eps**p term carries a vanishing coefficient.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if beta == 0 or beta <= -1:
        raise ValueError("beta out of range")
    if beta < 0:
        if 1.0 + beta * p <= 0.0:
            raise ValueError("kernel not in L_p: need 1 + beta*p > 0")
        return 1.0 - abs(beta) * p
    if beta >= 1.0:
        return p
    return min(p, 1.0 + beta * p)


@dataclass(frozen=True)
class RateExperiment:
    """Distances of g vs g_eps over an eps grid plus the fitted exponent."""

    beta: float
    lam: float
    p: float
    t: float
    eps_grid: tuple
    distances_p_power: tuple
    theoretical_exponent: float
    fit: RateFit

    def rows(self):
        for eps, d in zip(self.eps_grid, self.distances_p_power):
            yield {
                "epsilon": eps,
                "distance_p_power": d,
                "theoretical_exponent": self.theoretical_exponent,
                "fitted_slope": self.fit.slope,
            }


def rate_experiment(beta, lam, p, eps_grid=DEFAULT_EPS_GRID, t=1.0):
    """Measure integral |g_eps - g|**p over an eps grid and fit its log-log slope."""
    base = GammaKernel(beta=beta, lam=lam)
    eps_grid = tuple(float(e) for e in eps_grid)
    dist = tuple(
        lp_distance_mass(base, PerturbedKernel(base=base, epsilon=e), t, p) for e in eps_grid
    )
    fit = rate_fit(eps_grid, dist)
    return RateExperiment(
        beta=beta,
        lam=lam,
        p=p,
        t=t,
        eps_grid=eps_grid,
        distances_p_power=dist,
        theoretical_exponent=theoretical_rate(beta, lam, p),
        fit=fit,
    )
