"""Quadrature helpers for integrands with a power-law endpoint singularity."""

import numpy as np
from scipy.integrate import quad

QUAD_TOL = 1e-9


def power_transformed_quad(f, a, b, power, tol=QUAD_TOL):
    """Integrate ``f`` on (a, b) where f(x) ~ c*(x - a)**power as x -> a.

    Requires power > -1 (otherwise the integral diverges and ``inf`` is
    returned).  Substituting x = a + (b - a)*w**m with m = ceil(2/(1+power))
    turns the integrand into one that vanishes at w = 0, so plain adaptive
    quadrature converges.  The substitution is exact for pure powers and
    remains valid when the true decay is faster than ``power``.
    """
    if b <= a:
        return 0.0
    if power <= -1.0:
        return np.inf
    width = b - a
    m = max(1, int(np.ceil(2.0 / (1.0 + power))))

    def g(w):
        return f(a + width * w**m) * width * m * w ** (m - 1)

    val, _ = quad(g, 0.0, 1.0, epsabs=tol, epsrel=1e-10, limit=200)
    return val


def power_transformed_gauss(f, a, b, power, n=32):
    """Fixed-node variant of :func:`power_transformed_quad` for hot loops.

    ``f`` must be vectorized.  Accuracy is limited by the node count but the
    cost is deterministic, which matters inside nested integrals.
    """
    if b <= a:
        return 0.0
    if power <= -1.0:
        return np.inf
    width = b - a
    m = max(1, int(np.ceil(2.0 / (1.0 + power))))
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    vals = f(a + width * nodes**m) * width * m * nodes ** (m - 1)
    return float(np.sum(weights * vals))


def adaptive_quad(f, a, b, tol=QUAD_TOL, points=None):
    """Adaptive quadrature on a regular interval, thin wrapper over QUADPACK."""
    if b <= a:
        return 0.0
    if points is not None:
        points = [x for x in points if a < x < b]
        if not points:
            points = None
    val, _ = quad(f, a, b, epsabs=tol, epsrel=1e-10, limit=400, points=points)
    return val


def cutoff_refinement(integral_from, delta0, halvings=10, growth_tol=0.10):
    """Classify an improper integral by refining the cutoff toward its boundary.

    ``integral_from(delta)`` must return the integral computed up to distance
    ``delta`` from the singular boundary.  The estimate is declared divergent
    when halving ``delta`` grows it by more than ``growth_tol`` twice in a
    row *while the per-level increments fail to contract*: a divergent power
    produces non-shrinking increments, whereas a convergent one shrinks them
    geometrically even when the early relative growth is large.  For finite
    outcomes the geometric tail of the increments is added back
    (Richardson-style completion).

    Returns (value, finite, history).
    """
    delta = float(delta0)
    history = [integral_from(delta)]
    finite = np.isfinite(history[0])
    growths, slices = [], []
    if finite:
        for _ in range(halvings):
            delta *= 0.5
            est = integral_from(delta)
            history.append(est)
            if not np.isfinite(est):
                finite = False
                break
            slice_ = est - history[-2]
            scale = max(abs(history[-2]), 1e-300)
            growths.append(slice_ / scale)
            slices.append(slice_)
            if (
                growth_tol is not None
                and len(growths) >= 2
                and growths[-1] > growth_tol
                and growths[-2] > growth_tol
                and slices[-1] >= 0.98 * slices[-2]
            ):
                finite = False
                break
    if not finite:
        return np.inf, False, history
    value = history[-1]
    if len(slices) >= 2 and slices[-2] != 0.0:
        ratio = slices[-1] / slices[-2]
        if 0.0 < ratio < 0.98:
            value += slices[-1] * ratio / (1.0 - ratio)
    return value, finite, history
