"""Measure how fast the shifted kernel g(u + eps) approaches g(u) in L_p.

The integral of |g_eps - g|**p over [0, 1] decays like a power of eps whose
exponent depends on the regime of beta; the script fits the log-log slope
over a log-uniform eps grid and compares with the predicted exponent for
all three regimes.
"""

from levyvolterra import rate_experiment

CASES = [
    # beta, lam, p, note
    (-1 / 16, 0.0, 9 / 8, "singular kernel: exponent 1 - |beta| p"),
    (1.5, 1.0, 2.0, "beta >= 1: exponent p"),
    (0.5, 1.0, 1.0, "beta in (0,1): exponent >= min(p, 1 + beta p)"),
]

for beta, lam, p, note in CASES:
    exp = rate_experiment(beta, lam, p)
    print(f"beta={beta:+.4f} lam={lam:g} p={p:g}  ({note})")
    print(f"  fitted slope  {exp.fit.slope:8.4f}   (r^2 = {exp.fit.r_squared:.5f})")
    print(f"  theory        {exp.theoretical_exponent:8.4f}")
    for row in exp.rows():
        print(f"    eps={row['epsilon']:<9.4g} distance^p = {row['distance_p_power']:.3e}")
    print()
