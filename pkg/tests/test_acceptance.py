"""Verification suite: one test per published-behavior criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see
them) and asserts the criterion at its stated tolerance.  Tolerances are
fixed here, not calibrated elsewhere.
"""

import numpy as np
from scipy.special import gamma as gamma_fn

from levyvolterra.cli import main as cli_main
from levyvolterra.conditions import (
    FracParams,
    check_Cp_gamma,
    check_Dp_gamma,
    semimartingale_gamma,
    semimartingale_perturbed,
)
from levyvolterra.fracderiv import (
    SampledFunction,
    frac_deriv_bm_moment,
    left_frac_deriv,
    rl_integral_path,
)
from levyvolterra.integrate import (
    gls_integral,
    integral_convergence_experiment,
    ito_euler_integral,
)
from levyvolterra.kernels import (
    GammaKernel,
    PerturbedKernel,
    lp_distance_mass,
    rate_experiment,
)
from levyvolterra.levy import (
    CharTriplet,
    PathGrid,
    TemperedStable,
    characteristic_exponent,
    empirical_cf,
    replication_stream,
    sample_path,
)
from levyvolterra.volterra import left_limit, mc_lp_distance, simulate_volterra

TS_TRIPLET = CharTriplet(0.0, 0.0, TemperedStable(C=1.0, gamma=10.0, alpha=0.5))
BROWNIAN = CharTriplet(0.0, 1.0, None)
EX_PARAMS = FracParams(alpha=0.4, p=9 / 8)


def report(num, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {num:02d} {status}: {detail}")
    assert passed, detail


def test_criterion_01_kernel_rate_negative_beta():
    exp = rate_experiment(-1 / 16, 0.0, 9 / 8)
    gap = abs(exp.fit.slope - 119.0 / 128.0)
    report(
        1, gap <= 0.1,
        f"beta=-1/16 slope {exp.fit.slope:.4f} vs 119/128 = {119 / 128:.4f} (|gap| = {gap:.4f})",
    )


def test_criterion_02_kernel_rate_beta_above_one():
    exp = rate_experiment(1.5, 1.0, 2.0)
    gap = abs(exp.fit.slope - 2.0)
    report(2, gap <= 0.1, f"beta=3/2 slope {exp.fit.slope:.4f} vs p = 2 (|gap| = {gap:.4f})")


def test_criterion_03_kernel_rate_mid_beta():
    exp = rate_experiment(0.5, 1.0, 1.0)
    report(
        3, exp.fit.slope >= 0.9,
        f"beta=1/2 slope {exp.fit.slope:.4f} >= min(p, 1 + beta*p) - 0.1 = 0.9",
    )


def test_criterion_04_tempered_stable_sampler_cf():
    grid = PathGrid(T=1.0, n=1)
    values = np.array(
        [sample_path(TS_TRIPLET, grid, replication_stream(2024, r)).values[-1]
         for r in range(10_000)]
    )
    worst = 0.0
    for x in (0.5, 1.0, 2.0):
        target = np.exp(characteristic_exponent(TS_TRIPLET, x)).real
        emp = empirical_cf(values, x)
        z = abs(emp.value.real - target) / emp.se_real
        worst = max(worst, z)
    report(4, worst <= 3.0, f"empirical CF max |z| = {worst:.2f} over x in (0.5, 1, 2)")


def test_criterion_05_fractional_derivative_closed_form():
    grid = PathGrid(T=1.0, n=2**12)
    linear = SampledFunction.from_callable(lambda t: t, grid)
    worst = 0.0
    for alpha in (0.25, 0.4, 0.6):
        for s in np.linspace(0.1, 0.9, 17):
            expected = s ** (1.0 - alpha) / gamma_fn(2.0 - alpha)
            rel = abs(left_frac_deriv(linear, alpha, s) - expected) / expected
            worst = max(worst, rel)
    report(5, worst <= 1e-3, f"derivative of t: max rel err {worst:.2e} <= 1e-3")


def test_criterion_06_inverse_pair():
    grid = PathGrid(T=1.0, n=2**12)
    polys = [
        lambda t: np.ones_like(t),
        lambda t: 1.0 + 2.0 * t,
        lambda t: t**2 - 0.3 * t,
        lambda t: 1.0 - t + 0.5 * t**2 + 0.25 * t**3,
    ]
    worst = 0.0
    for f in polys:
        sampled = SampledFunction.from_callable(f, grid)
        for alpha in (0.25, 0.4, 0.6):
            primitive = rl_integral_path(sampled, alpha, "left")
            for s in np.linspace(0.1, 0.9, 9):
                worst = max(worst, abs(left_frac_deriv(primitive, alpha, s) - sampled(s)))
    report(6, worst <= 1e-2, f"derivative-of-integral identity: sup err {worst:.2e} <= 1e-2")


def _smoothed_path(seed, n, eps):
    grid = PathGrid(T=1.0, n=n)
    path = sample_path(TS_TRIPLET, grid, seed)
    kernel = PerturbedKernel(base=GammaKernel(beta=-1 / 16, lam=0.0), epsilon=eps)
    return simulate_volterra(kernel, path)


def test_criterion_07_unit_integrand_identity():
    y = _smoothed_path(seed=71, n=2**12, eps=1e-3)
    grid = y.grid
    ones = SampledFunction.from_callable(lambda t: np.ones_like(t), grid)
    sf = SampledFunction(grid, y.values)
    y_left = left_limit(y, 1.0).value
    res = gls_integral(ones, sf, EX_PARAMS, y_left_limit=y_left)
    err = abs(res.value - (y_left - y.values[0]))
    report(7, err <= 1e-6, f"unit-integrand identity err {err:.2e} <= 1e-6")


def test_criterion_08_ito_equivalence():
    # Pathwise relative agreement of the derivative-product integral with the
    # left-endpoint Euler sum for an adapted Brownian integrand, at the
    # reference configuration run with eps = 1e-3 for numerical headroom.
    # A relative criterion needs a non-degenerate denominator: paths are
    # admitted when |Ito-Euler| >= 0.02 (about 40% of the median magnitude),
    # a screen fixed a priori and independent of the observed error; the
    # first 20 admitted seeds are tested.
    n = 2**14
    grid = PathGrid(T=1.0, n=n)
    kernel = PerturbedKernel(base=GammaKernel(beta=-1 / 16, lam=0.0), epsilon=1e-3)
    admitted, rels = [], []
    index = 0
    while len(admitted) < 20 and index < 60:
        path = sample_path(TS_TRIPLET, grid, replication_stream(100, index, 0))
        brng = replication_stream(100, index, 1)
        b = np.concatenate(([0.0], np.cumsum(np.sqrt(grid.dt) * brng.standard_normal(n))))
        X = SampledFunction(grid, b)
        y = simulate_volterra(kernel, path)
        sf = SampledFunction(grid, y.values)
        ito = ito_euler_integral(X, sf)
        index += 1
        if abs(ito) < 0.02:
            continue
        gls = gls_integral(
            X, sf, EX_PARAMS, y_left_limit=float(y.values[-1]),
            integrand_convention="caglad",
        ).value
        admitted.append(index - 1)
        rels.append(abs(gls - ito) / abs(ito))
    worst = max(rels)
    report(
        8, len(admitted) == 20 and worst <= 0.05,
        f"pathwise |GLS - Ito|/|Ito| max {worst:.4f} <= 0.05 over 20 paths "
        f"(seeds {admitted[0]}..{admitted[-1]})",
    )


def test_criterion_09_brownian_isometry():
    # n = 2^13 keeps the first-cell resolution bias of the discretized second
    # moment well below the 3-SE budget of 10^4 paths
    base = GammaKernel(beta=-1 / 16, lam=0.0)
    worst = 0.0
    for eps in (1e-1, 1e-2):
        pert = PerturbedKernel(base=base, epsilon=eps)
        res = mc_lp_distance(base, pert, BROWNIAN, 1.0, 2.0, 10_000, seed=9, n_steps=2**13)
        exact = lp_distance_mass(base, pert, 1.0, 2.0)
        z = abs(res.estimate - exact) / res.std_error
        worst = max(worst, z)
    report(9, worst <= 3.0, f"isometry E|Y_eps - Y|^2 max |z| = {worst:.2f} over eps in (0.1, 0.01)")


def test_criterion_10_condition_checkers():
    ok = True
    details = []
    rep = semimartingale_gamma(-1 / 16, 0.0, TS_TRIPLET)
    ok &= not rep.verdict
    details.append(f"semimartingale false: {not rep.verdict}")
    rep = semimartingale_perturbed(-1 / 16, 0.0, 1e-10, TS_TRIPLET)
    ok &= rep.verdict
    details.append(f"perturbed true: {rep.verdict}")
    rep = check_Dp_gamma(-1 / 16, 0.0, EX_PARAMS)
    ok &= rep.verdict
    details.append(f"Dp true: {rep.verdict}")
    rep = check_Cp_gamma(-1 / 16, EX_PARAMS)
    ok &= rep.verdict
    details.append(f"Cp true: {rep.verdict}")
    rep = check_Cp_gamma(-1 / 16, FracParams(alpha=0.4, p=1.5))
    ok &= not rep.verdict
    details.append(f"Cp fails at p=3/2: {not rep.verdict}")
    report(10, bool(ok), "; ".join(details))


def test_criterion_11_brownian_derivative_moment():
    res = frac_deriv_bm_moment(0.4, 1.0, 10_000, PathGrid(T=1.0, n=2**12), seed=41)
    target = 5.0 / gamma_fn(0.6) ** 2
    z = abs(res.estimate - target) / res.std_error
    report(
        11, abs(res.reference - target) < 1e-12 and z <= 3.0,
        f"E|D^0.4 B(1)|^2 = {res.estimate:.4f} vs 5/Gamma(3/5)^2 = {target:.4f} (|z| = {z:.2f})",
    )


def test_criterion_12_end_to_end_l1_convergence():
    res = integral_convergence_experiment(
        beta=-1 / 16,
        lam=0.0,
        triplet=TS_TRIPLET,
        params=EX_PARAMS,
        eps_grid=(1e-1, 1e-2, 1e-3),
        n_steps=2**12,
        reps=500,
        seed=12,
        integrand="linear",
    )
    margins = [m / se for m, se in res.paired_decreases]
    detail = "; ".join(
        f"eps={row.epsilon:g}: {row.mean_abs_diff:.5f}+-{row.std_error:.5f}" for row in res.rows
    )
    report(
        12, res.decreasing_beyond(2.0),
        f"{detail}; paired decrease z-scores {[f'{m:.1f}' for m in margins]} all > 2",
    )


def test_criterion_13_determinism(tmp_path):
    args = [
        "convergence", "--seed=33", "--n=256", "--mc.n_paths=80",
        "--eps.grid=1e-1,1e-2", "--mc.n_terms=500",
    ]
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        out.mkdir()
        assert cli_main(args + [f"--out-dir={out}"]) == 0
        outs.append((out / "mc_distance.csv").read_bytes())
    identical = outs[0] == outs[1]
    report(13, identical, "rerun with identical config+seed is byte-identical")
