"""Command-line entry point for reproducible experiments.

Subcommands: ``simulate``, ``check-conditions``, ``kernel-rates``,
``integrate``, ``convergence`` and ``reproduce-figures``.  Every run is
driven by a flat key=value config (file and/or ``--key=value`` overrides),
requires a seed, validates parameters before any expensive work, and writes
CSV data files whose data sections are byte-identical across reruns with
the same config.  Each output carries the config hash in a ``#`` metadata
line; a manifest file records config, hash, seed and library versions.
"""

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from . import levy
from .conditions import (
    FracParams,
    check_Cp_gamma,
    check_Dp_gamma,
    semimartingale_gamma,
    semimartingale_perturbed,
)
from .integrate import integral_convergence_experiment
from .kernels import DEFAULT_EPS_GRID, GammaKernel, PerturbedKernel, rate_experiment
from .volterra import mc_distance_experiment, simulate_volterra

OUTPUT_DIR_ENV = "LEVYVOLTERRA_OUTDIR"

DEFAULTS = {
    "kernel.beta": -1.0 / 16.0,
    "kernel.lambda": 0.0,
    "kernel.epsilon": 1e-10,
    "driver.a": 0.0,
    "driver.b": 0.0,
    "driver.C": 1.0,
    "driver.gamma": 10.0,
    "driver.alpha_L": 0.5,
    "frac.alpha": 0.4,
    "frac.p": 9.0 / 8.0,
    "grid.T": 1.0,
    "grid.n": 4096,
    "mc.reps": 500,
    "mc.n_paths": 10000,
    "mc.n_terms": 10000,
    "eps.grid": ",".join(f"{e:g}" for e in DEFAULT_EPS_GRID),
    "integrand": "linear",
    "seed": None,
    "out.dir": None,
}

_FLOAT_KEYS = {
    "kernel.beta", "kernel.lambda", "kernel.epsilon",
    "driver.a", "driver.b", "driver.C", "driver.gamma", "driver.alpha_L",
    "frac.alpha", "frac.p", "grid.T",
}
_INT_KEYS = {"grid.n", "mc.reps", "mc.n_paths", "mc.n_terms", "seed"}


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """Flat dotted-key configuration with a stable hash."""

    entries: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path=None, overrides=()):
        entries = dict(DEFAULTS)
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    for line_no, raw in enumerate(fh, 1):
                        line = raw.split("#", 1)[0].strip()
                        if not line:
                            continue
                        if "=" not in line:
                            raise ConfigError(f"{path}:{line_no}: expected key = value")
                        key, value = (part.strip() for part in line.split("=", 1))
                        entries[key] = value
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, value = (part.strip() for part in item.split("=", 1))
            entries[key.lstrip("-")] = value
        cfg = cls(entries=entries)
        cfg._coerce()
        return cfg

    def _coerce(self):
        for key, value in list(self.entries.items()):
            if value is None or not isinstance(value, str):
                continue
            try:
                if key in _FLOAT_KEYS:
                    self.entries[key] = float(value)
                elif key in _INT_KEYS:
                    self.entries[key] = int(value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc

    def __getitem__(self, key):
        return self.entries[key]

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def eps_grid(self):
        raw = str(self.entries.get("eps.grid", "")).strip()
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
        if not values:
            raise ConfigError("eps.grid must contain at least one positive value")
        if any(v <= 0 for v in values):
            raise ConfigError("eps.grid entries must be positive")
        return tuple(values)

    def seed(self):
        value = self.entries.get("seed")
        if value is None:
            raise ConfigError("seed is mandatory")
        return int(value)

    def triplet(self):
        nu = levy.TemperedStable(
            C=self["driver.C"], gamma=self["driver.gamma"], alpha=self["driver.alpha_L"]
        )
        return levy.CharTriplet(a=self["driver.a"], b=self["driver.b"], nu=nu)

    def frac_params(self):
        return FracParams(alpha=self["frac.alpha"], p=self["frac.p"], T=self["grid.T"])

    def canonical_lines(self):
        return [f"{key}={self.entries[key]!r}" for key in sorted(self.entries)]

    def digest(self):
        payload = "\n".join(self.canonical_lines()).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _out_dir(config, cli_value):
    path = cli_value or config.get("out.dir") or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(path, exist_ok=True)
    return path


def write_csv(path, header, rows, metadata):
    """CSV with leading '#' metadata lines and a deterministic data section."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key}={value}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[col]) for col in header) + "\n")


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_manifest(out_dir, config, outputs):
    path = os.path.join(out_dir, "run_manifest.txt")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"config_hash={config.digest()}\n")
        fh.write(f"levyvolterra={__version__}\n")
        fh.write(f"numpy={np.__version__}\n")
        fh.write(f"scipy={scipy.__version__}\n")
        for line in config.canonical_lines():
            fh.write(f"config.{line}\n")
        for name in outputs:
            fh.write(f"output={name}\n")
    return path


def _metadata(config):
    return {"config_hash": config.digest(), "seed": config.seed()}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(config, out_dir):
    grid = levy.PathGrid(T=config["grid.T"], n=config["grid.n"])
    triplet = config.triplet()
    path = levy.sample_path(triplet, grid, config.seed(), n_terms=config["mc.n_terms"])
    kernel = GammaKernel(beta=config["kernel.beta"], lam=config["kernel.lambda"])
    eps = config["kernel.epsilon"]
    y = simulate_volterra(kernel if eps == 0 else PerturbedKernel(kernel, eps), path)
    meta = _metadata(config)
    files = []
    levy_csv = os.path.join(out_dir, "levy_path.csv")
    with open(levy_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_hash={meta['config_hash']}\n")
        path.to_csv(fh)  # writes its own '# seed=...' sidecar line
    files.append(levy_csv)
    vol_csv = os.path.join(out_dir, "volterra_path.csv")
    write_csv(
        vol_csv,
        ["t", "value"],
        [{"t": t, "value": v} for t, v in zip(grid.nodes, y.values)],
        meta,
    )
    files.append(vol_csv)
    files.append(write_manifest(out_dir, config, files))
    return 0


def cmd_check_conditions(config, out_dir):
    beta = config["kernel.beta"]
    lam = config["kernel.lambda"]
    eps = config["kernel.epsilon"]
    params = config.frac_params()
    triplet = config.triplet()
    reports = [
        semimartingale_gamma(beta, lam, triplet, T=params.T),
        semimartingale_perturbed(beta, lam, eps, triplet, T=params.T),
        check_Dp_gamma(beta, lam, params),
    ]
    if lam == 0.0:
        reports.append(check_Cp_gamma(beta, params))
    rows = []
    print(f"{'check':28s} {'clause':20s} {'margin':>12s}  verdict")
    for report in reports:
        for row in report.rows():
            rows.append(row)
            print(
                f"{row['check']:28s} {row['clause']:20s} {row['margin']:12.5g}  "
                f"{'pass' if row['verdict'] else 'FAIL'}"
            )
        print(f"{report.name:28s} {'<verdict>':20s} {'':>12s}  "
              f"{'true' if report.verdict else 'false'}")
    csv_path = os.path.join(out_dir, "conditions.csv")
    write_csv(csv_path, ["check", "clause", "inequality", "margin", "verdict"], rows,
              _metadata(config))
    write_manifest(out_dir, config, [csv_path])
    return 0


def cmd_kernel_rates(config, out_dir):
    exp = rate_experiment(
        beta=config["kernel.beta"],
        lam=config["kernel.lambda"],
        p=config["frac.p"],
        eps_grid=config.eps_grid(),
        t=config["grid.T"],
    )
    csv_path = os.path.join(out_dir, "kernel_rates.csv")
    write_csv(
        csv_path,
        ["epsilon", "distance_p_power", "theoretical_exponent", "fitted_slope"],
        list(exp.rows()),
        _metadata(config),
    )
    write_manifest(out_dir, config, [csv_path])
    print(
        f"fitted slope {exp.fit.slope:.6f} vs theoretical exponent "
        f"{exp.theoretical_exponent:.6f} (r^2 = {exp.fit.r_squared:.6f})"
    )
    return 0


def cmd_convergence(config, out_dir):
    base = GammaKernel(beta=config["kernel.beta"], lam=config["kernel.lambda"])

    def factory(eps):
        return base if eps == 0.0 else PerturbedKernel(base=base, epsilon=eps)

    exp = mc_distance_experiment(
        factory,
        config.eps_grid(),
        config.triplet(),
        t=config["grid.T"],
        p=config["frac.p"],
        n_paths=config["mc.n_paths"],
        seed=config.seed(),
        n_steps=config["grid.n"],
        n_terms=config["mc.n_terms"],
    )
    csv_path = os.path.join(out_dir, "mc_distance.csv")
    write_csv(csv_path, ["epsilon", "estimate", "std_error", "n_paths"], list(exp.rows()),
              _metadata(config))
    write_manifest(out_dir, config, [csv_path])
    for row in exp.rows():
        print(f"eps={row['epsilon']:g}: {row['estimate']:.6g} +- {row['std_error']:.3g}")
    return 0


def cmd_integrate(config, out_dir):
    params = config.frac_params()
    eps_grid = config.eps_grid()
    result = integral_convergence_experiment(
        beta=config["kernel.beta"],
        lam=config["kernel.lambda"],
        triplet=config.triplet(),
        params=params,
        eps_grid=eps_grid,
        n_steps=config["grid.n"],
        reps=config["mc.reps"],
        seed=config.seed(),
        integrand=config.get("integrand", "linear"),
        n_terms=config["mc.n_terms"],
    )
    meta = _metadata(config)
    csv_path = os.path.join(out_dir, "integral_convergence.csv")
    write_csv(
        csv_path,
        ["epsilon", "mean_abs_diff", "std_error", "reps"],
        [row.__dict__ for row in result.rows],
        meta,
    )
    files = [csv_path]
    # first-replication paths, for figure reproduction
    grid = levy.PathGrid(T=config["grid.T"], n=config["grid.n"])
    path0 = levy.sample_path(config.triplet(), grid,
                             levy.replication_stream(config.seed(), 0, 0),
                             n_terms=config["mc.n_terms"])
    base = GammaKernel(beta=config["kernel.beta"], lam=config["kernel.lambda"])
    for label, kernel in [("base", base)] + [
        (f"eps{j}", PerturbedKernel(base=base, epsilon=e)) for j, e in enumerate(eps_grid)
    ]:
        y = simulate_volterra(kernel, path0)
        name = os.path.join(out_dir, f"sample_path_{label}.csv")
        write_csv(
            name, ["t", "value"],
            [{"t": t, "value": v} for t, v in zip(grid.nodes, y.values)],
            {**meta, "kernel": kernel.describe()},
        )
        files.append(name)
    write_manifest(out_dir, config, files)
    for row in result.rows:
        print(f"eps={row.epsilon:g}: mean |diff| {row.mean_abs_diff:.6g} +- {row.std_error:.3g}")
    print("monotone decrease beyond 2 SE:", result.decreasing_beyond(2.0))
    return 0


def cmd_reproduce_figures(config, out_dir):
    """Data behind the three illustration figures.

    Figure 1: a driver path and the corresponding kernel moving-average
    path.  Figure 2: the running integral of X(t) = t against the smoothed
    path.  Figure 3: an independent Brownian integrand and its running
    integral.  All with beta = -1/16, lam = 0, eps = 1e-10 unless
    overridden.
    """
    grid = levy.PathGrid(T=config["grid.T"], n=config["grid.n"])
    triplet = config.triplet()
    seed = config.seed()
    meta = _metadata(config)
    path = levy.sample_path(triplet, grid, levy.replication_stream(seed, 0, 0),
                            n_terms=config["mc.n_terms"])
    kernel = PerturbedKernel(
        base=GammaKernel(beta=config["kernel.beta"], lam=config["kernel.lambda"]),
        epsilon=config["kernel.epsilon"],
    )
    y = simulate_volterra(kernel, path)
    files = []

    def emit(name, header, rows):
        full = os.path.join(out_dir, name)
        write_csv(full, header, rows, meta)
        files.append(full)

    emit(
        "fig1_levy_path.csv",
        ["t", "value"],
        [{"t": t, "value": v} for t, v in zip(grid.nodes, path.values)],
    )
    emit(
        "fig1_volterra_path.csv",
        ["t", "value"],
        [{"t": t, "value": v} for t, v in zip(grid.nodes, y.values)],
    )

    # running Ito-Euler integrals, computable because the smoothed path is a
    # semimartingale
    x_lin = grid.nodes
    increments = np.diff(y.values)
    running_lin = np.concatenate(([0.0], np.cumsum(x_lin[:-1] * increments)))
    emit(
        "fig2_integral_path.csv",
        ["t", "value"],
        [{"t": t, "value": v} for t, v in zip(grid.nodes, running_lin)],
    )

    brng = levy.replication_stream(seed, 0, 1)
    bm = np.concatenate(([0.0], np.cumsum(np.sqrt(grid.dt) * brng.standard_normal(grid.n))))
    running_bm = np.concatenate(([0.0], np.cumsum(bm[:-1] * increments)))
    emit(
        "fig3_brownian_path.csv",
        ["t", "value"],
        [{"t": t, "value": v} for t, v in zip(grid.nodes, bm)],
    )
    emit(
        "fig3_integral_path.csv",
        ["t", "value"],
        [{"t": t, "value": v} for t, v in zip(grid.nodes, running_bm)],
    )
    files.append(write_manifest(out_dir, config, files))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "check-conditions": cmd_check_conditions,
    "kernel-rates": cmd_kernel_rates,
    "convergence": cmd_convergence,
    "integrate": cmd_integrate,
    "reproduce-figures": cmd_reproduce_figures,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="levyvolterra",
        description="Simulation and pathwise-integration experiments for "
        "kernel moving averages of Levy drivers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out-dir", default=None,
                       help=f"output directory (default: ${OUTPUT_DIR_ENV} or '.')")
        p.add_argument("--threads", type=int, default=None,
                       help="cap the native linear-algebra thread pool "
                            "(replications themselves run sequentially)")
    return parser


def _split_overrides(argv):
    """Peel off --key=value tokens whose key contains a dot or is a config key."""
    known, overrides = [], []
    for token in argv:
        body = token[2:] if token.startswith("--") else token
        key = body.split("=", 1)[0]
        if token.startswith("--") and "=" in body and (
            "." in key or key in ("seed", "integrand") or key in DEFAULTS
        ):
            overrides.append(body)
        else:
            known.append(token)
    return known, overrides


# convenience aliases accepted as bare flags, mapped to dotted keys
_ALIASES = {
    "beta": "kernel.beta",
    "lambda": "kernel.lambda",
    "epsilon": "kernel.epsilon",
    "alpha": "frac.alpha",
    "p": "frac.p",
    "n": "grid.n",
    "T": "grid.T",
    "reps": "mc.reps",
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    known, overrides = _split_overrides(argv)
    extra = []
    for token in list(known):
        if token.startswith("--") and "=" in token:
            key, value = token[2:].split("=", 1)
            if key in _ALIASES:
                extra.append(f"{_ALIASES[key]}={value}")
                known.remove(token)
    parser = build_parser()
    args = parser.parse_args(known)
    try:
        config = ExperimentConfig.load(args.config, overrides + extra)
        if config.get("seed") is None and args.command in (
            "simulate", "convergence", "integrate", "reproduce-figures",
        ):
            raise ConfigError("seed is mandatory")
        if config.get("seed") is None:
            config.entries["seed"] = 0
        out_dir = _out_dir(config, args.out_dir)
        if args.threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=max(1, args.threads)):
                return COMMANDS[args.command](config, out_dir)
        return COMMANDS[args.command](config, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
