"""Command-line experiment runner.

Subcommands
-----------
generate   dump ``A``, ``b``, ``u*`` and ``L`` with a JSON sidecar
sweep      error metrics over a gamma grid (CSV, L-curve CSV, plot scripts)
profiles   solution and data profiles per gamma and/or per n
filters    filter-factor table on a sigma grid
verify     invariant suite, JSON report

Configuration comes from an optional JSON file (``--config``) whose keys are
the :class:`ExperimentConfig` field names; ``noise`` is an object with keys
``kind``, ``eta``, ``a_coeff`` and ``mu``. Command-line flags override the file.

Exit codes: 0 success, 1 invalid configuration or I/O error, 2 numerical
failure, 3 failed invariant (``verify``).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .analysis import METHODS, SWEEP_FIELDS, error_metrics, gamma_grid, run_sweep, solve_method
from .errors import (
    DegenerateReference,
    InvalidDimension,
    InvalidParameter,
    NonConvergence,
    SingularToWorkingPrecision,
    StabRegError,
)
from .linalg import condition_number, numerical_rank, singular_values
from .operators import regularization_operator
from .perturbation import NOISE_KINDS, NoiseSpec, perturb
from .problems import PROBLEM_NAMES, generate, save_instance, validate_request
from .solvers import (
    RegConfig,
    limit_filter_factors,
    normal_products,
    stabreg_filter_factors,
    tikhonov_filter_factors,
)

log = logging.getLogger("stabreg")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 1, 2, 3

# Regularization operator order used when the config does not name one.
DEFAULT_OPERATOR = {"shaw": 2, "heat": 2, "phillips": 1, "gravity": 2}
DEFAULT_FILTER_GAMMAS = (1e-6, 1e-3, 1.0, 1e3, 1e6, 1e12)
WARN_N = 10_000
# Dense matrices alive at peak during a solve: A, A^T A, (A^T A)^2, L^T L, system, LU.
PEAK_MATRICES = 6


class ConfigError(InvalidParameter):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    problem: str = "shaw"
    n: int = 64
    problem_params: dict = field(default_factory=dict)
    operator_order: int | None = None
    g_mode: str = "zero"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    gamma_lo: float = 1e-5
    gamma_hi: float = 1e5
    gamma_count: int = 21
    gammas: list | None = None
    methods: list = field(default_factory=lambda: list(METHODS))
    seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    n_list: list | None = None
    n_cap: int = 32_000
    sigma_count: int = 100
    figures: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        noise = data.pop("noise", None) or {}
        if not isinstance(noise, dict):
            raise ConfigError("noise: expected an object with kind/eta/a_coeff/mu")
        bad = set(noise) - {"kind", "eta", "a_coeff", "mu"}
        if bad:
            raise ConfigError(f"noise: unknown keys {sorted(bad)}")
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"seed: expected a non-negative integer, got {seed!r}")
        try:
            spec = NoiseSpec(seed=seed, **noise)
        except (InvalidParameter, TypeError) as err:
            raise ConfigError(f"noise: {err}") from None
        cfg = cls(noise=spec, **data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = asdict(self)
        out["noise"] = {k: v for k, v in asdict(self.noise).items() if k != "seed"}
        return out

    @property
    def operator(self) -> int:
        return DEFAULT_OPERATOR[self.problem] if self.operator_order is None else self.operator_order

    def gamma_values(self) -> np.ndarray:
        if self.gammas is not None:
            return np.array(sorted(float(g) for g in self.gammas))
        return gamma_grid(self.gamma_lo, self.gamma_hi, self.gamma_count)

    def sizes(self) -> list[int]:
        return list(self.n_list) if self.n_list else [self.n]

    def validate(self) -> None:
        def need(ok, name, msg):
            if not ok:
                raise ConfigError(f"{name}: {msg}")

        need(self.problem in PROBLEM_NAMES, "problem", f"expected one of {PROBLEM_NAMES}, got {self.problem!r}")
        need(isinstance(self.problem_params, dict), "problem_params", "expected an object")
        for label, n in [("n", self.n)] + [("n_list", v) for v in (self.n_list or [])]:
            need(isinstance(n, int) and not isinstance(n, bool) and n > 0, label, f"expected a positive integer, got {n!r}")
            try:
                validate_request(self.problem, n, self.problem_params)
            except InvalidDimension as err:
                raise ConfigError(f"{label}: {err}") from None
            except InvalidParameter as err:
                raise ConfigError(f"problem_params: {err}") from None
        need(self.operator_order in (None, 0, 1, 2), "operator_order", f"expected 0, 1 or 2, got {self.operator_order!r}")
        need(self.g_mode in ("zero", "exact"), "g_mode", f"expected 'zero' or 'exact', got {self.g_mode!r}")
        for name in ("gamma_lo", "gamma_hi"):
            val = getattr(self, name)
            need(isinstance(val, (int, float)) and math.isfinite(val) and val > 0, name, f"expected a positive number, got {val!r}")
        need(self.gamma_lo < self.gamma_hi, "gamma_lo", f"must be below gamma_hi ({self.gamma_lo} >= {self.gamma_hi})")
        need(isinstance(self.gamma_count, int) and self.gamma_count >= 2, "gamma_count", f"expected an integer >= 2, got {self.gamma_count!r}")
        if self.gammas is not None:
            need(len(self.gammas) > 0, "gammas", "list is empty")
            for g in self.gammas:
                need(isinstance(g, (int, float)) and math.isfinite(g) and g > 0, "gammas", f"expected positive numbers, got {g!r}")
        need(len(self.methods) > 0, "methods", "at least one method is required")
        for m in self.methods:
            need(m in METHODS, "methods", f"expected a subset of {METHODS}, got {m!r}")
        need(len(set(self.methods)) == len(self.methods), "methods", "duplicate entries")
        need(isinstance(self.workers, int) and self.workers >= 1, "workers", f"expected an integer >= 1, got {self.workers!r}")
        need(isinstance(self.n_cap, int) and self.n_cap >= 1, "n_cap", f"expected a positive integer, got {self.n_cap!r}")
        need(isinstance(self.sigma_count, int) and self.sigma_count >= 2, "sigma_count", f"expected an integer >= 2, got {self.sigma_count!r}")
        if self.noise.kind == "smoothing":
            need(min(self.sizes()) >= 3, "noise", "smoothing needs n >= 3")
        for n in self.sizes():
            need(
                n <= self.n_cap,
                "n",
                f"n={n} exceeds n_cap={self.n_cap}; one {n}x{n} matrix takes "
                f"{_gb(n):.1f} GB and a solve needs about {PEAK_MATRICES * _gb(n):.1f} GB",
            )


def _gb(n: int) -> float:
    return 8.0 * n * n / 1e9


def _warn_size(cfg: ExperimentConfig) -> None:
    for n in cfg.sizes():
        if n >= WARN_N:
            log.warning("n=%d: dense solves need about %.1f GB of memory", n, PEAK_MATRICES * _gb(n))


# ----------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _header(command: str, cfg: ExperimentConfig, extra: dict | None = None) -> list[str]:
    lines = [
        f"# stabreg {__version__} {command}",
        "# config: " + json.dumps(cfg.to_dict(), sort_keys=True),
        f"# seed: {cfg.seed}",
    ]
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: {json.dumps(val, sort_keys=True)}")
    return lines


def write_csv(path, header_lines, columns, rows) -> Path:
    """Comment header, column names, then one comma-separated line per row."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _prepare(cfg: ExperimentConfig, n: int):
    inst = generate(cfg.problem, n, **cfg.problem_params)
    l_op = regularization_operator(n, cfg.operator)
    a_used, b_used = perturb(inst.a, inst.b, cfg.noise)
    return inst, l_op, a_used, b_used


# --------------------------------------------------------------- commands


def cmd_generate(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.output_dir)
    inst = generate(cfg.problem, cfg.n, **cfg.problem_params)
    l_op = regularization_operator(cfg.n, cfg.operator)
    spec = singular_values(inst.a)
    cond = condition_number(spec)
    extra = {
        "rank": numerical_rank(spec),
        "cond": cond if math.isfinite(cond) else "inf",
        "operator_order": cfg.operator,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
    }
    return save_instance(inst, out, l_op=l_op, extra=extra)


def cmd_sweep(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.output_dir)
    inst, l_op, a_used, b_used = _prepare(cfg, cfg.n)
    results = run_sweep(
        a_used, b_used, inst.u_star, l_op, cfg.gamma_values(), cfg.methods, cfg.g_mode, a_exact=inst.a, workers=cfg.workers
    )
    head = _header("sweep", cfg)
    for r in results:
        if r.status != "ok":
            head.append(f"# failed: gamma={_fmt(r.gamma)} method={r.method} status={r.status}")
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_csv(out / "sweep.csv", head, SWEEP_FIELDS, [r.row() for r in results])]
    lc_cols = ("gamma", "method", "residual", "seminorm", "sol_norm")
    lc_rows = [(r.gamma, r.method, r.residual, r.seminorm, r.sol_norm) for r in results]
    paths.append(write_csv(out / "lcurve.csv", _header("lcurve", cfg), lc_cols, lc_rows))
    paths.append(plotting.write_script(out / "sweep.gp", plotting.sweep_script("sweep.csv", cfg.methods)))
    paths.append(plotting.write_script(out / "lcurve.gp", plotting.lcurve_script("lcurve.csv", cfg.methods, 3, 4)))
    if cfg.figures:
        paths.append(plotting.plot_sweep(results, out / "sweep.png", cfg.methods))
        paths.append(plotting.plot_lcurve(results, out / "lcurve.png", cfg.methods))
    failed = sum(r.status != "ok" for r in results)
    if failed:
        log.warning("%d of %d solves failed; see comment lines in sweep.csv", failed, len(results))
    return paths


def _profile_columns(methods) -> list[str]:
    cols = ["i", "u_star"] + [f"u_{m}" for m in methods]
    return cols + ["a_u_star"] + [f"a_u_{m}" for m in methods]


def _solve_methods(job) -> dict:
    a_used, b_used, rc, products, methods = job
    return {m: solve_method(m, a_used, b_used, rc, products) for m in methods}


def cmd_profiles(cfg: ExperimentConfig) -> list[Path]:
    if cfg.gammas is None and not cfg.n_list:
        raise ConfigError("gammas: profiles needs an explicit gamma list or an n list")
    _warn_size(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    gammas = cfg.gamma_values() if cfg.gammas is not None else np.array([cfg.gamma_hi])
    columns = _profile_columns(cfg.methods)
    paths: list[Path] = []
    summary = []
    for n in cfg.sizes():
        inst, l_op, a_used, b_used = _prepare(cfg, n)
        g = l_op @ inst.u_star if cfg.g_mode == "exact" else None
        products = normal_products(a_used, b_used, l_op, g)
        configs = [RegConfig(float(gam), l_op, g, cfg.g_mode) for gam in gammas]
        jobs = [(a_used, b_used, rc, products, cfg.methods) for rc in configs]
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                solved = list(pool.map(_solve_methods, jobs))
        else:
            solved = [_solve_methods(job) for job in jobs]

        for gam, sols in zip(gammas, solved):
            data = {"i": np.arange(1, n + 1, dtype=np.float64), "u_star": inst.u_star}
            for m in cfg.methods:
                data[f"u_{m}"] = sols[m]
            data["a_u_star"] = inst.a @ inst.u_star
            for m in cfg.methods:
                data[f"a_u_{m}"] = inst.a @ sols[m]
                met = error_metrics(inst.u_star, sols[m], inst.a, b_used, l_op, a_used=a_used)
                summary.append((n, gam, m, met["rel_err_sol"], met["rel_err_data"]))
            stem = f"profile_n{n}_gamma{gam:.6g}"
            head = _header("profiles", cfg, {"n": n, "gamma": float(gam)})
            rows = zip(*(data[c] for c in columns))
            paths.append(write_csv(out / f"{stem}.csv", head, columns, ([int(r[0])] + list(r[1:]) for r in rows)))
            paths.append(plotting.write_script(out / f"{stem}.gp", plotting.profile_script(f"{stem}.csv", columns, f"{stem}.png")))
            if cfg.figures:
                paths.append(plotting.plot_profile(data, out / f"{stem}.png", f"n={n} gamma={gam:g}"))
    paths.append(
        write_csv(
            out / "profiles_summary.csv",
            _header("profiles", cfg),
            ("n", "gamma", "method", "rel_err_sol", "rel_err_data"),
            summary,
        )
    )
    return paths


def cmd_filters(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    gammas = [float(g) for g in cfg.gammas] if cfg.gammas is not None else list(DEFAULT_FILTER_GAMMAS)
    sigma = np.logspace(-4.0, 0.0, cfg.sigma_count)
    limit = limit_filter_factors(sigma).factors
    rows = []
    table = {}
    for gam in gammas:
        phi = stabreg_filter_factors(sigma, gam).factors
        tik = tikhonov_filter_factors(sigma, gam).factors
        table[gam] = (phi, tik)
        rows.extend(zip([gam] * sigma.size, sigma, phi, tik, limit))
    cols = ("gamma", "sigma", "phi_stabreg", "phi_tikhonov", "phi_limit")
    paths = [write_csv(out / "filters.csv", _header("filters", cfg), cols, rows)]
    paths.append(plotting.write_script(out / "filters.gp", plotting.filters_script("filters.csv", gammas)))
    if cfg.figures:
        paths.append(plotting.plot_filters(sigma, table, limit, out / "filters.png"))
    return paths


def cmd_verify(quick: bool = False, out: str | None = None) -> tuple[bool, dict]:
    from .verify import run_all

    checks = run_all(include_large=not quick)
    report = {
        "version": __version__,
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / "verify.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return report["passed"], report


# ------------------------------------------------------------------ parser


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> list[str]:
    return [tok for tok in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--problem", choices=PROBLEM_NAMES)
    common.add_argument("--n", type=int)
    common.add_argument("--n-list", type=_int_list, help="comma-separated sizes (profiles)")
    common.add_argument("--n-cap", type=int, help="largest n accepted (default 32000)")
    common.add_argument("--kappa", type=float, help="heat: diffusion parameter")
    common.add_argument("--depth", type=float, help="gravity: source depth")
    common.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), help="gravity: surface interval")
    common.add_argument("--preset", help="shaw: source preset (shaw-sym, shaw-asym)")
    common.add_argument("--operator", type=int, choices=(0, 1, 2), help="derivative order of L")
    common.add_argument("--g-mode", choices=("zero", "exact"))
    common.add_argument("--noise", choices=NOISE_KINDS)
    common.add_argument("--eta", type=float)
    common.add_argument("--a-coeff", type=float, help="AR(1) coefficient for filtered_white noise")
    common.add_argument("--mu", type=float, help="smoothing weight")
    common.add_argument("--gamma-lo", type=float)
    common.add_argument("--gamma-hi", type=float)
    common.add_argument("--gamma-count", type=int)
    common.add_argument("--gammas", type=_float_list, help="explicit comma-separated gamma list")
    common.add_argument("--methods", type=_name_list, help="comma-separated subset of tikhonov,stabreg")
    common.add_argument("--sigma-count", type=int, help="filters: number of sigma grid points")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int)
    common.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    parser = argparse.ArgumentParser(prog="stabreg", description="Stabilized-regularized least-squares experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write problem matrices and metadata")
    sub.add_parser("sweep", parents=[common], help="error metrics over a gamma grid")
    sub.add_parser("profiles", parents=[common], help="solution profiles per gamma or n")
    sub.add_parser("filters", parents=[common], help="filter-factor table")
    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--quick", action="store_true", help="skip the n=1000 problems")
    ver.add_argument("--out", default=None, help="also write verify.json here")
    return parser


_FLAG_KEYS = {
    "problem": "problem",
    "n": "n",
    "n_list": "n_list",
    "n_cap": "n_cap",
    "operator": "operator_order",
    "g_mode": "g_mode",
    "gamma_lo": "gamma_lo",
    "gamma_hi": "gamma_hi",
    "gamma_count": "gamma_count",
    "gammas": "gammas",
    "methods": "methods",
    "sigma_count": "sigma_count",
    "seed": "seed",
    "out": "output_dir",
    "workers": "workers",
}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    given = vars(args)
    data: dict = {}
    if "config" in given:
        try:
            data = json.loads(Path(given["config"]).read_text(encoding="utf-8"))
        except OSError as err:
            raise ConfigError(f"config: cannot read {given['config']}: {err}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"config: invalid JSON in {given['config']}: {err}") from None
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
    for flag, key in _FLAG_KEYS.items():
        if flag in given:
            data[key] = given[flag]
    params = dict(data.get("problem_params") or {})
    for flag in ("kappa", "depth", "preset"):
        if flag in given:
            params[flag] = given[flag]
    if "interval" in given:
        params["a"], params["b"] = given["interval"]
    if params:
        data["problem_params"] = params
    noise = dict(data.get("noise") or {})
    for flag, key in (("noise", "kind"), ("eta", "eta"), ("a_coeff", "a_coeff"), ("mu", "mu")):
        if flag in given:
            noise[key] = given[flag]
    if noise:
        data["noise"] = noise
    if given.get("no_figures"):
        data["figures"] = False
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as err:
        raise ConfigError(str(err)) from None


COMMANDS = {"generate": cmd_generate, "sweep": cmd_sweep, "profiles": cmd_profiles, "filters": cmd_filters}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    try:
        if args.command == "verify":
            ok, report = cmd_verify(args.quick, args.out)
            for c in report["checks"]:
                print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  measured={c['measured']!r}  threshold={c['threshold']!r}")
            print(json.dumps({"passed": ok, "failed": [c["name"] for c in report["checks"] if not c["passed"]]}))
            return EXIT_OK if ok else EXIT_INVARIANT
        cfg = config_from_args(args)
        paths = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidDimension, InvalidParameter, DegenerateReference) as err:
        code = EXIT_NUMERIC if isinstance(err, DegenerateReference) else EXIT_CONFIG
        print(f"error: {err}", file=sys.stderr)
        return code
    except (NonConvergence, SingularToWorkingPrecision, StabRegError) as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
