"""Test-problem generators: shaw, heat, phillips and gravity.

Each generator returns a :class:`ProblemInstance` holding the square matrix
``a``, right-hand side ``b`` and the discretized exact solution ``u_star``.
Arrays in an instance are flagged read-only.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import toeplitz

from .errors import InvalidDimension, InvalidParameter
from .linalg import as_matrix, as_vector, dump_array

__all__ = [
    "GENERATOR_VERSION",
    "ProblemInstance",
    "ShawParams",
    "SHAW_PRESETS",
    "shaw",
    "heat",
    "heat_solution",
    "phillips",
    "gravity",
    "PROBLEM_NAMES",
    "generate",
    "validate_request",
    "save_instance",
]

GENERATOR_VERSION = "1"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    a: np.ndarray
    b: np.ndarray
    u_star: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        a = as_matrix(self.a, "a")
        b = as_vector(self.b, "b")
        u = as_vector(self.u_star, "u_star")
        n = a.shape[0]
        if a.shape != (n, n) or b.size != n or u.size != n:
            raise InvalidDimension(
                f"inconsistent instance shapes a={a.shape}, b={b.shape}, u_star={u.shape}"
            )
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "u_star", _frozen(u))

    @property
    def n(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class ShawParams:
    """Two-Gaussian source ``a1 exp(-c1 (x-x1)^2) + a2 exp(-c2 (x-x2)^2)``."""

    a1: float = 1.0
    c1: float = 4.0
    x1: float = 0.5
    a2: float = 1.0
    c2: float = 4.0
    x2: float = -0.5

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise InvalidParameter(f"shaw widths must be positive, got c1={self.c1}, c2={self.c2}")

    def source(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.a1 * np.exp(-self.c1 * (x - self.x1) ** 2) + self.a2 * np.exp(
            -self.c2 * (x - self.x2) ** 2
        )


SHAW_PRESETS = {
    "shaw-sym": ShawParams(a1=1.0, c1=4.0, x1=0.5, a2=1.0, c2=4.0, x2=-0.5),
    "shaw-asym": ShawParams(a1=2.0, c1=6.0, x1=0.8, a2=1.0, c2=2.0, x2=-0.5),
}


def shaw(n: int, params: ShawParams | str | None = None) -> ProblemInstance:
    """One-dimensional image restoration problem on ``[-pi/2, pi/2]``.

    Collocation at ``s_i = -pi/2 + i h`` and midpoint quadrature nodes
    ``x_j - h/2`` with ``h = pi / n``. The kernel is
    ``(cos s + cos x)^2 (sin psi / psi)^2`` with ``psi = pi (sin s + sin x)``.
    """
    if isinstance(params, str):
        try:
            params = SHAW_PRESETS[params]
        except KeyError:
            raise InvalidParameter(f"unknown shaw preset {params!r}") from None
    params = params or SHAW_PRESETS["shaw-sym"]
    if n < 2 or n % 2:
        raise InvalidDimension(f"shaw needs an even n >= 2, got {n}")
    h = math.pi / n
    idx = np.arange(1, n + 1, dtype=np.float64)
    s = -math.pi / 2 + idx * h
    x = -math.pi / 2 + (idx - 0.5) * h
    ss, xx = np.meshgrid(s, x, indexing="ij")
    psi = math.pi * (np.sin(ss) + np.sin(xx))
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc = np.where(psi == 0.0, 1.0, np.sin(psi) / psi)
    a = h * (np.cos(ss) + np.cos(xx)) ** 2 * sinc**2
    u = params.source(x)
    return ProblemInstance("shaw", a, a @ u, u, {"n": n, **asdict(params)})


def heat_solution(t):
    """Piecewise exact solution of the inverse heat problem on ``[0, 1]``."""
    t = np.asarray(t, dtype=np.float64)
    return np.select(
        [t <= 0.1, t <= 0.15, t <= 0.5],
        [
            75.0 * t**2,
            0.75 + (20.0 * t - 2.0) * (3.0 - 20.0 * t),
            0.75 * np.exp(2.0 * (3.0 - 20.0 * t)),
        ],
        default=0.0,
    )


def heat(n: int, kappa: float = 1.0) -> ProblemInstance:
    """Inverse heat equation (first-kind Volterra), lower-triangular Toeplitz ``A``."""
    if n < 4:
        raise InvalidDimension(f"heat needs n >= 4, got {n}")
    if not kappa > 0:
        raise InvalidParameter(f"kappa must be positive, got {kappa}")
    h = 1.0 / n
    # s_i - t_j* = (i - j + 1/2) h for j <= i
    tau = (np.arange(n, dtype=np.float64) + 0.5) * h
    column = h * np.exp(-1.0 / (4.0 * kappa**2 * tau)) / (2.0 * kappa * math.sqrt(math.pi) * tau**1.5)
    first_row = np.zeros(n)
    first_row[0] = column[0]
    a = toeplitz(column, first_row)
    t_mid = (np.arange(1, n + 1, dtype=np.float64) - 0.5) * h
    u = heat_solution(t_mid)
    return ProblemInstance("heat", a, a @ u, u, {"n": n, "kappa": float(kappa)})


def _phillips_bump(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(np.abs(x) < 3.0, 1.0 + np.cos(math.pi / 3.0 * x), 0.0)


def _phillips_rhs(s):
    s = np.asarray(s, dtype=np.float64)
    c = math.pi / 3.0
    return (6.0 - np.abs(s)) * (1.0 + 0.5 * np.cos(c * s)) + 9.0 / (2.0 * math.pi) * np.sin(c * np.abs(s))


def phillips(n: int, quad_points: int = 8) -> ProblemInstance:
    """Phillips' test problem, Galerkin discretization with piecewise-constant bases.

    Integrals against the normalized box functions are evaluated with a
    ``quad_points``-point Gauss-Legendre rule per cell and per dimension.
    Because the kernel depends on ``s - x`` only, ``A`` is symmetric Toeplitz and
    one cell pair per diagonal is integrated.
    """
    if n < 4 or n % 4:
        raise InvalidDimension(f"phillips needs n >= 4 divisible by 4, got {n}")
    h = 12.0 / n
    nodes, weights = leggauss(quad_points)
    offs = 0.5 * h * (nodes + 1.0)
    w = 0.5 * h * weights
    ds, dx = np.meshgrid(offs, offs, indexing="ij")
    w2 = np.outer(w, w)
    column = np.zeros(n)
    for d in range(n):
        if (d - 1) * h >= 3.0:
            break
        column[d] = np.sum(w2 * _phillips_bump(d * h + ds - dx)) / h
    a = toeplitz(column)

    left = -6.0 + np.arange(n, dtype=np.float64) * h
    pts = left[:, None] + offs[None, :]
    root_h = math.sqrt(h)
    b = (_phillips_rhs(pts) @ w) / root_h
    u = (_phillips_bump(pts) @ w) / root_h
    return ProblemInstance("phillips", a, b, u, {"n": n, "quad_points": quad_points})


def gravity(n: int, depth: float = 0.25, a: float = 0.0, b: float = 1.0) -> ProblemInstance:
    """Gravity surveying: source on ``[0, 1]`` at depth ``depth``, surface on ``[a, b]``."""
    if n < 2:
        raise InvalidDimension(f"gravity needs n >= 2, got {n}")
    if not depth > 0:
        raise InvalidParameter(f"depth must be positive, got {depth}")
    if not b > a:
        raise InvalidParameter(f"surface interval must satisfy b > a, got [{a}, {b}]")
    idx = np.arange(1, n + 1, dtype=np.float64) - 0.5
    x = idx / n
    s = a + idx * ((b - a) / n)
    mat = (1.0 / n) * depth / (depth**2 + (s[:, None] - x[None, :]) ** 2) ** 1.5
    u = np.sin(math.pi * x) + 0.5 * np.sin(2.0 * math.pi * x)
    return ProblemInstance(
        "gravity", mat, mat @ u, u, {"n": n, "depth": float(depth), "a": float(a), "b": float(b)}
    )


PROBLEM_NAMES = ("shaw", "heat", "phillips", "gravity")

_PARAM_KEYS = {
    "shaw": {"preset", "a1", "c1", "x1", "a2", "c2", "x2"},
    "heat": {"kappa"},
    "phillips": {"quad_points"},
    "gravity": {"depth", "a", "b"},
}


def validate_request(name: str, n: int, params: dict | None = None) -> None:
    """Check ``generate(name, n, **params)`` preconditions without building anything."""
    params = dict(params or {})
    if name not in PROBLEM_NAMES:
        raise InvalidParameter(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}")
    unknown = set(params) - _PARAM_KEYS[name]
    if unknown:
        raise InvalidParameter(f"unknown {name} parameters: {sorted(unknown)}")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidDimension(f"n must be an integer, got {n!r}")
    if name == "shaw":
        if n < 2 or n % 2:
            raise InvalidDimension(f"shaw needs an even n >= 2, got {n}")
        preset = params.pop("preset", None)
        if preset is not None and preset not in SHAW_PRESETS:
            raise InvalidParameter(f"unknown shaw preset {preset!r}; choose from {sorted(SHAW_PRESETS)}")
        if preset is not None and params:
            raise InvalidParameter("give either a shaw preset or explicit source parameters, not both")
        ShawParams(**params)
    elif name == "heat":
        if n < 4:
            raise InvalidDimension(f"heat needs n >= 4, got {n}")
        if not params.get("kappa", 1.0) > 0:
            raise InvalidParameter(f"kappa must be positive, got {params['kappa']}")
    elif name == "phillips":
        if n < 4 or n % 4:
            raise InvalidDimension(f"phillips needs n >= 4 divisible by 4, got {n}")
        if int(params.get("quad_points", 8)) < 1:
            raise InvalidParameter("quad_points must be >= 1")
    else:
        if n < 2:
            raise InvalidDimension(f"gravity needs n >= 2, got {n}")
        if not params.get("depth", 0.25) > 0:
            raise InvalidParameter(f"depth must be positive, got {params['depth']}")
        if not params.get("b", 1.0) > params.get("a", 0.0):
            raise InvalidParameter("surface interval must satisfy b > a")


def generate(name: str, n: int, **params) -> ProblemInstance:
    """Dispatch by problem name; ``params`` are passed to the generator."""
    if name == "shaw":
        preset = params.pop("preset", None)
        if preset is not None:
            return shaw(n, preset)
        return shaw(n, ShawParams(**params) if params else None)
    generators = {"heat": heat, "phillips": phillips, "gravity": gravity}
    try:
        gen = generators[name]
    except KeyError:
        raise InvalidParameter(f"unknown problem {name!r}") from None
    try:
        return gen(n, **params)
    except TypeError as err:
        raise InvalidParameter(f"bad parameters for {name}: {err}") from None


def save_instance(inst: ProblemInstance, directory, l_op=None, extra: dict | None = None) -> list[Path]:
    """Dump ``A``, ``b``, ``u*`` (and ``L`` when given) plus a one-line JSON sidecar.

    ``extra`` entries are merged into the metadata line after the fixed keys.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [
        dump_array(directory / "A.txt", inst.a),
        dump_array(directory / "b.txt", inst.b),
        dump_array(directory / "u_star.txt", inst.u_star),
    ]
    if l_op is not None:
        paths.append(dump_array(directory / "L.txt", l_op))
    meta = {
        "name": inst.name,
        "n": inst.n,
        "params": inst.params,
        "generator_version": GENERATOR_VERSION,
        **(extra or {}),
    }
    meta_path = directory / "meta.json"
    meta_path.write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
    paths.append(meta_path)
    return paths
