"""Kubo-Ando connections built from their representing functions.

A connection is evaluated as ``A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}``. When
``A`` is singular (smallest eigenvalue below ``eps``) it is replaced by
``A + eps I``; by continuity from above this converges to the true value as
``eps -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .linalg import (
    InputError,
    as_hermitian,
    eig_hermitian,
    loewner_margin,
    operator_norm,
    random_psd,
    apply_function,
)

BUILTIN_KINDS = ("power", "arithmetic", "geometric", "harmonic")
SUPERMULT_TOL = 1e-12
DEFAULT_GRID = np.geomspace(1e-3, 1e3, 64)
# dyadic probe used by the inequality checkers; contains 1/2, 1 and 2
PROBE_GRID = 2.0 ** np.arange(-10, 11)


@dataclass(frozen=True)
class RepresentingFunction:
    """Scalar function ``f`` on ``[0, inf)`` with ``f(A) = I sigma A``.

    Built-in kinds are operator monotone. For ``custom`` only nonnegativity
    and scalar monotonicity on a grid are checked, so operator monotonicity
    remains an unverified hypothesis.
    """

    kind: str
    alpha: float = 0.5
    func: Callable | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in BUILTIN_KINDS + ("custom",):
            raise InputError(f"unknown representing function kind {self.kind!r}")
        if self.kind == "power" and not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"power mean needs alpha in [0, 1], got {self.alpha}")
        if self.kind == "custom" and self.func is None:
            raise InputError("custom representing function needs a callable")
        grid = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 1023)])
        vals = self(grid)
        if np.any(vals < -1e-12) or not np.all(np.isfinite(vals)):
            raise InputError(f"representing function {self.name} is not nonnegative on [0, inf)")
        if self.kind != "custom" and np.any(np.diff(vals) < -1e-12):
            raise InputError(f"representing function {self.name} is not monotone")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "power":
            if self.alpha == 0.0:
                return np.ones_like(x)
            if self.alpha == 1.0:
                return x.copy()
            return np.power(x, self.alpha)
        if k == "geometric":
            return np.sqrt(x)
        if k == "arithmetic":
            return (1.0 + x) / 2.0
        if k == "harmonic":
            return 2.0 * x / (1.0 + x)
        return np.asarray(self.func(x), dtype=float)

    @property
    def name(self) -> str:
        if self.kind == "power":
            return f"power({self.alpha:g})"
        return self.label or self.kind

    @property
    def monotone_verified(self) -> bool:
        return self.kind != "custom"

    def grid_monotone(self, grid: Sequence[float] | None = None) -> bool:
        vals = self(np.sort(np.asarray(DEFAULT_GRID if grid is None else grid, dtype=float)))
        return bool(np.all(np.diff(vals) >= -1e-12))


ARITHMETIC = RepresentingFunction("arithmetic")
GEOMETRIC = RepresentingFunction("geometric")
HARMONIC = RepresentingFunction("harmonic")


def power_mean(alpha: float) -> RepresentingFunction:
    return RepresentingFunction("power", alpha=float(alpha))


@dataclass(frozen=True)
class ConnectionSpec:
    f: RepresentingFunction
    eps: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.eps <= 1e-6:
            raise InputError(f"regularization eps must lie in (0, 1e-6], got {self.eps}")

    @property
    def is_mean(self) -> bool:
        return abs(float(self.f(1.0)) - 1.0) <= 1e-12

    @property
    def name(self) -> str:
        return self.f.name

    def to_json(self) -> dict:
        if self.f.kind == "custom":
            raise InputError("custom connections are not serializable")
        out = {"kind": self.f.kind, "eps": self.eps}
        if self.f.kind == "power":
            out["alpha"] = self.f.alpha
        return out


def connection(f: RepresentingFunction | str, eps: float = 1e-10) -> ConnectionSpec:
    if isinstance(f, str):
        f = RepresentingFunction(f)
    return ConnectionSpec(f, eps)


def connection_from_json(obj) -> ConnectionSpec:
    if isinstance(obj, str):
        return connection(obj)
    kind = obj.get("kind")
    if kind is None:
        raise InputError("connection JSON needs a 'kind'")
    f = RepresentingFunction(kind, alpha=float(obj.get("alpha", 0.5)))
    return ConnectionSpec(f, float(obj.get("eps", 1e-10)))


def _check_psd(M: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    w, U = eig_hermitian(M)
    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
        raise InputError(f"{name} is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return w, U


def connection_apply(sigma: ConnectionSpec, A, B, shortcut: bool = True) -> np.ndarray:
    """``A sigma B`` for positive semidefinite ``A`` and ``B``.

    With ``shortcut`` a mean applied to bitwise-identical arguments returns
    ``A`` itself (the fixed-point property), so reductions to the plain
    tensor inequality are exact.
    """
    A = as_hermitian(A)
    B = as_hermitian(B)
    if A.shape != B.shape:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    w, U = _check_psd(A, "A")
    _check_psd(B, "B")
    if shortcut and sigma.is_mean and np.array_equal(A, B):
        return A
    if w[0] < sigma.eps:
        w = w + sigma.eps
    r = np.sqrt(w)
    half = (U * r) @ U.conj().T
    inv_half = (U / r) @ U.conj().T
    C = inv_half @ B @ inv_half
    C = 0.5 * (C + C.conj().T)
    mu, V = eig_hermitian(C)
    fC = (V * sigma.f(np.clip(mu, 0.0, None))) @ V.conj().T
    out = half @ fC @ half
    return as_hermitian(0.5 * (out + out.conj().T))


def scalar_connection(sigma: ConnectionSpec, a: float, b: float) -> float:
    """Induced connection on ``[0, inf)``: ``a f(b/a)``, with ``a`` shifted by ``eps`` when tiny."""
    if a < 0 or b < 0:
        raise InputError("scalar connection needs nonnegative arguments")
    if a < sigma.eps:
        a = a + sigma.eps
    return float(a * sigma.f(b / a))


class Violation(NamedTuple):
    x: float
    y: float
    f_xy: float
    f_x_f_y: float


def check_super_multiplicative(f: RepresentingFunction | Callable,
                               grid: Sequence[float] | None = None,
                               tol: float = SUPERMULT_TOL) -> list[Violation]:
    """All grid pairs ``x <= y`` with ``f(xy) < f(x) f(y) - tol * max(1, f(x) f(y))``.

    Violations are ordered by closeness to ``(1, 1)`` on a log scale, then by
    ``(x, y)``, so the first entry is the most elementary counterexample.
    """
    g = np.unique(np.asarray(DEFAULT_GRID if grid is None else grid, dtype=float))
    if np.any(g <= 0):
        raise InputError("super-multiplicativity grid must be positive")
    fx = np.asarray(f(g), dtype=float)
    X, Y = np.meshgrid(g, g, indexing="ij")
    FXY = np.asarray(f(X * Y), dtype=float)
    prod = np.outer(fx, fx)
    bad = (FXY < prod - tol * np.maximum(1.0, np.abs(prod))) & (X <= Y)
    out = [Violation(float(X[i, j]), float(Y[i, j]), float(FXY[i, j]), float(prod[i, j]))
           for i, j in zip(*np.nonzero(bad))]
    out.sort(key=lambda v: (max(abs(math.log(v.x)), abs(math.log(v.y))), v.x, v.y))
    return out


@dataclass
class AxiomReport:
    connection: str
    trials: int
    dim: int
    seed: int
    margins: dict[str, float]
    worst_seed: dict[str, int]
    congruence_error: float
    representing_error: float
    unverified: bool

    def holds(self, margin_tol: float = 1e-9, congruence_tol: float = 1e-8,
              identity_tol: float = 1e-10) -> bool:
        return (all(m >= -margin_tol for m in self.margins.values())
                and self.congruence_error <= congruence_tol
                and self.representing_error <= identity_tol)

    def to_json(self) -> dict:
        return {"connection": self.connection, "trials": self.trials, "dim": self.dim,
                "seed": self.seed, "margins": self.margins, "worst_seed": self.worst_seed,
                "congruence_error": self.congruence_error,
                "representing_error": self.representing_error,
                "unverified_hypothesis": self.unverified, "pass": self.holds()}


def _random_pd(d: int, rng: np.random.Generator) -> np.ndarray:
    return as_hermitian(random_psd(d, rng.integers(2**63)) + rng.uniform(0.05, 1.0) * np.eye(d))


def check_connection_axioms(sigma: ConnectionSpec, seed: int, trials: int, d: int) -> AxiomReport:
    """Seeded property run of monotonicity, transformer inequality, congruence
    invariance, superadditivity, the fixed-point property (means only) and
    ``f(A) = I sigma A``.

    Trial ``i`` uses the seed ``seed + i``; margins are minima over trials.
    """
    if trials < 1:
        raise InputError("need at least one trial")
    if not 1 <= d <= 8:
        raise InputError("dimension must be in [1, 8]")

    def op(X, Y):
        return connection_apply(sigma, X, Y, shortcut=False)

    names = ["monotonicity", "transformer", "superadditivity"]
    if sigma.is_mean:
        names.append("fixed_point")
    margins = {k: math.inf for k in names}
    worst = {k: seed for k in names}
    cong = 0.0
    ident = 0.0
    I = np.eye(d)

    def record(name, value, s):
        if value < margins[name]:
            margins[name] = value
            worst[name] = s

    for i in range(trials):
        s = seed + i
        rng = np.random.default_rng(s)
        A, B, C, D = (_random_pd(d, rng) for _ in range(4))
        P = random_psd(d, rng.integers(2**63)) * rng.uniform(0, 1)
        Q = random_psd(d, rng.integers(2**63)) * rng.uniform(0, 1)
        AB = op(A, B)
        record("monotonicity", loewner_margin(AB, op(A + P, B + Q)), s)
        CAC, CBC = C @ A @ C, C @ B @ C
        lhs = C @ AB @ C
        rhs = op(CAC, CBC)
        record("transformer", loewner_margin(lhs, rhs), s)
        cong = max(cong, operator_norm(rhs - lhs) / (1.0 + operator_norm(rhs)))
        record("superadditivity", loewner_margin(op(A, C) + op(B, D), op(A + B, C + D)), s)
        if sigma.is_mean:
            AA = op(A, A)
            record("fixed_point", -operator_norm(AA - A), s)
        ident = max(ident, operator_norm(apply_function(A, sigma.f) - op(I, A)))
    return AxiomReport(sigma.name, trials, d, seed, margins, worst, cong, ident,
                       not sigma.f.monotone_verified)
