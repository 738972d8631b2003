"""Operator fields over a measured parameter space and their integrals.

A field lives either on a finite set ``{0, ..., n-1}`` with the counting
measure, or on a compact interval with a density against Lebesgue measure.
Interval integrals are composite midpoint or trapezoid sums over a uniform
partition. Summation always runs left to right over node index so results
are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import scalar
from .linalg import (
    InputError,
    SpectrumWindow,
    apply_function,
    as_hermitian,
    eigvalsh,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
    psd_sqrt,
    MAX_DIM,
)
from .scalar import ScalarFunction


@dataclass(frozen=True)
class Discrete:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("discrete domain needs at least one node")


@dataclass(frozen=True)
class Interval:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise InputError(f"interval needs alpha < beta, got [{self.alpha}, {self.beta}]")


class OperatorField:
    """A deterministic family ``t -> A_t`` of Hermitian matrices of one dimension.

    Use the ``discrete``, ``interval`` and ``constant`` constructors; ``map``
    builds ``t -> f(A_t)`` through the functional calculus.
    """

    def __init__(self, domain, sampler: Callable[[float], np.ndarray], dim: int,
                 spec: dict | None = None):
        if not 1 <= dim <= MAX_DIM:
            raise InputError(f"field dimension must be in [1, {MAX_DIM}], got {dim}")
        self.domain = domain
        self.dim = dim
        self._sampler = sampler
        self._spec = spec

    @classmethod
    def discrete(cls, samples: Sequence) -> OperatorField:
        mats = tuple(as_hermitian(M) for M in samples)
        if not mats:
            raise InputError("discrete field needs at least one sample")
        dim = mats[0].shape[0]
        if any(M.shape[0] != dim for M in mats):
            raise InputError("field samples must share one dimension")
        spec = {"domain": {"kind": "discrete", "n": len(mats)},
                "samples": [matrix_to_json(M) for M in mats]}
        return cls(Discrete(len(mats)), lambda t: mats[int(t)], dim, spec)

    @classmethod
    def interval(cls, alpha: float, beta: float,
                 terms: Sequence[tuple[ScalarFunction, object]]) -> OperatorField:
        """``A_t = sum_k g_k(t) M_k`` on ``[alpha, beta]``."""
        return cls._from_terms(Interval(float(alpha), float(beta)), terms)

    @classmethod
    def constant(cls, M, domain) -> OperatorField:
        M = as_hermitian(M)
        return cls(domain, lambda t: M, M.shape[0],
                   cls._terms_spec(domain, [(scalar.const(1.0), M)]))

    @classmethod
    def _from_terms(cls, domain, terms) -> OperatorField:
        terms = tuple((g, as_hermitian(M)) for g, M in terms)
        if not terms:
            raise InputError("field needs at least one term")
        dim = terms[0][1].shape[0]
        if any(M.shape[0] != dim for _, M in terms):
            raise InputError("field terms must share one dimension")

        def sample(t):
            out = np.zeros((dim, dim), dtype=complex)
            for g, M in terms:
                out = out + float(g(t)) * M
            return out

        return cls(domain, sample, dim, cls._terms_spec(domain, terms))

    @staticmethod
    def _terms_spec(domain, terms) -> dict | None:
        try:
            return {"domain": domain_to_json(domain),
                    "terms": [{"g": g.to_json(), "M": matrix_to_json(M)} for g, M in terms]}
        except InputError:
            return None

    def __call__(self, t) -> np.ndarray:
        return self._sampler(t)

    def map(self, f: Callable, domain: tuple[float, float] | None = None) -> OperatorField:
        """Pointwise functional calculus ``t -> f(A_t)``."""
        if f == scalar.IDENTITY and domain is None:
            return self
        return OperatorField(self.domain, lambda t: apply_function(self(t), f, domain),
                             self.dim)

    def to_json(self) -> dict:
        if self._spec is None:
            raise InputError("derived fields have no JSON form")
        return self._spec


def domain_to_json(domain) -> dict:
    if isinstance(domain, Discrete):
        return {"kind": "discrete", "n": domain.n}
    return {"kind": "interval", "alpha": domain.alpha, "beta": domain.beta}


def domain_from_json(obj) -> Discrete | Interval:
    kind = obj.get("kind")
    if kind == "discrete":
        return Discrete(int(obj["n"]))
    if kind == "interval":
        return Interval(float(obj["alpha"]), float(obj["beta"]))
    raise InputError(f"unknown domain kind {kind!r}")


def field_from_json(obj) -> OperatorField:
    if "samples" in obj:
        field = OperatorField.discrete([matrix_from_json(m) for m in obj["samples"]])
        if "domain" in obj and domain_from_json(obj["domain"]) != field.domain:
            raise InputError("field 'domain' disagrees with number of samples")
        return field
    if "domain" not in obj or "terms" not in obj:
        raise InputError("field JSON needs 'samples' or 'domain' plus 'terms'")
    domain = domain_from_json(obj["domain"])
    terms = [(scalar.from_json(t["g"]), matrix_from_json(t["M"])) for t in obj["terms"]]
    return OperatorField._from_terms(domain, terms)


@dataclass(frozen=True)
class MeasureSpec:
    """Counting measure on a discrete domain, or ``w(t) dt`` on an interval."""

    kind: str = "counting"
    density: ScalarFunction = scalar.const(1.0)
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in ("counting", "lebesgue"):
            raise InputError(f"unknown measure kind {self.kind!r}")

    def to_json(self) -> dict:
        if self.kind == "counting":
            out = {"kind": "counting"}
        else:
            out = {"kind": "lebesgue", "density": self.density.to_json()}
        out["normalized"] = self.normalized
        return out


COUNTING = MeasureSpec("counting")
LEBESGUE = MeasureSpec("lebesgue")


def measure_from_json(obj) -> MeasureSpec:
    kind = obj.get("kind")
    density = scalar.from_json(obj["density"]) if "density" in obj else scalar.const(1.0)
    return MeasureSpec(kind, density, bool(obj.get("normalized", False)))


@dataclass(frozen=True)
class QuadratureRule:
    scheme: str = "midpoint"
    nodes: int = 64

    def __post_init__(self):
        if self.scheme not in ("midpoint", "trapezoid"):
            raise InputError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes < 1:
            raise InputError("quadrature needs at least one node")

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "nodes": self.nodes}


def quadrature_from_json(obj) -> QuadratureRule:
    return QuadratureRule(obj.get("scheme", "midpoint"), int(obj.get("nodes", 64)))


def sample_points(domain, rule: QuadratureRule = QuadratureRule()) -> np.ndarray:
    if isinstance(domain, Discrete):
        return np.arange(domain.n)
    N = rule.nodes
    h = (domain.beta - domain.alpha) / N
    if rule.scheme == "midpoint":
        return domain.alpha + (np.arange(N) + 0.5) * h
    return domain.alpha + np.arange(N + 1) * h


def quadrature_points(domain, measure: MeasureSpec,
                      rule: QuadratureRule = QuadratureRule()) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights so that ``sum_i w_i F(t_i)`` approximates ``int F dmu``.

    With ``measure.normalized`` the weights are divided by the total mass as
    computed by the same rule, so a constant field integrates to itself.
    """
    ts = sample_points(domain, rule)
    if isinstance(domain, Discrete):
        if measure.kind != "counting":
            raise InputError("discrete fields need the counting measure")
        ws = np.ones(domain.n)
    else:
        if measure.kind != "lebesgue":
            raise InputError("interval fields need a Lebesgue-density measure")
        N = rule.nodes
        h = (domain.beta - domain.alpha) / N
        dens = np.asarray(measure.density(ts), dtype=float) * np.ones_like(ts)
        if np.any(dens < 0) or not np.all(np.isfinite(dens)):
            raise InputError("measure density must be finite and nonnegative")
        ws = dens * h
        if rule.scheme == "trapezoid":
            ws[0] *= 0.5
            ws[-1] *= 0.5
    mass = float(np.sum(ws))
    if not mass > 0:
        raise InputError("measure has zero total mass")
    if measure.normalized:
        ws = ws / mass
    return ts, ws


def total_mass(domain, measure: MeasureSpec, rule: QuadratureRule = QuadratureRule()) -> float:
    return float(np.sum(quadrature_points(domain, measure, rule)[1]))


def _check_compatible(*fields: OperatorField):
    dom, dim = fields[0].domain, fields[0].dim
    for F in fields[1:]:
        if F.domain != dom:
            raise InputError(f"fields live on different domains: {dom} vs {F.domain}")
        if F.dim != dim:
            raise InputError(f"fields have different dimensions: {dim} vs {F.dim}")


def bochner_integral(F: OperatorField, measure: MeasureSpec,
                     rule: QuadratureRule = QuadratureRule()) -> np.ndarray:
    ts, ws = quadrature_points(F.domain, measure, rule)
    out = np.zeros((F.dim, F.dim), dtype=complex)
    for t, w in zip(ts, ws):
        out = out + w * F(t)
    return as_hermitian(out)


def weighted_integral(W: OperatorField, M: OperatorField, measure: MeasureSpec,
                      rule: QuadratureRule = QuadratureRule()) -> np.ndarray:
    """``int W_t^{1/2} M_t W_t^{1/2} dmu(t)``; every weight sample must be PSD."""
    _check_compatible(W, M)
    ts, ws = quadrature_points(W.domain, measure, rule)
    out = np.zeros((W.dim, W.dim), dtype=complex)
    for t, w in zip(ts, ws):
        try:
            R = psd_sqrt(W(t))
        except InputError as exc:
            raise InputError(f"weight at t={t:g} is not PSD: {exc}") from exc
        out = out + w * (R @ M(t) @ R)
    return as_hermitian(out)


def weighted_transform_integral(W: OperatorField, A: OperatorField, f: Callable,
                                measure: MeasureSpec, rule: QuadratureRule = QuadratureRule(),
                                domain: tuple[float, float] | None = None) -> np.ndarray:
    """``int W_t^{1/2} f(A_t) W_t^{1/2} dmu(t)``."""
    return weighted_integral(W, A.map(f, domain), measure, rule)


def field_sup_norm(F: OperatorField, rule: QuadratureRule = QuadratureRule()) -> float:
    """Largest operator norm over sample nodes (a lower bound of the true sup)."""
    return max(operator_norm(F(t)) for t in sample_points(F.domain, rule))


class WindowCheck(NamedTuple):
    ok: bool
    worst_t: float
    worst_eigenvalue: float
    excess: float


def check_spectrum_window(F: OperatorField, window: SpectrumWindow,
                          rule: QuadratureRule = QuadratureRule(),
                          tol: float = 1e-10) -> WindowCheck:
    """Sample ``Sp(A_t)`` at the nodes of ``rule`` against ``[a, b]``.

    ``excess`` is the largest distance outside the window (negative when all
    eigenvalues are strictly inside); the worst node and eigenvalue go with it.
    """
    worst = (-np.inf, np.nan, np.nan)
    for t in sample_points(F.domain, rule):
        w = eigvalsh(F(t))
        for lam in (w[0], w[-1]):
            ex = max(window.a - lam, lam - window.b)
            if ex > worst[0]:
                worst = (ex, float(t), float(lam))
    return WindowCheck(bool(worst[0] <= tol), worst[1], worst[2], float(worst[0]))


def check_psd_field(W: OperatorField, rule: QuadratureRule = QuadratureRule(),
                    tol: float = 1e-10) -> WindowCheck:
    """Positivity of every sampled weight; ``excess`` is ``-lambda_min`` at the worst node."""
    worst = (-np.inf, np.nan, np.nan)
    for t in sample_points(W.domain, rule):
        w = eigvalsh(W(t))
        if -w[0] > worst[0]:
            worst = (-w[0], float(t), float(w[0]))
    scale = 1.0 + field_sup_norm(W, rule)
    return WindowCheck(bool(worst[0] <= tol * scale), worst[1], worst[2], float(worst[0]))


class ProbeRow(NamedTuple):
    nodes: int
    error: float
    ratio: float


def convergence_probe(F: OperatorField, measure: MeasureSpec, scheme: str,
                      node_counts: Sequence[int], reference=None) -> list[ProbeRow]:
    """Errors ``||I_N - I_ref||`` for each ``N``; ``ratio`` is the previous error over this one.

    Without an explicit ``reference`` the rule is rerun at ``8 * max(N)`` nodes.
    """
    if not isinstance(F.domain, Interval):
        raise InputError("convergence probes need an interval domain")
    if reference is None:
        reference = bochner_integral(F, measure, QuadratureRule(scheme, 8 * max(node_counts)))
    rows = []
    prev = None
    for N in node_counts:
        err = operator_norm(bochner_integral(F, measure, QuadratureRule(scheme, N)) - reference)
        ratio = prev / err if prev is not None and err > 0 else float("nan")
        rows.append(ProbeRow(int(N), err, ratio))
        prev = err
    return rows
