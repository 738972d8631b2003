"""Checkers for the Kantorovich-type inequalities.

Each checker builds the two sides as Hermitian matrices (or scalars) and
reports the Loewner margin ``lambda_min(RHS - LHS)``. Hypotheses are checked
and recorded as flags rather than raised, so inputs that break a hypothesis
can still be run to see what happens.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import scalar
from .fields import (
    COUNTING,
    Discrete,
    MeasureSpec,
    OperatorField,
    QuadratureRule,
    bochner_integral,
    check_psd_field,
    check_spectrum_window,
    quadrature_points,
    weighted_integral,
)
from .linalg import (
    DomainError,
    InputError,
    SpectrumWindow,
    apply_function,
    as_hermitian,
    eigvalsh,
    hadamard,
    inverse,
    kron,
    operator_norm,
    psd_sqrt,
    sym_tensor,
    tensor_power2,
)
from .means import (
    PROBE_GRID,
    ConnectionSpec,
    RepresentingFunction,
    check_super_multiplicative,
    connection_apply,
    scalar_connection,
)
from .scalar import IDENTITY, RECIPROCAL, ScalarFunction

DEFAULT_TOL = 1e-8
PRECONDITION_GRID = 256


def pass_tolerance() -> float:
    """Relative pass tolerance; the ``OPLAB_TOL`` environment variable overrides it."""
    raw = os.environ.get("OPLAB_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise InputError(f"OPLAB_TOL must be a number, got {raw!r}") from exc
    if not tol >= 0:
        raise InputError("OPLAB_TOL must be nonnegative")
    return tol


@dataclass(frozen=True)
class HypothesisFlag:
    name: str
    status: str  # "ok", "failed" or "unverified"
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def _flag(name: str, ok: bool, detail: str = "") -> HypothesisFlag:
    return HypothesisFlag(name, "ok" if ok else "failed", detail)


@dataclass
class VerificationReport:
    case_id: str
    constant_used: float
    lhs_spectrum: list[float]
    rhs_spectrum: list[float]
    margin: float
    passed: bool
    hypothesis_flags: list[HypothesisFlag] = field(default_factory=list)
    seed: int | None = None

    @property
    def hypotheses_ok(self) -> bool:
        return all(f.status != "failed" for f in self.hypothesis_flags)

    def failed_flags(self) -> list[HypothesisFlag]:
        return [f for f in self.hypothesis_flags if f.status == "failed"]

    def to_json(self) -> dict:
        return {
            "case_id": self.case_id,
            "constant": self.constant_used,
            "margin": self.margin,
            "pass": self.passed,
            "lhs_spectrum": list(self.lhs_spectrum),
            "rhs_spectrum": list(self.rhs_spectrum),
            "hypothesis_flags": [f.to_json() for f in self.hypothesis_flags],
            "seed": self.seed,
        }


def _passes(margin: float, rhs_norm: float) -> bool:
    return bool(math.isfinite(margin) and margin >= -pass_tolerance() * (1.0 + rhs_norm))


def matrix_report(case_id: str, constant: float, L, R,
                  flags: Sequence[HypothesisFlag] = ()) -> VerificationReport:
    L = as_hermitian(L)
    R = as_hermitian(R)
    margin = float(eigvalsh(R - L)[0])
    lhs = eigvalsh(L)
    rhs = eigvalsh(R)
    rhs_norm = float(max(abs(rhs[0]), abs(rhs[-1])))
    return VerificationReport(case_id, float(constant), lhs.tolist(), rhs.tolist(), margin,
                              _passes(margin, rhs_norm), list(flags))


def scalar_report(case_id: str, constant: float, lhs: float, rhs: float,
                  flags: Sequence[HypothesisFlag] = ()) -> VerificationReport:
    margin = float(rhs - lhs)
    return VerificationReport(case_id, float(constant), [float(lhs)], [float(rhs)], margin,
                              _passes(margin, abs(rhs)), list(flags))


def failed_report(case_id: str, constant: float, flags: Sequence[HypothesisFlag],
                  error: Exception) -> VerificationReport:
    flags = list(flags) + [_flag("evaluation", False, str(error))]
    return VerificationReport(case_id, float(constant), [], [], float("nan"), False, flags)


def _grid(window: SpectrumWindow, n: int = PRECONDITION_GRID) -> np.ndarray:
    return np.linspace(window.a, window.b, n)


def tensor_constant(window: SpectrumWindow) -> float:
    return window.tensor_constant


@dataclass(frozen=True)
class KantorovichCase:
    """One instance of the master inequality

    ``int W^{1/2} f_left(A) W^{1/2} (x)_s int W^{1/2} f_right(A) W^{1/2}
    <= constant(a, b) (int W)^{(x)2}``.
    """

    case_id: str
    f_left: Callable
    f_right: Callable
    constant: Callable[[SpectrumWindow], float] = tensor_constant
    precondition: Callable[..., list[HypothesisFlag]] | None = None


def tensor_kantorovich_case(case_id: str = "THM32") -> KantorovichCase:
    return KantorovichCase(case_id, IDENTITY, RECIPROCAL)


def _reflect(f) -> Callable:
    if isinstance(f, ScalarFunction):
        return f.reflect()
    return scalar.custom(lambda x: f(1.0 / np.asarray(x, dtype=float)), "f(1/x)")


def _reflected_precondition(f_left, f_right, window: SpectrumWindow) -> list[HypothesisFlag]:
    x = _grid(window)
    with np.errstate(all="ignore"):
        fx = np.asarray(f_left(x), dtype=float)
        finv = np.asarray(f_left(1.0 / x), dtype=float)
    prod = fx * finv
    ok_prod = bool(np.all(np.isfinite(prod)) and np.all(prod <= 1.0 + 1e-12))
    detail = "" if ok_prod else f"max f(x)f(1/x) = {np.nanmax(prod):.6g}"
    tol = 1e-12
    in_window = bool(np.all((fx >= window.a - tol) & (fx <= window.b + tol)))
    in_reciprocal = bool(np.all((fx >= 1 / window.b - tol) & (fx <= 1 / window.a + tol)))
    return [
        _flag("f(x)f(1/x)<=1", ok_prod, detail),
        _flag("f range", in_window or in_reciprocal,
              "" if in_window or in_reciprocal else
              f"f([a,b]) = [{fx.min():.6g}, {fx.max():.6g}] fits neither window"),
    ]


def reflected_function_case(f, case_id: str = "THM51") -> KantorovichCase:
    return KantorovichCase(case_id, f, _reflect(f), precondition=_reflected_precondition)


def supermult_flag(f, grid=PROBE_GRID) -> HypothesisFlag:
    bad = check_super_multiplicative(f, grid)
    if not bad:
        return _flag("super-multiplicative", True)
    v = bad[0]
    return _flag("super-multiplicative", False,
                 f"super-multiplicativity violated at ({v.x:g},{v.y:g}): "
                 f"f(xy)={v.f_xy:.6g} < f(x)f(y)={v.f_x_f_y:.6g} ({len(bad)} grid pairs)")


def _mean_flags(f: RepresentingFunction) -> list[HypothesisFlag]:
    flags = [supermult_flag(f),
             _flag("mean f(1)=1", abs(float(f(1.0)) - 1.0) <= 1e-12)]
    if f.monotone_verified:
        flags.append(_flag("operator monotone", True, f"built-in {f.name}"))
    else:
        flags.append(HypothesisFlag("operator monotone", "unverified",
                                    "custom function; only grid monotonicity checked"
                                    if f.grid_monotone() else "not even grid monotone"))
    return flags


def _as_scalar(f: RepresentingFunction):
    if f.kind == "power":
        return scalar.power(f.alpha)
    if f.kind == "geometric":
        return scalar.power(0.5)
    return scalar.custom(f, f.name)


def mean_function_case(f: RepresentingFunction, case_id: str = "THM54") -> KantorovichCase:
    def pre(f_left, f_right, window):
        return [_flag("1 in [a,b]", window.a <= 1.0 <= window.b)] + _mean_flags(f)

    g = _as_scalar(f)
    return KantorovichCase(case_id, g, _reflect(g), precondition=pre)


def kantorovich_engine(case: KantorovichCase, A: OperatorField, W: OperatorField,
                       window: SpectrumWindow, measure: MeasureSpec = COUNTING,
                       rule: QuadratureRule = QuadratureRule(),
                       extra_flags: Sequence[HypothesisFlag] = ()) -> VerificationReport:
    """Evaluate one catalog case; the constant comes from the declared window."""
    constant = case.constant(window)
    flags = list(extra_flags)
    chk = check_spectrum_window(A, window, rule)
    flags.append(_flag("spectrum in window", chk.ok,
                       "" if chk.ok else
                       f"eigenvalue {chk.worst_eigenvalue:.6g} at t={chk.worst_t:g}"))
    psd = check_psd_field(W, rule)
    flags.append(_flag("weights PSD", psd.ok,
                       "" if psd.ok else f"min eigenvalue {psd.worst_eigenvalue:.3e} at t={psd.worst_t:g}"))
    if case.precondition is not None:
        flags.extend(case.precondition(case.f_left, case.f_right, window))
    try:
        X = weighted_integral(W, A.map(case.f_left), measure, rule)
        Y = weighted_integral(W, A.map(case.f_right), measure, rule)
        L = sym_tensor(X, Y)
        R = constant * tensor_power2(bochner_integral(W, measure, rule))
    except (DomainError, InputError) as exc:
        return failed_report(case.case_id, constant, flags, exc)
    return matrix_report(case.case_id, constant, L, R, flags)


def _discrete_flag(A: OperatorField, measure: MeasureSpec) -> HypothesisFlag:
    ok = isinstance(A.domain, Discrete) and measure.kind == "counting"
    return _flag("discrete counting measure", ok)


def scalar_weight_field(A: OperatorField, w) -> OperatorField:
    """``W_t = w(t) I``; ``w`` is a scalar function or, on discrete domains, a list."""
    I = np.eye(A.dim)
    if callable(w):
        return OperatorField(A.domain, lambda t: float(w(t)) * I, A.dim)
    w = [float(x) for x in w]
    if not isinstance(A.domain, Discrete) or len(w) != A.domain.n:
        raise InputError("weight list must match the discrete domain")
    return OperatorField.discrete([x * I for x in w])


def verify_tensor_kantorovich(A, W, window, measure=COUNTING, rule=QuadratureRule(), case_id="THM32"):
    extra = [_discrete_flag(A, measure)] if case_id in ("COR33", "COR35", "EQ36") else []
    return kantorovich_engine(tensor_kantorovich_case(case_id), A, W, window, measure, rule, extra)


def verify_scalar_weights(A, w, window, measure=COUNTING, rule=QuadratureRule(), case_id="COR34"):
    W = scalar_weight_field(A, w)
    if callable(w):
        ts = quadrature_points(A.domain, measure, rule)[0]
        ok = bool(np.all(np.asarray(w(ts), dtype=float) >= 0))
    else:
        ok = all(x >= 0 for x in w)
    extra = [_flag("scalar weights nonnegative", ok)]
    if case_id == "COR35":
        extra.append(_discrete_flag(A, measure))
    return kantorovich_engine(tensor_kantorovich_case(case_id), A, W, window, measure, rule, extra)


def verify_uniform_weights(A: OperatorField, window: SpectrumWindow) -> VerificationReport:
    """Uniform weights ``1/n``, compared through the symmetrized tensor product."""
    if not isinstance(A.domain, Discrete):
        raise InputError("EQ36 needs a discrete field")
    n = A.domain.n
    return verify_scalar_weights(A, [1.0 / n] * n, window, COUNTING, case_id="EQ36")


def verify_reflected_function(f, A, W, window, measure=COUNTING, rule=QuadratureRule(), case_id="THM51"):
    return kantorovich_engine(reflected_function_case(f, case_id), A, W, window, measure, rule)


def _nonneg_flag(g, window) -> HypothesisFlag:
    vals = np.asarray(g(_grid(window)), dtype=float)
    return _flag("g >= 0 on [a,b]", bool(np.all(vals >= 0)),
                 "" if np.all(vals >= 0) else f"min g = {vals.min():.6g}")


def verify_function_weights(f, g, A, window, measure=COUNTING, rule=QuadratureRule()):
    W = A.map(g)
    return kantorovich_engine(reflected_function_case(f, "COR52"), A, W, window, measure, rule,
                              [_nonneg_flag(g, window)])


def verify_power_weights(lam: float, A, window, measure=COUNTING, rule=QuadratureRule(),
                 case_id="COR53"):
    W = A.map(scalar.power(lam))
    extra = []
    if case_id == "GRUSS_TENSOR":
        extra.append(_flag("lambda = 1", lam == 1.0))
        extra.append(_flag("normalized measure", measure.normalized))
    return kantorovich_engine(tensor_kantorovich_case(case_id), A, W, window, measure, rule, extra)


def verify_gruss_tensor(A, window, measure, rule=QuadratureRule()):
    return verify_power_weights(1.0, A, window, measure, rule, case_id="GRUSS_TENSOR")


def verify_representing_function(f: RepresentingFunction, A, W, window, measure=COUNTING,
                 rule=QuadratureRule()):
    return kantorovich_engine(mean_function_case(f), A, W, window, measure, rule)


def _power_pair_flags(alpha, window):
    return [_flag("1 in [a,b]", window.a <= 1.0 <= window.b),
            _flag("alpha in [-1,1]", -1.0 <= alpha <= 1.0)]


def verify_power_pair(alpha: float, g, A, window, measure=COUNTING, rule=QuadratureRule()):
    f = scalar.power(alpha)
    case = KantorovichCase("COR55", f, f.reflect())
    return kantorovich_engine(case, A, A.map(g), window, measure, rule,
                              _power_pair_flags(alpha, window) + [_nonneg_flag(g, window)])


def verify_shifted_powers(lam: float, alpha: float, A, window, measure=COUNTING,
                       rule=QuadratureRule()):
    f = scalar.power(alpha)
    case = KantorovichCase("POWER_FINAL", f, f.reflect())
    return kantorovich_engine(case, A, A.map(scalar.power(lam)), window, measure, rule,
                              _power_pair_flags(alpha, window))


def verify_mean_kantorovich(A: OperatorField, B: OperatorField, W: OperatorField,
                            sigma: ConnectionSpec, window: SpectrumWindow,
                            measure: MeasureSpec = COUNTING,
                            rule: QuadratureRule = QuadratureRule(),
                            case_id: str = "THM45") -> VerificationReport:
    """Tensor Kantorovich inequality with ``A_t sigma B_t`` in place of ``A_t``."""
    constant = window.tensor_constant
    flags = []
    for name, F in (("A", A), ("B", B)):
        chk = check_spectrum_window(F, window, rule)
        flags.append(_flag(f"spectrum of {name} in window", chk.ok,
                           "" if chk.ok else
                           f"eigenvalue {chk.worst_eigenvalue:.6g} at t={chk.worst_t:g}"))
    psd = check_psd_field(W, rule)
    flags.append(_flag("weights PSD", psd.ok))
    flags.extend(_mean_flags(sigma.f))
    if case_id == "COR46":
        flags.append(_discrete_flag(A, measure))
    try:
        if A.domain != B.domain or A.dim != B.dim:
            raise InputError("A and B fields must share domain and dimension")
        M = OperatorField(A.domain, lambda t: connection_apply(sigma, A(t), B(t)), A.dim)
        N = OperatorField(A.domain, lambda t: connection_apply(
            sigma, apply_function(A(t), RECIPROCAL), apply_function(B(t), RECIPROCAL)), A.dim)
        X = weighted_integral(W, M, measure, rule)
        Y = weighted_integral(W, N, measure, rule)
        L = sym_tensor(X, Y)
        R = constant * tensor_power2(bochner_integral(W, measure, rule))
    except (DomainError, InputError) as exc:
        return failed_report(case_id, constant, flags, exc)
    return matrix_report(case_id, constant, L, R, flags)


def _window_flags(window: SpectrumWindow, **mats) -> list[HypothesisFlag]:
    flags = []
    for name, M in mats.items():
        w = eigvalsh(M)
        ok = window.contains(w)
        flags.append(_flag(f"spectrum of {name} in window", ok,
                           "" if ok else f"spectrum [{w[0]:.6g}, {w[-1]:.6g}]"))
    return flags


def verify_inverse_pair(A, B, window: SpectrumWindow) -> VerificationReport:
    """``A (x) B^{-1} + A^{-1} (x) B <= ((a^2+b^2)/(ab)) I``."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    flags = _window_flags(window, A=A, B=B)
    k = 2.0 * window.tensor_constant
    try:
        L = kron(A, inverse(B)) + kron(inverse(A), B)
    except DomainError as exc:
        return failed_report("LEM31", k, flags, exc)
    return matrix_report("LEM31", k, L, k * np.eye(L.shape[0]), flags)


def _psd_flags(**mats) -> list[HypothesisFlag]:
    flags = []
    for name, M in mats.items():
        w = eigvalsh(M)
        ok = bool(w[0] >= -1e-10 * max(1.0, abs(w[-1])))
        flags.append(_flag(f"{name} PSD", ok, "" if ok else f"min eigenvalue {w[0]:.3e}"))
    return flags


def verify_connection_norm(A, B, sigma: ConnectionSpec) -> VerificationReport:
    """``||A sigma B|| <= ||A|| sigma ||B||``, reported as a scalar margin."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    flags = _psd_flags(A=A, B=B)
    if not sigma.f.monotone_verified:
        flags.append(HypothesisFlag("operator monotone", "unverified", "custom function"))
    try:
        lhs = operator_norm(connection_apply(sigma, A, B))
    except InputError as exc:
        return failed_report("LEM43", 1.0, flags, exc)
    rhs = scalar_connection(sigma, operator_norm(A), operator_norm(B))
    return scalar_report("LEM43", 1.0, lhs, rhs, flags)


def verify_connection_tensor(A, B, C, D, sigma: ConnectionSpec) -> VerificationReport:
    """``(A sigma C) (x)_s (B sigma D) <= (A (x)_s B) sigma (C (x)_s D)``."""
    mats = {k: as_hermitian(v) for k, v in dict(A=A, B=B, C=C, D=D).items()}
    flags = _psd_flags(**mats) + [supermult_flag(sigma.f)]
    A, B, C, D = mats["A"], mats["B"], mats["C"], mats["D"]
    try:
        L = sym_tensor(connection_apply(sigma, A, C), connection_apply(sigma, B, D))
        R = connection_apply(sigma, sym_tensor(A, B), sym_tensor(C, D))
    except InputError as exc:
        return failed_report("LEM44", 1.0, flags, exc)
    return matrix_report("LEM44", 1.0, L, R, flags)


def verify_scalar_kantorovich(weights: Sequence[float], values: Sequence[float],
                              window: SpectrumWindow) -> VerificationReport:
    """``(sum w a)(sum w/a) <= ((a+b)^2/(4ab)) (sum w)^2``."""
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    if w.size == 0 or w.shape != v.shape or w.ndim != 1:
        raise InputError("weights and values must be non-empty lists of equal length")
    flags = [_flag("weights nonnegative", bool(np.all(w >= 0))),
             _flag("values in window", window.contains(v))]
    K = window.kantorovich
    lhs = float(np.dot(w, v) * np.dot(w, 1.0 / v))
    rhs = K * float(np.sum(w)) ** 2
    return scalar_report("EQ11", K, lhs, rhs, flags)


def verify_scalar_gruss(f: Callable, interval: tuple[float, float], window: SpectrumWindow,
                        nodes: int = 4096) -> VerificationReport:
    """``int f^2 dmu <= ((a+b)^2/(4ab)) (int f dmu)^2`` for the normalized measure on ``interval``.

    Both integrals use the composite midpoint rule with ``nodes`` points.
    """
    alpha, beta = interval
    if not alpha < beta:
        raise InputError("interval needs alpha < beta")
    h = (beta - alpha) / nodes
    t = alpha + (np.arange(nodes) + 0.5) * h
    fx = np.asarray(f(t), dtype=float) * np.ones_like(t)
    ok = window.contains(fx, tol=1e-12)
    flags = [_flag("a <= f <= b", ok, "" if ok else f"f ranges over [{fx.min():.6g}, {fx.max():.6g}]"),
             _flag("normalized measure", True)]
    K = window.kantorovich
    mean = float(np.mean(fx))
    lhs = float(np.mean(fx * fx))
    return scalar_report("EQ12", K, lhs, K * mean * mean, flags)


def verify_hadamard_kantorovich(A_list: Sequence, W_list: Sequence,
                                window: SpectrumWindow) -> VerificationReport:
    """Hadamard-product version: ``X o Y <= ((a^2+b^2)/(2ab)) (sum W o sum W)``."""
    As = [as_hermitian(A) for A in A_list]
    Ws = [as_hermitian(W) for W in W_list]
    if not As or len(As) != len(Ws):
        raise InputError("A_list and W_list must be non-empty and of equal length")
    flags = []
    for i, (A, W) in enumerate(zip(As, Ws)):
        flags += _window_flags(window, **{f"A[{i}]": A}) + _psd_flags(**{f"W[{i}]": W})
    c = window.tensor_constant
    try:
        d = As[0].shape[0]
        X = np.zeros((d, d), dtype=complex)
        Y = np.zeros((d, d), dtype=complex)
        S = np.zeros((d, d), dtype=complex)
        for A, W in zip(As, Ws):
            R = psd_sqrt(W)
            X = X + R @ A @ R
            Y = Y + R @ inverse(A) @ R
            S = S + W
        L = hadamard(X, Y)
        Rhs = c * hadamard(S, S)
    except (DomainError, InputError) as exc:
        return failed_report("THM11_HADAMARD", c, flags, exc)
    return matrix_report("THM11_HADAMARD", c, L, Rhs, flags)
