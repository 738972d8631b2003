"""Serializable real scalar functions.

These cover both the time profiles ``g_k(t)`` of interval fields and the
spectral functions ``f(x)`` fed to the functional calculus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import InputError


@dataclass(frozen=True)
class ScalarFunction:
    kind: str
    coeffs: tuple[float, ...] = ()
    alpha: float = 1.0
    rate: float = 1.0
    scale: float = 1.0
    phase: float = 0.0
    lo: float = 0.0
    hi: float = 1.0
    func: Callable | None = field(default=None, compare=False)
    label: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "poly":
            # coefficients are ascending: c0 + c1 x + c2 x^2 + ...
            return np.polynomial.polynomial.polyval(x, self.coeffs) + 0.0 * x
        if k == "const":
            return np.full_like(x, self.scale)
        if k == "power":
            with np.errstate(divide="ignore", invalid="ignore"):
                if self.alpha == 1.0:
                    return x.copy()
                if self.alpha == -1.0:
                    return 1.0 / x
                return np.power(x, self.alpha)
        if k == "exp":
            return self.scale * np.exp(self.rate * x)
        if k == "sin":
            return self.scale * np.sin(self.rate * x + self.phase)
        if k == "cos":
            return self.scale * np.cos(self.rate * x + self.phase)
        if k == "indicator":
            return np.where((x >= self.lo) & (x < self.hi), 1.0, 0.0)
        if k == "reflect":
            with np.errstate(divide="ignore"):
                return np.asarray(self.func(1.0 / x), dtype=float)
        if k == "custom":
            return np.asarray(self.func(x), dtype=float)
        raise InputError(f"unknown scalar function kind {k!r}")

    def reflect(self) -> ScalarFunction:
        """The function ``x -> self(1/x)``; powers map to powers so the result stays exact."""
        if self.kind == "power":
            return power(-self.alpha)
        if self.kind == "const":
            return self
        if self.kind == "reflect":
            return self.func
        return ScalarFunction("reflect", func=self, label=f"{self.name}(1/x)")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "power":
            return {1.0: "x", -1.0: "1/x"}.get(self.alpha, f"x^{self.alpha:g}")
        if self.kind == "poly":
            return "poly" + str(list(self.coeffs))
        return self.kind

    def to_json(self) -> dict:
        k = self.kind
        if k == "poly":
            return {"kind": k, "coeffs": list(self.coeffs)}
        if k == "const":
            return {"kind": k, "value": self.scale}
        if k == "power":
            return {"kind": k, "alpha": self.alpha}
        if k == "exp":
            return {"kind": k, "rate": self.rate, "scale": self.scale}
        if k in ("sin", "cos"):
            return {"kind": k, "freq": self.rate, "phase": self.phase, "scale": self.scale}
        if k == "indicator":
            return {"kind": k, "lo": self.lo, "hi": self.hi}
        if k == "reflect":
            return {"kind": k, "of": self.func.to_json()}
        raise InputError(f"{self.name} is not serializable")


def poly(*coeffs: float) -> ScalarFunction:
    return ScalarFunction("poly", coeffs=tuple(float(c) for c in coeffs))


def const(value: float) -> ScalarFunction:
    return ScalarFunction("const", scale=float(value))


def power(alpha: float) -> ScalarFunction:
    return ScalarFunction("power", alpha=float(alpha))


IDENTITY = power(1.0)
RECIPROCAL = power(-1.0)


def exp(rate: float = 1.0, scale: float = 1.0) -> ScalarFunction:
    return ScalarFunction("exp", rate=float(rate), scale=float(scale))


def indicator(lo: float, hi: float) -> ScalarFunction:
    """Indicator of ``[lo, hi)``. Discontinuous; used to embed discrete fields in intervals."""
    return ScalarFunction("indicator", lo=float(lo), hi=float(hi))


def custom(func: Callable, label: str = "custom") -> ScalarFunction:
    return ScalarFunction("custom", func=func, label=label)


def from_json(obj) -> ScalarFunction:
    if isinstance(obj, (int, float)):
        return const(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError(f"scalar function JSON needs a 'kind': {obj!r}")
    k = obj["kind"]
    try:
        if k == "poly":
            return poly(*obj["coeffs"])
        if k == "const":
            return const(obj["value"])
        if k == "power":
            return power(obj["alpha"])
        if k == "identity":
            return IDENTITY
        if k == "inverse":
            return RECIPROCAL
        if k == "exp":
            return exp(obj.get("rate", 1.0), obj.get("scale", 1.0))
        if k in ("sin", "cos"):
            return ScalarFunction(k, rate=float(obj.get("freq", 1.0)),
                                  phase=float(obj.get("phase", 0.0)),
                                  scale=float(obj.get("scale", 1.0)))
        if k == "indicator":
            return indicator(obj["lo"], obj["hi"])
        if k == "reflect":
            return from_json(obj["of"]).reflect()
    except KeyError as exc:
        raise InputError(f"scalar function {k!r} missing field {exc}") from exc
    raise InputError(f"unknown scalar function kind {k!r}")
