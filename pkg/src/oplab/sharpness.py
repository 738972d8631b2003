"""Extremal configurations and a randomized search for the best constant.

The search objective is the largest eigenvalue of the LHS after whitening by
the constant-free RHS, i.e. the least ``c`` with ``LHS <= c * RHS`` on the
range of ``RHS``. A valid inequality bounds it by the proven constant, so a
search can only produce lower bounds on the supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import COUNTING, OperatorField
from .linalg import (
    InputError,
    SpectrumWindow,
    eigvalsh,
    inverse,
    kron,
    matrix_to_json,
    random_unitary,
    sym_tensor,
    MAX_DIM,
)
from .verifiers import tensor_kantorovich_case, kantorovich_engine

# null directions of the total weight S; on S (x) S this is the 1e-10 relative cutoff
WEIGHT_CUTOFF = 1e-5
SPACES = ("operator", "scalar_weights", "scalar")
SEARCH_CASES = {"THM32": "operator", "COR33": "operator",
                "COR34": "scalar_weights", "COR35": "scalar_weights", "LEM31": "operator"}


@dataclass
class SharpnessResult:
    case_id: str
    best_ratio: float
    target_constant: float
    witness: dict
    evaluations: int
    seed: int | None = None
    window: tuple[float, float] = (0.0, 0.0)
    history: list[tuple[int, float]] = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return self.target_constant - self.best_ratio

    @property
    def sound(self) -> bool:
        return self.best_ratio <= self.target_constant + 1e-8

    def to_json(self) -> dict:
        return {"case_id": self.case_id, "best_ratio": self.best_ratio,
                "constant": self.target_constant, "gap": self.gap,
                "pass": self.sound, "witness": self.witness,
                "evaluations": self.evaluations, "seed": self.seed,
                "window": list(self.window)}


def whitened_ratio(X: np.ndarray, Y: np.ndarray, S: np.ndarray) -> float:
    """Largest eigenvalue of ``(S^{+1/2})^{(x)2} (X (x)_s Y) (S^{+1/2})^{(x)2}``."""
    s, U = np.linalg.eigh(S)
    keep = s > WEIGHT_CUTOFF * s[-1]
    if not np.any(keep):
        return 0.0
    Uk = U[:, keep]
    T = Uk / np.sqrt(s[keep])
    Xw = T.conj().T @ X @ T
    Yw = T.conj().T @ Y @ T
    Xw = 0.5 * (Xw + Xw.conj().T)
    Yw = 0.5 * (Yw + Yw.conj().T)
    return float(eigvalsh(sym_tensor(Xw, Yw))[-1])


def extremal_inverse_pair(window: SpectrumWindow, d: int) -> SharpnessResult:
    """``A = aI``, ``B = bI`` attain the constant ``(a^2+b^2)/(ab)``."""
    if not 1 <= d <= MAX_DIM:
        raise InputError(f"dimension must be in [1, {MAX_DIM}]")
    a, b = window.a, window.b
    A = a * np.eye(d)
    B = b * np.eye(d)
    L = kron(A, inverse(B)) + kron(inverse(A), B)
    ratio = float(eigvalsh(L)[-1])
    return SharpnessResult("LEM31", ratio, 2.0 * window.tensor_constant,
                           {"A": matrix_to_json(A), "B": matrix_to_json(B)}, 1,
                           window=(a, b))


def projection_witness(window: SpectrumWindow, d: int) -> SharpnessResult:
    """Two nodes ``aI`` and ``bI`` weighted by a rank-one projection and its complement.

    On ``P (x) (I-P)`` both sides agree, so the constant is attained exactly.
    """
    if not 2 <= d <= MAX_DIM:
        raise InputError(f"projection witness needs 2 <= d <= {MAX_DIM}")
    a, b = window.a, window.b
    P = np.zeros((d, d))
    P[0, 0] = 1.0
    A = OperatorField.discrete([a * np.eye(d), b * np.eye(d)])
    W = OperatorField.discrete([P, np.eye(d) - P])
    report = kantorovich_engine(tensor_kantorovich_case(), A, W, window, COUNTING)
    # total weight is I, so the whitened ratio is the top LHS eigenvalue
    ratio = report.lhs_spectrum[-1]
    return SharpnessResult("THM32", ratio, window.tensor_constant,
                           {"A": A.to_json(), "W": W.to_json(), "margin": report.margin}, 1,
                           window=(a, b))


class _Climber:
    """One hill-climbing restart over node spectra, eigenbases and weights."""

    def __init__(self, rng, space, window, d, n, inverse_pair=False):
        self.rng = rng
        self.space = space
        self.a, self.b = window.a, window.b
        self.d, self.n = d, n
        self.inverse_pair = inverse_pair
        self.step = 0.5
        self.stall = 0
        self.state = self._random_state()
        self.value = self.objective(self.state)

    def _random_state(self):
        rng, d, n = self.rng, self.d, self.n
        nodes = 2 if self.inverse_pair else n
        k = 1 if self.space == "scalar" else d
        lam = rng.uniform(self.a, self.b, size=(nodes, k))
        U = [random_unitary(d, rng) for _ in range(nodes)]
        if self.space == "operator":
            G = rng.standard_normal((nodes, d, d)) + 1j * rng.standard_normal((nodes, d, d))
        else:
            G = rng.uniform(0.1, 1.0, size=nodes)
        return lam, U, G

    def _node(self, lam, U, i):
        if self.space == "scalar":
            return lam[i, 0] * np.eye(self.d)
        return (U[i] * lam[i]) @ U[i].conj().T

    def objective(self, state) -> float:
        lam, U, G = state
        if self.inverse_pair:
            A, B = self._node(lam, U, 0), self._node(lam, U, 1)
            L = kron(A, inverse(B)) + kron(inverse(A), B)
            return float(eigvalsh(L)[-1])
        d = self.d
        X = np.zeros((d, d), dtype=complex)
        Y = np.zeros((d, d), dtype=complex)
        S = np.zeros((d, d), dtype=complex)
        for i in range(self.n):
            A = self._node(lam, U, i)
            if self.space == "operator":
                R = G[i] @ G[i].conj().T  # W^{1/2}, so W = R^2
            else:
                R = abs(G[i]) * np.eye(d)
            Ainv = (U[i] / lam[i]) @ U[i].conj().T if self.space != "scalar" \
                else np.eye(d) / lam[i, 0]
            X = X + R @ A @ R
            Y = Y + R @ Ainv @ R
            S = S + R @ R
        return whitened_ratio(X, Y, S)

    def _perturb(self, state):
        lam, U, G = state
        rng, s = self.rng, self.step
        lam, U, G = lam.copy(), list(U), G.copy()
        i = rng.integers(lam.shape[0])
        block = rng.integers(3)
        if block == 0 or self.space == "scalar" and block == 1:
            lam[i] = np.clip(lam[i] + s * (self.b - self.a) * rng.standard_normal(lam.shape[1]),
                             self.a, self.b)
        elif block == 1:
            Z = rng.standard_normal((self.d, self.d)) + 1j * rng.standard_normal((self.d, self.d))
            Q, Rq = np.linalg.qr(U[i] + s * Z)
            U[i] = Q * (np.diag(Rq) / np.abs(np.diag(Rq)))
        elif not self.inverse_pair:
            if self.space == "operator":
                scale = np.linalg.norm(G[i]) + 1e-12
                G[i] = G[i] + s * scale * (rng.standard_normal((self.d, self.d))
                                           + 1j * rng.standard_normal((self.d, self.d)))
            else:
                G[i] = abs(G[i] + s * rng.standard_normal())
        return lam, U, G

    def advance(self) -> float:
        cand = self._perturb(self.state)
        v = self.objective(cand)
        if v > self.value:
            self.state, self.value = cand, v
            self.stall = 0
        else:
            self.stall += 1
            if self.stall % 100 == 0:
                self.step *= 0.9
        return v

    def witness(self) -> dict:
        lam, U, G = self.state
        nodes = lam.shape[0]
        out = {"A": [matrix_to_json(self._node(lam, U, i)) for i in range(nodes)]}
        if not self.inverse_pair:
            if self.space == "operator":
                out["W"] = [matrix_to_json(np.linalg.matrix_power(G[i] @ G[i].conj().T, 2))
                            for i in range(nodes)]
            else:
                out["w"] = [float(G[i] ** 2) for i in range(nodes)]
        return out


def ratio_search(case_id: str, window: SpectrumWindow, d: int, n_nodes: int, budget: int,
                 seed: int, space: str | None = None, restarts: int = 8) -> SharpnessResult:
    """Multi-start hill climb for the supremal LHS/RHS ratio.

    Restarts advance round-robin, one evaluation each, with independent
    streams seeded by ``(seed, restart)``; a larger budget therefore extends
    the same evaluation sequence and ``best_ratio`` never decreases.

    ``space`` restricts the search: ``"scalar_weights"`` uses ``W_t = w_t I``
    and ``"scalar"`` additionally ``A_t = a_t I``.
    """
    case_id = case_id.upper()
    if case_id not in SEARCH_CASES:
        raise InputError(f"no search space for case {case_id!r}; "
                         f"supported: {', '.join(SEARCH_CASES)}")
    space = space or SEARCH_CASES[case_id]
    if space not in SPACES:
        raise InputError(f"unknown search space {space!r}")
    if budget < 1:
        raise InputError("budget must be at least 1")
    if not 1 <= d <= MAX_DIM or n_nodes < 1:
        raise InputError("need 1 <= d <= 8 and at least one node")
    inverse_pair = case_id == "LEM31"
    target = 2.0 * window.tensor_constant if inverse_pair else window.tensor_constant
    climbers = []
    best, best_k = -math.inf, 0
    history = []
    evals = 0
    k = 0
    while evals < budget:
        r = k % restarts
        if r == len(climbers):
            climbers.append(_Climber(np.random.default_rng([seed, r]), space, window, d,
                                     n_nodes, inverse_pair))
            v = climbers[r].value
        else:
            v = climbers[r].advance()
        evals += 1
        if v > best:
            best, best_k = v, r
            history.append((evals, v))
        k += 1
    witness = climbers[best_k].witness()
    witness["space"] = space
    return SharpnessResult(case_id, best, target, witness, evals, seed,
                           (window.a, window.b), history)
