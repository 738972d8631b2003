"""Hermitian matrix calculus on small dense matrices.

Matrices are plain ``numpy`` complex arrays. ``as_hermitian`` is the single
entry point that validates and symmetrizes input; everything downstream
assumes its output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
MAX_DIM = 8
MAX_TENSOR_DIM = MAX_DIM * MAX_DIM
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class InputError(ValueError):
    """Malformed or inconsistent input (shape, symmetry, dimension)."""


class DomainError(ValueError):
    """A scalar function was evaluated outside the interval it is defined on."""


class EigenConvergenceError(RuntimeError):
    def __init__(self, sweeps: int, off_norm: float):
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e})"
        )
        self.sweeps = sweeps
        self.off_norm = off_norm


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


@dataclass(frozen=True)
class SpectrumWindow:
    """Closed interval ``[a, b]`` with ``0 < a <= b`` confining a spectrum."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b >= self.a and math.isfinite(self.b)):
            raise InputError(f"invalid spectrum window [{self.a}, {self.b}]")

    @property
    def kantorovich(self) -> float:
        """Classical constant (a+b)^2 / (4ab)."""
        return (self.a + self.b) ** 2 / (4 * self.a * self.b)

    @property
    def tensor_constant(self) -> float:
        """Tensor-product constant (a^2+b^2) / (2ab)."""
        return (self.a**2 + self.b**2) / (2 * self.a * self.b)

    def contains(self, x, tol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.a - tol) & (x <= self.b + tol)))

    def __iter__(self):
        return iter((self.a, self.b))


def as_hermitian(M, max_dim: int = MAX_TENSOR_DIM) -> np.ndarray:
    """Validate ``M`` as Hermitian and return a read-only symmetrized copy.

    Asymmetry up to ``HERMITIAN_TOL`` (relative to ``1 + max|M|``) is removed
    by averaging with the adjoint; anything larger is rejected.
    """
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {A.shape}")
    if A.shape[0] > max_dim:
        raise InputError(f"dimension {A.shape[0]} exceeds cap {max_dim}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    asym = np.max(np.abs(A - A.conj().T))
    if asym > HERMITIAN_TOL * (1.0 + np.max(np.abs(A))):
        raise InputError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    A = 0.5 * (A + A.conj().T)
    A.setflags(write=False)
    return A


def _check_dim(d: int) -> int:
    d = int(d)
    if not 1 <= d <= MAX_DIM:
        raise InputError(f"dimension must be in [1, {MAX_DIM}], got {d}")
    return d


def _off_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def _jacobi(A: np.ndarray, tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    off = _off_norm(A)
    sweeps = 0
    while off > tol * scale:
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(sweeps, off)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-30 * scale:
                    A[p, q] = A[q, p] = 0.0
                    continue
                # phase D = diag(1, e^{-i phi}) makes the pivot real, then a real rotation
                phase = apq / r
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p], A[q, q] = A[p, p].real, A[q, q].real
                V[:, idx] = V[:, idx] @ G
        sweeps += 1
        off = _off_norm(A)
    return np.diag(A).real.copy(), V


def eig_hermitian(A, method: str = "lapack") -> SpectralDecomposition:
    """Eigendecomposition with eigenvalues ascending.

    ``method="jacobi"`` runs cyclic complex Jacobi rotations until the
    off-diagonal Frobenius norm drops below ``1e-13 * ||A||_F`` (at most 100
    sweeps). ``method="lapack"`` delegates to ``numpy.linalg.eigh`` and is the
    default on hot paths.
    """
    A = as_hermitian(A)
    if method == "lapack":
        w, V = np.linalg.eigh(A)
    elif method == "jacobi":
        w, V = _jacobi(A, JACOBI_TOL, JACOBI_MAX_SWEEPS)
        order = np.argsort(w, kind="stable")
        w, V = w[order], V[:, order]
    else:
        raise InputError(f"unknown eigensolver {method!r}")
    return SpectralDecomposition(w, V)


def eigvalsh(A) -> np.ndarray:
    return np.linalg.eigvalsh(as_hermitian(A))


def apply_function(A, f: Callable, domain: tuple[float, float] | None = None,
                   tol: float = 1e-10) -> np.ndarray:
    """Functional calculus ``U diag(f(lambda)) U*``.

    ``f`` is applied elementwise to the eigenvalue array. If ``domain`` is
    given, eigenvalues outside it (beyond ``tol``) raise ``DomainError``;
    non-finite or complex values of ``f`` always do.
    """
    w, U = eig_hermitian(A)
    if domain is not None:
        lo, hi = domain
        if w[0] < lo - tol or w[-1] > hi + tol:
            raise DomainError(
                f"spectrum [{w[0]:.6g}, {w[-1]:.6g}] leaves domain [{lo}, {hi}]"
            )
        w = np.clip(w, lo, hi)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w))
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape)
    if np.iscomplexobj(fw):
        if np.any(np.abs(fw.imag) > 0):
            raise DomainError("function returned complex values on the spectrum")
        fw = fw.real
    fw = fw.astype(float)
    if not np.all(np.isfinite(fw)):
        raise DomainError(f"function is not finite on spectrum {w}")
    out = (U * fw) @ U.conj().T
    out = 0.5 * (out + out.conj().T)
    out.setflags(write=False)
    return out


def psd_sqrt(A, tol: float = 1e-10) -> np.ndarray:
    """Square root of a positive semidefinite matrix; rejects eigenvalues below ``-tol*(1+||A||)``."""
    w, U = eig_hermitian(A)
    if w[0] < -tol * (1.0 + abs(w).max()):
        raise InputError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    r = np.sqrt(np.clip(w, 0.0, None))
    out = (U * r) @ U.conj().T
    return 0.5 * (out + out.conj().T)


def inverse(A) -> np.ndarray:
    return apply_function(A, lambda x: 1.0 / x)


def loewner_margin(L, R) -> float:
    """``lambda_min(R - L)``; nonnegative iff ``L <= R`` in Loewner order."""
    L = np.asarray(L)
    R = np.asarray(R)
    if L.shape != R.shape:
        raise InputError(f"dimension mismatch: {L.shape} vs {R.shape}")
    return float(eigvalsh(R - L)[0])


def _check_tensor_dim(A, B):
    if A.shape[0] * B.shape[0] > MAX_TENSOR_DIM:
        raise InputError(f"tensor dimension {A.shape[0] * B.shape[0]} exceeds cap {MAX_TENSOR_DIM}")


def kron(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    _check_tensor_dim(A, B)
    return np.kron(A, B)


def sym_tensor(A, B) -> np.ndarray:
    """Symmetrized tensor product ``(A (x) B + B (x) A) / 2``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    _check_tensor_dim(A, B)
    # addition is commutative in IEEE arithmetic, so the result is exactly symmetric
    return 0.5 * (np.kron(A, B) + np.kron(B, A))


def tensor_power2(A) -> np.ndarray:
    return kron(A, A)


def hadamard(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A * B


def operator_norm(A) -> float:
    w = eigvalsh(A)
    return float(max(abs(w[0]), abs(w[-1])))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from QR of a complex Ginibre matrix, R diagonal phases removed."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    phases = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
    return Q * phases


def random_hermitian_in_window(d: int, window: SpectrumWindow, seed) -> np.ndarray:
    d = _check_dim(d)
    rng = np.random.default_rng(seed)
    U = random_unitary(d, rng)
    lam = rng.uniform(window.a, window.b, size=d)
    if window.a == window.b:
        return as_hermitian(window.a * np.eye(d))
    return as_hermitian((U * lam) @ U.conj().T)


def random_psd(d: int, seed) -> np.ndarray:
    """``G* G`` for complex Gaussian ``G``, scaled to unit operator norm."""
    d = _check_dim(d)
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    P = G.conj().T @ G
    P = 0.5 * (P + P.conj().T)
    return as_hermitian(P / np.linalg.eigvalsh(P)[-1])


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"dim": A.shape[0], "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"dim", "re", "im"}``; bare nested lists are accepted as real matrices."""
    if isinstance(obj, dict):
        try:
            re = np.asarray(obj["re"], dtype=float)
        except KeyError as exc:
            raise InputError("matrix JSON needs a 're' array") from exc
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise InputError("matrix JSON 're' and 'im' shapes differ")
        M = re + 1j * im
        if "dim" in obj and (M.ndim != 2 or M.shape[0] != int(obj["dim"])):
            raise InputError(f"matrix JSON 'dim' {obj['dim']} does not match data")
    else:
        M = np.asarray(obj, dtype=complex)
    return as_hermitian(M)
