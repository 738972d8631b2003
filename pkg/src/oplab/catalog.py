"""Case catalog: JSON configs, seeded random instances and dispatch.

Every case id maps to a runner taking a JSON-style config dict and to a
generator producing such a config from a seed, so any report can be replayed
from the seed it carries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import scalar
from . import verifiers as V
from .fields import (
    COUNTING,
    MeasureSpec,
    OperatorField,
    QuadratureRule,
    field_from_json,
    measure_from_json,
    quadrature_from_json,
)
from .linalg import (
    InputError,
    SpectrumWindow,
    as_hermitian,
    matrix_from_json,
    matrix_to_json,
    random_psd,
    random_unitary,
    MAX_DIM,
)
from .means import RepresentingFunction, connection_from_json

WINDOWS = ((1.0, 2.0), (1.0, 5.0), (0.5, 1.5))
DIMS = (2, 3, 4)
MAX_NODES = 5


def _window(cfg) -> SpectrumWindow:
    try:
        a, b = cfg["window"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("config needs 'window': [a, b]") from exc
    return SpectrumWindow(float(a), float(b))


def _measure(cfg) -> MeasureSpec:
    return measure_from_json(cfg["measure"]) if "measure" in cfg else COUNTING


def _rule(cfg) -> QuadratureRule:
    return quadrature_from_json(cfg["quadrature"]) if "quadrature" in cfg else QuadratureRule()


def _field(cfg, key) -> OperatorField:
    if key not in cfg:
        raise InputError(f"config needs field {key!r}")
    return field_from_json(cfg[key])


def _matrix(cfg, key):
    if key not in cfg:
        raise InputError(f"config needs matrix {key!r}")
    return matrix_from_json(cfg[key])


def _scalar_fn(cfg, key):
    if key not in cfg:
        raise InputError(f"config needs function {key!r}")
    return scalar.from_json(cfg[key])


def _representing(cfg) -> RepresentingFunction:
    return connection_from_json(cfg["connection"]).f


def _common(cfg):
    return _window(cfg), _measure(cfg), _rule(cfg)


def run_tensor_kantorovich(cfg, case_id="THM32"):
    w, mu, Q = _common(cfg)
    return V.verify_tensor_kantorovich(_field(cfg, "A"), _field(cfg, "W"), w, mu, Q, case_id)


def run_scalar_weights(cfg, case_id="COR34"):
    w, mu, Q = _common(cfg)
    A = _field(cfg, "A")
    weights = cfg.get("weights")
    if weights is None:
        weights = _scalar_fn(cfg, "w")
    return V.verify_scalar_weights(A, weights, w, mu, Q, case_id)


def run_uniform_weights(cfg):
    return V.verify_uniform_weights(_field(cfg, "A"), _window(cfg))


def run_mean_kantorovich(cfg, case_id="THM45"):
    w, mu, Q = _common(cfg)
    return V.verify_mean_kantorovich(_field(cfg, "A"), _field(cfg, "B"), _field(cfg, "W"),
                                     connection_from_json(cfg["connection"]), w, mu, Q, case_id)


def run_reflected_function(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_reflected_function(_scalar_fn(cfg, "f"), _field(cfg, "A"), _field(cfg, "W"), w, mu, Q)


def run_function_weights(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_function_weights(_scalar_fn(cfg, "f"), _scalar_fn(cfg, "g"), _field(cfg, "A"), w, mu, Q)


def run_power_weights(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_power_weights(float(cfg["lambda"]), _field(cfg, "A"), w, mu, Q)


def run_gruss_tensor(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_gruss_tensor(_field(cfg, "A"), w, mu, Q)


def run_representing_function(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_representing_function(_representing(cfg), _field(cfg, "A"), _field(cfg, "W"), w, mu, Q)


def run_power_pair(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_power_pair(float(cfg["alpha"]), _scalar_fn(cfg, "g"), _field(cfg, "A"), w, mu, Q)


def run_shifted_powers(cfg):
    w, mu, Q = _common(cfg)
    return V.verify_shifted_powers(float(cfg["lambda"]), float(cfg["alpha"]), _field(cfg, "A"),
                                w, mu, Q)


def run_inverse_pair(cfg):
    return V.verify_inverse_pair(_matrix(cfg, "A"), _matrix(cfg, "B"), _window(cfg))


def run_connection_norm(cfg):
    return V.verify_connection_norm(_matrix(cfg, "A"), _matrix(cfg, "B"),
                            connection_from_json(cfg["connection"]))


def run_connection_tensor(cfg):
    return V.verify_connection_tensor(*(_matrix(cfg, k) for k in "ABCD"),
                            connection_from_json(cfg["connection"]))


def run_scalar_kantorovich(cfg):
    return V.verify_scalar_kantorovich(cfg["weights"], cfg["values"], _window(cfg))


def run_scalar_gruss(cfg):
    interval = cfg.get("interval", [0.0, 1.0])
    return V.verify_scalar_gruss(_scalar_fn(cfg, "f"), (float(interval[0]), float(interval[1])),
                                 _window(cfg), int(cfg.get("nodes", 4096)))


def run_hadamard(cfg):
    return V.verify_hadamard_kantorovich([matrix_from_json(m) for m in cfg["A_list"]],
                                         [matrix_from_json(m) for m in cfg["W_list"]],
                                         _window(cfg))


# ---------------------------------------------------------------- generators

def _pick_window(rng) -> list[float]:
    return list(WINDOWS[rng.integers(len(WINDOWS))])


def _window_matrix(rng, d, a, b):
    """Random Hermitian with spectrum in [a, b]; a third of draws sit on the endpoints."""
    U = random_unitary(d, rng)
    if rng.random() < 1 / 3:
        lam = rng.choice([a, b], size=d)
    else:
        lam = rng.uniform(a, b, size=d)
    return as_hermitian((U * lam) @ U.conj().T)


def _weight_matrix(rng, d):
    """Random PSD weight; a third are rank-one projections."""
    if rng.random() < 1 / 3:
        v = random_unitary(d, rng)[:, 0]
        return as_hermitian(np.outer(v, v.conj()))
    return random_psd(d, rng.integers(2**63)) * rng.uniform(0.1, 2.0)


def _m(M) -> dict:
    return matrix_to_json(M)


def _discrete(mats) -> dict:
    return {"domain": {"kind": "discrete", "n": len(mats)}, "samples": [_m(M) for M in mats]}


def _interval_window_field(rng, d, a, b) -> dict:
    """Convex path between two window matrices, so every sample stays in ``[a, b]``."""
    A0, A1 = _window_matrix(rng, d, a, b), _window_matrix(rng, d, a, b)
    if rng.random() < 0.5:
        terms = [({"kind": "poly", "coeffs": [1.0, -1.0]}, A0),
                 ({"kind": "poly", "coeffs": [0.0, 1.0]}, A1)]
    else:
        freq = float(rng.uniform(1.0, 8.0))
        terms = [({"kind": "const", "value": 1.0}, 0.5 * (A0 + A1)),
                 ({"kind": "sin", "freq": freq, "phase": 0.0, "scale": 1.0}, 0.5 * (A1 - A0))]
    return {"domain": {"kind": "interval", "alpha": 0.0, "beta": 1.0},
            "terms": [{"g": g, "M": _m(M)} for g, M in terms]}


def _interval_weight_field(rng, d) -> dict:
    W0, W1 = _weight_matrix(rng, d), _weight_matrix(rng, d)
    c = float(rng.uniform(0.0, 3.0))
    r = float(rng.uniform(-2.0, 2.0))
    return {"domain": {"kind": "interval", "alpha": 0.0, "beta": 1.0},
            "terms": [{"g": {"kind": "poly", "coeffs": [1.0, c]}, "M": _m(W0)},
                      {"g": {"kind": "exp", "rate": r, "scale": 1.0}, "M": _m(W1)}]}


def _interval_measure(rng, normalized=None) -> dict:
    if normalized is None:
        normalized = bool(rng.random() < 0.5)
    return {"kind": "lebesgue",
            "density": {"kind": "poly", "coeffs": [1.0, float(rng.uniform(0.0, 2.0))]},
            "normalized": normalized}


def _quadrature(rng) -> dict:
    return {"scheme": "midpoint" if rng.random() < 0.75 else "trapezoid", "nodes": 16}


def _setup(rng, dim, allow_interval=True, normalized=None):
    d = int(dim) if dim else int(rng.choice(DIMS))
    a, b = _pick_window(rng)
    interval = allow_interval and rng.random() < 0.3
    cfg = {"window": [a, b]}
    if interval:
        cfg["measure"] = _interval_measure(rng, normalized)
        cfg["quadrature"] = _quadrature(rng)
    elif normalized:
        cfg["measure"] = {"kind": "counting", "normalized": True}
    n = int(rng.integers(1, MAX_NODES + 1))
    return cfg, d, a, b, n, interval


def _a_field(rng, d, a, b, n, interval):
    if interval:
        return _interval_window_field(rng, d, a, b)
    return _discrete([_window_matrix(rng, d, a, b) for _ in range(n)])


def _w_field(rng, d, n, interval):
    if interval:
        return _interval_weight_field(rng, d)
    return _discrete([_weight_matrix(rng, d) for _ in range(n)])


def gen_tensor_kantorovich(rng, dim, discrete_only=False):
    cfg, d, a, b, n, iv = _setup(rng, dim, allow_interval=not discrete_only)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    cfg["W"] = _w_field(rng, d, n, iv)
    return cfg


def gen_scalar_weights(rng, dim, discrete_only=False):
    cfg, d, a, b, n, iv = _setup(rng, dim, allow_interval=not discrete_only)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    if iv:
        cfg["w"] = {"kind": "poly", "coeffs": [float(rng.uniform(0, 2)), float(rng.uniform(0, 2))]}
    else:
        cfg["weights"] = rng.uniform(0.0, 2.0, size=n).tolist()
    return cfg


def gen_uniform_weights(rng, dim):
    cfg, d, a, b, n, _ = _setup(rng, dim, allow_interval=False)
    cfg["A"] = _discrete([_window_matrix(rng, d, a, b) for _ in range(n)])
    return cfg


def _supermult_connection(rng) -> dict:
    if rng.random() < 0.3:
        return {"kind": "geometric"}
    return {"kind": "power", "alpha": float(rng.choice([0.0, 1.0, rng.uniform(0, 1)]))}


def gen_mean_kantorovich(rng, dim, discrete_only=False):
    cfg, d, a, b, n, iv = _setup(rng, dim, allow_interval=not discrete_only)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    cfg["B"] = cfg["A"] if rng.random() < 0.1 else _a_field(rng, d, a, b, n, iv)
    cfg["W"] = _w_field(rng, d, n, iv)
    cfg["connection"] = _supermult_connection(rng)
    return cfg


def _reflected_function(rng) -> dict:
    u = rng.random()
    if u < 0.15:
        return {"kind": "identity"}
    if u < 0.3:
        return {"kind": "inverse"}
    if u < 0.4:
        return {"kind": "const", "value": 1.0}
    return {"kind": "power", "alpha": float(rng.uniform(-1.0, 1.0))}


def gen_reflected_function(rng, dim):
    cfg = gen_tensor_kantorovich(rng, dim)
    cfg["f"] = _reflected_function(rng)
    return cfg


def _nonneg_g(rng) -> dict:
    u = rng.random()
    if u < 0.4:
        return {"kind": "power", "alpha": float(rng.uniform(-2.0, 2.0))}
    if u < 0.7:
        return {"kind": "exp", "rate": float(rng.uniform(-1.0, 1.0)), "scale": 1.0}
    return {"kind": "poly", "coeffs": [float(rng.uniform(0, 1)), float(rng.uniform(0, 1)),
                                       float(rng.uniform(0, 1))]}


def gen_function_weights(rng, dim):
    cfg, d, a, b, n, iv = _setup(rng, dim)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    cfg["f"] = _reflected_function(rng)
    cfg["g"] = _nonneg_g(rng)
    return cfg


def gen_power_weights(rng, dim):
    cfg, d, a, b, n, iv = _setup(rng, dim)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    cfg["lambda"] = float(rng.uniform(-2.0, 2.0))
    return cfg


def gen_gruss_tensor(rng, dim):
    cfg, d, a, b, n, iv = _setup(rng, dim, normalized=True)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    return cfg


def gen_representing_function(rng, dim):
    cfg = gen_tensor_kantorovich(rng, dim)
    cfg["connection"] = _supermult_connection(rng)
    return cfg


def gen_power_pair(rng, dim):
    cfg, d, a, b, n, iv = _setup(rng, dim)
    cfg["A"] = _a_field(rng, d, a, b, n, iv)
    cfg["alpha"] = float(rng.uniform(-1.0, 1.0))
    cfg["g"] = _nonneg_g(rng)
    return cfg


def gen_shifted_powers(rng, dim):
    cfg = gen_power_weights(rng, dim)
    cfg["alpha"] = float(rng.uniform(-1.0, 1.0))
    return cfg


def gen_inverse_pair(rng, dim):
    d = int(dim) if dim else int(rng.choice(DIMS))
    a, b = _pick_window(rng)
    return {"window": [a, b], "A": _m(_window_matrix(rng, d, a, b)),
            "B": _m(_window_matrix(rng, d, a, b))}


def _psd_pair(rng, d):
    return [_m(_weight_matrix(rng, d) + rng.uniform(0.0, 0.5) * np.eye(d)) for _ in range(2)]


def gen_connection_norm(rng, dim):
    d = int(dim) if dim else int(rng.choice(DIMS))
    A, B = _psd_pair(rng, d)
    kinds = [{"kind": "arithmetic"}, {"kind": "geometric"}, {"kind": "harmonic"},
             {"kind": "power", "alpha": float(rng.uniform(0, 1))}]
    return {"A": A, "B": B, "connection": kinds[rng.integers(len(kinds))]}


def gen_connection_tensor(rng, dim):
    d = int(dim) if dim else int(rng.choice(DIMS))
    A, B = _psd_pair(rng, d)
    C, D = _psd_pair(rng, d)
    return {"A": A, "B": B, "C": C, "D": D, "connection": _supermult_connection(rng)}


def gen_scalar_kantorovich(rng, dim):
    a, b = _pick_window(rng)
    n = int(rng.integers(1, MAX_NODES + 1))
    values = rng.uniform(a, b, size=n)
    if rng.random() < 1 / 3:
        values = rng.choice([a, b], size=n)
    return {"window": [a, b], "weights": rng.uniform(0, 2, size=n).tolist(),
            "values": values.tolist()}


def gen_scalar_gruss(rng, dim):
    a, b = _pick_window(rng)
    # affine f squeezed into [a, b] on [0, 1]
    lo, hi = np.sort(rng.uniform(a, b, size=2))
    if rng.random() < 0.5:
        lo, hi = hi, lo
    return {"window": [a, b], "f": {"kind": "poly", "coeffs": [float(lo), float(hi - lo)]},
            "interval": [0.0, 1.0], "nodes": 1024}


def gen_hadamard(rng, dim):
    d = int(dim) if dim else int(rng.choice(DIMS))
    a, b = _pick_window(rng)
    n = int(rng.integers(1, MAX_NODES + 1))
    return {"window": [a, b],
            "A_list": [_m(_window_matrix(rng, d, a, b)) for _ in range(n)],
            "W_list": [_m(_weight_matrix(rng, d)) for _ in range(n)]}


@dataclass(frozen=True)
class CaseEntry:
    case_id: str
    title: str
    run: Callable[[dict], V.VerificationReport]
    generate: Callable[[np.random.Generator, int | None], dict]


def _entry(case_id, title, run, gen):
    return case_id, CaseEntry(case_id, title, run, gen)


CATALOG: dict[str, CaseEntry] = dict([
    _entry("THM32", "tensor Kantorovich inequality with operator weights", run_tensor_kantorovich, gen_tensor_kantorovich),
    _entry("COR33", "discrete operator-weight version",
           lambda c: run_tensor_kantorovich(c, "COR33"), lambda r, d: gen_tensor_kantorovich(r, d, discrete_only=True)),
    _entry("COR34", "scalar-weight version", run_scalar_weights, gen_scalar_weights),
    _entry("COR35", "discrete scalar-weight version (reverse weighted AM-HM)",
           lambda c: run_scalar_weights(c, "COR35"),
           lambda r, d: gen_scalar_weights(r, d, discrete_only=True)),
    _entry("EQ36", "uniform weights 1/n", run_uniform_weights, gen_uniform_weights),
    _entry("THM45", "operator-mean version", run_mean_kantorovich, gen_mean_kantorovich),
    _entry("COR46", "discrete operator-mean version",
           lambda c: run_mean_kantorovich(c, "COR46"), lambda r, d: gen_mean_kantorovich(r, d, discrete_only=True)),
    _entry("THM51", "f(A) and f(A^-1) version", run_reflected_function, gen_reflected_function),
    _entry("COR52", "weights W_t = g(A_t)", run_function_weights, gen_function_weights),
    _entry("COR53", "powers A^(lambda+1), A^(lambda-1)", run_power_weights, gen_power_weights),
    _entry("GRUSS_TENSOR", "Gruss-type tensor inequality", run_gruss_tensor, gen_gruss_tensor),
    _entry("THM54", "super-multiplicative operator monotone f", run_representing_function, gen_representing_function),
    _entry("COR55", "A^alpha g(A) version", run_power_pair, gen_power_pair),
    _entry("POWER_FINAL", "A^(lambda+alpha), A^(lambda-alpha) version",
           run_shifted_powers, gen_shifted_powers),
    _entry("LEM31", "A (x) B^-1 + A^-1 (x) B bound", run_inverse_pair, gen_inverse_pair),
    _entry("LEM43", "norm bound for connections", run_connection_norm, gen_connection_norm),
    _entry("LEM44", "connections and symmetric tensor products", run_connection_tensor, gen_connection_tensor),
    _entry("EQ11", "classical scalar Kantorovich", run_scalar_kantorovich, gen_scalar_kantorovich),
    _entry("EQ12", "additive Gruss integral inequality (normalized)", run_scalar_gruss, gen_scalar_gruss),
    _entry("THM11_HADAMARD", "Hadamard-product Kantorovich", run_hadamard, gen_hadamard),
])


def get_case(case_id: str) -> CaseEntry:
    try:
        return CATALOG[case_id.upper()]
    except KeyError as exc:
        raise InputError(f"unknown case id {case_id!r}; known: {', '.join(CATALOG)}") from exc


def run_case(case_id: str, config: dict) -> V.VerificationReport:
    try:
        return get_case(case_id).run(config)
    except KeyError as exc:
        raise InputError(f"config is missing key {exc}") from exc


def random_config(case_id: str, seed: int, dim: int | None = None) -> dict:
    """Deterministic random instance of ``case_id`` for ``seed``."""
    if dim is not None and not 1 <= dim <= MAX_DIM:
        raise InputError(f"dimension must be in [1, {MAX_DIM}]")
    rng = np.random.default_rng(seed)
    return get_case(case_id).generate(rng, dim)


def run_seeded(case_id: str, seed: int, dim: int | None = None) -> V.VerificationReport:
    report = run_case(case_id, random_config(case_id, seed, dim))
    report.seed = seed
    return report


def _field_shape(obj) -> tuple[int, int]:
    if "samples" in obj:
        return matrix_from_json(obj["samples"][0]).shape[0], len(obj["samples"])
    F = field_from_json(obj)
    return F.dim, 0


def config_summary(config: dict) -> dict:
    """Dimension, node count and window of a config, for tabular output.

    ``n_nodes`` counts discrete samples, or quadrature nodes for interval
    fields; plain-matrix cases report one node and scalar cases ``dim = 1``.
    """
    a, b = config.get("window", (math.nan, math.nan))
    dim, n = 1, 1
    if "A" in config and isinstance(config["A"], dict) and "dim" not in config["A"]:
        dim, n = _field_shape(config["A"])
        if n == 0:
            n = _rule(config).nodes
    elif "A" in config:
        dim = matrix_from_json(config["A"]).shape[0]
    elif "A_list" in config:
        dim = matrix_from_json(config["A_list"][0]).shape[0]
        n = len(config["A_list"])
    elif "values" in config:
        n = len(config["values"])
    elif "f" in config:
        n = int(config.get("nodes", 4096))
    return {"dim": dim, "n_nodes": n, "a": float(a), "b": float(b)}
