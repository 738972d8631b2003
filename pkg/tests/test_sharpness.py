import numpy as np
import pytest

from oplab.linalg import InputError, SpectrumWindow
from oplab.sharpness import (
    extremal_inverse_pair,
    projection_witness,
    ratio_search,
    whitened_ratio,
)

W12 = SpectrumWindow(1.0, 2.0)


@pytest.mark.parametrize("a,b,d", [(1, 2, 2), (1, 5, 3), (0.5, 1.5, 4)])
def test_inverse_pair_extremal(a, b, d):
    r = extremal_inverse_pair(SpectrumWindow(a, b), d)
    assert r.best_ratio == pytest.approx((a * a + b * b) / (a * b), abs=1e-12)
    assert abs(r.gap) <= 1e-12


@pytest.mark.parametrize("a,b,d", [(1, 2, 2), (1, 5, 3), (0.5, 1.5, 4)])
def test_projection_witness(a, b, d):
    r = projection_witness(SpectrumWindow(a, b), d)
    assert abs(r.gap) <= 1e-10
    assert abs(r.witness["margin"]) <= 1e-10


def test_projection_witness_needs_two_dims():
    with pytest.raises(InputError):
        projection_witness(W12, 1)


def test_whitened_ratio_ignores_null_directions():
    S = np.diag([1.0, 0.0])
    X = np.diag([2.0, 7.0])
    Y = np.diag([0.5, 7.0])
    assert whitened_ratio(X, Y, S) == pytest.approx(1.0)
    assert whitened_ratio(X, Y, np.zeros((2, 2))) == 0.0


def test_search_is_monotone_in_budget():
    small = ratio_search("THM32", W12, 2, 2, 300, seed=4)
    large = ratio_search("THM32", W12, 2, 2, 900, seed=4)
    assert large.best_ratio >= small.best_ratio
    assert large.history[: len(small.history)] == small.history


def test_search_is_deterministic():
    a = ratio_search("THM32", W12, 2, 2, 400, seed=2)
    b = ratio_search("THM32", W12, 2, 2, 400, seed=2)
    assert a.best_ratio == b.best_ratio
    assert a.witness == b.witness


@pytest.mark.parametrize("space", ["operator", "scalar_weights", "scalar"])
def test_search_is_sound(space):
    for seed in range(3):
        r = ratio_search("THM32", SpectrumWindow(1.0, 5.0), 3, 3, 600, seed, space=space)
        assert r.sound
        assert r.evaluations == 600


def test_scalar_space_stays_at_classical_constant():
    r = ratio_search("THM32", W12, 2, 2, 2000, seed=0, space="scalar")
    assert r.best_ratio <= 1.125 + 1e-12


def test_scalar_weights_with_matrix_nodes_reach_tensor_constant():
    r = ratio_search("COR34", W12, 2, 2, 5000, seed=0)
    assert r.witness["space"] == "scalar_weights"
    assert r.best_ratio >= 1.2499


def test_inverse_pair_search():
    r = ratio_search("LEM31", W12, 2, 2, 1000, seed=0)
    assert 2.49 <= r.best_ratio <= 2.5 + 1e-8


def test_search_input_errors():
    with pytest.raises(InputError):
        ratio_search("EQ11", W12, 2, 2, 10, 0)
    with pytest.raises(InputError):
        ratio_search("THM32", W12, 2, 2, 0, 0)
    with pytest.raises(InputError):
        ratio_search("THM32", W12, 2, 2, 10, 0, space="diagonal")
    with pytest.raises(InputError):
        ratio_search("THM32", W12, 9, 2, 10, 0)


def test_result_json():
    obj = ratio_search("THM32", W12, 2, 2, 50, 1).to_json()
    assert {"best_ratio", "constant", "gap", "witness", "evaluations", "seed"} <= set(obj)
