import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oplab import scalar
from oplab import verifiers as V
from oplab.fields import LEBESGUE, Interval, MeasureSpec, OperatorField, QuadratureRule
from oplab.linalg import InputError, SpectrumWindow, random_hermitian_in_window, random_psd
from oplab.means import connection, power_mean

W12 = SpectrumWindow(1.0, 2.0)
I2 = np.eye(2)


def disc(*mats):
    return OperatorField.discrete(list(mats))


def projection_witness():
    P = np.diag([1.0, 0.0])
    return disc(I2, 2 * I2), disc(P, I2 - P)


def test_projection_witness_is_tight():
    A, W = projection_witness()
    rep = V.verify_tensor_kantorovich(A, W, W12)
    assert rep.passed and rep.hypotheses_ok
    assert rep.margin == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(rep.lhs_spectrum, [1.0, 1.0, 1.25, 1.25], atol=1e-12)
    assert rep.constant_used == 1.25


def test_scalar_weights_example():
    A = disc(I2, 2 * I2)
    rep = V.verify_scalar_weights(A, [0.5, 0.5], W12)
    assert rep.margin == pytest.approx(0.125, abs=1e-12)


def test_scalar_weights_with_matrix_nodes_can_be_tight():
    # with non-scalar nodes, scalar weights still reach the tensor constant
    rep = V.verify_scalar_weights(disc(np.diag([1.0, 2.0])), [1.0], W12)
    assert rep.lhs_spectrum[-1] == pytest.approx(1.25)
    assert rep.margin == pytest.approx(0.0, abs=1e-12)


def test_uniform_weights():
    rep = V.verify_uniform_weights(disc(I2, 2 * I2), W12)
    assert rep.passed
    assert rep.margin == pytest.approx(0.125, abs=1e-12)
    with pytest.raises(InputError):
        V.verify_uniform_weights(OperatorField.constant(I2, Interval(0, 1)), W12)


def test_window_violation_is_flagged():
    rep = V.verify_tensor_kantorovich(disc(3 * I2), disc(I2), W12)
    assert not rep.hypotheses_ok
    assert rep.failed_flags()[0].name == "spectrum in window"


def test_mean_geometric_example():
    A, B, W = disc(I2, 2 * I2), disc(2 * I2, I2), disc(0.5 * I2, 0.5 * I2)
    rep = V.verify_mean_kantorovich(A, B, W, connection("geometric"), W12)
    assert rep.margin == pytest.approx(0.25, abs=1e-10)
    assert rep.hypotheses_ok


def test_mean_with_equal_arguments_reduces_to_plain():
    A, W = disc(I2, 2 * I2), disc(0.5 * I2, 0.5 * I2)
    mean = V.verify_mean_kantorovich(A, A, W, connection("geometric"), W12)
    plain = V.verify_tensor_kantorovich(A, W, W12)
    assert mean.margin == plain.margin
    assert mean.lhs_spectrum == plain.lhs_spectrum
    assert mean.rhs_spectrum == plain.rhs_spectrum


def test_mean_harmonic_flags_hypothesis():
    A, B, W = disc(I2, 2 * I2), disc(2 * I2, I2), disc(0.5 * I2, 0.5 * I2)
    rep = V.verify_mean_kantorovich(A, B, W, connection("harmonic"), W12)
    bad = rep.failed_flags()
    assert bad and "super-multiplicativity violated at (0.5,0.5)" in bad[0].detail


def test_reflected_function_flags_bad_function():
    rep = V.verify_reflected_function(scalar.poly(0.0, 3.0), disc(I2), disc(I2), W12)
    assert not rep.hypotheses_ok
    ok = V.verify_reflected_function(scalar.power(1.0), disc(I2, 2 * I2), disc(I2, I2), W12)
    assert ok.hypotheses_ok and ok.passed


def test_function_and_power_weights_on_commuting_nodes():
    A = disc(I2, 2 * I2)
    assert V.verify_function_weights(scalar.IDENTITY, scalar.const(1.0), A, W12).passed
    rep = V.verify_power_weights(0.5, A, W12)
    assert rep.passed and rep.hypotheses_ok


def test_gruss_tensor_requires_normalized_measure():
    A = OperatorField.interval(0.0, 1.0, [(scalar.poly(1.0, 1.0), I2)])
    good = V.verify_gruss_tensor(A, W12, MeasureSpec("lebesgue", normalized=True),
                                 QuadratureRule("midpoint", 32))
    assert good.passed and good.hypotheses_ok
    bad = V.verify_gruss_tensor(A, W12, LEBESGUE, QuadratureRule("midpoint", 32))
    assert not bad.hypotheses_ok


def test_representing_function_needs_one_in_window():
    A, W = disc(I2, 2 * I2), disc(I2, I2)
    assert V.verify_representing_function(power_mean(0.5), A, W, W12).hypotheses_ok
    rep = V.verify_representing_function(power_mean(0.5), disc(2 * I2, 3 * I2), W, SpectrumWindow(2.0, 3.0))
    assert any(f.name == "1 in [a,b]" for f in rep.failed_flags())


@pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.3, 1.0])
def test_power_pair_full_alpha_range(alpha):
    A = disc(np.diag([1.0, 2.0]), I2, 2 * I2)
    rep = V.verify_power_pair(alpha, scalar.const(1.0), A, W12)
    assert rep.passed and rep.hypotheses_ok


def test_shifted_powers():
    rep = V.verify_shifted_powers(0.7, 0.5, disc(np.diag([1.0, 2.0]), 1.5 * I2), W12)
    assert rep.passed and rep.hypotheses_ok


def test_inverse_pair_witness_and_trivial_case():
    rep = V.verify_inverse_pair(I2, 2 * I2, W12)
    assert rep.margin == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(rep.lhs_spectrum, [2.5] * 4)
    same = V.verify_inverse_pair(1.5 * I2, 1.5 * I2, SpectrumWindow(1.5, 1.5))
    assert same.margin == 0.0
    wide = V.verify_inverse_pair(1.5 * I2, 1.5 * I2, W12)
    assert wide.margin == pytest.approx(0.5)


def test_connection_norm_example():
    rep = V.verify_connection_norm(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), connection("geometric"))
    assert rep.passed
    assert rep.margin == pytest.approx(1.0, abs=1e-4)


def test_connection_tensor_random():
    mats = [random_psd(2, s) + 0.1 * I2 for s in range(4)]
    rep = V.verify_connection_tensor(*mats, connection("geometric"))
    assert rep.passed and rep.hypotheses_ok


def test_scalar_kantorovich_extremal():
    rep = V.verify_scalar_kantorovich([1.0, 1.0], [1.0, 2.0], W12)
    assert rep.margin == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InputError):
        V.verify_scalar_kantorovich([], [], W12)


def test_scalar_gruss_linear_profile():
    rep = V.verify_scalar_gruss(scalar.poly(1.0, 1.0), (0.0, 1.0), W12)
    assert rep.margin == pytest.approx(81 / 32 - 7 / 3, abs=1e-6)


def test_hadamard_example():
    rep = V.verify_hadamard_kantorovich([np.diag([1.0, 2.0])], [I2], W12)
    assert rep.margin == pytest.approx(0.25, abs=1e-12)


def test_pass_tolerance_env(monkeypatch):
    monkeypatch.setenv("OPLAB_TOL", "1e-3")
    assert V.pass_tolerance() == 1e-3
    monkeypatch.setenv("OPLAB_TOL", "nope")
    with pytest.raises(InputError):
        V.pass_tolerance()
    monkeypatch.delenv("OPLAB_TOL")
    assert V.pass_tolerance() == V.DEFAULT_TOL


def test_report_json_keys():
    A, W = projection_witness()
    obj = V.verify_tensor_kantorovich(A, W, W12).to_json()
    assert set(obj) == {"case_id", "constant", "margin", "pass", "lhs_spectrum",
                        "rhs_spectrum", "hypothesis_flags", "seed"}


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4), d=st.integers(1, 4),
       window=st.sampled_from([(1.0, 2.0), (1.0, 5.0), (0.5, 1.5)]))
def test_tensor_kantorovich_random_sound(seed, n, d, window):
    w = SpectrumWindow(*window)
    rng = np.random.default_rng(seed)
    A = disc(*[random_hermitian_in_window(d, w, rng.integers(2**32)) for _ in range(n)])
    W = disc(*[random_psd(d, rng.integers(2**32)) for _ in range(n)])
    rep = V.verify_tensor_kantorovich(A, W, w)
    assert rep.hypotheses_ok
    assert rep.passed, rep.margin


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4))
def test_scalar_kantorovich_random_sound(seed, n):
    rng = np.random.default_rng(seed)
    rep = V.verify_scalar_kantorovich(rng.uniform(0, 1, n), rng.uniform(1, 5, n),
                                      SpectrumWindow(1.0, 5.0))
    assert rep.passed
    assert math.isfinite(rep.margin)
