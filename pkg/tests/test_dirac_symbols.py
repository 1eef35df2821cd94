from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from dirac_entropy.dirac_symbols import (
    CutoffSpec,
    DiracParams,
    LineSymbol,
    covariance_residual,
    line_symbol,
    momentum_symbol,
    rescaled_symbol,
    rotation_spin_matrix,
    symbol_check,
)
from dirac_entropy.errors import AccuracyError, PreconditionError, SingularPointError
from dirac_entropy.spin_algebra import gamma

CUTOFFS = [CutoffSpec("exponential"), CutoffSpec("gaussian"), CutoffSpec("rational", rho=4.5)]


def rz(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def ry(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def slash(v):
    return sum(v[b] * gamma(b + 1) for b in range(3))


@pytest.mark.parametrize("cutoff", CUTOFFS, ids=lambda c: c.kind)
def test_cutoff_basic_invariants(cutoff):
    t = np.linspace(0, 50, 2001)
    phi = cutoff(t)
    assert cutoff(0.0) == 1.0
    assert np.all((phi >= 0) & (phi <= 1))
    assert np.all(np.diff(phi) <= 0)


def test_cutoff_families():
    assert CutoffSpec("exponential")(2.0) == pytest.approx(math.exp(-2))
    assert CutoffSpec("gaussian")(2.0) == pytest.approx(math.exp(-4))
    assert CutoffSpec("rational", rho=4)(1.0) == pytest.approx(1 / 16)
    assert CutoffSpec("exponential", scale=2.0)(2.0) == pytest.approx(math.exp(-1))


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=3.01, max_value=12), st.floats(min_value=0, max_value=1e4))
def test_rational_decay_bound(rho, t):
    assert CutoffSpec("rational", rho=rho)(t) <= (1 + t) ** (-rho) * (1 + 1e-12)


@pytest.mark.parametrize("kw", [{"kind": "rational", "rho": 3.0}, {"kind": "rational"}, {"kind": "box"},
                                {"kind": "gaussian", "rho": 5.0}, {"kind": "exponential", "scale": 0.0}])
def test_cutoff_validation(kw):
    with pytest.raises(ValueError):
        CutoffSpec(**kw)


def test_cutoff_tail_helpers():
    c = CutoffSpec("exponential")
    assert c(c.tail_length(1e-13)) == pytest.approx(1e-13)
    assert c.tail_integral(3.0) == pytest.approx(math.exp(-3))
    g = CutoffSpec("gaussian")
    assert g.tail_integral(0.0) == pytest.approx(math.sqrt(math.pi) / 2)


def test_params_round_trip():
    p = DiracParams(1.5, 0.1, CutoffSpec("rational", rho=5))
    assert DiracParams.from_dict(p.to_dict()) == p
    assert p.mu == pytest.approx(0.15)
    with pytest.raises(ValueError):
        DiracParams(-1.0, 0.1)
    with pytest.raises(ValueError):
        DiracParams(1.0, float("inf"))


def test_rest_frame_projector():
    p = momentum_symbol(DiracParams(1.0, 0.0), [0, 0, 0], regularized=False)
    assert np.allclose(p, np.diag([0, 0, 1, 1]), atol=1e-15)


def test_projector_idempotent_at_123():
    p = momentum_symbol(DiracParams(1.0, 0.3), [1, 2, 3], regularized=False)
    assert np.max(np.abs(p @ p - p)) < 1e-12
    assert np.max(np.abs(p - p.conj().T)) < 1e-15


def test_projector_formula_direct():
    params = DiracParams(0.7, 0.2)
    k = np.array([0.3, -1.1, 0.4])
    e = math.sqrt(k @ k + 0.49)
    direct = 0.5 * (np.eye(4) + (slash(k) @ gamma(0) - 0.7 * gamma(0)) / e)
    assert np.allclose(momentum_symbol(params, k, regularized=False), direct, atol=1e-15)
    assert np.allclose(momentum_symbol(params, k), direct * math.exp(-0.2 * e), atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 3), st.lists(st.floats(-20, 20), min_size=3, max_size=3))
def test_projector_trace_and_idempotency(m, k):
    k = np.array(k)
    assume(m * m + k @ k > 1e-100)
    p = momentum_symbol(DiracParams(m, 0.5), k, regularized=False)
    assert abs(np.trace(p) - 2) < 1e-12
    assert np.max(np.abs(p @ p - p)) < 1e-12


def test_singular_point():
    params = DiracParams(0.0, 0.5)
    with pytest.raises(SingularPointError):
        momentum_symbol(params, [0, 0, 0], regularized=False)
    conv = momentum_symbol(params, [0, 0, 0], singular="convention")
    assert np.allclose(conv, 0.5 * np.eye(4))
    with pytest.raises(SingularPointError):
        rescaled_symbol(DiracParams(0.0, 0.0), [0, 0, 0])


def test_massless_symbol_independent_of_epsilon():
    xi = np.random.default_rng(0).normal(size=(50, 3))
    ref = rescaled_symbol(DiracParams(0.0, 0.0), xi)
    for eps in (0.05, 0.5, 3.0):
        assert np.array_equal(rescaled_symbol(DiracParams(0.0, eps), xi), ref)


def test_rescaled_matches_momentum_symbol():
    params = DiracParams(1.3, 0.4)
    k = np.random.default_rng(1).normal(size=(20, 3)) * 3
    assert np.allclose(rescaled_symbol(params, params.epsilon * k), momentum_symbol(params, k), atol=1e-14)


@pytest.mark.parametrize("cutoff", CUTOFFS, ids=lambda c: c.kind)
def test_rescaled_eigenvalues(cutoff):
    params = DiracParams(1.0, 0.3, cutoff)
    xi = np.random.default_rng(2).normal(size=(200, 3)) * 2
    w = np.linalg.eigvalsh(rescaled_symbol(params, xi))
    phi = cutoff(np.sqrt(np.sum(xi * xi, axis=1) + params.mu**2))
    assert np.max(np.abs(w - np.stack([0 * phi, 0 * phi, phi, phi], axis=1))) < 1e-12
    assert np.all(w >= -1e-12) and np.all(w <= 1 + 1e-12)
    tr = np.trace(rescaled_symbol(params, xi), axis1=1, axis2=2)
    assert np.max(np.abs(tr - 2 * phi)) < 1e-12


def test_limit_symbol_on_axis():
    a = rescaled_symbol(DiracParams(0.0, 0.0), [0, 0, 1])
    assert np.allclose(a, 0.5 * (np.eye(4) + gamma(3) @ gamma(0)) * math.exp(-1), atol=1e-15)


def test_line_symbol_is_restriction():
    params = DiracParams(1.0, 0.2)
    line = LineSymbol(0.7, params)
    t = np.linspace(-5, 5, 21)
    pts = np.stack([np.full_like(t, 0.7), 0 * t, t], axis=1)
    assert np.array_equal(line_symbol(line, t), rescaled_symbol(params, pts))
    other = LineSymbol(0.7, params, transverse_axis=1)
    assert np.array_equal(other.points(1.0), [0.0, 0.7, 1.0])


def test_line_symbol_decay():
    line = LineSymbol(1.0, DiracParams(0.0, 0.0))
    t = np.array([5.0, 10.0, 20.0, 40.0])
    norms = np.linalg.norm(line(t), axis=(1, 2))
    bound = 2 * math.sqrt(2) * np.exp(-np.sqrt(1 + t * t)) / 2 * math.sqrt(2)
    assert np.all(np.diff(norms) < 0)
    # Frobenius norm of a rank-two projector times phi is sqrt(2) phi
    assert np.allclose(norms, math.sqrt(2) * np.exp(-np.sqrt(1 + t * t)), rtol=1e-12)
    assert np.all(norms <= bound)


def test_line_symbol_jump_at_singular_point():
    line = LineSymbol(0.0, DiracParams(0.0, 0.0))
    jump = line(1e-12) - line(-1e-12)
    assert np.allclose(jump, gamma(3) @ gamma(0), atol=1e-11)
    with pytest.raises(SingularPointError):
        line(0.0)


def test_components_reconstruct_symbol():
    from dirac_entropy.dirac_symbols import _ALPHA, _BETA

    for axis in (0, 1):
        line = LineSymbol(0.6, DiracParams(2.0, 0.1), transverse_axis=axis)
        t = np.linspace(-3, 3, 13)
        gi, gp, ga = line.components(t)
        rebuilt = (gi[:, None, None] * np.eye(4) + gp[:, None, None] * (0.6 * _ALPHA[axis] - 0.2 * _BETA)
                   + ga[:, None, None] * _ALPHA[2])
        assert np.allclose(rebuilt, line(t), atol=1e-15)


def test_identity_rotation():
    assert np.array_equal(rotation_spin_matrix(np.eye(3)), np.eye(4))


def test_z_rotation_matrix():
    theta = 0.83
    q = rotation_spin_matrix(rz(theta))
    # covariance requires the conjugate of the displayed diagonal matrix for a
    # counter-clockwise R_z(theta); equivalently the displayed form at -theta
    displayed = np.diag(np.exp(-1j * theta / 2 * np.array([1, -1, 1, -1])))
    assert np.allclose(rotation_spin_matrix(rz(-theta)), displayed, atol=1e-15)
    assert np.allclose(q, displayed.conj(), atol=1e-15)


def test_displayed_matrix_fails_for_counter_clockwise_rotation():
    theta = 0.83
    displayed = np.diag(np.exp(-1j * theta / 2 * np.array([1, -1, 1, -1])))
    v = np.array([1.0, 0.0, 0.0])
    lhs = displayed @ slash(rz(theta) @ v) @ np.linalg.inv(displayed)
    assert np.max(np.abs(lhs - slash(v))) > 0.5


def rotation_residual(r, q, vs):
    qi = q.conj().T
    return max(np.max(np.abs(q @ slash(r @ v) @ qi - slash(v))) for v in vs)


@pytest.mark.parametrize("r", [ry(math.pi), rz(0.4) @ ry(math.pi), rz(1.1) @ ry(1e-11) @ rz(0.3), ry(math.pi - 1e-12),
                               rz(math.pi), np.diag([-1.0, -1.0, 1.0])],
                         ids=["ry_pi", "rz_ry_pi", "near_identity_tilt", "near_flip", "rz_pi", "diag"])
def test_gimbal_cases(r):
    q = rotation_spin_matrix(r)
    vs = np.random.default_rng(5).normal(size=(20, 3))
    assert rotation_residual(r, q, vs) < 1e-9
    assert np.allclose(q @ gamma(0) @ q.conj().T, gamma(0), atol=1e-12)


def test_random_rotations_su4():
    rots = Rotation.random(100, random_state=11).as_matrix()
    vs = np.random.default_rng(11).normal(size=(100, 3))
    worst = 0.0
    for r in rots:
        q = rotation_spin_matrix(r)
        assert abs(np.linalg.det(q) - 1) < 1e-12
        assert np.allclose(q @ q.conj().T, np.eye(4), atol=1e-13)
        assert np.allclose(q @ gamma(0) @ q.conj().T, gamma(0), atol=1e-14)
        worst = max(worst, rotation_residual(r, q, vs))
    assert worst < 1e-12


def test_rotation_rejects_non_rotations():
    with pytest.raises(PreconditionError):
        rotation_spin_matrix(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(PreconditionError):
        rotation_spin_matrix(2 * np.eye(3))
    with pytest.raises(PreconditionError):
        rotation_spin_matrix(np.eye(2))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(CUTOFFS), st.floats(0, 2), st.floats(0, 1))
def test_symbol_covariance(seed, cutoff, m, eps):
    rng = np.random.default_rng(seed)
    r = Rotation.random(random_state=seed).as_matrix()
    xi = rng.normal(size=(10, 3))
    assert covariance_residual(DiracParams(m, eps, cutoff), r, xi) < 1e-10


def test_symbol_check_suite():
    res = symbol_check(DiracParams(1.0, 0.5))
    assert res["anticommutator"] == 0
    assert res["idempotency"] < 1e-12 and res["trace"] < 1e-12
    assert res["eigenvalues"] < 1e-12 and res["covariance"] < 1e-10


def test_check_tail_refuses_slow_cutoffs():
    from dirac_entropy.dirac_symbols import check_tail

    assert check_tail(CutoffSpec("exponential"), 1e-12) < 30
    with pytest.raises(AccuracyError):
        check_tail(CutoffSpec("rational", rho=3.5), 1e-12, limit=1e3)
