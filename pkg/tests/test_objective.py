import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqkd_psk import oracle, sdp
from cvqkd_psk.objective import (
    ObjectiveContext,
    UndefinedRateError,
    conditional_probabilities,
    delta_ec,
    delta_ec_from_probabilities,
    p_pass,
    p_pass_from_probabilities,
)
from cvqkd_psk.engine import feasible_direction, initial_state
from cvqkd_psk.protocol import ProtocolConfig, build_constraints, source_replacement_state


def random_state(rng, n, rank=None):
    B = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    rho = B @ B.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="module")
def small():
    cfg = ProtocolConfig(n_cutoff=5, distance_km=20, xi=0.01, delta_r=0.3)
    return cfg, ObjectiveContext.from_config(cfg)


@pytest.fixture(scope="module")
def feasible_states():
    """Two feasible states from linear objectives over the constraint set."""
    cfg = ProtocolConfig(n_cutoff=6, distance_km=50, xi=0.01)
    cons = build_constraints(cfg)
    rng = np.random.default_rng(11)
    states = []
    for _ in range(3):
        C = rng.normal(size=(cfg.dim_AB, cfg.dim_AB)) + 1j * rng.normal(size=(cfg.dim_AB, cfg.dim_AB))
        C = 0.5 * (C + C.conj().T)
        sol = sdp.solve(sdp.LinearSDP(C=C, A=cons.ops, b=cons.values, kron=cons.kron))
        assert sol.primal_residual < 1e-7
        states.append(0.5 * (sol.X + sol.X.conj().T))
    return cfg, ObjectiveContext.from_config(cfg), cons, states


def test_perturbation_range():
    cfg = ProtocolConfig(n_cutoff=4)
    ctx = ObjectiveContext.from_config(cfg)
    with pytest.raises(ValueError):
        ObjectiveContext(cfg=cfg, post=ctx.post, perturbation=1.0)


def test_zero_state_gives_zero(small):
    cfg, ctx = small
    assert ctx.value(np.zeros((cfg.dim_AB, cfg.dim_AB), complex)) == pytest.approx(0, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_fast_matches_dense(seed):
    cfg = ProtocolConfig(n_cutoff=4, delta_r=0.5, xi=0.02, distance_km=10)
    ctx = _ctx(cfg)
    rho = random_state(np.random.default_rng(seed), cfg.dim_AB)
    f, g = ctx.value_and_gradient(rho)
    assert f == pytest.approx(ctx.value_dense(rho), abs=1e-9)
    assert np.abs(g - ctx.gradient_dense(rho)).max() < 1e-7 * max(1, np.abs(g).max())
    assert ctx.value(rho) == pytest.approx(f, abs=1e-12)


_CTX = {}


def _ctx(cfg):
    if cfg not in _CTX:
        _CTX[cfg] = ObjectiveContext.from_config(cfg)
    return _CTX[cfg]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_value_nonnegative(seed):
    cfg = ProtocolConfig(n_cutoff=4, delta_r=0.2)
    rho = random_state(np.random.default_rng(seed), cfg.dim_AB)
    assert _ctx(cfg).value(rho) >= -1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_gradient_hermitian(seed):
    cfg = ProtocolConfig(n_cutoff=4)
    rho = random_state(np.random.default_rng(seed), cfg.dim_AB)
    g = _ctx(cfg).gradient(rho)
    assert np.abs(g - g.conj().T).max() < 1e-10


def test_finite_differences(feasible_states):
    cfg, ctx, cons, states = feasible_states
    rho = initial_state(cfg, cons)
    g = ctx.gradient(rho)
    t = 1e-5
    rng = np.random.default_rng(8)
    for _ in range(5):
        d = feasible_direction(rho, cons, rng, radius=100.0)
        fd = (ctx.value(rho + t * d) - ctx.value(rho - t * d)) / (2 * t)
        an = np.real(np.vdot(g, d))
        assert abs(fd - an) <= 1e-4 * abs(an)


def test_feasible_directions_keep_constraints(feasible_states):
    cfg, ctx, cons, (r0, r1, _) = feasible_states
    assert np.abs(cons.evaluate(r1 - r0)).max() < 1e-7


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_convex_along_feasible_segment(feasible_states, lam):
    cfg, ctx, cons, (r0, r1, r2) = feasible_states
    for a, b in ((r0, r1), (r1, r2)):
        mix = lam * a + (1 - lam) * b
        assert ctx.value(mix) <= lam * ctx.value(a) + (1 - lam) * ctx.value(b) + 1e-8


# -- classical terms ------------------------------------------------------------


def test_rows_sum_to_one_without_postselection():
    cfg = ProtocolConfig(n_cutoff=8, distance_km=30, xi=0.01)
    rho = source_replacement_state(cfg, math.sqrt(cfg.eta))
    rho /= np.trace(rho).real
    P = conditional_probabilities(rho, _ctx(cfg).post, cfg.probs)
    assert np.allclose(P.sum(axis=1), 1, atol=1e-10)
    assert p_pass(rho, _ctx(cfg).post, cfg.probs) == pytest.approx(1, abs=1e-10)


def test_symmetric_success_probabilities():
    cfg = ProtocolConfig(n_cutoff=14)
    rho = source_replacement_state(cfg)
    P = conditional_probabilities(rho, _ctx(cfg).post, cfg.probs)
    assert np.allclose(np.diag(P), P[0, 0], atol=1e-12)


def test_success_probability_against_quadrature():
    cfg = ProtocolConfig(n_cutoff=14)
    rho = source_replacement_state(cfg)
    P = conditional_probabilities(rho, _ctx(cfg).post, cfg.probs)
    assert P[0, 0] == pytest.approx(oracle.wedge_probability(0, 0, cfg), abs=1e-6)


def test_p_pass_equals_trace_of_g():
    cfg = ProtocolConfig(n_cutoff=6, delta_r=0.6, distance_km=40)
    ctx = _ctx(cfg)
    rho = random_state(np.random.default_rng(4), cfg.dim_AB)
    assert p_pass(rho, ctx.post, cfg.probs) == pytest.approx(np.trace(ctx.post.G(rho)).real, abs=1e-8)


def test_p_pass_decreases_with_delta_r():
    base = ProtocolConfig(n_cutoff=8, distance_km=50)
    vals = []
    for dr in (0.0, 0.3, 0.6, 1.0, 2.0, 4.0):
        cfg = ProtocolConfig(n_cutoff=8, distance_km=50, delta_r=dr)
        rho = source_replacement_state(base, math.sqrt(base.eta))
        rho /= np.trace(rho).real
        vals.append(p_pass(rho, _ctx(cfg).post, cfg.probs))
    assert vals[0] == pytest.approx(1, abs=1e-10)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-6


def test_delta_ec_examples():
    probs = np.full(8, 1 / 8)
    uniform = np.full((8, 8), 1 / 8)
    assert delta_ec_from_probabilities(uniform, probs, 1.0) == pytest.approx(3.0)
    perfect = np.eye(8)
    assert delta_ec_from_probabilities(perfect, probs, 0.95) == pytest.approx(0.15)
    rng = np.random.default_rng(0)
    P = rng.random((8, 8))
    P /= P.sum(axis=1, keepdims=True)
    joint = P / 8
    hzx = -np.sum(joint * np.log2(joint)) - 3
    assert delta_ec_from_probabilities(P, probs, 1.0) == pytest.approx(hzx)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.integers(0, 2 ** 31))
def test_delta_ec_nonincreasing_in_beta(b1, b2, seed):
    rng = np.random.default_rng(seed)
    P = rng.random((8, 8)) * rng.random()
    probs = np.full(8, 1 / 8)
    lo, hi = sorted((b1, b2))
    assert delta_ec_from_probabilities(P, probs, hi) <= delta_ec_from_probabilities(P, probs, lo) + 1e-12


def test_delta_ec_postselected_renormalisation():
    # halving every probability (p_pass = 1/2) leaves the leakage per passed signal alone
    rng = np.random.default_rng(1)
    P = rng.random((8, 8))
    P /= P.sum(axis=1, keepdims=True)
    probs = np.full(8, 1 / 8)
    assert delta_ec_from_probabilities(0.5 * P, probs, 0.9) == pytest.approx(delta_ec_from_probabilities(P, probs, 0.9))
    assert p_pass_from_probabilities(0.5 * P, probs) == pytest.approx(0.5)


def test_delta_ec_undefined_without_passes():
    with pytest.raises(UndefinedRateError):
        delta_ec_from_probabilities(np.zeros((8, 8)), np.full(8, 1 / 8), 0.9)


def test_delta_ec_from_state():
    cfg = ProtocolConfig(n_cutoff=8)
    rho = source_replacement_state(cfg)
    assert 0 < delta_ec(rho, _ctx(cfg).post, cfg) < 3


def test_zero_probability_rejected():
    cfg = ProtocolConfig(n_cutoff=4)
    with pytest.raises(ValueError):
        conditional_probabilities(np.eye(cfg.dim_AB), _ctx(cfg).post, np.zeros(8))
