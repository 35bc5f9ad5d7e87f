import math

import numpy as np
import pytest

from seqrac.errors import BadSharpness, DimensionMismatch, NoConvergence, NotHermitian, NotPsd
from seqrac.game import p_ab, p_ac
from seqrac.qubit import tradeoff_pab, tradeoff_pac
from seqrac.seesaw import (
    SWEEP_FIELDS, SeesawConfig, dimension_sweep, duality_gap, eta_critical, kkt_residual, lueders_kraus,
    pab_unsharp_reference, povm_linear_opt, replay, seesaw_run, state_opt,
)


def random_hermitians(n, dim, rng):
    a = rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))
    return (a + np.swapaxes(a.conj(), 1, 2)) / 2


def random_povms(count, outcomes, dim, rng):
    """count random POVMs, shape (count, outcomes, dim, dim)."""
    a = rng.standard_normal((count, outcomes, dim, dim)) + 1j * rng.standard_normal((count, outcomes, dim, dim))
    g = np.einsum("cbji,cbjk->cbik", a.conj(), a)
    w, v = np.linalg.eigh(g.sum(axis=1))
    s = np.einsum("cij,cj,ckj->cik", v, w ** -0.5, v.conj())
    return np.einsum("cij,cbjk,ckl->cbil", s, g, s)


# --- Kraus construction ----------------------------------------------------


@pytest.mark.parametrize("d", range(2, 7))
@pytest.mark.parametrize("eta", [0.0, 0.3, 1.0])
def test_lueders_kraus_completeness_and_effect(d, eta):
    basis = np.eye(d)
    ks = [lueders_kraus(np.outer(basis[b], basis[b]), eta, d) for b in range(d)]
    total = sum(k.conj().T @ k for k in ks)
    assert np.abs(total - np.eye(d)).max() < 1e-12
    for b, k in enumerate(ks):
        m = np.outer(basis[b], basis[b])
        assert np.allclose(k.conj().T @ k, eta * m + (1 - eta) * np.eye(d) / d, atol=1e-12)


def test_lueders_kraus_examples():
    p = np.diag([1.0, 0.0])
    assert np.allclose(lueders_kraus(p, 1.0, 2), p)
    assert np.allclose(lueders_kraus(p, 0.0, 2), np.eye(2) / math.sqrt(2))


def test_lueders_kraus_validation():
    with pytest.raises(BadSharpness):
        lueders_kraus(np.eye(2), 1.2, 2)
    with pytest.raises(DimensionMismatch):
        lueders_kraus(np.eye(3), 0.5, 2)
    with pytest.raises(NotPsd):
        lueders_kraus(-np.eye(2), 0.5, 2)


# --- POVM subproblem -------------------------------------------------------


def test_two_outcome_closed_form():
    rng = np.random.default_rng(0)
    for dim in range(2, 7):
        a = random_hermitians(2, dim, rng)
        povm, val = povm_linear_opt(a)
        w = np.linalg.eigvalsh(a[0] - a[1])
        assert val == pytest.approx(np.trace(a[1]).real + w[w > 0].sum(), abs=1e-10)
        assert kkt_residual(a, povm.effects) < 1e-9


def test_state_discrimination_example():
    # two orthogonal pure states are perfectly distinguishable
    a = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)
    _, val = povm_linear_opt(a)
    assert val == pytest.approx(2.0)


@pytest.mark.parametrize("dim,outcomes", [(2, 3), (3, 3), (4, 4)])
def test_povm_dominates_random_feasible(dim, outcomes):
    rng = np.random.default_rng(dim * 10 + outcomes)
    a = random_hermitians(outcomes, dim, rng)
    povm, val = povm_linear_opt(a)
    assert duality_gap(a, povm.effects) < 1e-9
    samples = random_povms(10_000, outcomes, dim, rng)
    vals = np.einsum("bij,cbji->c", a, samples).real
    assert vals.max() <= val + 1e-9


def test_non_projective_optimum_certified():
    # random data in dimension 4 with 8 outcomes has rank-one non-projective optima
    rng = np.random.default_rng(7)
    for _ in range(5):
        a = random_hermitians(8, 4, rng)
        povm, val = povm_linear_opt(a)
        assert duality_gap(a, povm.effects) < 1e-9
        assert np.allclose(povm.effects.sum(axis=0), np.eye(4), atol=1e-10)


def test_duality_gap_of_suboptimal_povm():
    a = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)
    # true suboptimality is 1; the gap is an upper bound on it
    assert duality_gap(a, np.array([np.eye(2), np.zeros((2, 2))])) >= 1.0
    assert kkt_residual(a, np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])) < 1e-15


def test_povm_single_operator_and_validation():
    povm, val = povm_linear_opt([np.diag([1.0, 2.0])])
    assert val == pytest.approx(3.0)
    with pytest.raises(NotHermitian):
        povm_linear_opt([np.array([[0, 1], [0, 0]]), np.eye(2)])
    with pytest.raises(DimensionMismatch):
        povm_linear_opt(np.eye(2))


# --- state subproblem ------------------------------------------------------


def test_state_opt_top_eigenvectors():
    rng = np.random.default_rng(5)
    b = random_hermitians(9, 3, rng)
    prep = state_opt(b)
    vals = [np.trace(prep.states[i // 3, i % 3] @ b[i]).real for i in range(9)]
    assert np.allclose(vals, [np.linalg.eigvalsh(m)[-1] for m in b])
    with pytest.raises(DimensionMismatch):
        state_opt(b[:8])


def test_state_opt_degenerate_is_deterministic():
    b = np.array([np.eye(2)] * 4, dtype=complex)
    p1, p2 = state_opt(b), state_opt(b)
    assert np.array_equal(p1.states, p2.states)
    assert np.allclose(p1.states[0, 0], np.diag([1, 0]))


# --- loop ------------------------------------------------------------------


def test_eta_critical_values():
    assert eta_critical(2) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    for d in range(2, 7):
        assert pab_unsharp_reference(d, eta_critical(d)) == pytest.approx(0.5 * (1 + 1 / d), abs=1e-12)


def test_sharp_qubit_recovery():
    res = seesaw_run(SeesawConfig(2, 1.0, restarts=4))
    assert res.converged
    assert res.p_ab == pytest.approx(0.5 * (1 + 1 / math.sqrt(2)), abs=1e-6)
    assert res.p_ac == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("eta", [0.0, 0.4, 0.8])
def test_qubit_tradeoff_recovery(eta):
    res = seesaw_run(SeesawConfig(2, eta, restarts=4))
    assert res.p_ab == pytest.approx(tradeoff_pab(eta), abs=1e-6)
    assert res.p_ac == pytest.approx(tradeoff_pac(eta), abs=1e-4)


def test_monotone_ascent_in_pab():
    res = seesaw_run(SeesawConfig(3, 0.6, restarts=3))
    for run in res.restarts:
        t = run.trace
        seq = np.ravel(list(zip(t.pab_step1, t.pab_step3)))
        assert np.all(np.diff(seq) >= -1e-10)


def test_replay_matches_reported():
    res = seesaw_run(SeesawConfig(3, eta_critical(3), restarts=3))
    ab, ac = replay(res)
    assert ab == pytest.approx(res.p_ab, abs=1e-12)
    assert ac == pytest.approx(res.p_ac, abs=1e-12)
    assert p_ab(res.strategy) * p_ac(res.strategy) == pytest.approx(res.p_joint, abs=1e-12)


def test_kraus_of_result_complete_and_unsharp():
    eta = 0.55
    res = seesaw_run(SeesawConfig(3, eta, restarts=2))
    kraus = res.strategy.instrument.kraus
    for y in (0, 1):
        assert np.abs(np.einsum("bji,bjk->ik", kraus[y].conj(), kraus[y]) - np.eye(3)).max() < 1e-9
        eff = np.einsum("bji,bjk->bik", kraus[y].conj(), kraus[y])
        sharp = (eff - (1 - eta) * np.eye(3) / 3) / eta
        assert np.allclose(np.einsum("bij,bjk->bik", sharp, sharp), sharp, atol=1e-8)


def test_determinism_across_workers():
    cfg = SeesawConfig(3, 0.7, restarts=4, seed=11)
    r1, r2 = seesaw_run(cfg), seesaw_run(cfg, workers=3)
    assert (r1.p_ab, r1.p_ac, r1.best_restart, r1.iterations) == (r2.p_ab, r2.p_ac, r2.best_restart, r2.iterations)


def test_no_convergence_strict():
    cfg = SeesawConfig(3, 0.7, restarts=1, max_iters=1)
    res = seesaw_run(cfg)
    assert not res.converged
    with pytest.raises(NoConvergence) as exc:
        seesaw_run(cfg, strict=True)
    assert exc.value.result.p_ab == res.p_ab


def test_config_validation():
    with pytest.raises(BadSharpness):
        SeesawConfig(2, -0.1)
    with pytest.raises(ValueError):
        SeesawConfig(2, 0.5, restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig(2, 0.5, tol=0)


def test_dimension_sweep_rows():
    rows = dimension_sweep([2], restarts=2)
    assert [r["mode"] for r in rows] == ["classical", "eta_critical", "sharp"]
    assert all(set(SWEEP_FIELDS) <= set(r) for r in rows)
    assert rows[0]["p_total"] == 0.375
    assert rows[1]["p_total"] > 0.375
