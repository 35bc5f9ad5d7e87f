import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from seqrac.errors import BadDimension, DimensionMismatch
from seqrac.game import (
    classical_bruteforce, classical_optimal_fraction, classical_optimal_success, classical_success,
    output_hiding_residual, p_ab, p_ac, p_joint, post_avg_state,
)
from seqrac.objects import KrausInstrument, Povm, Preparation, StrategyBundle
from seqrac.qmath import psd_sqrt, random_density_matrix, random_povm, random_unitary
from seqrac.qubit import unsharp_strategy


def test_classical_values():
    assert classical_optimal_success(2) == 0.375
    assert classical_optimal_fraction(3) == Fraction(2, 9)
    assert classical_optimal_success(6) == pytest.approx(7 / 72)
    with pytest.raises(BadDimension):
        classical_optimal_success(1)


@pytest.mark.parametrize("d", [2, 3])
def test_bruteforce_matches_formula(d):
    opt = classical_bruteforce(d)
    assert opt.joint == classical_optimal_fraction(d)
    assert opt.barun == Fraction(1, 2) * (1 + Fraction(1, d))
    assert opt.chhanda == Fraction(1, d)


def test_bruteforce_optimal_encoding_scores():
    opt = classical_bruteforce(2)
    enc = opt.encoding
    # recover Barun's best decoders for this encoding by majority vote
    decoders = []
    for y in (0, 1):
        table = {}
        for m in range(2):
            votes = [x[y] for x in itertools.product(range(2), repeat=2) if enc[x[0] * 2 + x[1]] == m]
            table[m] = max(range(2), key=votes.count) if votes else 0
        decoders.append(table.__getitem__)
    pab, pac, joint = classical_success(2, lambda a, b: enc[a * 2 + b], decoders, (0, 0))
    assert joint == opt.joint


def test_relay_variant_exceeds_formula():
    opt = classical_bruteforce(2, relay=True)
    assert opt.joint == Fraction(9, 16)
    assert opt.joint > classical_optimal_fraction(2)


def test_bruteforce_dimension_limit():
    with pytest.raises(BadDimension):
        classical_bruteforce(4)


def test_first_dit_strategy():
    # send x0; Barun reads it for y=0 and guesses 0 for y=1
    pab, pac, joint = classical_success(2, lambda a, b: a, [lambda m: m, lambda m: 0], (0, 0))
    assert pab == Fraction(3, 4)
    assert pac == Fraction(1, 2)
    assert joint == Fraction(3, 8)


def test_guess_zero_strategy():
    pab, pac, _ = classical_success(3, lambda a, b: 0, [lambda m: 0] * 2, (0, 0))
    assert pab == Fraction(1, 3) and pac == Fraction(1, 3)


def test_sharp_and_trivial_qubit_points():
    s = unsharp_strategy(1.0)
    assert p_ab(s) == pytest.approx(0.5 * (1 + 1 / math.sqrt(2)), abs=1e-12)
    assert p_ac(s) == pytest.approx(0.5, abs=1e-12)
    s0 = unsharp_strategy(0.0)
    assert p_ab(s0) == pytest.approx(0.5, abs=1e-12)
    assert p_ac(s0) == pytest.approx(0.5 * (1 + 1 / math.sqrt(2)), abs=1e-12)
    assert p_joint(s0) == pytest.approx(p_ab(s0) * p_ac(s0))


def test_post_avg_state_examples():
    s = unsharp_strategy(1.0)
    # sharp x measurement on a state with Bloch (1, 0, 1)/sqrt2 dephases to (1, 0, 0)/sqrt2
    out = post_avg_state(s, (0, 0), 0)
    assert np.allclose(out.bloch(), [2 ** -0.5, 0, 0], atol=1e-12)
    s0 = unsharp_strategy(0.0)
    rho = s0.preparation.states[1, 0]
    assert np.allclose(post_avg_state(s0, (1, 0), 1).matrix, rho, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        post_avg_state(s, (2, 0), 0)


def random_bundle(d, dim, rng):
    states = np.array([[random_density_matrix(dim, rng) for _ in range(d)] for _ in range(d)])
    kraus = []
    for y in (0, 1):
        povm = random_povm(dim, d, rng)
        u = [random_unitary(dim, rng) for _ in range(d)]
        kraus.append([u[b] @ psd_sqrt(povm.effects[b], "lapack") for b in range(d)])
    chh = tuple(random_povm(dim, d, rng) for _ in (0, 1))
    return StrategyBundle(d, Preparation(states), KrausInstrument(np.array(kraus)), chh)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_invariants_over_random_strategies(d):
    rng = np.random.default_rng(d)
    for _ in range(30):
        s = random_bundle(d, d, rng)
        a, c = p_ab(s), p_ac(s)
        assert 0 <= a <= 1 and 0 <= c <= 1
        assert p_joint(s) == pytest.approx(a * c)
        for x in s.preparation.messages():
            for y in (0, 1):
                assert post_avg_state(s, x, y).matrix.trace().real == pytest.approx(1, abs=1e-10)


def test_kraus_unitary_freedom_leaves_pab_invariant():
    rng = np.random.default_rng(1)
    s = random_bundle(3, 3, rng)
    u = random_unitary(3, 4)
    k = np.einsum("ij,ybjk->ybik", u, s.instrument.kraus)
    s2 = StrategyBundle(3, s.preparation, KrausInstrument(k), s.chhanda)
    assert p_ab(s2) == pytest.approx(p_ab(s), abs=1e-12)


def test_trivial_measurement_gives_uniform_guessing():
    d = 3
    rng = np.random.default_rng(2)
    s = random_bundle(d, d, rng)
    k = np.array([[np.eye(d) / math.sqrt(d)] * d] * 2, dtype=complex)
    flat = StrategyBundle(d, s.preparation, KrausInstrument(k), s.chhanda)
    assert p_ab(flat) == pytest.approx(1 / d, abs=1e-12)


@pytest.mark.parametrize("eta", np.linspace(0, 1, 11))
def test_output_hiding_canonical(eta):
    assert output_hiding_residual(unsharp_strategy(eta)) < 1e-12


def test_p_ab_type_check():
    with pytest.raises(DimensionMismatch):
        p_ab("not a bundle")
    with pytest.raises(DimensionMismatch):
        p_ac(None)


def test_p_ac_is_linear_in_chhanda():
    s = unsharp_strategy(0.4)
    flip = tuple(Povm(p.effects[::-1]) for p in s.chhanda)
    s2 = StrategyBundle(2, s.preparation, s.instrument, flip)
    assert p_ac(s) + p_ac(s2) == pytest.approx(1.0, abs=1e-12)
