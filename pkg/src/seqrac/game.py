"""Success-probability functionals of the sequential two-receiver access code.

Aparna encodes a two-dit message x = (x0, x1) into one system. Barun is asked
dit ``y`` and guesses it; he then forwards the system and ``y`` (never his
outcome) to Chhanda, who guesses the other dit ``x[1 - y]``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadDimension, DimensionMismatch
from .objects import DensityMatrix, StrategyBundle, check_dimension


def classical_optimal_fraction(d: int) -> Fraction:
    d = check_dimension(d)
    return Fraction(1, 2 * d) * (1 + Fraction(1, d))


def classical_optimal_success(d: int) -> float:
    """Best classical joint success (1/(2d)) (1 + 1/d)."""
    return float(classical_optimal_fraction(d))


def classical_barun_success(d: int) -> float:
    return float(Fraction(1, 2) * (1 + Fraction(1, check_dimension(d))))


def classical_chhanda_success(d: int) -> float:
    return 1.0 / check_dimension(d)


@dataclass(frozen=True)
class ClassicalOptimum:
    d: int
    joint: Fraction
    barun: Fraction
    chhanda: Fraction
    encoding: tuple   # encoding[x0 * d + x1] = transmitted dit
    relay: bool


def _barun_counts(codes: np.ndarray, d: int) -> np.ndarray:
    """Best number of correct guesses, summed over y and messages, per encoding row."""
    msgs = np.array(list(itertools.product(range(d), repeat=2)))
    onehot = codes[:, :, None] == np.arange(d)  # (N, d^2, m)
    total = np.zeros(codes.shape[0], dtype=np.int64)
    for y in (0, 1):
        target = msgs[:, y][:, None] == np.arange(d)  # (d^2, v)
        counts = np.einsum("nxm,xv->nmv", onehot.astype(np.int64), target.astype(np.int64))
        total += counts.max(axis=2).sum(axis=1)
    return total


def _relay_chhanda_counts(codes: np.ndarray, d: int) -> np.ndarray:
    # Chhanda decodes x[1 - y] from the relayed dit m; same count structure
    # with the roles of the two dits swapped.
    return _barun_counts(codes, d)


def classical_bruteforce(d: int, relay: bool = False) -> ClassicalOptimum:
    """Exhaustive search over deterministic classical strategies (d <= 3).

    Barun uses decoders g_y(m); Chhanda's guess depends on ``y`` only, unless
    ``relay`` is set, in which case she also reads the relayed dit ``m``.
    The figure of merit is the product of the two receivers' averages, the
    classical analogue of the quantum joint score.
    """
    if d not in (2, 3):
        raise BadDimension("brute force is limited to d in {2, 3}")
    n_msg = d * d
    codes = np.array(list(itertools.product(range(d), repeat=n_msg)), dtype=np.int64)
    barun = _barun_counts(codes, d)
    if relay:
        chhanda = _relay_chhanda_counts(codes, d)
    else:
        # A y-only guess c is right for exactly d of the d^2 messages, per y.
        chhanda = np.full(codes.shape[0], 2 * d, dtype=np.int64)
    product = barun * chhanda
    best = int(np.argmax(product))
    denom = 2 * n_msg
    return ClassicalOptimum(
        d=d,
        joint=Fraction(int(barun[best]), denom) * Fraction(int(chhanda[best]), denom),
        barun=Fraction(int(barun[best]), denom),
        chhanda=Fraction(int(chhanda[best]), denom),
        encoding=tuple(int(c) for c in codes[best]),
        relay=relay,
    )


def classical_success(d: int, encoding, barun_decoders, chhanda_guesses) -> tuple[Fraction, Fraction, Fraction]:
    """Score one deterministic strategy.

    ``encoding(x0, x1) -> m``, ``barun_decoders[y](m) -> guess`` and
    ``chhanda_guesses[y]`` (a constant guess for the other dit).
    Returns (barun, chhanda, joint) as exact fractions.
    """
    d = check_dimension(d)
    ab = ac = 0
    for x in itertools.product(range(d), repeat=2):
        m = encoding(*x)
        for y in (0, 1):
            ab += barun_decoders[y](m) == x[y]
            ac += chhanda_guesses[y] == x[1 - y]
    pab, pac = Fraction(ab, 2 * d * d), Fraction(ac, 2 * d * d)
    return pab, pac, pab * pac


def _bundle_arrays(s: StrategyBundle):
    rho = s.preparation.states.reshape(s.d * s.d, s.dim, s.dim)
    msgs = np.array(s.preparation.messages())
    return rho, msgs


def p_ab(s: StrategyBundle) -> float:
    """(1 / 2d^2) sum_{x, y} Tr(rho_x M_{x_y|y}) with M = K^dagger K."""
    if not isinstance(s, StrategyBundle):
        raise DimensionMismatch("expected a StrategyBundle")
    rho, msgs = _bundle_arrays(s)
    effects = s.instrument.effects()
    total = 0.0
    for y in (0, 1):
        total += np.einsum("xij,xji->", rho, effects[y][msgs[:, y]]).real
    return float(total / (2 * s.d * s.d))


def averaged_states(s: StrategyBundle, y: int) -> np.ndarray:
    """Outcome-averaged post-measurement states for every message, shape (d^2, dim, dim)."""
    rho, _ = _bundle_arrays(s)
    k = s.instrument.kraus[y]
    return np.einsum("bij,xjk,blk->xil", k, rho, k.conj())


def post_avg_state(s: StrategyBundle, x, y: int) -> DensityMatrix:
    """State Chhanda receives: sum_b K_{b|y} rho_x K_{b|y}^dagger."""
    if y not in (0, 1) or not all(0 <= xi < s.d for xi in x):
        raise DimensionMismatch(f"bad indices x={x!r}, y={y!r}")
    out = s.instrument.channel(y, s.preparation.states[x[0], x[1]])
    return DensityMatrix((out + out.conj().T) / 2)


def p_ac(s: StrategyBundle) -> float:
    """(1 / 2d^2) sum_{x, z} Tr(rho~_x^{1-z} N_{x_z|z})."""
    if not isinstance(s, StrategyBundle):
        raise DimensionMismatch("expected a StrategyBundle")
    _, msgs = _bundle_arrays(s)
    total = 0.0
    for z in (0, 1):
        post = averaged_states(s, 1 - z)
        total += np.einsum("xij,xji->", post, s.chhanda[z].effects[msgs[:, z]]).real
    return float(total / (2 * s.d * s.d))


def p_joint(s: StrategyBundle) -> float:
    return p_ab(s) * p_ac(s)


def output_hiding_residual(s: StrategyBundle) -> float:
    """max_y || (1/d^2) sum_x rho~_x^y - I/dim ||_max.

    Averaged reading of the constraint that Chhanda's input carries no
    information about Barun's outcome.
    """
    eye = np.eye(s.dim) / s.dim
    return max(float(np.abs(averaged_states(s, y).mean(axis=0) - eye).max()) for y in (0, 1))
