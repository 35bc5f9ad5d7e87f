"""Closed-form qubit layer: the optimal unsharp strategy family and its trade-off boundary."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import constants as C
from .errors import BadSharpness, OutOfRange
from .game import output_hiding_residual, p_ab, p_ac
from .objects import (
    PAULIS,
    KrausInstrument,
    Povm,
    Preparation,
    StrategyBundle,
    bloch_vector,
    from_bloch,
)
from .qmath import psd_sqrt

SQRT2 = math.sqrt(2.0)
BETA_MIN = 0.5
BETA_MAX = 0.5 * (1 + 1 / SQRT2)
X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])
# Barun's setting y (and Chhanda's setting z) measures along AXES[y].
AXES = (X_AXIS, Z_AXIS)


@dataclass(frozen=True)
class TradeoffPoint:
    eta: float
    p_ab: float
    p_ac: float


def canonical_bloch_vectors() -> np.ndarray:
    """Bloch vectors r[x0, x1] = ((-1)^x0 x + (-1)^x1 z) / sqrt(2): a square in the xz-plane."""
    r = np.zeros((2, 2, 3))
    for x0 in (0, 1):
        for x1 in (0, 1):
            r[x0, x1] = ((-1) ** x0 * X_AXIS + (-1) ** x1 * Z_AXIS) / SQRT2
    return r


@lru_cache(maxsize=1)
def canonical_preparations() -> Preparation:
    r = canonical_bloch_vectors()
    states = np.array([[from_bloch(r[x0, x1]) for x1 in (0, 1)] for x0 in (0, 1)])
    return Preparation(states)


def binary_povm(axis, length: float = 1.0, label: str = "") -> Povm:
    """Effects (I +- length * axis.sigma)/2."""
    n = np.asarray(axis, dtype=float) * length
    return Povm(np.array([from_bloch(n), from_bloch(-n)]), label=label)


def qubit_sqrt(m) -> np.ndarray:
    """Square root of a 2x2 PSD matrix from its Bloch form M = (a I + v.sigma)/2.

    With eigenvalues l+- = (a +- |v|)/2 the root is
    ((sqrt l+ + sqrt l-) I + (sqrt l+ - sqrt l-) v.sigma/|v|)/2.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        return psd_sqrt(m)
    a = float(np.trace(m).real)
    v = np.real(np.einsum("kij,ji->k", PAULIS, m))
    r = float(np.linalg.norm(v))
    hi = math.sqrt(max((a + r) / 2, 0.0))
    lo = math.sqrt(max((a - r) / 2, 0.0))
    out = (hi + lo) / 2 * np.eye(2, dtype=complex)
    if r > 0:
        out = out + (hi - lo) / (2 * r) * np.einsum("k,kij->ij", v, PAULIS)
    return out


def lueders_instrument(povms) -> KrausInstrument:
    """K_{b|y} = sqrt(M_{b|y}), unitary part set to the identity."""
    return KrausInstrument(np.array([[qubit_sqrt(e) for e in p.effects] for p in povms]))


@lru_cache(maxsize=1)
def _sharp_chhanda() -> tuple:
    return tuple(binary_povm(AXES[z], 1.0, label=f"N|z={z}") for z in (0, 1))


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0 or math.isnan(eta):
        raise BadSharpness(f"sharpness must lie in [0, 1], got {eta!r}")
    return eta


def unsharp_strategy(eta: float) -> StrategyBundle:
    """Square preparations, unsharp Lueders measurements along x and z, sharp x/z for Chhanda."""
    eta = _check_eta(eta)
    barun = [binary_povm(AXES[y], eta, label=f"M|y={y}") for y in (0, 1)]
    return StrategyBundle(2, canonical_preparations(), lueders_instrument(barun), _sharp_chhanda())


def tradeoff_pab(eta: float) -> float:
    return 0.5 * (1 + _check_eta(eta) / SQRT2)


def tradeoff_pac(eta: float) -> float:
    eta = _check_eta(eta)
    return 0.25 * (2 + math.sqrt(max(2 - 2 * eta * eta, 0.0)))


def tradeoff_curve(n_points: int, check_tol: float = 1e-10) -> list[TradeoffPoint]:
    """Uniform eta grid on [0, 1].

    Each point is computed by the closed form and replayed through the game
    functionals; a disagreement beyond ``check_tol`` raises ``AssertionError``.
    """
    if int(n_points) != n_points or n_points < 2:
        raise OutOfRange("n_points must be an integer >= 2")
    out = []
    for eta in np.linspace(0.0, 1.0, int(n_points)):
        eta = float(eta)
        ab, ac = tradeoff_pab(eta), tradeoff_pac(eta)
        s = unsharp_strategy(eta)
        if abs(p_ab(s) - ab) > check_tol or abs(p_ac(s) - ac) > check_tol:
            raise AssertionError(f"analytic and simulated trade-off disagree at eta={eta}")
        out.append(TradeoffPoint(eta, ab, ac))
    return out


def _check_beta(beta: float) -> float:
    beta = float(beta)
    # admit a few ulps beyond the endpoints so round trips through p_ab stay valid
    slack = 1e-12
    if not BETA_MIN - slack <= beta <= BETA_MAX + slack or math.isnan(beta):
        raise OutOfRange(f"beta must lie in [{BETA_MIN}, {BETA_MAX:.12f}], got {beta!r}")
    return min(max(beta, BETA_MIN), BETA_MAX)


def boundary_pac(beta: float) -> float:
    """Largest P_AC compatible with P_AB = beta: (2 + sqrt(16 b - 16 b^2 - 2)) / 4."""
    beta = _check_beta(beta)
    return 0.25 * (2 + math.sqrt(max(16 * beta - 16 * beta * beta - 2, 0.0)))


def sharpness_from_beta(beta: float) -> float:
    return SQRT2 * (2 * _check_beta(beta) - 1)


def lemma1_value(theta, zeta0, zeta1):
    """cos(t)(cos^2 z0 - cos^2 z1) + sin(t) cos(z0 - z1); vectorised."""
    theta, zeta0, zeta1 = np.asarray(theta), np.asarray(zeta0), np.asarray(zeta1)
    return np.cos(theta) * (np.cos(zeta0) ** 2 - np.cos(zeta1) ** 2) + np.sin(theta) * np.cos(zeta0 - zeta1)


def lemma1_check(theta, zeta0, zeta1, tol: float = C.LEMMA1_TOL) -> bool:
    """True when the angle inequality behind the boundary holds (all angles in [0, pi/2])."""
    args = [np.asarray(a, dtype=float) for a in (theta, zeta0, zeta1)]
    if any(np.any((a < 0) | (a > math.pi / 2)) for a in args):
        raise OutOfRange("angles must lie in [0, pi/2]")
    return bool(np.all(lemma1_value(*args) <= 1 + tol))


@dataclass(frozen=True)
class SelfTestTarget:
    beta: float
    eta: float
    preparations: Preparation
    barun_bloch: np.ndarray            # (2, 3): Bloch vectors of M_{0|y}
    chhanda_observables: tuple         # (Povm, Povm)

    def strategy(self) -> StrategyBundle:
        barun = [Povm(np.array([from_bloch(g), from_bloch(-g)])) for g in self.barun_bloch]
        return StrategyBundle(2, self.preparations, lueders_instrument(barun), self.chhanda_observables)


def self_test_targets(beta: float) -> SelfTestTarget:
    """Reference objects certified by observing (beta, boundary_pac(beta)); common unitary fixed to I."""
    eta = sharpness_from_beta(beta)
    return SelfTestTarget(
        beta=_check_beta(beta),
        eta=eta,
        preparations=canonical_preparations(),
        barun_bloch=np.array([eta * X_AXIS, eta * Z_AXIS]),
        chhanda_observables=tuple(binary_povm(AXES[z]) for z in (0, 1)),
    )


def preparation_bloch(prep: Preparation) -> np.ndarray:
    return np.array([[bloch_vector(prep.states[x0, x1]) for x1 in (0, 1)] for x0 in (0, 1)])


# ---------------------------------------------------------------------------
# Falsification audit of the boundary


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _sample_strategy(rng: np.random.Generator):
    """Draw one qubit strategy whose averaged post-measurement state is I/2.

    Returns (prep_bloch[2, 2, 3], barun (bias[2], vec[2, 3]), unitaries[2, 2, 2],
    chhanda (bias[2], vec[2, 3])). Preparations have zero Bloch-vector sum and
    each setting's instrument is unital (common unitary), which together make
    the averaged constraint hold exactly.
    """
    kind = int(rng.integers(4))
    if kind == 0:
        # antipodal pairs with random lengths
        a = _unit(rng.standard_normal(3)) * rng.uniform() ** 0.25
        b = _unit(rng.standard_normal(3)) * rng.uniform() ** 0.25
        prep = np.array([[a, b], [-b, -a]])
    elif kind == 1:
        # generic zero-sum quadruple
        while True:
            v = _unit(rng.standard_normal((3, 3))) * rng.uniform(size=(3, 1)) ** 0.25
            last = -v.sum(axis=0)
            if np.linalg.norm(last) <= 1:
                break
        prep = np.array([[v[0], v[1]], [v[2], last]])
    else:
        # perturbation of the optimal square; a common rescale keeps the sum zero
        scale = 10.0 ** rng.uniform(-4, -1) if kind == 2 else 0.0
        prep = canonical_bloch_vectors() + scale * rng.standard_normal((2, 2, 3))
        prep -= prep.mean(axis=(0, 1))
        prep /= max(1.0, float(np.linalg.norm(prep, axis=-1).max()))

    def povm_params(near_axes, scale, length=None):
        vec = np.empty((2, 3))
        bias = np.empty(2)
        for k in (0, 1):
            if near_axes:
                v = AXES[k] * (rng.uniform() if length is None else length) + scale * rng.standard_normal(3)
            else:
                v = _unit(rng.standard_normal(3)) * rng.uniform()
            n = np.linalg.norm(v)
            if n > 1:
                v = v / n
                n = 1.0
            bias[k] = rng.uniform(-(1 - n), 1 - n) if scale else 0.0
            vec[k] = v
        return bias, vec

    if kind < 2:
        barun = povm_params(False, 0.0)
        chhanda = povm_params(False, 0.0)
        unitaries = np.array([_haar_unitary2(rng) for _ in (0, 1)])
        return prep, barun, unitaries, chhanda

    barun = povm_params(True, scale, length=rng.uniform())
    chhanda = povm_params(True, scale, length=1.0)
    unitaries = np.array([_small_unitary(rng, scale) for _ in (0, 1)])
    # a global rotation of every object is a symmetry of the game
    rot = _haar_unitary2(rng)
    rmat = np.real(np.einsum("aij,jk,bkl,li->ab", PAULIS, rot, PAULIS, rot.conj().T)) / 2
    prep = prep @ rmat.T
    barun = (barun[0], barun[1] @ rmat.T)
    chhanda = (chhanda[0], chhanda[1] @ rmat.T)
    unitaries = np.array([rot @ u @ rot.conj().T for u in unitaries])
    return prep, barun, unitaries, chhanda


def _haar_unitary2(rng):
    q, r = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _small_unitary(rng, scale):
    h = scale * np.einsum("k,kij->ij", rng.standard_normal(3), PAULIS)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def _binary_effects(bias, vec):
    """Effects of the two-outcome qubit POVM M_0 = ((1 + bias) I + vec.sigma)/2."""
    m0 = ((1 + bias) * np.eye(2) + np.einsum("k,kij->ij", vec, PAULIS)) / 2
    return np.array([m0, np.eye(2) - m0])


def audit_strategy(prep_bloch, barun, unitaries, chhanda) -> StrategyBundle:
    states = np.array([[from_bloch(prep_bloch[x0, x1]) for x1 in (0, 1)] for x0 in (0, 1)])
    kraus = []
    for y in (0, 1):
        effects = _binary_effects(barun[0][y], barun[1][y])
        kraus.append([unitaries[y] @ _sqrt2x2(e) for e in effects])
    povms = tuple(Povm(_binary_effects(chhanda[0][z], chhanda[1][z])) for z in (0, 1))
    return StrategyBundle(2, Preparation(states), KrausInstrument(np.array(kraus)), povms)


def _sqrt2x2(m):
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def boundary_gap(pab: float, pac: float) -> float:
    """pac minus the boundary value.

    Relabelling Barun's outcomes maps P_AB to 1 - P_AB without touching P_AC,
    so scores below 1/2 are compared against the boundary at 1 - P_AB.
    """
    beta = pab if pab >= 0.5 else 1.0 - pab
    beta = min(beta, BETA_MAX)
    return pac - boundary_pac(beta)


@dataclass(frozen=True)
class AuditResult:
    max_violation: float
    n_samples: int
    n_accepted: int
    worst_sample: int


def _audit_chunk(args):
    seed, indices = args
    best = (-math.inf, -1)
    accepted = 0
    for i in indices:
        rng = np.random.default_rng([seed, i])
        s = audit_strategy(*_sample_strategy(rng))
        if output_hiding_residual(s) > C.OUTPUT_HIDING_TOL:
            continue
        accepted += 1
        gap = boundary_gap(p_ab(s), p_ac(s))
        if gap > best[0]:
            best = (gap, i)
    return best, accepted


def boundary_audit(n_random: int, seed: int = 0, workers: int = 1) -> AuditResult:
    """Largest p_ac - boundary_pac(p_ab) over random constrained qubit strategies.

    Sample i draws from ``default_rng([seed, i])``, so the result does not
    depend on ``workers``. A value <= 1e-9 means no sample beat the boundary.
    """
    if int(n_random) != n_random or n_random < 1:
        raise OutOfRange("n_random must be >= 1")
    n_random = int(n_random)
    chunks = [(seed, range(start, min(start + 2048, n_random))) for start in range(0, n_random, 2048)]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_audit_chunk, chunks))
    else:
        parts = [_audit_chunk(c) for c in chunks]
    best = max((p[0] for p in parts), key=lambda t: (t[0], -t[1]))
    return AuditResult(best[0], n_random, sum(p[1] for p in parts), best[1])
