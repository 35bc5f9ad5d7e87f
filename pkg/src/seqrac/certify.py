"""Certified interval for Barun's sharpness from an observed (P_AB, P_AC) pair."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import constants as C
from .errors import BadSharpness, BadVisibility, OutOfRange, RegressionMismatch
from .game import p_ab, p_ac
from .objects import Povm, Preparation, StrategyBundle
from .qubit import AXES, SQRT2, canonical_preparations, lueders_instrument, binary_povm

REPORT_FIELDS = (
    "p1", "p2", "p3", "eta_target", "p_ab", "p_ac",
    "eta_lower", "eta_upper", "delta", "delta_star_fixture",
)

# Reference table: visibilities, printed P_AB, P_AC (with collaboration), delta,
# and the no-collaboration comparison values P_AC* and delta* (fixtures only).
TABLE1 = (
    {"visibility": (0.95, 0.90, 0.95), "p_ab": 0.7138, "p_ac": 0.7461, "delta": 0.1133,
     "p_ac_star": 0.7826, "delta_star": 0.1964},
    {"visibility": (0.98, 0.95, 0.98), "p_ab": 0.7328, "p_ac": 0.7515, "delta": 0.0444,
     "p_ac_star": 0.7955, "delta_star": 0.0824},
    {"visibility": (0.93, 0.88, 0.93), "p_ab": 0.7046, "p_ac": 0.7394, "delta": 0.1572,
     "p_ac_star": 0.7726, "delta_star": 0.2617},
)
TABLE1_ETA_TARGET = 1 / SQRT2
# Visibility triple quoted for the contour/target plots of the main text; differs
# from the first table row in p2.
FIGURE4_VISIBILITY = (0.95, 0.93, 0.95)


class BoundsWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NoiseParams:
    p1: float  # preparation visibility
    p2: float  # Barun's measurement visibility
    p3: float  # Chhanda's measurement visibility

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v) or not 0.0 < v <= 1.0:
                raise BadVisibility(f"{name} must lie in (0, 1], got {v!r}")


@dataclass(frozen=True)
class ObservedPair:
    p_ab_obs: float
    p_ac_obs: float

    def __post_init__(self):
        for v in (self.p_ab_obs, self.p_ac_obs):
            if not 0.0 <= v <= 1.0:
                raise OutOfRange(f"observed probabilities must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class SharpnessBounds:
    eta_lower: float
    eta_upper: float
    delta: float
    lower_trivial: bool = False   # eta_lower <= 0: no information from P_AB
    inconsistent: bool = False    # eta_lower > eta_upper


def eta_lower(p_ab_obs: float) -> float:
    """sqrt(2) (2 P_AB - 1); values <= 0 are the trivial bound and are returned unclamped."""
    return SQRT2 * (2 * p_ab_obs - 1)


def eta_upper(p_ac_obs: float) -> float:
    """sqrt(8 P_AC - 8 P_AC^2 - 1), defined for P_AC in [(2 - sqrt2)/4, (2 + sqrt2)/4]."""
    rad = 8 * p_ac_obs - 8 * p_ac_obs * p_ac_obs - 1
    if rad < 0:
        # tolerate rounding at the endpoints of the admissible interval
        if rad > -1e-12:
            return 0.0
        raise OutOfRange(f"P_AC = {p_ac_obs!r} is incompatible with any sharpness")
    return math.sqrt(rad)


def bounds(obs: ObservedPair) -> SharpnessBounds:
    lo = eta_lower(obs.p_ab_obs)
    hi = eta_upper(obs.p_ac_obs)
    delta = hi - lo
    inconsistent = delta < -C.BOUNDS_CONSISTENCY_TOL
    if inconsistent:
        warnings.warn(f"lower bound {lo:.6f} exceeds upper bound {hi:.6f}", BoundsWarning, stacklevel=2)
    return SharpnessBounds(lo, hi, delta, lower_trivial=lo <= 0, inconsistent=inconsistent)


def depolarize(op: np.ndarray, p: float) -> np.ndarray:
    """White-noise mixture p * rho + (1 - p) I / dim of a state."""
    dim = op.shape[-1]
    return p * op + (1 - p) * np.eye(dim) / dim


def noisy_strategy(noise: NoiseParams, eta_target: float) -> StrategyBundle:
    """Canonical qubit strategy with white noise on every device.

    States become p1 rho + (1-p1) I/2, Barun's and Chhanda's effects
    p E + (1-p) I/2. Barun's noisy instrument is the Lueders (square root)
    realisation of his noisy effects.
    """
    if not 0.0 <= eta_target <= 1.0:
        raise BadSharpness(f"eta_target must lie in [0, 1], got {eta_target!r}")
    prep = canonical_preparations()
    states = np.array([[depolarize(prep.states[a, b], noise.p1) for b in (0, 1)] for a in (0, 1)])
    barun = []
    for y in (0, 1):
        ideal = binary_povm(AXES[y], eta_target)
        barun.append(Povm(np.array([noise.p2 * e + (1 - noise.p2) * np.eye(2) / 2 for e in ideal.effects])))
    chhanda = []
    for z in (0, 1):
        ideal = binary_povm(AXES[z])
        chhanda.append(Povm(np.array([noise.p3 * e + (1 - noise.p3) * np.eye(2) / 2 for e in ideal.effects])))
    return StrategyBundle(2, Preparation(states), lueders_instrument(barun), tuple(chhanda))


def noisy_closed_form(noise: NoiseParams, eta_target: float) -> ObservedPair:
    a = noise.p2 * eta_target
    pab = 0.5 * (1 + noise.p1 * a / SQRT2)
    pac = 0.5 + noise.p1 * noise.p3 * math.sqrt(max(1 - a * a, 0.0)) * SQRT2 / 4
    return ObservedPair(pab, pac)


def noisy_pipeline(noise: NoiseParams, eta_target: float, check_tol: float = 1e-10) -> ObservedPair:
    """Simulated observation of the noisy canonical strategy, cross-checked against the closed form."""
    s = noisy_strategy(noise, eta_target)
    obs = ObservedPair(p_ab(s), p_ac(s))
    ref = noisy_closed_form(noise, eta_target)
    if abs(obs.p_ab_obs - ref.p_ab_obs) > check_tol or abs(obs.p_ac_obs - ref.p_ac_obs) > check_tol:
        raise AssertionError("simulated and closed-form noisy probabilities disagree")
    return obs


def report_row(noise: NoiseParams, eta_target: float, delta_star=None) -> dict:
    obs = noisy_pipeline(noise, eta_target)
    b = bounds(obs)
    return {
        "p1": noise.p1, "p2": noise.p2, "p3": noise.p3, "eta_target": eta_target,
        "p_ab": obs.p_ab_obs, "p_ac": obs.p_ac_obs,
        "eta_lower": b.eta_lower, "eta_upper": b.eta_upper, "delta": b.delta,
        "delta_star_fixture": delta_star,
    }


def table1_report(tol: float = C.TABLE1_TOL, check: bool = True) -> list[dict]:
    """Recompute every reference row; raise RegressionMismatch if any value drifts beyond ``tol``."""
    rows = []
    problems = []
    for ref in TABLE1:
        row = report_row(NoiseParams(*ref["visibility"]), TABLE1_ETA_TARGET, ref["delta_star"])
        for key in ("p_ab", "p_ac", "delta"):
            if abs(row[key] - ref[key]) > tol:
                problems.append(f"{ref['visibility']}: {key} = {row[key]:.6f}, reference {ref[key]}")
        rows.append(row)
    if check and problems:
        raise RegressionMismatch("; ".join(problems))
    return rows


@dataclass(frozen=True)
class SweepPoint:
    eta_target: float
    delta: float | None
    defined: bool
    eta_lower: float | None = None
    eta_upper: float | None = None


def target_sweep(noise: NoiseParams, eta_grid) -> list[SweepPoint]:
    """delta as a function of the target sharpness; points where eta_upper is undefined are flagged."""
    out = []
    for eta in eta_grid:
        eta = float(eta)
        if not 0.0 <= eta <= 1.0:
            raise BadSharpness(f"grid value {eta!r} outside [0, 1]")
        obs = noisy_pipeline(noise, eta)
        try:
            hi = eta_upper(obs.p_ac_obs)
        except OutOfRange:
            out.append(SweepPoint(eta, None, False))
            continue
        lo = eta_lower(obs.p_ab_obs)
        out.append(SweepPoint(eta, hi - lo, True, lo, hi))
    return out


def as_dict(obj) -> dict:
    return asdict(obj)
