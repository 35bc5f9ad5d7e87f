"""See-saw lower bounds for the d-dimensional game.

One iteration of :func:`seesaw_run`:

1. fix the states, choose Barun's sharp POVMs maximising P_AB;
2. build the unsharp Lueders instrument and choose Chhanda's POVMs
   maximising P_AC on the outcome-averaged states;
3. fix Barun's POVMs and re-choose the states maximising P_AB.

Every subproblem has a linear objective and is solved to global optimality,
so each restart is a monotone ascent in P_AB.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from .errors import BadSharpness, DimensionMismatch, NoConvergence, NotHermitian, NotPsd
from .game import classical_barun_success, classical_chhanda_success, classical_optimal_success
from .game import p_ab as game_p_ab
from .game import p_ac as game_p_ac
from .objects import KrausInstrument, Povm, Preparation, StrategyBundle, check_dimension
from .qmath import random_density_matrix

SWEEP_FIELDS = ("d", "mode", "eta", "p_barun", "p_chhanda", "p_total", "converged", "iterations")
MODES = ("classical", "eta_critical", "sharp")


def _herm(a):
    return (a + np.swapaxes(a.conj(), -1, -2)) / 2


def _check_eta(eta) -> float:
    eta = float(eta)
    if math.isnan(eta) or not 0.0 <= eta <= 1.0:
        raise BadSharpness(f"sharpness must lie in [0, 1], got {eta!r}")
    return eta


def eta_critical(d: int) -> float:
    """Sharpness at which Barun's unsharp score equals the classical ½(1 + 1/d)."""
    d = check_dimension(d)
    return (d - 1) / (d + math.sqrt(d) - 2)


def pab_unsharp_reference(d: int, eta: float) -> float:
    """eta · ½(1 + 1/sqrt d) + (1 - eta)/d: white noise mixed into the two-basis optimum."""
    d = check_dimension(d)
    eta = _check_eta(eta)
    return eta * 0.5 * (1 + 1 / math.sqrt(d)) + (1 - eta) / d


def _lueders_coefficients(eta: float, d: int) -> tuple[float, float]:
    b = math.sqrt((1 - eta) / d)
    return math.sqrt((1 + (d - 1) * eta) / d) - b, b


def lueders_kraus(m, eta: float, d: int) -> np.ndarray:
    """K = (sqrt((1+(d-1)eta)/d) - sqrt((1-eta)/d)) M + sqrt((1-eta)/d) I.

    For a projector M this is the square root of eta M + (1 - eta) I/d.
    """
    m = np.asarray(m, dtype=complex)
    eta = _check_eta(eta)
    if m.shape != (d, d):
        raise DimensionMismatch(f"effect has shape {m.shape}, expected ({d}, {d})")
    if np.linalg.eigvalsh(_herm(m))[0] < C.PSD_FLOOR:
        raise NotPsd("effect is not PSD")
    a, b = _lueders_coefficients(eta, d)
    return a * m + b * np.eye(d)


def _kraus_set(effects: np.ndarray, eta: float) -> np.ndarray:
    """Kraus operators for one setting, falling back to sqrt(eta M + (1-eta) I/d) for non-projective M."""
    d = effects.shape[-1]
    if np.abs(np.einsum("bij,bjk->ik", effects, effects) - np.eye(d)).max() < 1e-9:
        a, b = _lueders_coefficients(eta, d)
        return a * effects + b * np.eye(d)
    out = []
    for m in effects:
        w, v = np.linalg.eigh(_herm(eta * m + (1 - eta) * np.eye(d) / d))
        out.append((v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T)
    return np.array(out)


# ---------------------------------------------------------------------------
# POVM subproblem: maximise sum_b Tr(A_b M_b) over POVMs


@dataclass
class PovmSolution:
    effects: np.ndarray
    objective: float
    method: str
    residual: float  # KKT residual or duality gap, relative to the data scale


def kkt_residual(A: np.ndarray, M: np.ndarray) -> float:
    """Optimality certificate for a candidate POVM.

    With Y = sum_b A_b M_b, M is optimal iff Y is Hermitian and Y - A_b is PSD
    for every b (then Tr Y is a matching dual value). Returns the worse of
    the anti-Hermitian part of Y and the most negative eigenvalue of Y - A_b,
    divided by max |A|.
    """
    scale = max(float(np.abs(A).max()), 1e-300)
    y = np.einsum("bij,bjk->ik", A, M)
    asym = float(np.abs(y - y.conj().T).max())
    gap = float(np.linalg.eigvalsh(_herm(y)[None] - A).min())
    return max(asym, -gap, 0.0) / scale


def duality_gap(A: np.ndarray, M: np.ndarray, Y: np.ndarray | None = None) -> float:
    """Tr Y - sum_b Tr(A_b M_b) for a dual-feasible Y, divided by max |A|.

    Without ``Y`` the dual point is the Hermitian part of sum_b A_b M_b,
    shifted by a multiple of I until Y - A_b is PSD for every b. Any feasible
    Y bounds the optimum from above, so a small gap certifies M.
    """
    scale = max(float(np.abs(A).max()), 1e-300)
    y = _herm(np.einsum("bij,bjk->ik", A, M) if Y is None else np.asarray(Y))
    shift = max(0.0, -float(np.linalg.eigvalsh(y[None] - A).min()))
    return (float(np.trace(y).real) + y.shape[0] * shift - _objective(A, M)) / scale


def _objective(A, M) -> float:
    return float(np.einsum("bij,bji->", A, M).real)


def _binary_closed_form(A: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(_herm(A[0] - A[1]))
    keep = v[:, w > 0]
    p = keep @ keep.conj().T
    return np.array([p, np.eye(A.shape[1]) - p])


def _projective_labels(init: np.ndarray):
    """Split a near-projective POVM into orthonormal columns and their outcome labels."""
    vecs, labels = [], []
    for b, m in enumerate(init):
        w, v = np.linalg.eigh(_herm(m))
        for i in np.nonzero(w > 0.5)[0]:
            vecs.append(v[:, i])
            labels.append(b)
    if len(vecs) != init.shape[-1]:
        return None, None
    u = np.stack(vecs, axis=1)
    p, _, vh = np.linalg.svd(u)
    return p @ vh, np.array(labels)


def _polar_ascent(A, u, labels, max_iters=1000, tol=1e-12):
    """Fixed-point iteration u <- polar([A_{l_j} u_j]_j) over projective measurements.

    The fixed points are exactly the projective POVMs with Hermitian Y.
    """
    scale = float(np.abs(A).max())
    a_cols = A[labels]
    for _ in range(max_iters):
        w = np.einsum("jab,bj->aj", a_cols, u)
        y = w @ u.conj().T
        if np.abs(y - y.conj().T).max() < tol * scale:
            break
        p, _, vh = np.linalg.svd(w)
        u = p @ vh
    m = np.zeros_like(A)
    for j, b in enumerate(labels):
        m[b] += np.outer(u[:, j], u[:, j].conj())
    return m


def _barrier_solve(A: np.ndarray, mu_final: float = 1e-12, max_newton: int = 60):
    """Log-barrier Newton method on the dual  min Tr Y  s.t.  Y > A_b.

    On the central path M_b = mu (Y - A_b)^-1 is a feasible primal point with
    duality gap n·d·mu. Returns the normalised primal point and the dual Y.
    """
    n, d, _ = A.shape
    eye = np.eye(d)
    scale = max(float(np.abs(np.linalg.eigvalsh(A)).max()), 1.0)
    y = (float(np.linalg.eigvalsh(A).max()) + scale) * eye
    mu = scale

    def barrier(yy):
        chol = np.linalg.cholesky(yy[None] - A)
        return np.trace(yy).real - 2 * mu * np.log(np.abs(np.diagonal(chol, axis1=1, axis2=2))).sum()

    while True:
        for _ in range(max_newton):
            s_inv = np.linalg.inv(y[None] - A)
            grad = eye - mu * s_inv.sum(axis=0)
            hess = mu * np.einsum("bij,blk->ikjl", s_inv, s_inv).reshape(d * d, d * d)
            step = _herm(np.linalg.solve(hess, -grad.reshape(-1)).reshape(d, d))
            slope = float(np.real(np.vdot(grad, step)))
            if -slope < 1e-10 * mu:
                break
            t, f0 = 1.0, barrier(y)
            while t > 1e-14:
                try:
                    if barrier(y + t * step) <= f0 + 0.25 * t * slope:
                        break
                except np.linalg.LinAlgError:
                    pass
                t *= 0.5
            y = y + t * step
        if mu <= mu_final * scale:
            break
        mu *= 0.05
    m = _herm(mu * np.linalg.inv(y[None] - A))
    w, v = np.linalg.eigh(m.sum(axis=0))
    t = (v / np.sqrt(w)) @ v.conj().T
    return _herm(t @ m @ t), y


def _hermitian_basis(k: int) -> np.ndarray:
    basis = []
    for i in range(k):
        for j in range(i, k):
            e = np.zeros((k, k), dtype=complex)
            e[i, j] = e[j, i] = 1 if i == j else 2 ** -0.5
            basis.append(e)
            if i != j:
                f = np.zeros((k, k), dtype=complex)
                f[i, j], f[j, i] = -1j * 2 ** -0.5, 1j * 2 ** -0.5
                basis.append(f)
    return np.array(basis, dtype=complex).reshape(len(basis), k, k)


def _polish_primal(A: np.ndarray, M: np.ndarray, Y: np.ndarray, support_tol: float = 1e-6) -> np.ndarray | None:
    """Restrict each M_b to the near-null space of Y - A_b and restore sum_b M_b = I.

    The barrier primal mu (Y - A_b)^-1 carries O(mu) mass outside the
    optimal support. Complementary slackness puts the optimum inside the
    null spaces of Y - A_b; the minimum-norm Hermitian correction within
    them removes the leakage.
    """
    d = M.shape[-1]
    scale = max(float(np.abs(A).max()), 1e-300)
    supports, bases, w0, cols = [], [], [], []
    for a, m in zip(A, M):
        w, v = np.linalg.eigh(_herm(Y - a))
        vb = v[:, w < support_tol * scale]
        basis = _hermitian_basis(vb.shape[1])
        cols.extend((vb @ e @ vb.conj().T).ravel() for e in basis)
        supports.append(vb)
        bases.append(basis)
        w0.append(vb.conj().T @ m @ vb)
    if not cols:
        return None
    lin = np.array(cols).T
    lin = np.vstack([lin.real, lin.imag])
    resid = np.eye(d) - sum(vb @ w @ vb.conj().T for vb, w in zip(supports, w0))
    delta = np.linalg.lstsq(lin, np.concatenate([resid.real.ravel(), resid.imag.ravel()]), rcond=None)[0]
    out, k = np.zeros_like(M), 0
    for b, (vb, basis, w) in enumerate(zip(supports, bases, w0)):
        w = _herm(w + np.einsum("p,pij->ij", delta[k:k + len(basis)], basis))
        k += len(basis)
        wv, wu = np.linalg.eigh(w) if w.size else (np.zeros(0), w)
        if wv.size and wv[0] < -1e-9:
            return None
        w = (wu * np.clip(wv, 0, None)) @ wu.conj().T
        out[b] = vb @ w @ vb.conj().T
    total = out.sum(axis=0)
    if np.abs(total - np.eye(d)).max() > 1e-6:
        return None
    tw, tv = np.linalg.eigh(_herm(total))
    t = (tv / np.sqrt(tw)) @ tv.conj().T
    return _herm(t @ out @ t)


def _solve_povm(A: np.ndarray, init=None, tol: float = C.POVM_CERT_TOL) -> PovmSolution:
    n, d, _ = A.shape
    if n == 2:
        m = _binary_closed_form(A)
        return PovmSolution(m, _objective(A, m), "closed-form", kkt_residual(A, m))
    if init is not None:
        u, labels = _projective_labels(init)
        if u is not None:
            m = _polar_ascent(A, u, labels)
            res = kkt_residual(A, m)
            if res <= tol:
                return PovmSolution(m, _objective(A, m), "polar", res)
    m, y = _barrier_solve(A)
    # round the interior solution to a projective one when that is certifiably optimal
    u, labels = _projective_labels(m)
    if u is not None:
        mp = _polar_ascent(A, u, labels)
        res = kkt_residual(A, mp)
        if res <= tol and _objective(A, mp) >= _objective(A, m) - tol * float(np.abs(A).max()):
            return PovmSolution(mp, _objective(A, mp), "barrier+polar", res)
    # interior optimum (e.g. non-projective rank-one effects): certify by the duality gap
    mp = _polish_primal(A, m, y)
    if mp is not None and _objective(A, mp) > _objective(A, m):
        m = mp
    return PovmSolution(m, _objective(A, m), "barrier", duality_gap(A, m, y))


def povm_linear_opt(operators, tol: float = C.POVM_CERT_TOL, init=None) -> tuple[Povm, float]:
    """Maximise sum_b Tr(A_b M_b) over POVMs {M_b}.

    Two outcomes use the closed form (projector onto the positive part of
    A_0 - A_1). Otherwise a warm start ``init`` is refined by a polar
    fixed-point iteration and accepted only if its KKT certificate is below
    ``tol``; failing that, a barrier method solves the dual to high accuracy
    and the result is certified by its duality gap.
    """
    A = np.asarray(operators, dtype=complex)
    if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] < 1:
        raise DimensionMismatch("operators must be a list of square matrices of one size")
    if np.abs(A - np.swapaxes(A.conj(), 1, 2)).max() > C.HERMITIAN_TOL * max(1.0, float(np.abs(A).max())):
        raise NotHermitian("objective operators must be Hermitian")
    A = _herm(A)
    if A.shape[0] == 1:
        m = np.eye(A.shape[1])[None].astype(complex)
        return Povm(m), _objective(A, m)
    sol = _solve_povm(A, None if init is None else np.asarray(init))
    return Povm(sol.effects), sol.objective


# ---------------------------------------------------------------------------
# state subproblem


def _top_vector(b: np.ndarray) -> np.ndarray:
    """Deterministic top eigenvector.

    In a degenerate top eigenspace the lowest-index basis vector with a
    nonzero projection is used; the phase makes the first largest-magnitude
    entry real positive.
    """
    w, v = np.linalg.eigh(_herm(b))
    top = v[:, w >= w[-1] - 1e-10 * max(1.0, abs(w[-1]))]
    if top.shape[1] == 1:
        vec = top[:, 0]
    else:
        proj = top @ top.conj().T
        norms = np.linalg.norm(proj, axis=0)
        i = int(np.argmax(norms > 1e-8))
        vec = proj[:, i] / norms[i]
    k = int(np.argmax(np.abs(vec) >= np.abs(vec).max() - 1e-12))
    return vec * (abs(vec[k]) / vec[k])


def state_opt(objective_ops) -> Preparation:
    """Pure states maximising Tr(rho_x B_x) for each message x.

    ``objective_ops`` has shape (d, d, dim, dim) indexed by (x0, x1), or is a
    flat list of d^2 matrices in lexicographic message order.
    """
    B = np.asarray(objective_ops, dtype=complex)
    if B.ndim == 3:
        d = math.isqrt(B.shape[0])
        if d * d != B.shape[0]:
            raise DimensionMismatch("flat operator list must have d^2 entries")
        B = B.reshape(d, d, *B.shape[1:])
    if B.ndim != 4 or B.shape[0] != B.shape[1] or B.shape[2] != B.shape[3]:
        raise DimensionMismatch("objective operators must have shape (d, d, dim, dim)")
    if np.abs(B - np.swapaxes(B.conj(), -1, -2)).max() > C.HERMITIAN_TOL * max(1.0, float(np.abs(B).max())):
        raise NotHermitian("objective operators must be Hermitian")
    d = B.shape[0]
    states = np.empty_like(B)
    for x0, x1 in itertools.product(range(d), repeat=2):
        v = _top_vector(B[x0, x1])
        states[x0, x1] = np.outer(v, v.conj())
    return Preparation(states)


# ---------------------------------------------------------------------------
# see-saw loop


@dataclass(frozen=True)
class SeesawConfig:
    d: int
    eta: float
    restarts: int = C.SEESAW_RESTARTS
    max_iters: int = C.SEESAW_MAX_ITERS
    tol: float = C.SEESAW_TOL
    seed: int = 0

    def __post_init__(self):
        check_dimension(self.d)
        _check_eta(self.eta)
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ValueError("restarts must be a positive integer")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class RestartTrace:
    """Per-iteration record: P_AB after step 1, P_AC after step 2, P_AB after step 3."""

    pab_step1: list = field(default_factory=list)
    pac_step2: list = field(default_factory=list)
    pab_step3: list = field(default_factory=list)


@dataclass
class RestartResult:
    index: int
    p_ab: float
    p_ac: float
    iterations: int
    converged: bool
    strategy: StrategyBundle
    trace: RestartTrace


@dataclass
class SeesawResult:
    p_ab: float
    p_ac: float
    p_joint: float
    iterations: int
    converged: bool
    best_restart: int
    restarts_converged: int = 0
    strategy: StrategyBundle | None = None
    restarts: list = field(default_factory=list, repr=False)


def _messages(d):
    return np.array(list(itertools.product(range(d), repeat=2)))


def _barun_ops(rho: np.ndarray, msgs: np.ndarray, d: int) -> np.ndarray:
    """A[y, b] = sum_{x : x_y = b} rho_x."""
    A = np.zeros((2, d) + rho.shape[1:], dtype=complex)
    for y in (0, 1):
        np.add.at(A[y], msgs[:, y], rho)
    return A


def _run_restart(cfg: SeesawConfig, index: int, record_trace: bool = True) -> RestartResult:
    d, eta = cfg.d, cfg.eta
    rng = np.random.default_rng([cfg.seed, index])
    msgs = _messages(d)
    rho = np.array([random_density_matrix(d, rng) for _ in range(d * d)])
    norm = 1.0 / (2 * d * d)
    trace = RestartTrace()
    m_prev = [None, None]
    n_prev = [None, None]
    prev = None
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        # step 1: Barun's sharp POVMs; P_AB is affine in them through eta M + (1-eta) I/d
        A = _barun_ops(rho, msgs, d)
        M = np.array([_solve_povm(A[y], m_prev[y]).effects for y in (0, 1)])
        kraus = np.array([_kraus_set(M[y], eta) for y in (0, 1)])
        m_tilde = np.einsum("ybji,ybjk->ybik", kraus.conj(), kraus)
        pab = norm * sum(np.einsum("xij,xji->", rho, m_tilde[y][msgs[:, y]]).real for y in (0, 1))

        # step 2: Chhanda's POVMs on the outcome-averaged states
        N = []
        pac = 0.0
        for z in (0, 1):
            k = kraus[1 - z]
            post = np.einsum("bij,xjk,blk->xil", k, rho, k.conj())
            Az = np.zeros((d, d, d), dtype=complex)
            np.add.at(Az, msgs[:, z], post)
            sol = _solve_povm(_herm(Az), n_prev[z])
            N.append(sol.effects)
            pac += norm * sol.objective
        N = np.array(N)
        strategy_arrays = (rho, kraus, N)

        # step 3: states; the sharp part suffices because eta > 0 only rescales it,
        # and it stays well defined at eta = 0
        B = M[0][msgs[:, 0]] + M[1][msgs[:, 1]]
        rho = np.array([np.outer(v, v.conj()) for v in map(_top_vector, B)])
        if record_trace:
            pab3 = norm * sum(np.einsum("xij,xji->", rho, m_tilde[y][msgs[:, y]]).real for y in (0, 1))
            trace.pab_step1.append(float(pab))
            trace.pac_step2.append(float(pac))
            trace.pab_step3.append(float(pab3))

        m_prev, n_prev = M, N
        if prev is not None and abs(pab - prev[0]) < cfg.tol and abs(pac - prev[1]) < cfg.tol:
            converged = True
            break
        prev = (pab, pac)

    rho_s, kraus_s, N_s = strategy_arrays
    strategy = StrategyBundle(
        d,
        Preparation(_herm(rho_s).reshape(d, d, d, d)),
        KrausInstrument(kraus_s),
        tuple(Povm(_herm(n)) for n in N_s),
    )
    return RestartResult(index, float(pab), float(pac), it, converged, strategy, trace)


def seesaw_run(config: SeesawConfig, workers: int = 1, strict: bool = False) -> SeesawResult:
    """Best of ``config.restarts`` independent see-saw runs (largest P_AB · P_AC).

    Restart i draws its initial states from ``default_rng([seed, i])``; the
    result is independent of ``workers``. Converged restarts are preferred.
    With ``strict`` set, a run in which no restart converged raises
    NoConvergence carrying the partial result.
    """
    idx = range(config.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda i: _run_restart(config, i), idx))
    else:
        runs = [_run_restart(config, i) for i in idx]
    pool_ = [r for r in runs if r.converged] or runs
    best = max(pool_, key=lambda r: (r.p_ab * r.p_ac, -r.index))
    result = SeesawResult(
        p_ab=best.p_ab,
        p_ac=best.p_ac,
        p_joint=best.p_ab * best.p_ac,
        iterations=best.iterations,
        converged=best.converged,
        best_restart=best.index,
        restarts_converged=sum(r.converged for r in runs),
        strategy=best.strategy,
        restarts=runs,
    )
    if strict and not result.converged:
        raise NoConvergence("no see-saw restart converged", result)
    return result


def replay(result: SeesawResult) -> tuple[float, float]:
    """Re-evaluate the reported strategy through the game functionals."""
    return game_p_ab(result.strategy), game_p_ac(result.strategy)


def dimension_sweep(d_range, modes=MODES, restarts: int = C.SEESAW_RESTARTS, tol: float = C.SEESAW_TOL,
                    seed: int = 0, max_iters: int = C.SEESAW_MAX_ITERS, workers: int = 1) -> list[dict]:
    """Barun, Chhanda and total success per dimension for the classical, eta_c and sharp cases."""
    rows = []
    for d in d_range:
        d = check_dimension(d)
        for mode in modes:
            if mode == "classical":
                rows.append({
                    "d": d, "mode": mode, "eta": None,
                    "p_barun": classical_barun_success(d),
                    "p_chhanda": classical_chhanda_success(d),
                    "p_total": classical_optimal_success(d),
                    "converged": True, "iterations": 0,
                })
                continue
            if mode == "eta_critical":
                eta = eta_critical(d)
            elif mode == "sharp":
                eta = 1.0
            else:
                raise ValueError(f"unknown mode {mode!r}")
            res = seesaw_run(SeesawConfig(d, eta, restarts, max_iters, tol, seed), workers=workers)
            rows.append({
                "d": d, "mode": mode, "eta": eta,
                "p_barun": res.p_ab, "p_chhanda": res.p_ac, "p_total": res.p_joint,
                "converged": res.converged, "iterations": res.iterations,
            })
    return rows
