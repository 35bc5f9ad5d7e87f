"""Small dense Hermitian linear algebra and seeded random quantum objects."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import constants as C
from .errors import BadDimension, NoConvergence, NotHermitian, NotPsd
from .objects import DensityMatrix, Povm


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray   # real, descending
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues


def _check_hermitian(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    if np.abs(m - m.conj().T).max(initial=0.0) > C.HERMITIAN_TOL:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return (m + m.conj().T) / 2


def jacobi_eig(m, max_sweeps: int = C.JACOBI_MAX_SWEEPS, tol: float = C.JACOBI_OFF_TOL) -> HermitianEig:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies a real Givens rotation that zeroes it.
    """
    a = _check_hermitian(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)

    def off_norm():
        return np.linalg.norm(a - np.diag(np.diag(a)))

    for _ in range(max_sweeps):
        if off_norm() <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = 0.5 * np.arctan2(2 * mag, (a[p, p] - a[q, q]).real)
                c, s = np.cos(theta), np.sin(theta)
                # columns p, q of J = diag(1, conj(phase)) @ [[c, -s], [s, c]]
                jp = np.zeros(n, dtype=complex)
                jq = np.zeros(n, dtype=complex)
                jp[p], jp[q] = c, s * phase.conjugate()
                jq[p], jq[q] = -s, c * phase.conjugate()
                cols = a[:, [p, q]] @ np.array([[jp[p], jq[p]], [jp[q], jq[q]]])
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = np.array([[jp[p], jq[p]], [jp[q], jq[q]]]).conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]] @ np.array([[jp[p], jq[p]], [jp[q], jq[q]]])
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    else:
        if off_norm() > tol * scale:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return HermitianEig(w[order], v[:, order])


def herm_eig(m, method: str = "jacobi") -> HermitianEig:
    """Eigendecomposition with eigenvalues sorted in descending order.

    ``method="lapack"`` delegates to :func:`numpy.linalg.eigh`; the default is
    the in-house Jacobi solver.
    """
    if method == "jacobi":
        return jacobi_eig(m)
    if method == "lapack":
        h = _check_hermitian(m)
        w, v = np.linalg.eigh(h)
        return HermitianEig(w[::-1].copy(), v[:, ::-1].copy())
    raise ValueError(f"unknown method {method!r}")


def rebuild(eig: HermitianEig) -> np.ndarray:
    w, v = eig
    return (v * w) @ v.conj().T


def psd_sqrt(m, method: str = "jacobi") -> np.ndarray:
    w, v = herm_eig(m, method)
    floor = C.PSD_FLOOR * max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.size and w[-1] < floor:
        raise NotPsd(f"smallest eigenvalue {w[-1]:.3e} is below {floor:.1e}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def positive_part(m, method: str = "jacobi") -> np.ndarray:
    """Sum of lambda_i v_i v_i^dagger over strictly positive eigenvalues."""
    w, v = herm_eig(m, method)
    return (v * np.where(w > 0, w, 0.0)) @ v.conj().T


def _check_random_dim(dim: int) -> int:
    if int(dim) != dim or not C.MIN_DIM <= dim <= C.MAX_DIM:
        raise BadDimension(f"dim must be in [{C.MIN_DIM}, {C.MAX_DIM}], got {dim!r}")
    return int(dim)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(dim: int, rng: np.random.Generator, cols: int | None = None) -> np.ndarray:
    cols = dim if cols is None else cols
    return rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))


def random_density_matrix(dim: int, rng) -> np.ndarray:
    a = ginibre(dim, _rng(rng))
    rho = a.conj().T @ a
    return rho / np.trace(rho).real


def random_density(dim: int, seed) -> DensityMatrix:
    """Normalised A^dagger A with standard complex normal entries."""
    return DensityMatrix(random_density_matrix(_check_random_dim(dim), seed))


def random_unitary(dim: int, seed) -> np.ndarray:
    """Gram-Schmidt (QR) of a Ginibre matrix.

    Each column is rephased so that its first nonzero entry is real positive,
    which makes the output a deterministic function of the seed.
    """
    dim = _check_random_dim(dim)
    q, _ = np.linalg.qr(ginibre(dim, _rng(seed)))
    for j in range(dim):
        col = q[:, j]
        k = int(np.argmax(np.abs(col) > 1e-14))
        q[:, j] = col * (abs(col[k]) / col[k])
    return q


def random_povm(dim: int, outcomes: int, seed) -> Povm:
    """Outcome effects S^-1/2 G_b S^-1/2 with G_b = A_b^dagger A_b, S = sum_b G_b."""
    dim = _check_random_dim(dim)
    if int(outcomes) != outcomes or outcomes < 2:
        raise BadDimension(f"a POVM needs at least 2 outcomes, got {outcomes!r}")
    rng = _rng(seed)
    g = []
    for _ in range(int(outcomes)):
        a = ginibre(dim, rng)
        g.append(a.conj().T @ a)
    g = np.array(g)
    w, v = np.linalg.eigh(g.sum(axis=0))
    s = (v / np.sqrt(w)) @ v.conj().T
    effects = s @ g @ s
    effects = (effects + effects.conj().transpose(0, 2, 1)) / 2
    return Povm(effects, label="random")
