"""Matrix factorizations for detection: QR, sorted QR, complex LLL.

All factorizations are thin (Q: n_r x n_t). qr() normalizes the R
diagonal to real >= 0. sorted_qr() is a modified Gram-Schmidt that
re-evaluates the remaining projected column norms at every step and
factors the smallest first. clll() reduces the basis with the complex
LLL algorithm (delta = 0.75 by default).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, FactorizationError, ReductionError

RANK_TOL = 1e-12
CLLL_ITER_CAP_FACTOR = 50


def round_gaussian_vector(z: np.ndarray) -> np.ndarray:
    """Per-axis round to nearest integer, ties away from zero."""
    z = np.asarray(z, dtype=np.complex128)
    re = np.floor(np.abs(z.real) + 0.5) * np.where(z.real >= 0, 1.0, -1.0)
    im = np.floor(np.abs(z.imag) + 0.5) * np.where(z.imag >= 0, 1.0, -1.0)
    return re + 1j * im


@dataclass(frozen=True)
class QrFactors:
    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray  # column index array: (H @ Pi)[:, i] = H[:, perm[i]]

    @property
    def pi(self) -> np.ndarray:
        """Permutation matrix with H @ pi = q @ r."""
        n = len(self.perm)
        P = np.zeros((n, n))
        P[self.perm, np.arange(n)] = 1.0
        return P


@dataclass(frozen=True)
class LllFactors:
    q: np.ndarray
    r: np.ndarray
    t: np.ndarray  # unimodular, Gaussian-integer entries; H @ t = q @ r
    delta: float


def _check_shape(H: np.ndarray):
    if H.ndim != 2:
        raise ConfigurationError("matrix input must be 2-D")
    m, n = H.shape
    if m < n:
        raise ConfigurationError(f"overdetermined matrix required: "
                                 f"{m} rows < {n} columns")
    if n < 1:
        raise ConfigurationError("matrix needs at least one column")


def qr(H: np.ndarray) -> QrFactors:
    """Thin QR with real nonnegative R diagonal and a rank check."""
    H = np.asarray(H, dtype=np.complex128)
    _check_shape(H)
    q, r = np.linalg.qr(H)
    d = np.diagonal(r).copy()
    mag = np.abs(d)
    phase = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    q = q * phase[None, :]
    r = phase.conj()[:, None] * r
    scale = np.linalg.norm(H)
    bad = np.abs(np.diagonal(r)) <= RANK_TOL * max(scale, 1e-300)
    if bad.any():
        col = int(np.argmax(bad))
        raise FactorizationError(f"rank-deficient input: column {col} has "
                                 f"negligible projected norm")
    return QrFactors(q=q, r=r, perm=np.arange(H.shape[1]))


def sorted_qr(H: np.ndarray) -> QrFactors:
    """Column-sorted QR: smallest freshly-computed projected norm first.

    Modified Gram-Schmidt; the norm re-evaluation every step (rather
    than the classic decrement update) keeps Q orthonormal for highly
    correlated inputs. Ties pick the lowest column index.
    """
    H = np.asarray(H, dtype=np.complex128)
    _check_shape(H)
    m, n = H.shape
    q = H.copy()
    r = np.zeros((n, n), dtype=np.complex128)
    perm = np.arange(n)
    scale = np.linalg.norm(H)
    for i in range(n):
        norms = np.linalg.norm(q[:, i:], axis=0)
        j = i + int(np.argmin(norms))
        if j != i:
            q[:, [i, j]] = q[:, [j, i]]
            r[:, [i, j]] = r[:, [j, i]]
            perm[[i, j]] = perm[[j, i]]
        rii = np.linalg.norm(q[:, i])
        if rii <= RANK_TOL * max(scale, 1e-300):
            raise FactorizationError(f"rank-deficient input: column "
                                     f"{int(perm[i])} has negligible "
                                     f"projected norm")
        r[i, i] = rii
        q[:, i] /= rii
        if i + 1 < n:
            r[i, i + 1:] = q[:, i].conj() @ q[:, i + 1:]
            q[:, i + 1:] -= np.outer(q[:, i], r[i, i + 1:])
    return QrFactors(q=q, r=r, perm=perm)


def clll(H: np.ndarray, delta: float = 0.75) -> LllFactors:
    """Complex LLL reduction seeded from qr(H).

    Returns factors with H @ t = q @ r, t unimodular over the Gaussian
    integers, r size-reduced and satisfying the delta condition.
    """
    if not 0.5 < delta <= 1.0:
        raise ConfigurationError(f"delta must be in (0.5, 1], got {delta}")
    base = qr(H)
    n = base.r.shape[0]
    q = np.ascontiguousarray(base.q)
    r = np.ascontiguousarray(base.r)
    t = np.eye(n, dtype=np.complex128)
    cap = CLLL_ITER_CAP_FACTOR * n * n
    iters = kernels.clll_kernel(q, r, t, float(delta), cap)
    if iters < 0:
        partial = LllFactors(q=q, r=r, t=t, delta=delta)
        raise ReductionError(
            f"lattice reduction exceeded {cap} iterations "
            f"(n={n}); partial factors attached", partial=partial)
    return LllFactors(q=q, r=r, t=t, delta=delta)


def orthogonality_defect(H: np.ndarray) -> float:
    """prod_k ||h_k|| / sqrt(det(H^H H)); 1 for orthogonal columns."""
    H = np.asarray(H, dtype=np.complex128)
    col_norms = np.linalg.norm(H, axis=0)
    gram_det = np.linalg.det(H.conj().T @ H).real
    return float(np.prod(col_norms) / np.sqrt(max(gram_det, 0.0)))
