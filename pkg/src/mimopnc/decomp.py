"""Dense complex matrix kernels for joint equal-diagonal triangularization.

Two full-row-rank channel matrices ``h1`` (m x n1) and ``h2`` (m x n2)
with equal singular-value products are factored as

    h1 = u @ t1 @ v1^H,    h2 = u @ t2 @ v2^H

with a shared left unitary ``u``, unitaries ``v1``, ``v2`` and generalized
lower-triangular ``t1``, ``t2`` whose diagonals are real, positive and
identical.  The construction goes through a geometric mean decomposition
(GMD) of ``R1 @ inv(R2)``, where ``hi^H = Qi @ Ri`` are thin QR factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    RankDeficient,
    UnequalSingularValueProducts,
)

__all__ = [
    "GmdFactors",
    "JetFactors",
    "DecompReport",
    "as_matrix",
    "qr_reduce",
    "rq_reduce",
    "gmd",
    "jet",
    "validate_jet",
    "RANK_RTOL",
    "PRODUCT_RTOL",
]

RANK_RTOL = 1e-10
PRODUCT_RTOL = 1e-6
# Diagonal equalization check inside gmd, relative to sigma_bar.
_GMD_RTOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite, non-empty 2-D complex128 array."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} has non-finite entries")
    return m


@dataclass(frozen=True)
class GmdFactors:
    """``m = u @ r @ v^H`` with ``r`` upper triangular, diagonal ``sigma_bar``."""

    u: np.ndarray
    r: np.ndarray
    v: np.ndarray
    sigma_bar: float


@dataclass(frozen=True)
class JetFactors:
    u: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    diag: np.ndarray

    @property
    def n_r(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class DecompReport:
    reconstruction_error_1: float
    reconstruction_error_2: float
    unitarity_errors: dict = field(default_factory=dict)
    triangularity_error: float = 0.0
    diag_mismatch: float = 0.0

    @property
    def max_unitarity_error(self) -> float:
        return max(self.unitarity_errors.values())


def _positive_diagonal(q: np.ndarray, r: np.ndarray):
    """Move the phases of diag(r) into the columns of q."""
    d = np.diag(r)
    mag = np.abs(d)
    phase = np.ones_like(d)
    nz = mag > 0
    phase[nz] = d[nz] / mag[nz]
    q = q * phase[np.newaxis, :]
    r = np.conj(phase)[:, np.newaxis] * r
    # The diagonal is real by construction; drop the rounding residue.
    r[np.diag_indices(r.shape[0])] = mag
    return q, r


def qr_reduce(a) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization with a real positive diagonal on ``r``.

    Parameters
    ----------
    a : array_like
        ``rows x cols`` complex matrix with ``rows >= cols`` and full column
        rank.

    Returns
    -------
    q : np.ndarray
        ``rows x cols`` with orthonormal columns.
    r : np.ndarray
        ``cols x cols`` upper triangular, real positive diagonal.

    Raises
    ------
    DimensionError
        If ``rows < cols``.
    RankDeficient
        If a diagonal entry of ``r`` falls below ``1e-10`` times the
        largest singular value of ``a``.
    """
    a = as_matrix(a)
    rows, cols = a.shape
    if rows < cols:
        raise DimensionError(f"qr_reduce needs rows >= cols, got {rows}x{cols}")
    q, r = np.linalg.qr(a, mode="reduced")
    q, r = _positive_diagonal(q, r)
    tol = RANK_RTOL * np.linalg.norm(a, 2)
    if np.any(np.diag(r).real <= tol):
        raise RankDeficient(f"matrix of shape {rows}x{cols} is rank deficient")
    return q, r


def rq_reduce(a) -> tuple[np.ndarray, np.ndarray]:
    """Factor a square nonsingular ``a`` as ``r @ q^H``.

    ``r`` is upper triangular with a real positive diagonal and ``q`` is
    unitary.  Computed from the QR factorization of the column-reversed
    ``a^H``.
    """
    a = as_matrix(a)
    n, cols = a.shape
    if n != cols:
        raise DimensionError(f"rq_reduce needs a square matrix, got {n}x{cols}")
    rev = np.arange(n)[::-1]
    q0, r0 = qr_reduce(a.conj().T[:, rev])
    r = r0.conj().T[np.ix_(rev, rev)]
    q = q0[:, rev]
    return r, q


def _swap(r: np.ndarray, left: np.ndarray, right: np.ndarray, i: int, j: int) -> None:
    if i == j:
        return
    r[[i, j], :] = r[[j, i], :]
    r[:, [i, j]] = r[:, [j, i]]
    left[:, [i, j]] = left[:, [j, i]]
    right[:, [i, j]] = right[:, [j, i]]


def gmd(m) -> GmdFactors:
    """Geometric mean decomposition ``m = u @ r @ v^H``.

    Starts from the SVD and walks down the diagonal.  At step ``k`` the
    trailing block is still diagonal; the largest and smallest remaining
    entries are permuted into positions ``k`` and ``k+1`` and a two-sided
    2x2 rotation sets entry ``(k, k)`` to the geometric mean while keeping
    the product of the pair.  If a remaining entry already equals the
    geometric mean (lowest index wins) it is swapped in without rotating.
    """
    m = as_matrix(m)
    n, cols = m.shape
    if n != cols:
        raise DimensionError(f"gmd needs a square matrix, got {n}x{cols}")
    w, s, zh = np.linalg.svd(m)
    if s[-1] <= RANK_RTOL * s[0]:
        raise RankDeficient("gmd input is singular")
    sigma_bar = float(np.exp(np.mean(np.log(s))))

    r = np.diag(s)
    left = np.eye(n)
    right = np.eye(n)
    tie_tol = 1e-14 * sigma_bar
    for k in range(n - 1):
        d = np.diag(r)[k:]
        ties = np.flatnonzero(np.abs(d - sigma_bar) <= tie_tol)
        if ties.size:
            _swap(r, left, right, k, k + int(ties[0]))
            continue
        p = k + int(np.argmax(d))
        _swap(r, left, right, k, p)
        d = np.diag(r)[k:]
        q = k + int(np.argmin(d))
        _swap(r, left, right, k + 1, q)

        d1, d2 = r[k, k], r[k + 1, k + 1]
        if d1 - d2 <= tie_tol:
            continue
        c2 = min(1.0, max(0.0, (sigma_bar**2 - d2**2) / (d1**2 - d2**2)))
        c, sn = np.sqrt(c2), np.sqrt(1.0 - c2)
        g1 = np.array([[c, -sn], [sn, c]])
        g2 = np.array([[c * d1, -sn * d2], [sn * d2, c * d1]]) / sigma_bar
        idx = [k, k + 1]
        r[:, idx] = r[:, idx] @ g1
        r[idx, :] = g2.T @ r[idx, :]
        r[k + 1, k] = 0.0
        left[:, idx] = left[:, idx] @ g2
        right[:, idx] = right[:, idx] @ g1

    diag = np.diag(r)
    if np.max(np.abs(diag - sigma_bar)) > _GMD_RTOL * sigma_bar:
        raise ConvergenceError("gmd failed to equalize the diagonal")
    u = w @ left
    v = zh.conj().T @ right
    return GmdFactors(u=u, r=np.triu(r).astype(np.complex128), v=v, sigma_bar=sigma_bar)


def _orthonormal_complement(q: np.ndarray) -> np.ndarray:
    n, m = q.shape
    if n == m:
        return np.zeros((n, 0), dtype=np.complex128)
    full, _ = np.linalg.qr(q, mode="complete")
    return full[:, m:]


def _check_channel(h: np.ndarray, name: str) -> float:
    """Validate shape and rank; return the product of singular values."""
    m, n = h.shape
    if n < m:
        raise DimensionError(f"{name} has {n} columns < {m} rows")
    s = np.linalg.svd(h, compute_uv=False)
    if s[-1] <= RANK_RTOL * s[0]:
        raise RankDeficient(f"{name} is not of full row rank")
    return float(np.prod(s))


def jet(h1, h2) -> JetFactors:
    """Joint equal-diagonal triangularization of two channel matrices.

    Parameters
    ----------
    h1, h2 : array_like
        ``m x n1`` and ``m x n2`` complex matrices, ``n1, n2 >= m``, both of
        rank ``m``, whose singular-value products agree to a relative
        ``1e-6``.

    Returns
    -------
    JetFactors
        ``u`` (m x m), ``v1`` (n1 x n1), ``v2`` (n2 x n2), generalized
        lower-triangular ``t1`` (m x n1), ``t2`` (m x n2), and the shared
        diagonal ``diag`` (taken from ``t1``).

    Raises
    ------
    DimensionError, RankDeficient, UnequalSingularValueProducts
    """
    h1 = as_matrix(h1, "h1")
    h2 = as_matrix(h2, "h2")
    if h1.shape[0] != h2.shape[0]:
        raise DimensionError(f"row counts differ: {h1.shape[0]} vs {h2.shape[0]}")
    p1 = _check_channel(h1, "h1")
    p2 = _check_channel(h2, "h2")
    if abs(p1 - p2) > PRODUCT_RTOL * max(p1, p2):
        raise UnequalSingularValueProducts(p1, p2)

    m = h1.shape[0]
    q1, r1 = qr_reduce(h1.conj().T)
    q2, r2 = qr_reduce(h2.conj().T)
    c = np.linalg.solve(r2.T, r1.T).T  # r1 @ inv(r2)
    g = gmd(c)
    s2, u0 = rq_reduce(g.v.conj().T @ r2)

    t2 = s2.conj().T
    t1 = (g.r @ s2).conj().T
    v1 = np.hstack([q1 @ g.u, _orthonormal_complement(q1)])
    v2 = np.hstack([q2 @ g.v, _orthonormal_complement(q2)])
    t1 = np.hstack([t1, np.zeros((m, h1.shape[1] - m), dtype=np.complex128)])
    t2 = np.hstack([t2, np.zeros((m, h2.shape[1] - m), dtype=np.complex128)])
    diag = np.diag(t1).real.copy()
    return JetFactors(u=u0, v1=v1, v2=v2, t1=t1, t2=t2, diag=diag)


def _unitarity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[1]))))


def validate_jet(f: JetFactors, h1, h2) -> DecompReport:
    """Residuals of a joint triangularization against its inputs."""
    h1 = as_matrix(h1, "h1")
    h2 = as_matrix(h2, "h2")
    m = f.u.shape[0]
    for name, t, v, h in (("1", f.t1, f.v1, h1), ("2", f.t2, f.v2, h2)):
        if f.u.shape != (m, m) or t.shape != h.shape or v.shape != (h.shape[1], h.shape[1]):
            raise DimensionError(f"factor shapes inconsistent with h{name}")

    def recon(t, v, h):
        return float(np.linalg.norm(f.u @ t @ v.conj().T - h) / np.linalg.norm(h))

    upper = 0.0
    for t in (f.t1, f.t2):
        above = np.triu(t, k=1)
        if above.size:
            upper = max(upper, float(np.max(np.abs(above))))
    mismatch = float(np.max(np.abs(np.diag(f.t1) - np.diag(f.t2))))
    return DecompReport(
        reconstruction_error_1=recon(f.t1, f.v1, h1),
        reconstruction_error_2=recon(f.t2, f.v2, h2),
        unitarity_errors={
            "u": _unitarity_error(f.u),
            "v1": _unitarity_error(f.v1),
            "v2": _unitarity_error(f.v2),
        },
        triangularity_error=upper,
        diag_mismatch=mismatch,
    )
