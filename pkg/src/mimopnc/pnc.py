"""Nested cubic-lattice precoding and decoding over triangularized channels.

The coarse lattice is ``beta * Z[i]`` per complex symbol, so the mod
operation folds each real dimension into ``[-beta/2, beta/2)``.  The fine
lattice of subchannel ``k`` has pitch ``beta / M_k``.  Codewords are the
``M_k x M_k`` points of the fine coset centred in the coarse cell:

    (beta / M_k) * ((a - (M_k - 1)/2) + i (b - (M_k - 1)/2)),  0 <= a, b < M_k

The sum of two codewords is congruent to a point of the fine lattice
itself, which is what the relay decodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadOrders, DimensionError, IndexOutOfRange

__all__ = [
    "NestedLatticeCode",
    "SubMessage",
    "code_from_power",
    "orders_from_rates",
    "mod_coarse",
    "encode",
    "message_from_point",
    "sum_indices",
    "precode",
    "transmit",
    "relay_decode",
    "terminal_combine",
]


@dataclass(frozen=True)
class NestedLatticeCode:
    beta: float
    orders: tuple

    def __post_init__(self):
        orders = tuple(int(m) for m in self.orders)
        if not orders or any(m < 1 for m in orders):
            raise BadOrders(f"nesting orders must be positive integers, got {self.orders!r}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "orders", orders)

    @property
    def n_r(self) -> int:
        return len(self.orders)

    @property
    def second_moment(self) -> float:
        """Coarse-cell second moment per complex symbol."""
        return self.beta**2 / 6.0

    def pitch(self, k: int) -> float:
        return self.beta / self.orders[k]

    def rate(self, k: int) -> float:
        """Bits per complex symbol on subchannel ``k``."""
        return 2.0 * math.log2(self.orders[k])


@dataclass(frozen=True)
class SubMessage:
    """Per-symbol index pairs ``(a, b)`` for one subchannel."""

    a: np.ndarray
    b: np.ndarray

    def __len__(self) -> int:
        return len(self.a)

    def __eq__(self, other):
        if not isinstance(other, SubMessage):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    __hash__ = None


def code_from_power(power: float, n_r: int, orders: Sequence[int]) -> NestedLatticeCode:
    """Cubic code whose coarse second moment is ``power / n_r`` per symbol."""
    if not power > 0:
        raise ValueError("power must be positive")
    if len(orders) != n_r:
        raise BadOrders(f"expected {n_r} nesting orders, got {len(orders)}")
    return NestedLatticeCode(beta=math.sqrt(6.0 * power / n_r), orders=tuple(orders))


def orders_from_rates(rates: Sequence[float]) -> tuple:
    """``M_k = floor(2^(r_k / 2))``, at least 1."""
    return tuple(max(1, int(math.floor(2.0 ** (r / 2.0) + 1e-12))) for r in rates)


def _fold(x: np.ndarray, beta: float) -> np.ndarray:
    return x - beta * np.floor(x / beta + 0.5)


def mod_coarse(x, beta: float) -> np.ndarray:
    """Reduce each real dimension of ``x`` into ``[-beta/2, beta/2)``."""
    x = np.asarray(x, dtype=np.complex128)
    return _fold(x.real, beta) + 1j * _fold(x.imag, beta)


def _offset(m: int) -> float:
    return (m - 1) / 2.0


def encode(msg: SubMessage, k: int, code: NestedLatticeCode) -> np.ndarray:
    m = code.orders[k]
    a = np.asarray(msg.a)
    b = np.asarray(msg.b)
    if a.shape != b.shape:
        raise DimensionError("index arrays must have the same shape")
    if np.any((a < 0) | (a >= m) | (b < 0) | (b >= m)):
        raise IndexOutOfRange(f"indices must lie in [0, {m})")
    d = code.pitch(k)
    off = _offset(m)
    return mod_coarse(d * ((a - off) + 1j * (b - off)), code.beta)


def message_from_point(word, k: int, code: NestedLatticeCode) -> SubMessage:
    """Inverse of :func:`encode`, defined modulo the coarse lattice."""
    m = code.orders[k]
    d = code.pitch(k)
    off = _offset(m)
    w = np.asarray(word, dtype=np.complex128)
    a = np.mod(np.rint(w.real / d + off).astype(np.int64), m)
    b = np.mod(np.rint(w.imag / d + off).astype(np.int64), m)
    return SubMessage(a, b)


def sum_indices(word, k: int, code: NestedLatticeCode) -> SubMessage:
    """Indices of a point of the (uncentred) fine lattice modulo the coarse one.

    This labels the relay's decoded sum codeword.
    """
    m = code.orders[k]
    d = code.pitch(k)
    w = np.asarray(word, dtype=np.complex128)
    a = np.mod(np.rint(w.real / d).astype(np.int64), m)
    b = np.mod(np.rint(w.imag / d).astype(np.int64), m)
    return SubMessage(a, b)


def precode(words, t_i, diag, code: NestedLatticeCode, dither=None) -> np.ndarray:
    """Sequential mod-lattice interference pre-subtraction.

    Row ``k`` of the output is

        mod(l_k + dither_k - (1/t_k) * sum_{j<k} T[k, j] * out_j)

    computed in ascending ``k``.

    Parameters
    ----------
    words : array_like
        ``N_r x n`` lattice words for this terminal.
    t_i : array_like
        The terminal's lower-triangular factor (extra zero columns allowed).
    diag : array_like
        Positive diagonal ``t_1..t_{N_r}``.
    dither : array_like, optional
        ``N_r x n`` dither added before folding.
    """
    words = np.atleast_2d(np.asarray(words, dtype=np.complex128))
    t_i = np.asarray(t_i, dtype=np.complex128)
    diag = np.asarray(diag, dtype=float)
    n_r = words.shape[0]
    if t_i.shape[0] != n_r or t_i.shape[1] < n_r or diag.shape != (n_r,) or code.n_r != n_r:
        raise DimensionError("words, triangular factor, diagonal and code disagree on N_r")
    if np.any(diag <= 0):
        raise ValueError("diagonal entries must be positive")
    if dither is not None:
        dither = np.asarray(dither, dtype=np.complex128)
        if dither.shape != words.shape:
            raise DimensionError("dither must match the word block")
    out = np.empty_like(words)
    for k in range(n_r):
        target = words[k] if dither is None else words[k] + dither[k]
        interference = t_i[k, :k] @ out[:k] / diag[k]
        out[k] = mod_coarse(target - interference, code.beta)
    return out


def transmit(v_i, x_tilde) -> np.ndarray:
    """Map the precoded ``N_r x n`` block onto the terminal's antennas."""
    v_i = np.asarray(v_i, dtype=np.complex128)
    x_tilde = np.atleast_2d(np.asarray(x_tilde, dtype=np.complex128))
    n_t = v_i.shape[0]
    if v_i.shape != (n_t, n_t) or x_tilde.shape[0] > n_t:
        raise DimensionError("v_i must be square with at least as many rows as x_tilde")
    padded = np.zeros((n_t, x_tilde.shape[1]), dtype=np.complex128)
    padded[: x_tilde.shape[0]] = x_tilde
    return v_i @ padded


def relay_decode(y, u, diag, code: NestedLatticeCode, dither=None) -> np.ndarray:
    """Rotate, scale and round to the fine lattice, per subchannel.

    ``dither`` is the sum of both terminals' dithers, if any were used.
    Returns the ``N_r x n`` block of decoded sum codewords.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.complex128))
    u = np.asarray(u, dtype=np.complex128)
    diag = np.asarray(diag, dtype=float)
    n_r = diag.shape[0]
    if u.shape != (n_r, n_r) or y.shape[0] != n_r or code.n_r != n_r:
        raise DimensionError("y, u, diagonal and code disagree on N_r")
    y_rot = u.conj().T @ y
    out = np.empty_like(y_rot)
    for k in range(n_r):
        z = y_rot[k] / diag[k]
        if dither is not None:
            z = z - dither[k]
        z = mod_coarse(z, code.beta)
        d = code.pitch(k)
        out[k] = mod_coarse(d * (np.rint(z.real / d) + 1j * np.rint(z.imag / d)), code.beta)
    return out


def terminal_combine(l_hat, own, code: NestedLatticeCode) -> np.ndarray:
    """Strip the terminal's own codeword from the decoded sum."""
    l_hat = np.asarray(l_hat, dtype=np.complex128)
    own = np.asarray(own, dtype=np.complex128)
    if l_hat.shape != own.shape:
        raise DimensionError("decoded and own words must have the same shape")
    return mod_coarse(l_hat - own, code.beta)
