"""Closed-form rates and bounds for the MIMO two-way relay channel.

All rates are in bits per complex channel use (base-2 logarithms).
``c_common = inf`` means the broadcast phase never limits the rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decomp import RANK_RTOL, as_matrix, jet
from .errors import (
    AlphaOutOfRange,
    DimensionError,
    EmptyGains,
    EmptyGrid,
    NotNormalized,
    RankDeficient,
)

__all__ = [
    "MODES",
    "TwoWayNetwork",
    "RateReport",
    "waterfill",
    "link_capacity",
    "cutset_rate",
    "subchannel_rates",
    "pnc_rate",
    "df_rate",
    "af_rate_siso",
    "timeshare_envelope",
    "high_snr_gap",
    "high_snr_condition",
    "rate_report",
]

MODES = ("zf", "wilson")
NORMALIZATION_RTOL = 1e-6


@dataclass(frozen=True)
class TwoWayNetwork:
    """Problem instance: channels into the relay, power, broadcast capacity."""

    h1: np.ndarray
    h2: np.ndarray
    power: float
    c_common: float = math.inf

    def __post_init__(self):
        h1 = as_matrix(self.h1, "h1")
        h2 = as_matrix(self.h2, "h2")
        if h1.shape[0] != h2.shape[0]:
            raise DimensionError(f"row counts differ: {h1.shape[0]} vs {h2.shape[0]}")
        for name, h in (("h1", h1), ("h2", h2)):
            if h.shape[1] < h.shape[0]:
                raise DimensionError(f"{name} has fewer columns than rows")
            s = np.linalg.svd(h, compute_uv=False)
            if s[-1] <= RANK_RTOL * s[0]:
                raise RankDeficient(f"{name} is not of full row rank")
        power = float(self.power)
        if not (power > 0 and math.isfinite(power)):
            raise ValueError(f"power must be positive and finite, got {self.power!r}")
        c_common = float(self.c_common)
        if not c_common >= 0:
            raise ValueError(f"c_common must be non-negative, got {self.c_common!r}")
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "c_common", c_common)

    @property
    def n_r(self) -> int:
        return self.h1.shape[0]

    def with_power(self, power: float) -> "TwoWayNetwork":
        return TwoWayNetwork(self.h1, self.h2, power, self.c_common)


@dataclass(frozen=True)
class RateReport:
    power: float
    r_pnc_zf: float
    r_pnc_wilson: float
    r_cs: float
    r_df: float
    r_ts: float
    subchannel_rates: tuple
    high_snr_gap: float
    r_af: Optional[float] = None


def waterfill(gains: Sequence[float], power: float):
    """Water-filling over parallel channels with unit noise.

    Parameters
    ----------
    gains : sequence of float
        Channel power gains (squared singular values), all positive.
    power : float
        Total power to distribute.

    Returns
    -------
    capacity : float
        ``sum(log2(1 + g_j p_j))`` in bits.
    allocation : np.ndarray
        Per-channel powers, same order as ``gains``, summing to ``power``.
    """
    g = np.asarray(gains, dtype=float).ravel()
    if g.size == 0:
        raise EmptyGains("waterfill needs at least one gain")
    if np.any(g <= 0) or not power > 0:
        raise ValueError("gains and power must be positive")
    order = np.argsort(-g, kind="stable")
    inv = 1.0 / g[order]
    # Drop the weakest channels until the water level clears all the rest.
    active = g.size
    while active > 1:
        mu = (power + inv[:active].sum()) / active
        if mu > inv[active - 1]:
            break
        active -= 1
    mu = (power + inv[:active].sum()) / active
    alloc_sorted = np.zeros_like(g)
    alloc_sorted[:active] = mu - inv[:active]
    allocation = np.empty_like(g)
    allocation[order] = alloc_sorted
    capacity = float(np.sum(np.log2(1.0 + g * allocation)))
    return capacity, allocation


def link_capacity(h, power: float) -> float:
    """Point-to-point MIMO capacity of ``h`` under a trace constraint."""
    s = np.linalg.svd(as_matrix(h), compute_uv=False)
    return waterfill(s**2, power)[0]


def cutset_rate(net: TwoWayNetwork) -> float:
    c1 = link_capacity(net.h1, net.power)
    c2 = link_capacity(net.h2, net.power)
    return min(c1, c2, net.c_common)


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def subchannel_rates(net: TwoWayNetwork, mode: str = "zf", diag=None) -> np.ndarray:
    """Per-subchannel rates on the triangularized channel.

    ``zf``: ``max(0, log2(t_k^2 P / N_r))``; ``wilson``:
    ``max(0, log2(1/2 + t_k^2 P / N_r))``.  Negative values are clamped to
    zero.  ``diag`` may be passed to skip recomputing the decomposition.
    """
    _check_mode(mode)
    if diag is None:
        diag = jet(net.h1, net.h2).diag
    snr = np.asarray(diag, dtype=float) ** 2 * net.power / net.n_r
    if mode == "wilson":
        snr = 0.5 + snr
    return np.maximum(0.0, np.log2(snr))


def pnc_rate(net: TwoWayNetwork, mode: str = "zf", diag=None) -> float:
    return min(float(np.sum(subchannel_rates(net, mode, diag))), net.c_common)


def df_rate(net: TwoWayNetwork) -> float:
    """Decode-and-forward rate with white per-antenna inputs.

    The relay decodes both messages, so the symmetric rate is limited by
    half the white-input sum capacity, by each single-user link and by the
    broadcast phase.
    """
    p = net.power
    h1, h2 = net.h1, net.h2
    cov = (
        np.eye(net.n_r)
        + (p / h1.shape[1]) * (h1 @ h1.conj().T)
        + (p / h2.shape[1]) * (h2 @ h2.conj().T)
    )
    _, logdet = np.linalg.slogdet(cov)
    c_sum = logdet / math.log(2)
    c1 = link_capacity(h1, p)
    c2 = link_capacity(h2, p)
    return min(0.5 * c_sum, c1, c2, net.c_common)


def af_rate_siso(power: float, alpha: float) -> float:
    if not 0 < alpha <= 1:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1], got {alpha!r}")
    return math.log2(1.0 + alpha * power)


def _upper_concave_envelope(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Monotone-chain upper hull, then linear interpolation back onto x.
    hull: list[int] = []
    for i in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    env = np.interp(x, x[hull], y[hull])
    return np.maximum(env, y)


def timeshare_envelope(net: TwoWayNetwork, power_grid: Sequence[float], mode: str = "zf"):
    """Time-sharing between PNC and D&F over a power grid.

    At each grid power the better of the two strategies is taken; the
    result is the least concave majorant of those points in linear power,
    i.e. mixing two operating points with weights ``theta`` and
    ``1 - theta`` costs the averaged power.

    Returns
    -------
    list of (power, rate) tuples, one per grid point.
    """
    _check_mode(mode)
    grid = np.asarray(power_grid, dtype=float).ravel()
    if grid.size < 2:
        raise EmptyGrid("timeshare_envelope needs at least two grid points")
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise ValueError("power grid must be positive and strictly ascending")
    diag = jet(net.h1, net.h2).diag
    best = np.array(
        [max(pnc_rate(net.with_power(p), mode, diag), df_rate(net.with_power(p))) for p in grid]
    )
    env = _upper_concave_envelope(grid, best)
    return list(zip(grid.tolist(), env.tolist()))


def _check_normalized(net: TwoWayNetwork) -> None:
    for name, h in (("h1", net.h1), ("h2", net.h2)):
        det = np.linalg.det(h @ h.conj().T).real
        if abs(det - 1.0) > NORMALIZATION_RTOL:
            raise NotNormalized(f"det({name} {name}^H) = {det:.12g}, expected 1")


def high_snr_gap(net: TwoWayNetwork) -> float:
    """``min(C_1, C_2) - N_r log2(P / N_r)`` for a normalized network."""
    _check_normalized(net)
    c = min(link_capacity(net.h1, net.power), link_capacity(net.h2, net.power))
    return c - net.n_r * math.log2(net.power / net.n_r)


def high_snr_condition(net: TwoWayNetwork, threshold: float = 10.0):
    """Check ``lambda_{i;j}^2 P / N_r >= threshold`` for every singular value.

    Returns
    -------
    satisfied : bool
    margins : list of np.ndarray
        One array of margins per terminal, in descending singular-value
        order.
    """
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    margins = []
    for h in (net.h1, net.h2):
        s = np.linalg.svd(h, compute_uv=False)
        margins.append(s**2 * net.power / net.n_r)
    satisfied = all(bool(np.all(m >= threshold)) for m in margins)
    return satisfied, margins


def default_timeshare_grid(power: float, points: int = 61) -> np.ndarray:
    """Log-spaced grid spanning three decades either side of ``power``."""
    return power * np.logspace(-3, 3, points)


def rate_report(net: TwoWayNetwork, alpha: Optional[float] = None, grid=None) -> RateReport:
    """Every analytic rate at the network's power point.

    ``r_ts`` is the time-sharing envelope (best PNC mode against D&F)
    evaluated at ``net.power``.  The envelope is built on ``grid``, or on
    :func:`default_timeshare_grid` when no grid is given; ``net.power`` is
    inserted into the grid if absent.
    """
    diag = jet(net.h1, net.h2).diag
    zf = pnc_rate(net, "zf", diag)
    wilson = pnc_rate(net, "wilson", diag)
    df = df_rate(net)
    grid = default_timeshare_grid(net.power) if grid is None else np.asarray(grid, dtype=float)
    grid = np.union1d(grid, [net.power])
    env = dict(timeshare_envelope(net, grid, mode="wilson"))
    r_ts = max(env[net.power], wilson, df)
    try:
        gap = high_snr_gap(net)
    except NotNormalized:
        gap = math.nan
    return RateReport(
        power=net.power,
        r_pnc_zf=zf,
        r_pnc_wilson=wilson,
        r_cs=cutset_rate(net),
        r_df=df,
        r_ts=r_ts,
        subchannel_rates=tuple(subchannel_rates(net, "zf", diag).tolist()),
        high_snr_gap=gap,
        r_af=None if alpha is None else af_rate_siso(net.power, alpha),
    )
