"""Seeded Monte Carlo harness for the lattice PNC chain.

Randomness
----------
Trial ``t`` of a run with seed ``s`` draws from its own stream,
``numpy.random.PCG64(SeedSequence([s, t]))``.  Within a trial the draws are
consumed in a fixed order: terminal-1 indices (subchannel by subchannel,
``a`` then ``b``), terminal-2 indices, the dithers when enabled, then the
noise.  Complex Gaussian noise with unit variance uses the polar Box-Muller
transform ``sqrt(-ln u1) * exp(2j*pi*u2)`` with ``u1 = 1 - U[0, 1)`` and
``u2 = U[0, 1)``, so outcomes depend only on PCG64 and IEEE arithmetic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .decomp import JetFactors, jet
from .errors import DimensionError
from .pnc import (
    NestedLatticeCode,
    SubMessage,
    code_from_power,
    encode,
    message_from_point,
    mod_coarse,
    precode,
    relay_decode,
    sum_indices,
    terminal_combine,
    transmit,
)
from .rates import TwoWayNetwork

__all__ = [
    "GaussianNoise",
    "SimConfig",
    "SimOutcome",
    "trial_generator",
    "awgn_mac",
    "predict_ser",
    "run_loopback",
    "run_mc",
    "normalized_pair",
]


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


class GaussianNoise:
    """Circularly-symmetric complex Gaussian source with unit variance."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def __call__(self, shape) -> np.ndarray:
        u1 = 1.0 - self.rng.random(shape)
        u2 = self.rng.random(shape)
        return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def awgn_mac(h1, h2, x1, x2, noise: Optional[Callable] = None) -> np.ndarray:
    """``y = h1 x1 + h2 x2 + z``; ``noise=None`` means noiseless."""
    h1 = np.asarray(h1)
    h2 = np.asarray(h2)
    x1 = np.atleast_2d(x1)
    x2 = np.atleast_2d(x2)
    if (
        h1.shape[0] != h2.shape[0]
        or h1.shape[1] != x1.shape[0]
        or h2.shape[1] != x2.shape[0]
        or x1.shape[1] != x2.shape[1]
    ):
        raise DimensionError("channel and input dimensions are inconsistent")
    y = h1 @ x1 + h2 @ x2
    if noise is not None:
        y = y + noise(y.shape)
    return y


def _phi(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def predict_ser(t_k: float, code: NestedLatticeCode, k: int, folds: int = 3) -> float:
    """Symbol error rate of the relay's mod-lattice channel on subchannel ``k``.

    The effective noise per real dimension is Gaussian with standard
    deviation ``1 / (t_k sqrt(2))``, folded into the coarse cell.  A
    dimension decodes correctly when the noise lands within half a fine
    pitch of any coarse-lattice point; images beyond ``folds`` cells are
    ignored.
    """
    if not t_k > 0:
        raise ValueError("t_k must be positive")
    sigma = 1.0 / (t_k * math.sqrt(2.0))
    beta = code.beta
    half = code.pitch(k) / 2.0
    hit = 0.0
    for m in range(-folds, folds + 1):
        hit += _phi((m * beta + half) / sigma) - _phi((m * beta - half) / sigma)
    p_dim = min(1.0, max(0.0, 1.0 - hit))
    return 1.0 - (1.0 - p_dim) ** 2


@dataclass(frozen=True)
class SimConfig:
    net: TwoWayNetwork
    orders: tuple
    block_length: int = 64
    trials: int = 100
    seed: int = 0
    noiseless: bool = False
    dither: bool = False

    def __post_init__(self):
        if self.trials < 1 or self.block_length < 1:
            raise ValueError("trials and block_length must be at least 1")
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))


@dataclass
class SimOutcome:
    symbols: list
    errors: list
    ser: list
    ser_stderr: list
    terminal_errors: list
    empirical_power: list
    predicted_ser: list
    diag: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _trial(cfg: SimConfig, f: JetFactors, code: NestedLatticeCode, trial: int):
    rng = trial_generator(cfg.seed, trial)
    n = cfg.block_length
    n_r = code.n_r
    msgs = []
    for _terminal in range(2):
        msgs.append(
            [
                SubMessage(rng.integers(0, m, size=n), rng.integers(0, m, size=n))
                for m in code.orders
            ]
        )
    words = [np.vstack([encode(msg[k], k, code) for k in range(n_r)]) for msg in msgs]
    dithers = [None, None]
    dither_sum = None
    if cfg.dither:
        half = code.beta / 2.0
        dithers = [
            rng.uniform(-half, half, (n_r, n)) + 1j * rng.uniform(-half, half, (n_r, n))
            for _ in range(2)
        ]
        dither_sum = dithers[0] + dithers[1]

    x1 = transmit(f.v1, precode(words[0], f.t1, f.diag, code, dithers[0]))
    x2 = transmit(f.v2, precode(words[1], f.t2, f.diag, code, dithers[1]))
    noise = None if cfg.noiseless else GaussianNoise(rng)
    y = awgn_mac(cfg.net.h1, cfg.net.h2, x1, x2, noise)
    l_hat = relay_decode(y, f.u, f.diag, code, dither_sum)

    errors = np.zeros(n_r, dtype=np.int64)
    term = np.zeros(2, dtype=np.int64)
    for k in range(n_r):
        truth = sum_indices(mod_coarse(words[0][k] + words[1][k], code.beta), k, code)
        got = sum_indices(l_hat[k], k, code)
        errors[k] = np.count_nonzero((truth.a != got.a) | (truth.b != got.b))
        for i in range(2):
            partner = msgs[1 - i][k]
            rec = message_from_point(terminal_combine(l_hat[k], words[i][k], code), k, code)
            term[i] += np.count_nonzero((rec.a != partner.a) | (rec.b != partner.b))
    energy = np.array([np.sum(np.abs(x1) ** 2), np.sum(np.abs(x2) ** 2)])
    return errors, term, energy


def run_mc(cfg: SimConfig, workers: int = 1) -> SimOutcome:
    """Run ``cfg.trials`` independent blocks and aggregate the counts.

    Aggregation is a sum taken in trial order, so the outcome does not
    depend on ``workers``.
    """
    net = cfg.net
    f = jet(net.h1, net.h2)
    code = code_from_power(net.power, net.n_r, cfg.orders)
    trials = range(cfg.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _trial(cfg, f, code, t), trials))
    else:
        results = [_trial(cfg, f, code, t) for t in trials]

    errors = sum(r[0] for r in results)
    term = sum(r[1] for r in results)
    energy = sum(r[2] for r in results)
    n_sym = cfg.trials * cfg.block_length
    ser = errors / n_sym
    return SimOutcome(
        symbols=[n_sym] * code.n_r,
        errors=errors.tolist(),
        ser=ser.tolist(),
        ser_stderr=np.sqrt(ser * (1.0 - ser) / n_sym).tolist(),
        terminal_errors=term.tolist(),
        empirical_power=(energy / n_sym).tolist(),
        predicted_ser=[
            0.0 if cfg.noiseless else predict_ser(f.diag[k], code, k) for k in range(code.n_r)
        ],
        diag=f.diag.tolist(),
    )


def run_loopback(cfg: SimConfig, workers: int = 1) -> SimOutcome:
    """Noiseless end-to-end run; every decoded index must be exact."""
    if not cfg.noiseless:
        cfg = SimConfig(
            net=cfg.net,
            orders=cfg.orders,
            block_length=cfg.block_length,
            trials=cfg.trials,
            seed=cfg.seed,
            noiseless=True,
            dither=cfg.dither,
        )
    return run_mc(cfg, workers)


def normalized_pair(rng: np.random.Generator, n_r: int, n_t: Sequence[int] = None):
    """Random complex Gaussian channel pair with ``det(h h^H) = 1`` each."""
    n_t = (n_r, n_r) if n_t is None else n_t
    out = []
    for cols in n_t:
        h = rng.normal(size=(n_r, cols)) + 1j * rng.normal(size=(n_r, cols))
        det = np.linalg.det(h @ h.conj().T).real
        out.append(h / det ** (1.0 / (2 * n_r)))
    return tuple(out)
