"""Structured physical-layer network coding for the Gaussian MIMO two-way relay channel."""

from .decomp import DecompReport, GmdFactors, JetFactors, gmd, jet, qr_reduce, rq_reduce, validate_jet
from .errors import (
    AlphaOutOfRange,
    BadOrders,
    ConvergenceError,
    DimensionError,
    EmptyGains,
    EmptyGrid,
    IndexOutOfRange,
    NotNormalized,
    PncError,
    RankDeficient,
    UnequalSingularValueProducts,
)
from .pnc import (
    NestedLatticeCode,
    SubMessage,
    code_from_power,
    encode,
    message_from_point,
    mod_coarse,
    orders_from_rates,
    precode,
    relay_decode,
    terminal_combine,
    transmit,
)
from .rates import (
    RateReport,
    TwoWayNetwork,
    af_rate_siso,
    cutset_rate,
    df_rate,
    high_snr_condition,
    high_snr_gap,
    pnc_rate,
    rate_report,
    subchannel_rates,
    timeshare_envelope,
    waterfill,
)
from .sim import SimConfig, SimOutcome, awgn_mac, predict_ser, run_loopback, run_mc

__version__ = "0.1.0"
