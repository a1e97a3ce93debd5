"""Command-line front end.

Usage::

    mimopnc decompose problem.json
    mimopnc rates problem.json [--mode zf|wilson] [--format json|csv]
    mimopnc sweep problem.json --pmin-db -6 --pmax-db 60 --points 50 [--figure fig.png]
    mimopnc loopback problem.json [--trials N --block N --seed S]
    mimopnc simulate problem.json [--trials N --block N --seed S --noiseless]

Exit status: 0 on success, 2 on parse/validation errors, 3 when the channel
pair cannot be jointly triangularized (rank deficiency or unequal
singular-value products).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .decomp import jet, validate_jet
from .errors import PncError, RankDeficient, UnequalSingularValueProducts
from .rates import (
    TwoWayNetwork,
    cutset_rate,
    df_rate,
    pnc_rate,
    rate_report,
    timeshare_envelope,
)
from .sim import SimConfig, run_loopback, run_mc

SWEEP_COLUMNS = ["power_db", "r_cs", "r_pnc_zf", "r_pnc_wilson", "r_df", "r_ts"]
RATE_COLUMNS = [
    "power",
    "r_pnc_zf",
    "r_pnc_wilson",
    "r_cs",
    "r_df",
    "r_ts",
    "r_af",
    "high_snr_gap",
    "subchannel_rates",
]


class ProblemError(ValueError):
    pass


def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".12g")


def _num(x):
    """JSON-ready number rounded to 12 significant digits."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, ".12g")) + 0.0


def _matrix_out(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return [[[_num(z.real), _num(z.imag)] for z in row] for row in a]


def _matrix_in(obj, name: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) and r for r in obj):
        raise ProblemError(f"{name} must be a non-empty list of rows")
    rows = []
    for row in obj:
        out = []
        for z in row:
            if isinstance(z, (int, float)) and not isinstance(z, bool):
                out.append(complex(z, 0.0))
            elif (
                isinstance(z, list)
                and len(z) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)
            ):
                out.append(complex(z[0], z[1]))
            else:
                raise ProblemError(f"{name}: entries must be [re, im] pairs, got {z!r}")
        rows.append(out)
    if len({len(r) for r in rows}) != 1:
        raise ProblemError(f"{name}: rows have different lengths")
    return np.array(rows, dtype=np.complex128)


def _number(value, name: str, allow_inf: bool = False) -> float:
    if allow_inf and isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemError(f"{name} must be a number, got {value!r}")
    return float(value)


def load_problem(path) -> dict:
    """Parse a problem file into a dict holding a :class:`TwoWayNetwork`."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemError(f"cannot read problem file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ProblemError("problem file must hold a JSON object")
    for key in ("h1", "h2", "power"):
        if key not in raw:
            raise ProblemError(f"problem file is missing '{key}'")
    power = _number(raw["power"], "power")
    if not power > 0:
        raise ProblemError("power must be positive")
    try:
        problem = _problem_fields(raw, power)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"bad problem field: {exc}") from exc
    if problem["alpha"] is not None:
        problem["alpha"] = _number(problem["alpha"], "alpha")
    return problem


def _problem_fields(raw: dict, power: float) -> dict:
    return {
        "h1": _matrix_in(raw["h1"], "h1"),
        "h2": _matrix_in(raw["h2"], "h2"),
        "power": power,
        "c_common": _number(raw.get("c_common", "inf"), "c_common", allow_inf=True),
        "orders": raw.get("orders"),
        "block_length": int(raw.get("block_length", 64)),
        "trials": int(raw.get("trials", 100)),
        "seed": int(raw.get("seed", 0)),
        "mode": raw.get("mode", "zf"),
        "alpha": raw.get("alpha"),
    }


def _network(problem: dict) -> TwoWayNetwork:
    return TwoWayNetwork(problem["h1"], problem["h2"], problem["power"], problem["c_common"])


def decompose_payload(problem: dict) -> dict:
    h1, h2 = problem["h1"], problem["h2"]
    f = jet(h1, h2)
    rep = validate_jet(f, h1, h2)
    return {
        "u": _matrix_out(f.u),
        "v1": _matrix_out(f.v1),
        "v2": _matrix_out(f.v2),
        "t1": _matrix_out(f.t1),
        "t2": _matrix_out(f.t2),
        "diag": [_num(x) for x in f.diag],
        "report": {
            "reconstruction_error_1": _num(rep.reconstruction_error_1),
            "reconstruction_error_2": _num(rep.reconstruction_error_2),
            "unitarity_errors": {k: _num(v) for k, v in rep.unitarity_errors.items()},
            "triangularity_error": _num(rep.triangularity_error),
            "diag_mismatch": _num(rep.diag_mismatch),
        },
    }


def rates_row(problem: dict) -> dict:
    rep = rate_report(_network(problem), alpha=problem["alpha"])
    return {
        "power": rep.power,
        "r_pnc_zf": rep.r_pnc_zf,
        "r_pnc_wilson": rep.r_pnc_wilson,
        "r_cs": rep.r_cs,
        "r_df": rep.r_df,
        "r_ts": rep.r_ts,
        "r_af": rep.r_af,
        "high_snr_gap": rep.high_snr_gap,
        "subchannel_rates": list(rep.subchannel_rates),
    }


def sweep_rows(problem: dict, pmin_db: float, pmax_db: float, points: int, mode: str) -> list:
    if points < 2:
        raise ProblemError("--points must be at least 2")
    if not pmax_db > pmin_db:
        raise ProblemError("--pmax-db must exceed --pmin-db")
    net = _network(problem)
    power_db = np.linspace(pmin_db, pmax_db, points)
    powers = 10.0 ** (power_db / 10.0)
    diag = jet(net.h1, net.h2).diag
    envelope = timeshare_envelope(net, powers, mode=mode)
    rows = []
    for db, p, (_, ts) in zip(power_db, powers, envelope):
        at = net.with_power(p)
        rows.append(
            {
                "power_db": float(db),
                "r_cs": cutset_rate(at),
                "r_pnc_zf": pnc_rate(at, "zf", diag),
                "r_pnc_wilson": pnc_rate(at, "wilson", diag),
                "r_df": df_rate(at),
                "r_ts": ts,
            }
        )
    return rows


def _csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            if v is None:
                cells.append("")
            elif isinstance(v, (list, tuple)):
                cells.append(";".join(_fmt(x) for x in v))
            else:
                cells.append(_fmt(v))
        writer.writerow(cells)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _outcome_payload(outcome) -> dict:
    d = outcome.to_dict()
    return {
        k: [_num(x) if isinstance(x, float) else x for x in v] if isinstance(v, list) else v
        for k, v in d.items()
    }


def _sim_config(problem: dict, args, noiseless: bool) -> SimConfig:
    net = _network(problem)
    orders = problem["orders"] if problem["orders"] is not None else [4] * net.n_r
    if not isinstance(orders, list) or len(orders) != net.n_r:
        raise ProblemError(f"orders must be a list of {net.n_r} integers")
    return SimConfig(
        net=net,
        orders=tuple(int(m) for m in orders),
        block_length=args.block if args.block is not None else problem["block_length"],
        trials=args.trials if args.trials is not None else problem["trials"],
        seed=args.seed if args.seed is not None else problem["seed"],
        noiseless=noiseless,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem file (JSON)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, help="override the problem seed")
    common.add_argument("--mode", choices=("zf", "wilson"), help="PNC subchannel rate mode")

    parser = argparse.ArgumentParser(prog="mimopnc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("decompose", parents=[common], help="joint triangularization as JSON")
    p = sub.add_parser("rates", parents=[common], help="all rates at the problem power")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p = sub.add_parser("sweep", parents=[common], help="rates over a power grid as CSV")
    p.add_argument("--pmin-db", type=float, default=-6.0)
    p.add_argument("--pmax-db", type=float, default=60.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--figure", help="also render the sweep to this image file")
    for name, help_ in (
        ("loopback", "noiseless end-to-end check"),
        ("simulate", "Monte Carlo relay SER"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--trials", type=int)
        p.add_argument("--block", type=int)
        p.add_argument("--workers", type=int, default=1)
        if name == "simulate":
            p.add_argument("--noiseless", action="store_true")
    return parser


def run(args) -> str:
    problem = load_problem(args.problem)
    mode = args.mode or problem["mode"]
    if mode not in ("zf", "wilson"):
        raise ProblemError(f"mode must be 'zf' or 'wilson', got {mode!r}")
    if args.command == "decompose":
        return _json(decompose_payload(problem))
    if args.command == "rates":
        row = rates_row(problem)
        if args.format == "csv":
            return _csv([row], RATE_COLUMNS)
        return _json({k: [_num(x) for x in v] if isinstance(v, list) else _num(v) for k, v in row.items()})
    if args.command == "sweep":
        rows = sweep_rows(problem, args.pmin_db, args.pmax_db, args.points, mode)
        if args.figure:
            from .plotting import plot_rate_sweep

            plot_rate_sweep(rows, args.figure)
        return _csv(rows, SWEEP_COLUMNS)
    if args.command == "loopback":
        outcome = run_loopback(_sim_config(problem, args, True), args.workers)
        return _json(_outcome_payload(outcome))
    if args.command == "simulate":
        outcome = run_mc(_sim_config(problem, args, args.noiseless), args.workers)
        return _json(_outcome_payload(outcome))
    raise ProblemError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = run(args)
    except (RankDeficient, UnequalSingularValueProducts) as exc:
        print(f"mimopnc: {exc}", file=sys.stderr)
        return 3
    except (PncError, ValueError) as exc:
        print(f"mimopnc: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
