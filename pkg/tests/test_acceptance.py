"""Acceptance criteria, one test each; verdicts are listed in the session summary."""

import io
import json
import math
import time
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from mimopnc.cli import main
from mimopnc.decomp import gmd, jet, validate_jet
from mimopnc.rates import TwoWayNetwork, df_rate, link_capacity, pnc_rate, timeshare_envelope
from mimopnc.sim import SimConfig, normalized_pair, run_loopback, run_mc

from conftest import EXAMPLE1_H1, EXAMPLE1_H2, matched_pair, random_complex

GOLDEN = Path(__file__).parent / "golden"


def example1(power, c_common=math.inf):
    return TwoWayNetwork(EXAMPLE1_H1, EXAMPLE1_H2, power, c_common)


def test_c1_decomposition_suite(record_criterion):
    rng = np.random.default_rng(2024)
    worst = dict(recon=0.0, mismatch=0.0, unitary=0.0, tri=0.0, product=0.0)
    start = time.perf_counter()
    for _ in range(1000):
        n_r = int(rng.integers(1, 5))
        n1 = n_r + int(rng.integers(0, 3))
        n2 = n_r + int(rng.integers(0, 3))
        h1, h2 = matched_pair(rng, n_r, n1, n2)
        f = jet(h1, h2)
        rep = validate_jet(f, h1, h2)
        worst["recon"] = max(worst["recon"], rep.reconstruction_error_1, rep.reconstruction_error_2)
        worst["mismatch"] = max(worst["mismatch"], rep.diag_mismatch)
        worst["unitary"] = max(worst["unitary"], rep.max_unitarity_error)
        worst["tri"] = max(worst["tri"], rep.triangularity_error)
        prod = np.prod(f.diag**2)
        for h in (h1, h2):
            det = np.linalg.det(h @ h.conj().T).real
            worst["product"] = max(worst["product"], abs(prod - det) / det)
    elapsed = time.perf_counter() - start
    ok = (
        worst["recon"] <= 1e-8
        and worst["mismatch"] <= 1e-8
        and worst["unitary"] <= 1e-10
        and worst["tri"] <= 1e-9
        and worst["product"] <= 1e-8
        and elapsed < 10.0
    )
    detail = ", ".join(f"{k}={v:.2e}" for k, v in worst.items()) + f", {elapsed:.2f}s"
    assert record_criterion("C1 decomposition suite (1000 pairs)", ok, detail), detail


def test_c2_gmd_geometric_mean(record_criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        m = random_complex(rng, n, n)
        # independent route: |det m|^(1/n) via LU
        _, logdet = np.linalg.slogdet(m)
        expected = math.exp(logdet / n)
        g = gmd(m)
        worst = max(worst, float(np.max(np.abs(np.diag(g.r) - expected))))
    ok = worst <= 1e-9
    assert record_criterion("C2 GMD diagonal = geometric mean (1000 matrices)", ok, f"max dev {worst:.2e}")


def test_c3a_example1_unit_diagonal(record_criterion):
    f = jet(EXAMPLE1_H1, EXAMPLE1_H2)
    dev = float(np.max(np.abs(f.diag - 1.0)))
    ok = dev <= 1e-8
    record_criterion(
        "C3a Example 1 diag = (1, 1)",
        ok,
        f"diag = ({f.diag[0]:.10f}, {f.diag[1]:.10f}); product of squares = {np.prod(f.diag**2):.12f}",
    )
    assert ok, f"diag = {f.diag}"


def test_c3b_example1_pnc_rate(record_criterion):
    r = pnc_rate(example1(8.0), "zf")
    ok = abs(r - 4.0) <= 1e-9
    assert record_criterion("C3b Example 1 r_pnc_zf(P=8) = 4 bits", ok, f"{r:.12f}")


def test_c4_high_snr_gap(record_criterion):
    def gap(p):
        c = min(link_capacity(EXAMPLE1_H1, p), link_capacity(EXAMPLE1_H2, p))
        return c - 2 * math.log2(p / 2)

    gaps = [gap(10.0**k) for k in range(2, 9)]
    ok = gap(1e4) < 0.01 and all(b < a for a, b in zip(gaps, gaps[1:]))
    assert record_criterion("C4 high-SNR gap", ok, f"gap(1e4) = {gap(1e4):.5f}"), gaps


class TestC5Figure:
    grid = np.logspace(math.log10(0.25), 6, 50)

    def test_c5a_crossover(self, record_criterion):
        start = time.perf_counter()
        diff = np.array([pnc_rate(example1(p)) - df_rate(example1(p)) for p in self.grid])
        elapsed = time.perf_counter() - start
        above = np.flatnonzero(diff > 0)
        ok = (
            above.size > 0
            and np.all(diff[above[0]:] > 0)
            and np.all(diff[: above[0]] < 0)
            and above[0] > 0
            and elapsed < 5.0
        )
        detail = f"crossover near P = {self.grid[above[0]]:.3g}" if above.size else "none"
        assert record_criterion("C5a PNC/D&F single crossover", ok, detail)

    def test_c5b_df_ratio(self, record_criterion):
        ratio = df_rate(example1(1e6)) / pnc_rate(example1(1e6))
        ok = 0.475 <= ratio <= 0.525
        record_criterion("C5b r_df / r_pnc_zf at P = 1e6 in [0.475, 0.525]", ok, f"ratio = {ratio:.4f}")
        assert ok, ratio

    def test_c5c_envelope(self, record_criterion):
        start = time.perf_counter()
        env = np.array([r for _, r in timeshare_envelope(example1(1.0), self.grid)])
        best = np.array([max(pnc_rate(example1(p)), df_rate(example1(p))) for p in self.grid])
        elapsed = time.perf_counter() - start
        slopes = np.diff(env) / np.diff(self.grid)
        ok = bool(np.all(env >= best)) and bool(np.all(np.diff(slopes) <= 1e-12)) and elapsed < 5.0
        assert record_criterion(
            "C5c time-share envelope majorant (50-point grid)",
            ok,
            f"max lift {np.max(env - best):.3f} bits, {elapsed:.2f}s",
        )


def test_c6_noiseless_loopback(record_criterion):
    rng = np.random.default_rng(6)
    nets = [example1(8.0)]
    for _ in range(20):
        n_r = int(rng.integers(1, 5))
        h1, h2 = normalized_pair(rng, n_r, (n_r + int(rng.integers(0, 3)), n_r + int(rng.integers(0, 3))))
        nets.append(TwoWayNetwork(h1, h2, 10.0 * n_r))
    failures = 0
    for i, net in enumerate(nets):
        out = run_loopback(SimConfig(net, (4,) * net.n_r, block_length=64, trials=100, seed=i))
        failures += sum(out.errors) + sum(out.terminal_errors)
    ok = failures == 0
    assert record_criterion("C6 noiseless loopback (Example 1 + 20 random)", ok, f"{failures} index errors")


def test_c7_noisy_monte_carlo(record_criterion):
    start = time.perf_counter()
    net = TwoWayNetwork([[1.0]], [[1.0]], 24.0)  # t = 1, beta = sqrt(6 * 24) = 12
    cfg = SimConfig(net, (4,), block_length=1000, trials=100, seed=777)
    out = run_mc(cfg)
    again = run_mc(cfg)
    elapsed = time.perf_counter() - start
    dev = abs(out.ser[0] - out.predicted_ser[0])
    ok = (
        out.symbols[0] >= 10**5
        and dev <= 3 * out.ser_stderr[0]
        and out.to_dict() == again.to_dict()
        and elapsed < 60.0
    )
    detail = (
        f"ser {out.ser[0]:.5f} vs predicted {out.predicted_ser[0]:.5f} "
        f"(stderr {out.ser_stderr[0]:.5f}), {elapsed:.2f}s"
    )
    assert record_criterion("C7 noisy Monte Carlo vs prediction", ok, detail)


def test_c8_power_audit(record_criterion):
    rng = np.random.default_rng(8)
    nets = [example1(8.0)]
    for n_r in (2, 3, 4):
        h1, h2 = normalized_pair(rng, n_r, (n_r, n_r + 1))
        nets.append(TwoWayNetwork(h1, h2, 5.0 * n_r))
    worst = 0.0
    for i, net in enumerate(nets):
        out = run_mc(SimConfig(net, (4,) * net.n_r, block_length=1000, trials=100, seed=i, noiseless=True))
        worst = max(worst, max(out.empirical_power) / net.power)
    ok = worst <= 1.02
    assert record_criterion("C8 transmit power <= 1.02 P", ok, f"worst ratio {worst:.4f}")


@pytest.mark.parametrize(
    "args,golden",
    [(["decompose"], "decompose.json"), (["rates"], "rates.json"), (["sweep", "--points", "10"], "sweep.csv")],
)
def test_c9_cli_golden(args, golden, record_criterion):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main([args[0], str(GOLDEN / "example1.json"), *args[1:]])
    ok = code == 0 and buf.getvalue() == (GOLDEN / golden).read_text(encoding="utf-8")
    if golden.endswith(".json"):
        json.loads(buf.getvalue())
    assert record_criterion(f"C9 CLI golden {args[0]}", ok)
