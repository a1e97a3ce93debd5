"""Figure rendering for rate sweeps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# column -> (label, matplotlib style)
CURVES = {
    "r_cs": ("cut-set bound", dict(color="k", linestyle=":")),
    "r_pnc_zf": ("PNC", dict(color="r", linestyle="-")),
    "r_pnc_wilson": ("PNC (per-subchannel MMSE)", dict(color="tab:orange", linestyle="-", alpha=0.6)),
    "r_df": ("D&F", dict(color="m", linestyle="--")),
    "r_ts": ("time-sharing PNC / D&F", dict(color="b", linestyle="-.")),
}


def plot_rate_sweep(rows, path, columns=None, figsize=(6, 4)):
    """Plot rate columns of a sweep against ``power_db`` and save to ``path``.

    Parameters
    ----------
    rows : list of dict
        Sweep rows keyed by column name, as produced by the CLI.
    path : str or path-like
        Output file; the format follows the extension.
    columns : sequence of str, optional
        Subset of :data:`CURVES` to draw.  All of them by default.
    """
    columns = list(CURVES) if columns is None else list(columns)
    x = [row["power_db"] for row in rows]
    fig, ax = plt.subplots(figsize=figsize)
    for col in columns:
        label, style = CURVES[col]
        ax.plot(x, [row[col] for row in rows], label=label, **style)
    ax.set_xlabel("MAC SNR P [dB]")
    ax.set_ylabel("Rate [bits / channel use]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
