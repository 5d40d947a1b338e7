"""Figure rendering for experiment CSV output.

Kept separate from the harness so experiments stay import-light; figures
are written straight to files (headless backend) next to the CSV they
came from.
"""

from __future__ import annotations

import csv
import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def read_rows(csv_text: str):
    """Numeric sweep rows from harness CSV (aggregate rows skipped)."""
    rows = []
    for row in csv.DictReader(io.StringIO(csv_text)):
        if not row.get("omega", "").lstrip("-").isdigit():
            continue
        rows.append(dict(row))
    return rows


def render_success_rates(csv_text: str, out_path: str, title: str | None = None) -> str:
    """Plot p_out / p_cor (and p_lower when present) against omega."""
    rows = read_rows(csv_text)
    if not rows:
        raise ValueError("no numeric omega rows in CSV")
    omegas = [int(r["omega"]) for r in rows]
    p_out = [float(r["p_out"]) for r in rows]
    p_cor = [float(r["p_cor"]) for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(omegas, p_out, "o-", label="output rate")
    ax.plot(omegas, p_cor, "s--", label="correct rate")
    if "p_lower" in rows[0] and rows[0]["p_lower"] is not None:
        ax.plot(
            omegas,
            [float(r["p_lower"]) for r in rows],
            "k:",
            label="guessing lower bound",
        )
    q_bits = int(rows[0]["q_bits"])
    ax.axhline(1.0 / (1 << q_bits), color="grey", lw=0.8, label="1/q")
    ax.set_yscale("symlog", linthresh=1e-7)
    ax.set_xlabel("overlap")
    ax.set_ylabel("rate")
    if title is None:
        title = "q=2^%s t=%s s=%s k=%s" % (
            rows[0]["q_bits"],
            rows[0]["t"],
            rows[0]["s"],
            rows[0]["k"],
        )
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
