"""Figure definitions and the render_figure entry point.

Each figure id declares exactly which series it expects (scenario, filters,
grouping values) and which closed-form overlays to draw. A declared series
with no matching CSV rows aborts the render with a message listing every
missing cell, so a half-finished sweep cannot silently produce a thin plot.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import refs
from .schema import Row, SchemaError, load_rows


class MissingSeriesError(ValueError):
    def __init__(self, figure_id, missing):
        self.missing = missing
        lines = "\n".join(f"  {m}" for m in missing)
        super().__init__(f"{figure_id}: missing series\n{lines}")


@dataclass(frozen=True)
class SeriesDef:
    label: str
    filters: dict
    x_field: str
    y_field: str = "ber"

    def matches(self, row: Row) -> bool:
        return all(getattr(row, k) == v for k, v in self.filters.items())


@dataclass(frozen=True)
class FigureDef:
    title: str
    xlabel: str
    ylabel: str
    series: tuple[SeriesDef, ...]
    curves: tuple = ()  # (label, callable(x_value) -> y) drawn on a dense grid
    hlines: tuple = ()  # (label, y)
    xscale: str = "linear"
    yscale: str = "log"
    derived: str | None = None  # alternate y: "snr_at_target_ber"
    target_ber: float = 1e-3


@dataclass
class PlotSpec:
    figure_id: str
    csv_paths: list
    out_path: Path


def _vb(det, x_field="snr_db", **extra):
    filters = {"scenario": "vblast", "detector": det, "modulation": "bpsk"}
    filters.update(extra)
    return SeriesDef(label=det, filters=filters, x_field=x_field)


def _mc(det, m=None, x_field="snr_db", label=None, **extra):
    filters = {"scenario": "mccdma", "detector": det}
    if m is not None:
        filters["m"] = m
    filters.update(extra)
    return SeriesDef(label=label or det, filters=filters, x_field=x_field)


def _figures() -> dict[str, FigureDef]:
    figs = {}
    figs["fig2"] = FigureDef(
        title="Uncoded BER vs antenna count, 20 dB, BPSK",
        xlabel="transmit = receive antennas",
        ylabel="bit error rate",
        series=tuple(
            _vb(det, x_field="nt", snr_db=20.0)
            for det in ("mf", "zf", "mf_las", "zf_las", "zf_sic")
        ),
        hlines=(("SISO Rayleigh", refs.rayleigh_bpsk(20.0)),),
    )
    figs["fig3"] = FigureDef(
        title="200x200 V-BLAST, BPSK",
        xlabel="average received SNR (dB)",
        ylabel="bit error rate",
        series=tuple(_vb(det, nt=200) for det in ("zf", "zf_las", "zf_sic")),
        curves=(("SISO AWGN (BPSK)", refs.awgn_bpsk),),
    )
    figs["fig4"] = FigureDef(
        title="ZF-LAS vs SNR for growing arrays, BPSK",
        xlabel="average received SNR (dB)",
        ylabel="bit error rate",
        series=tuple(
            SeriesDef(
                label=f"zf_las {n}x{n}",
                filters={"scenario": "vblast", "detector": "zf_las", "nt": n},
                x_field="snr_db",
            )
            for n in (1, 16, 64, 200)
        ),
        curves=(("SISO AWGN (BPSK)", refs.awgn_bpsk),),
    )
    figs["fig5"] = FigureDef(
        title="SNR needed for 1e-3 uncoded BER, BPSK",
        xlabel="transmit = receive antennas",
        ylabel="required SNR (dB)",
        series=tuple(_vb(det, x_field="nt") for det in ("zf_las", "zf_sic")),
        hlines=(("SISO AWGN target", 6.79),),
        yscale="linear",
        xscale="log",
        derived="snr_at_target_ber",
    )
    figs["fig6"] = FigureDef(
        title="LAS bit checks per bit to reach the fixed point",
        xlabel="transmit = receive antennas",
        ylabel="average steps per bit",
        series=tuple(
            SeriesDef(
                label=f"{det} @ {snr:g} dB",
                filters={"scenario": "vblast", "detector": det, "snr_db": snr},
                x_field="nt",
                y_field="avg_steps_per_bit",
            )
            for det in ("mf_las", "zf_las", "mmse_las")
            for snr in (5.0, 10.0, 15.0)
        ),
        yscale="linear",
    )
    figs["fig9"] = FigureDef(
        title="Non-orthogonal STBC decoding, 4-QAM, MMSE-LAS",
        xlabel="average received SNR (dB)",
        ylabel="bit error rate",
        series=tuple(
            SeriesDef(
                label=f"mmse_las n={n}",
                filters={"scenario": "stbc", "detector": "mmse_las", "nt": n},
                x_field="snr_db",
            )
            for n in (4, 8, 16)
        ),
        curves=(("SISO AWGN (4-QAM)", refs.awgn_qam4),),
    )
    figs["fig11"] = FigureDef(
        title="Single-carrier CDMA, K=200, N=300",
        xlabel="average received SNR (dB)",
        ylabel="bit error rate",
        series=tuple(
            _mc(det, k=200, n_chips=300) for det in ("mf", "zf", "mf_las", "zf_las")
        ),
        curves=(("single user (Rayleigh)", refs.rayleigh_bpsk),),
    )
    figs["fig12"] = FigureDef(
        title="CDMA at fixed loading 2/3, 15 dB",
        xlabel="number of users",
        ylabel="bit error rate",
        series=tuple(
            _mc(det, m=1, x_field="k", snr_db=15.0)
            for det in ("mf", "zf", "mf_las", "zf_las")
        ),
        hlines=(("single user (Rayleigh)", refs.rayleigh_bpsk(15.0)),),
        xscale="log",
    )
    figs["fig13"] = FigureDef(
        title="Fully loaded MC-CDMA, K=100, MN=100",
        xlabel="average received SNR (dB)",
        ylabel="bit error rate",
        series=tuple(
            _mc(det, m=m, label=f"{det} (M={m})")
            for det in ("mf_las", "zf_las")
            for m in (1, 2, 4)
        ),
        curves=tuple(
            (f"single user, {m}-branch MRC", lambda s, m=m: refs.mrc_split_power(m, s))
            for m in (1, 2, 4)
        ),
    )
    figs["fig14"] = FigureDef(
        title="MC-CDMA vs loading factor, M=4, 8 dB",
        xlabel="loading factor K/(MN)",
        ylabel="bit error rate",
        series=tuple(
            _mc(det, m=4, x_field="alpha", snr_db=8.0)
            for det in ("mf", "mf_las", "zf_las")
        ),
        hlines=(("single user, 4-branch MRC", refs.mrc_split_power(4, 8.0)),),
        xscale="log",
    )
    return figs


FIGURES = _figures()


def _x_value(row: Row, x_field: str) -> float:
    if x_field == "alpha":
        return row.k / (row.m * row.n_chips)
    return float(getattr(row, x_field))


def _collect(figure_id: str, fig: FigureDef, rows: list[Row]):
    collected = []
    missing = []
    for s in fig.series:
        pts = sorted(
            (
                (_x_value(r, s.x_field), getattr(r, s.y_field))
                for r in rows
                if s.matches(r) and getattr(r, s.y_field) is not None
            ),
            key=lambda p: p[0],
        )
        if not pts:
            missing.append(f"series {s.label!r}: no rows match {s.filters}")
        collected.append((s, pts))
    if missing:
        raise MissingSeriesError(figure_id, missing)
    return collected


def _snr_at_target(pts, target, label):
    """Log-linear interpolation of the SNR where the BER curve crosses target."""
    pts = [(x, y) for x, y in pts if y > 0]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if (y0 - target) * (y1 - target) <= 0 and y0 != y1:
            f = (math.log10(y0) - math.log10(target)) / (math.log10(y0) - math.log10(y1))
            return x0 + f * (x1 - x0)
    raise MissingSeriesError(
        "fig5", [f"series {label!r}: BER sweep never crosses {target:g}"]
    )


_STYLES = ("o-", "s--", "^-.", "d:", "v-", "p--", "*-.", "x:", "+-")


def render(spec: PlotSpec) -> Path:
    """Draw one figure from result CSVs; deterministic for identical inputs."""
    if spec.figure_id not in FIGURES:
        raise ValueError(f"unknown figure id {spec.figure_id!r} (have {sorted(FIGURES)})")
    fig_def = FIGURES[spec.figure_id]
    rows = load_rows(spec.csv_paths)

    plt.rcParams["svg.hashsalt"] = "berfigs"
    fig, ax = plt.subplots(figsize=(7.2, 5.4), dpi=120)

    if fig_def.derived == "snr_at_target_ber":
        series_rows = _collect(spec.figure_id, fig_def, rows)
        for i, (s, pts) in enumerate(series_rows):
            by_dim: dict[float, list] = {}
            for r in rows:
                if s.matches(r) and r.ber is not None:
                    by_dim.setdefault(r.nt, []).append((r.snr_db, r.ber))
            xs = sorted(by_dim)
            ys = [
                _snr_at_target(sorted(by_dim[n]), fig_def.target_ber, f"{s.label} nt={n}")
                for n in xs
            ]
            ax.plot(xs, ys, _STYLES[i % len(_STYLES)], label=s.label, markersize=5)
    else:
        series_rows = _collect(spec.figure_id, fig_def, rows)
        for i, (s, pts) in enumerate(series_rows):
            xs = [x for x, y in pts if fig_def.yscale != "log" or (y or 0) > 0]
            ys = [y for x, y in pts if fig_def.yscale != "log" or (y or 0) > 0]
            ax.plot(xs, ys, _STYLES[i % len(_STYLES)], label=s.label, markersize=5)
        if fig_def.curves:
            lo = min(x for _, pts in series_rows for x, _ in pts)
            hi = max(x for _, pts in series_rows for x, _ in pts)
            grid = np.linspace(lo, hi, 200)
            for label, func in fig_def.curves:
                ax.plot(grid, [func(g) for g in grid], "k-", linewidth=1.0, alpha=0.65)
                ax.plot([], [], "k-", linewidth=1.0, alpha=0.65, label=label)

    for label, y in fig_def.hlines:
        ax.axhline(y, color="k", linestyle="--", linewidth=1.0, alpha=0.65)
        ax.plot([], [], "k--", linewidth=1.0, alpha=0.65, label=label)

    ax.set_xscale(fig_def.xscale)
    ax.set_yscale(fig_def.yscale)
    ax.set_xlabel(fig_def.xlabel)
    ax.set_ylabel(fig_def.ylabel)
    ax.set_title(fig_def.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()

    out = Path(spec.out_path)
    suffix = out.suffix.lower()
    if suffix == ".svg":
        metadata = {"Date": None, "Creator": None}
    else:
        metadata = {"Software": None}
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figure", description="Regenerate a BER figure from result CSVs"
    )
    parser.add_argument("figure", help=f"one of {', '.join(sorted(FIGURES))}")
    parser.add_argument("--csv", nargs="+", required=True, help="input CSV paths")
    parser.add_argument("--out", required=True, help="output image path (.png or .svg)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    spec = PlotSpec(figure_id=args.figure, csv_paths=list(args.csv), out_path=Path(args.out))
    try:
        out = render(spec)
    except (SchemaError, MissingSeriesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def console_main() -> None:
    raise SystemExit(main())
