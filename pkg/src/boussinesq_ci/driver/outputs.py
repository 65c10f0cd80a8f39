"""Deterministic file emission for one iteration."""

import csv
import json
from pathlib import Path

import numpy as np

from ..perturbation import window_bounds
from ..spectral import SpectralField
from ..spectral.export import export_field

STRESS_COLUMNS = (
    ("t", None),
    ("R_linear_L1", "linear_L1"),
    ("R_cor_L1", "cor_L1"),
    ("R_osc_L1", "osc_L1"),
    ("R_tem_L1", "tem_L1"),
    ("R1_L1", "R1_L1"),
    ("residual_L2", "residual_L2"),
    ("cancellation_defect", "cancellation_defect"),
)


def _fmt(v):
    return repr(float(v))


def _write_table(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return Path(path)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else repr(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


def emit_outputs(report, state1, outdir, snapshots=(), energy=None):
    """Write diagnostics.csv, stress_breakdown.csv, energy.csv, summary.json and snapshots.

    Snapshots need stored fields; each requested time maps to the nearest sample.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {outdir}: {exc}") from exc
    times = np.asarray(state1.times)
    M = len(times)
    s = report.series
    written = []

    per_sample = sorted(k for k, v in s.items() if len(v) == M)
    written.append(
        _write_table(outdir / "diagnostics.csv", ["t"] + per_sample,
                     [[times[m]] + [s[k][m] for k in per_sample] for m in range(M)])
    )

    nt = s.get("norm_time", [])
    rows = []
    for i, t in enumerate(nt):
        m = int(round(t / (times[1] - times[0])))
        row = [t]
        for _, key in STRESS_COLUMNS[1:]:
            vals = s[key]
            row.append(vals[i] if len(vals) == len(nt) else vals[m])
        rows.append(row)
    written.append(_write_table(outdir / "stress_breakdown.csv", [c for c, _ in STRESS_COLUMNS], rows))

    energy = state1.energy if energy is None else energy
    e_t = energy(times)
    lo, hi = window_bounds(e_t, state1.delta)
    written.append(
        _write_table(
            outdir / "energy.csv",
            ["t", "e", "energy_v1", "gap_low", "gap_high"],
            [[times[m], e_t[m], s["energy_v1"][m], lo[m], hi[m]] for m in range(M)],
        )
    )

    summary = {
        "header": report.header,
        "checks": report.checks,
        "scalars": report.scalars,
        "asserted_failures": report.failed(),
        "all_asserted_passed": not report.failed(),
    }
    path = outdir / "summary.json"
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    written.append(path)

    if snapshots and state1.stored:
        snapdir = outdir / "snapshots"
        for t in snapshots:
            m = int(np.argmin(np.abs(times - t)))
            fields = {"v": state1.v[m], "theta": state1.theta[m], "p": state1.p[m], "R": state1.R[m]}
            for name, arr in fields.items():
                written += export_field(snapdir, name, SpectralField(state1.grid, arr), times[m],
                                        fmt=("csv", "pgm"))
    return written
