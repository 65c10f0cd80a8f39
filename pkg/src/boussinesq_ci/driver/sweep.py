"""Lambda sweeps: one iteration per lambda from the same initial state, plus log-log fits."""

import io

import numpy as np

from ..exceptions import ResolutionError
from ..spectral import Grid2D
from .config import MAX_NG, default_ng
from .energy import TERMS
from .iteration import initial_state, run_iteration

FIT_COLUMNS = ("R1_L1", "R1_Lp", "wc_over_wp", "w1_minus_wp_over_wp", "E_err_rel", "E_eta_mean")


def _sup(series):
    return float(np.max(np.abs(series)))


def sweep_row(report, p):
    s = report.series
    wp = np.asarray(s["wp_L2"])
    row = {
        "lambda": report.header["lambda"],
        "Ng": report.header["Ng"],
        "r": report.header["r"],
        "lam_sigma": report.header["lam_sigma"],
        "mu": report.header["mu"],
        "R1_L1": _sup(s["R1_L1"]),
        "R1_Lp": _sup(s[f"R1_L{p:.4g}"]) if f"R1_L{p:.4g}" in s else _sup(s["R1_Lpreport"]),
        "wc_over_wp": float(np.max(np.asarray(s["wc_L2"]) / wp)),
        "w1_minus_wp_over_wp": float(np.max(np.asarray(s["w1_minus_wp_L2"]) / wp)),
        "E_err_rel": _sup(s["E_err_rel"]),
        "residual_rel": _sup(s["residual_rel"]),
    }
    for k in TERMS:
        row[f"E_{k}"] = _sup(s[f"E_{k}"])
    return row


def fit_slopes(rows, columns=FIT_COLUMNS):
    """Least-squares slope of log(column) against log(lambda); needs two or more rows."""
    if len(rows) < 2:
        return {}
    lam = np.log([row["lambda"] for row in rows])
    out = {}
    for c in columns:
        y = np.array([row[c] for row in rows], dtype=float)
        if np.all(y > 0):
            out[c] = float(np.polyfit(lam, np.log(y), 1)[0])
        else:
            out[c] = float("nan")
    return out


def sweep_lambda(config, lambdas, ngs=None, progress=None):
    """Run one iteration per lambda; returns (rows, slopes, reports).

    ``ngs`` gives the grid size per lambda; by default config.Ng, or the
    Nyquist default for each lambda when config.Ng is unset.
    """
    lambdas = list(lambdas)
    if ngs is None:
        ngs = [config.Ng or default_ng(lam) for lam in lambdas]
    rows, reports = [], []
    states = {}
    for lam, ng in zip(lambdas, ngs):
        if ng > MAX_NG:
            raise ResolutionError(f"lambda = {lam} needs Ng = {ng} > {MAX_NG}")
        if ng not in states:
            states[ng] = initial_state(config, Grid2D(ng))
        _, rep = run_iteration(states[ng], config, lam=lam, store=False, progress=progress)
        rows.append(sweep_row(rep, config.p_report))
        reports.append(rep)
    return rows, fit_slopes(rows), reports


def sweep_csv(rows, slopes):
    """CSV text: one row per lambda, then one '# slope' line per fitted column."""
    if not rows:
        return ""
    cols = list(rows[0])
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for row in rows:
        buf.write(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols))
        buf.write("\n")
    for c, v in slopes.items():
        buf.write(f"# slope {c} {v!r}\n")
    return buf.getvalue()
