"""Field snapshot export: CSV grids and 8-bit PGM images."""

from pathlib import Path

import numpy as np


def write_csv(path, values, component, t, Ng):
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# Ng={Ng} component={component} t={t!r}\n")
        np.savetxt(fh, values, delimiter=",", fmt="%.17g")
    return path


def write_pgm(path, values):
    """Linear min-max scaling to 0..255; the range goes in a header comment."""
    path = Path(path)
    lo, hi = float(values.min()), float(values.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    img = np.clip(np.rint((values - lo) * scale), 0, 255).astype(np.uint8)
    ny, nx = img.shape
    header = f"P5\n# min={lo!r} max={hi!r}\n{nx} {ny}\n255\n".encode()
    path.write_bytes(header + img.tobytes())
    return path


def export_field(outdir, name, field, t, fmt=("csv",)):
    """Write each component of ``field`` (a SpectralField); returns paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    vals = field.values
    comps = {name: vals} if vals.ndim == 2 else {}
    if vals.ndim == 3:
        comps = {f"{name}{i + 1}": vals[i] for i in range(2)}
    elif vals.ndim == 4:
        comps = {f"{name}11": vals[0, 0], f"{name}12": vals[0, 1], f"{name}22": vals[1, 1]}
    paths = []
    for comp, arr in comps.items():
        stem = f"{comp}_t{t:.6f}"
        if "csv" in fmt:
            paths.append(write_csv(outdir / f"{stem}.csv", arr, comp, t, field.grid.Ng))
        if "pgm" in fmt:
            paths.append(write_pgm(outdir / f"{stem}.pgm", arr))
    return paths
