"""Array-level spectral calculus.

Every function takes physical-space samples with the two spatial axes last
and returns physical-space samples. Vector fields carry a leading axis of
length 2, symmetric tensors a leading (2, 2).
"""

import numpy as np
import scipy.fft as sfft

from ..exceptions import ContractViolation, ParameterError


def fft(a):
    return sfft.rfft2(a, norm="forward")


def ifft(ah, Ng):
    return sfft.irfft2(ah, s=(Ng, Ng), norm="forward")


def _check_spatial(a, grid):
    if a.shape[-2:] != grid.shape:
        raise ContractViolation(f"expected trailing shape {grid.shape}, got {a.shape}")


def d1(a, grid):
    _check_spatial(a, grid)
    return ifft(1j * grid.k1_odd * fft(a), grid.Ng)


def d2(a, grid):
    _check_spatial(a, grid)
    return ifft(1j * grid.k2_odd * fft(a), grid.Ng)


def grad(a, grid):
    """Gradient of a scalar (or of each component, new axis first)."""
    _check_spatial(a, grid)
    ah = fft(a)
    return np.stack([ifft(1j * grid.k1_odd * ah, grid.Ng), ifft(1j * grid.k2_odd * ah, grid.Ng)])


def perp_grad(a, grid):
    """(-d2 a, d1 a)."""
    _check_spatial(a, grid)
    ah = fft(a)
    return np.stack([ifft(-1j * grid.k2_odd * ah, grid.Ng), ifft(1j * grid.k1_odd * ah, grid.Ng)])


def div(a, grid):
    """Divergence of a vector (2, ...) or row-wise of a tensor (2, 2, ...)."""
    _check_spatial(a, grid)
    if a.ndim == 3 and a.shape[0] == 2:
        ah = fft(a)
        return ifft(1j * grid.k1_odd * ah[0] + 1j * grid.k2_odd * ah[1], grid.Ng)
    if a.ndim == 4 and a.shape[:2] == (2, 2):
        ah = fft(a)
        return ifft(1j * grid.k1_odd * ah[:, 0] + 1j * grid.k2_odd * ah[:, 1], grid.Ng)
    raise ContractViolation(f"div needs a vector or 2x2 tensor field, got shape {a.shape}")


def laplacian(a, grid):
    _check_spatial(a, grid)
    return ifft(-grid.ksq * fft(a), grid.Ng)


def frac_lap(a, alpha, grid):
    """(-Delta)^alpha, mode k scaled by |k|^(2 alpha)."""
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    _check_spatial(a, grid)
    return ifft(grid.ksq**alpha * fft(a), grid.Ng)


def inv_lap(a, grid):
    """Delta^{-1} on the mean-free part; the result has zero mean."""
    _check_spatial(a, grid)
    ah = -fft(a) / grid.ksq_safe
    ah[..., 0, 0] = 0.0
    return ifft(ah, grid.Ng)


def inv_abs_grad(a, grid):
    """|nabla|^{-1} on the mean-free part."""
    _check_spatial(a, grid)
    ah = fft(a) / np.sqrt(grid.ksq_safe)
    ah[..., 0, 0] = 0.0
    return ifft(ah, grid.Ng)


def mean_free(a, grid):
    _check_spatial(a, grid)
    return a - a.mean(axis=(-2, -1), keepdims=True)


def leray(a, grid):
    """P_H a = a - grad Delta^{-1} div a (mean kept)."""
    if a.ndim != 3 or a.shape[0] != 2:
        raise ContractViolation(f"leray needs a vector field, got shape {a.shape}")
    _check_spatial(a, grid)
    ah = fft(a)
    k1, k2 = grid.k1_odd, grid.k2_odd
    kdot = (k1 * ah[0] + k2 * ah[1]) / grid.ksq_safe
    return ifft(np.stack([ah[0] - k1 * kdot, ah[1] - k2 * kdot]), grid.Ng)


def anti_div(v, grid):
    """Symmetric trace-free R with div R = v - mean(v).

    Solves Delta u = v - mean(v) and returns grad u + grad u^T - (div u) Id.
    """
    if v.ndim != 3 or v.shape[0] != 2:
        raise ContractViolation(f"anti_divergence needs a vector field, got shape {v.shape}")
    _check_spatial(v, grid)
    uh = -fft(v) / grid.ksq_safe
    uh[:, 0, 0] = 0.0
    k1, k2 = 1j * grid.k1_odd, 1j * grid.k2_odd
    r11 = ifft(k1 * uh[0] - k2 * uh[1], grid.Ng)
    r12 = ifft(k2 * uh[0] + k1 * uh[1], grid.Ng)
    return np.stack([np.stack([r11, r12]), np.stack([r12, -r11])])


def band(a, grid, low, high):
    """Keep modes with low <= |k| <= high."""
    _check_spatial(a, grid)
    keep = (grid.kabs >= low) & (grid.kabs <= high)
    return ifft(fft(a) * keep, grid.Ng)


def _pad(ah, Ng, Mg):
    out = np.zeros(ah.shape[:-2] + (Mg, Mg // 2 + 1), dtype=complex)
    h = Ng // 2
    out[..., :h, :h] = ah[..., :h, :h]
    out[..., Mg - h + 1 :, :h] = ah[..., h + 1 :, :h]
    return out


def _truncate(bh, Ng, Mg):
    out = np.zeros(bh.shape[:-2] + (Ng, Ng // 2 + 1), dtype=complex)
    h = Ng // 2
    out[..., :h, :h] = bh[..., :h, :h]
    out[..., h + 1 :, :h] = bh[..., Mg - h + 1 :, :h]
    return out


def padded_values(a, grid):
    """Samples of a on the 3/2-refined grid (Nyquist modes dropped)."""
    Mg = 3 * grid.Ng // 2
    Mg += Mg % 2
    return sfft.irfft2(_pad(fft(a), grid.Ng, Mg), s=(Mg, Mg), norm="forward"), Mg


def from_padded(b, grid, Mg):
    return ifft(_truncate(sfft.rfft2(b, norm="forward"), grid.Ng, Mg), grid.Ng)


def dealiased_product(f, g, grid, kind="auto"):
    """Pointwise product evaluated on the 3/2-padded grid, then truncated.

    ``kind`` is 'outer' for vector (x) vector -> tensor; otherwise numpy
    broadcasting on the leading axes decides (scalar * anything, or
    componentwise for equal ranks).
    """
    fp, Mg = padded_values(f, grid)
    gp, _ = padded_values(g, grid)
    if kind == "outer" or (kind == "auto" and f.ndim == 3 and g.ndim == 3):
        prod = fp[:, None] * gp[None, :]
    else:
        if fp.ndim < gp.ndim:
            fp = fp.reshape(fp.shape[:-2] + (1,) * (gp.ndim - fp.ndim) + fp.shape[-2:])
        elif gp.ndim < fp.ndim:
            gp = gp.reshape(gp.shape[:-2] + (1,) * (fp.ndim - gp.ndim) + gp.shape[-2:])
        prod = fp * gp
    return from_padded(prod, grid, Mg)


def pointwise_magnitude(a, spatial_ndim=2):
    """Euclidean (Frobenius for tensors) magnitude over the leading axes."""
    lead = a.ndim - spatial_ndim
    if lead == 0:
        return np.abs(a)
    return np.sqrt(np.sum(a**2, axis=tuple(range(lead))))


def lp_norm(a, p):
    """Normalized-measure L^p norm; p = inf gives the max."""
    m = pointwise_magnitude(a)
    if np.isinf(p):
        return float(m.max())
    return float(np.mean(m**p) ** (1.0 / p))


def derivative_tower(a, grid, order):
    """All partial derivatives d1^i d2^j a with i + j == order."""
    ah = fft(a)
    out = []
    for i in range(order + 1):
        j = order - i
        k1 = grid.k1 if i % 2 == 0 else grid.k1_odd
        k2 = grid.k2 if j % 2 == 0 else grid.k2_odd
        out.append(ifft((1j * k1) ** i * (1j * k2) ** j * ah, grid.Ng))
    return out


def c_norm(a, grid, L):
    """max over |beta| <= L of sup |d^beta a| (componentwise max)."""
    best = float(np.abs(a).max())
    for order in range(1, L + 1):
        for d in derivative_tower(a, grid, order):
            best = max(best, float(np.abs(d).max()))
    return best


def max_axis_frequency(a, grid, tol=1e-13):
    """Largest max(|k1|, |k2|) carrying relative spectral mass above tol."""
    ah = np.abs(fft(a))
    if ah.ndim > 2:
        ah = ah.reshape(-1, *ah.shape[-2:]).max(axis=0)
    top = ah.max()
    if top == 0:
        return 0
    return int(grid.kmax_axis[ah > tol * top].max())
