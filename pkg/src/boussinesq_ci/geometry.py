"""Direction families, the separation constant c0, and the gamma solve."""

from dataclasses import dataclass
from fractions import Fraction as Fr
from functools import lru_cache
from itertools import product

import numpy as np

from .exceptions import NonPositiveCoefficient

_BASE_PLUS = ((Fr(1), Fr(0)), (Fr(3, 5), Fr(4, 5)), (Fr(3, 5), Fr(-4, 5)))


def _rotate(v):
    # counter-clockwise quarter turn
    return (-v[1], v[0])


@dataclass(frozen=True)
class DirectionFamily:
    index: int
    plus: tuple  # three exact (Fraction, Fraction) unit vectors

    @property
    def minus(self):
        return tuple((-a, -b) for a, b in self.plus)

    @property
    def members(self):
        return self.plus + self.minus

    @property
    def plus_array(self):
        return np.array([[float(a), float(b)] for a, b in self.plus])

    def exact_unit_norms(self):
        return all(a * a + b * b == 1 for a, b in self.members)


def direction_set(j):
    """Family used at cutoff level j (alternates with parity)."""
    if j % 2 == 0:
        return DirectionFamily(0, _BASE_PLUS)
    return DirectionFamily(1, tuple(_rotate(v) for v in _BASE_PLUS))


def compute_c0(families=None):
    """Half the minimum |xi + xi'| over non-antipodal pairs."""
    if families is None:
        families = (direction_set(0), direction_set(1))
    dirs = [v for fam in families for v in fam.members]
    best = None
    for a, b in product(dirs, dirs):
        if a[0] == -b[0] and a[1] == -b[1]:
            continue
        sq = (a[0] + b[0]) ** 2 + (a[1] + b[1]) ** 2
        best = sq if best is None else min(best, sq)
    return float(np.sqrt(float(best))) / 2


@lru_cache(maxsize=None)
def _system(index):
    fam = direction_set(index)
    xi = fam.plus_array
    # columns: xi (x) xi as (R11, R12, R22)
    A = np.stack([xi[:, 0] ** 2, xi[:, 0] * xi[:, 1], xi[:, 1] ** 2])
    det = np.linalg.det(A)
    assert abs(det) > 0.1, f"direction family {index} is not a basis (det={det})"
    return np.linalg.inv(A)


def gamma_squared(R, family):
    """gamma_xi^2 for each xi in family.plus; R has shape (..., 2, 2)."""
    R = np.asarray(R, dtype=float)
    rhs = np.stack([R[..., 0, 0], 0.5 * (R[..., 0, 1] + R[..., 1, 0]), R[..., 1, 1]], axis=-1)
    return rhs @ _system(family.index).T


@dataclass(frozen=True)
class GammaCoefficients:
    family: DirectionFamily
    R: np.ndarray
    gamma_sq: np.ndarray
    gamma: np.ndarray

    def reconstruct(self):
        xi = self.family.plus_array
        outer = np.einsum("ka,kb->kab", xi, xi)
        return np.einsum("...k,kab->...ab", self.gamma_sq, outer)


def gamma_coefficients(R, family):
    R = np.asarray(R, dtype=float)
    g2 = gamma_squared(R, family)
    if np.any(g2 <= 0):
        raise NonPositiveCoefficient(
            f"gamma^2 has a nonpositive entry (min {g2.min():.3e}); R is outside the positivity region"
        )
    return GammaCoefficients(family, R, g2, np.sqrt(g2))


def _sphere_directions(n):
    """Deterministic quasi-uniform unit vectors S with ||S||_F = 1 (symmetric 2x2)."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + 5**0.5) * i
    rho = np.sqrt(1 - z**2)
    u = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    # coordinates (S11, S22, sqrt(2) S12) are orthonormal for the Frobenius product
    S = np.empty((n, 2, 2))
    S[:, 0, 0] = u[:, 0]
    S[:, 1, 1] = u[:, 1]
    S[:, 0, 1] = S[:, 1, 0] = u[:, 2] / np.sqrt(2)
    return S


def estimate_eps0(tolerance=1e-6, samples=20000, family=None):
    """Largest radius around Id on which every gamma^2 stays positive (bisection)."""
    family = direction_set(0) if family is None else family
    S = _sphere_directions(samples)
    eye = np.eye(2)

    def ok(eps):
        return bool(gamma_squared(eye + eps * S, family).min() > 0)

    lo, hi = 0.0, 1.0
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def eps0_closed_form(family=None):
    """min over xi of gamma_xi^2(Id) / ||G_xi||_F, where gamma_xi^2(R) = <G_xi, R>_F."""
    family = direction_set(0) if family is None else family
    Ainv = _system(family.index)
    g_id = gamma_squared(np.eye(2), family)
    norms = np.sqrt(Ainv[:, 0] ** 2 + 2 * (Ainv[:, 1] / 2) ** 2 + Ainv[:, 2] ** 2)
    return float(np.min(g_id / norms))


EPS0_SHRINK = 0.9


@lru_cache(maxsize=None)
def default_eps0():
    return EPS0_SHRINK * estimate_eps0()
