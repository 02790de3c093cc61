"""Level-k theta functions as certified truncated lattice sums.

The quantum space at level k over a Siegel point Z has the orthogonal frame

    theta_a(z, Z) = sum_{l in Z^n} exp(pi i k (l+a).Z(l+a)) exp(2 pi i k (l+a).z)

indexed by a in (1/k)Z^n / Z^n.  Sums are truncated to a lattice window
centred on the minimiser of the Gaussian factor, with a radius certified
against the requested tail bound; term-wise differentiation gives the z- and
Z-derivatives.  Z-derivatives use the symmetric-matrix convention of
:mod:`thetaquant.siegel`, under which the heat identity reads

    d theta / dZ_ij = (2 - delta_ij) / (4 pi i k) d^2 theta / dz_i dz_j.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .siegel import SiegelPoint

__all__ = [
    "ThetaLabel",
    "theta_basis",
    "Derivative",
    "TruncationPolicy",
    "truncation_radius",
    "theta_eval",
    "heat_residual",
    "heat_residual_fd",
    "quasi_periodicity_residual",
    "multiplier",
    "hermitian_weight",
]


@dataclass(frozen=True)
class ThetaLabel:
    """Frame label a/k with integer vector a, 0 <= a_i < k."""

    k: int
    a: tuple

    def __post_init__(self):
        a = tuple(int(x) for x in (self.a if not np.isscalar(self.a) else (self.a,)))
        if self.k < 1:
            raise ValueError("level k must be >= 1")
        if any(x < 0 or x >= self.k for x in a):
            raise ValueError(f"label entries must lie in [0, {self.k}), got {a}")
        object.__setattr__(self, "a", a)

    @property
    def n(self):
        return len(self.a)

    @property
    def alpha(self):
        return np.array(self.a, dtype=float) / self.k


def theta_basis(k, n):
    """All k^n frame labels in lexicographic order of a."""
    return [ThetaLabel(k, a) for a in itertools.product(range(k), repeat=n)]


@dataclass(frozen=True)
class Derivative:
    """Term-wise derivative selector for theta evaluation."""

    kind: str
    i: int = 0
    j: int = 0

    _KINDS = ("value", "dz", "dz2", "dZ")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"kind must be one of {self._KINDS}")

    @classmethod
    def value(cls):
        return cls("value")

    @classmethod
    def dz(cls, i):
        return cls("dz", i)

    @classmethod
    def dz2(cls, i, j):
        return cls("dz2", i, j)

    @classmethod
    def dZ(cls, i, j):
        return cls("dZ", i, j)

    @property
    def degree(self):
        return {"value": 0, "dz": 1, "dz2": 2, "dZ": 2}[self.kind]


@dataclass(frozen=True)
class TruncationPolicy:
    """Certified lattice window: tail beyond ``radius`` is below ``epsilon``.

    The certificate is relative to the Gaussian peak factor
    exp(pi k v.Y^-1 v), v = Im z, which is 1 for real z.
    """

    epsilon: float
    radius: float
    k: int
    n: int
    min_eig: float

    def compatible(self, p, k):
        return (
            self.k == k
            and self.n == p.n
            and p.min_eig_Y >= self.min_eig - 1e-12
        )


def _poly_factor(sel, k, n, rho):
    """Upper bound for the term-wise derivative factor at lattice distance rho."""
    c = rho + 2.0
    if sel.kind == "value":
        return 1.0
    if sel.kind == "dz":
        return 2 * np.pi * k * math.sqrt(n) * c
    if sel.kind == "dz2":
        return (2 * np.pi * k * math.sqrt(n) * c) ** 2
    return 2 * np.pi * k * n * c * c  # dZ


def truncation_radius(p, k, epsilon, sel=Derivative.value()):
    """Smallest integer radius whose certified Gaussian tail is below epsilon.

    The tail over lattice points at sup-distance >= R from the window centre
    is bounded shell by shell using the smallest eigenvalue of Y; derivative
    selectors contribute a polynomial growth factor absorbed by the same
    Gaussian decay.  The radius is non-increasing in k and non-decreasing as
    epsilon shrinks.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lam = p.min_eig_Y
    n = p.n
    for R in range(1, 81):
        tail = 0.0
        for j in range(R, R + 400):
            shell = 2 * n * (2 * j + 2) ** (n - 1)
            term = shell * _poly_factor(sel, k, n, j) * math.exp(
                -np.pi * k * lam * j * j
            )
            tail += term
            if term < epsilon * 1e-8:
                break
        if tail < epsilon:
            return TruncationPolicy(
                epsilon=float(epsilon),
                radius=float(R),
                k=int(k),
                n=n,
                min_eig=lam,
            )
    raise ValueError("no certifiable radius below 80; epsilon too small")


def _lattice_points(p, label, policy, im_z):
    """Window of shifted lattice points u = l + alpha covering the Gaussian."""
    alpha = label.alpha
    center = -alpha - p.Yinv @ im_z
    lc = np.rint(center)
    halfwidth = int(math.ceil(policy.radius))
    rng = np.arange(-halfwidth, halfwidth + 1)
    grids = np.meshgrid(*([rng] * p.n), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=-1)
    return offsets + lc + alpha


def _term_factors(sel, k, u):
    if sel.kind == "value":
        return np.ones(len(u))
    if sel.kind == "dz":
        return 2j * np.pi * k * u[:, sel.i]
    if sel.kind == "dz2":
        return (2j * np.pi * k) ** 2 * u[:, sel.i] * u[:, sel.j]
    sym = 1.0 if sel.i == sel.j else 2.0
    return 1j * np.pi * k * sym * u[:, sel.i] * u[:, sel.j]


def theta_eval(p, label, z, sel=Derivative.value(), policy=None):
    """Evaluate a theta frame element (or a term-wise derivative) at z.

    ``z`` is a complex n-vector (scalar for n = 1).  When no policy is given
    one is derived for a 1e-12 tail.  The absolute truncation error is below
    policy.epsilon times the Gaussian peak factor exp(pi k Im(z).Y^-1 Im(z)).
    """
    k = label.k
    if policy is None:
        policy = truncation_radius(p, k, 1e-12, sel)
    if not policy.compatible(p, k):
        raise ValueError(
            "truncation policy was certified for a different (level, point)"
        )
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    u = _lattice_points(p, label, policy, z.imag)
    quad = np.einsum("li,ij,lj->l", u, p.Z, u)
    phases = np.exp(1j * np.pi * k * quad + 2j * np.pi * k * (u @ z))
    return complex(np.sum(_term_factors(sel, k, u) * phases))


def _derivative_scale(p, label, z, policy, lhs, rhs):
    """Magnitude the heat-identity residual is quoted against.

    The derivative values themselves, floored at pi k |theta(z)| -- the
    generic size of a Z-derivative -- so a near-critical point of the
    derivative cannot inflate the quotient past the evaluation noise floor.
    """
    k = label.k
    base = abs(theta_eval(p, label, z, Derivative.value(), policy))
    return max(abs(lhs), abs(rhs), np.pi * k * base, 1e-300)


def heat_residual(p, label, z, i, j, policy=None):
    """Relative residual of the heat identity at one point.

    Both derivatives are evaluated over the same truncation set, so the
    identity holds term by term and the residual is at rounding level.
    Returns |dZ theta - (2 - delta_ij)/(4 pi i k) dzi dzj theta| divided by
    the magnitude of the two sides (floored at pi k |theta|).
    """
    k = label.k
    if policy is None:
        policy = truncation_radius(p, k, 1e-12, Derivative.dz2(i, j))
    lhs = theta_eval(p, label, z, Derivative.dZ(i, j), policy)
    d2 = theta_eval(p, label, z, Derivative.dz2(i, j), policy)
    sym = 1.0 if i == j else 2.0
    rhs = sym * d2 / (4j * np.pi * k)
    return abs(lhs - rhs) / _derivative_scale(p, label, z, policy, lhs, rhs)


def heat_residual_fd(p, label, z, i, j, policy=None, step=1e-4):
    """Heat identity with dZ replaced by a fourth-order central stencil.

    The symmetric entry pair (i, j), (j, i) is perturbed together, matching
    the derivative convention.  Returns a residual relative to the derivative
    magnitude.
    """
    k = label.k
    if policy is None:
        policy = truncation_radius(p, k, 1e-13, Derivative.dz2(i, j))
    D = np.zeros((p.n, p.n))
    D[i, j] = 1.0
    D[j, i] = 1.0

    def th(offset):
        q = SiegelPoint(p.Z + offset * D)
        return theta_eval(q, label, z, Derivative.value(), policy)

    h = step
    fd = (th(-2 * h) - 8 * th(-h) + 8 * th(h) - th(2 * h)) / (12 * h)
    d2 = theta_eval(p, label, z, Derivative.dz2(i, j), policy)
    sym = 1.0 if i == j else 2.0
    rhs = sym * d2 / (4j * np.pi * k)
    return abs(fd - rhs) / _derivative_scale(p, label, z, policy, fd, rhs)


def multiplier(p, b, z):
    """Line-bundle multiplier for the lattice vector a + Zb at the point z.

    Only the Zb part acts: e(z) = exp(-2 pi i b.z - pi i b.Zb).  The basis
    values are 1 for the x-directions and exp(-2 pi i z_i - pi i Z_ii) for
    the Z-directions; general vectors follow from the cocycle rule.
    """
    b = np.asarray(b, dtype=float)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return complex(np.exp(-2j * np.pi * (b @ z) - 1j * np.pi * (b @ p.Z @ b)))


def hermitian_weight(p, y):
    """Fibre metric weight h = exp(-2 pi y.Y y) in real torus coordinates."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(np.exp(-2 * np.pi * (y @ p.Y @ y)))


def quasi_periodicity_residual(p, label, z, lattice_index, policy=None):
    """Relative defect of the lattice transformation law at tensor power k.

    For an x-direction (index < n) the theta value is 1-periodic; for a
    Z-direction (index n + i) it transforms by the k-th power of the
    multiplier.  Returns |theta(z + lam) - m^k theta(z)| over the larger of
    the two magnitudes.
    """
    k = label.k
    if policy is None:
        policy = truncation_radius(p, k, 1e-12)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = p.n
    if not 0 <= lattice_index < 2 * n:
        raise ValueError("lattice_index out of range")
    if lattice_index < n:
        shift = np.zeros(n, dtype=complex)
        shift[lattice_index] = 1.0
        mult = 1.0 + 0.0j
    else:
        i = lattice_index - n
        e = np.zeros(n)
        e[i] = 1.0
        shift = p.Z @ e
        mult = multiplier(p, e, z) ** k
    lhs = theta_eval(p, label, z + shift, Derivative.value(), policy)
    rhs = mult * theta_eval(p, label, z, Derivative.value(), policy)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale
