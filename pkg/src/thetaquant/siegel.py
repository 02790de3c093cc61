"""Siegel upper half space points and the complex geometry they induce.

A point is a symmetric complex n x n matrix Z = X + iY with Y positive
definite.  Each Z determines a compatible complex structure I(Z) on the
symplectic torus R^{2n}/Z^{2n} (omega = sum dx_i ^ dy_i) via the complex
coordinates z = x + Zy.  This module provides I(Z), its derivatives in Z,
the constant bivector coefficients obtained by raising those derivatives
with omega, and the eigenvalues of the metric Laplacian on pure phases.

Derivatives with respect to the symmetric matrix Z treat Z_ij and Z_ji as a
single variable (the perturbation matrix has unit entries in both slots when
i != j), and the Wirtinger convention is d/dZ = (d/dX - i d/dY)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import FourierMode

__all__ = [
    "InvalidPointError",
    "NonNormalError",
    "SiegelPoint",
    "TangentDirection",
    "complex_structure",
    "complex_frame",
    "dI_dZ",
    "gtilde_coefficients",
    "omega_complex_frame",
    "laplace_eigenvalue",
    "dlambda_dZ",
]

SYMMETRY_TOL = 1e-12
NORMALITY_TOL = 1e-10


class InvalidPointError(ValueError):
    """Raised when a matrix fails the Siegel upper-half-space invariants."""


class NonNormalError(ValueError):
    """Raised when an operation needs [X, Y] = 0 but the point is not normal."""


@dataclass(frozen=True)
class SiegelPoint:
    """A point Z = X + iY of the Siegel upper half space.

    Accepts a scalar, nested list, or array; validates symmetry and positive
    definiteness of Y at construction.  Immutable thereafter.
    """

    Z: np.ndarray
    n: int = field(init=False)
    X: np.ndarray = field(init=False)
    Y: np.ndarray = field(init=False)
    is_normal: bool = field(init=False)

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=complex))
        if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
            raise InvalidPointError(f"Z must be square, got shape {Z.shape}")
        if np.max(np.abs(Z - Z.T)) >= SYMMETRY_TOL:
            raise InvalidPointError("Z is not symmetric within 1e-12")
        X = Z.real.copy()
        Y = Z.imag.copy()
        try:
            np.linalg.cholesky(Y)
        except np.linalg.LinAlgError:
            raise InvalidPointError(
                "imaginary part of Z is not positive definite"
            ) from None
        normal = np.max(np.abs(X @ Y - Y @ X)) < NORMALITY_TOL
        for arr in (Z, X, Y):
            arr.setflags(write=False)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "n", Z.shape[0])
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "is_normal", bool(normal))

    @property
    def Yinv(self):
        return np.linalg.inv(self.Y)

    @property
    def det_Y(self):
        return float(np.linalg.det(self.Y))

    @property
    def min_eig_Y(self):
        return float(np.linalg.eigvalsh(self.Y)[0])

    def __repr__(self):
        if self.n == 1:
            return f"SiegelPoint({self.Z[0, 0]:.6g})"
        return f"SiegelPoint(n={self.n}, Z={self.Z.tolist()})"


@dataclass(frozen=True)
class TangentDirection:
    """Direction d/dZ_ij (kind 'z') or d/dZbar_ij (kind 'zbar'), 0-based.

    Since Z is symmetric, (i, j) is an unordered pair; indices are stored
    with i <= j.
    """

    i: int
    j: int
    kind: str = "z"

    def __post_init__(self):
        if self.kind not in ("z", "zbar"):
            raise ValueError(f"kind must be 'z' or 'zbar', got {self.kind!r}")
        if self.i < 0 or self.j < 0:
            raise ValueError("indices must be nonnegative")
        if self.i > self.j:
            i, j = self.j, self.i
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "j", j)

    @property
    def holomorphic(self):
        return self.kind == "z"


def _delta(n, i, j):
    """Symmetric unit perturbation: ones at (i,j) and (j,i)."""
    D = np.zeros((n, n))
    D[i, j] = 1.0
    D[j, i] = 1.0
    return D


def complex_structure(p):
    """The compatible complex structure I(Z) in the (dx, dy) frame.

    Returns the real 2n x 2n block matrix

        [ -X Y^-1      -(Y + X Y^-1 X) ]
        [  Y^-1         Y^-1 X         ]

    obtained by solving dx' + Z dy' = i (dx + Z dy); it squares to -Id for
    every point and makes g = 2 pi omega(., I .) positive definite.  (When
    [X, Y] = 0 the corner blocks commute and the order is immaterial.)
    """
    X, Y = p.X, p.Y
    W = p.Yinv
    top = np.hstack([-X @ W, -(Y + X @ W @ X)])
    bot = np.hstack([W, W @ X])
    return np.vstack([top, bot])


def complex_frame(p):
    """Columns of the frame (dz_1..dz_n, dzbar_1..dzbar_n) in (dx, dy) coords.

    The frame vectors are dz = (i/2) Y^-1 Zbar dx + (1/2i) Y^-1 dy and the
    conjugate for dzbar; I(Z) is diagonal (+i, -i blocks) in this frame.
    """
    W = p.Yinv
    Z = p.Z
    Zb = np.conj(Z)
    A = (0.5j) * W @ Zb  # dz_i = sum_a A[i,a] dx_a + B[i,a] dy_a
    B = (-0.5j) * W
    C = np.zeros((2 * p.n, 2 * p.n), dtype=complex)
    C[: p.n, : p.n] = A.T
    C[p.n :, : p.n] = B.T
    C[: p.n, p.n :] = np.conj(A).T
    C[p.n :, p.n :] = np.conj(B).T
    return C


def dI_dZ(p, v):
    """Derivative of I(Z) along a tangent direction, in the (dx, dy) frame.

    Requires a normal point ([X, Y] = 0; automatic for n = 1), where with
    K = Y^-1 D_ij Y^-1 (D_ij the symmetric unit perturbation) the closed
    form is the sandwich

        dI/dZ_ij    =  (1/2i) [[Zbar K, Zbar K Zbar], [-K, -K Zbar]]
        dI/dZbar_ij = -(1/2i) [[Z K,    Z K Z      ], [-K, -K Z   ]]

    (block column [M; -1] times K times block row [1, M]; for n = 1 all
    factors commute and this is the scalar form K [[M, M^2], [-1, -M]]).
    The result anti-commutes with I(Z) and matches central finite
    differences of complex_structure.
    """
    if not p.is_normal:
        raise NonNormalError(
            "closed-form dI/dZ needs a normal point ([X,Y]=0); "
            "use n=1 or a commuting X, Y"
        )
    n = p.n
    W = p.Yinv
    K = W @ _delta(n, v.i, v.j) @ W
    if v.holomorphic:
        M = np.conj(p.Z)
        sign = 1.0
    else:
        M = p.Z.astype(complex)
        sign = -1.0
    top = np.hstack([M @ K, M @ K @ M])
    bot = np.hstack([-K, -K @ M])
    return sign * (1.0 / 2j) * np.vstack([top, bot])


def gtilde_coefficients(v, n):
    """Constant bivector coefficients of the raised derivative of I.

    Returned as a 2n x 2n complex matrix in the frame (dz, dzbar): for a
    holomorphic direction (i, j) the zz block carries 2i at (i, j) and
    (j, i) (a single 2i on the diagonal when i = j); for an antiholomorphic
    direction the zbar-zbar block carries -2i in the same pattern.  The
    antiholomorphic sign is pinned by the contraction identity
    G(v) . omega = dI/dZbar_ij, which also makes the heat-flow frame
    covariant constant in every direction.  Base-point independent.
    """
    G = np.zeros((2 * n, 2 * n), dtype=complex)
    if v.i >= n or v.j >= n:
        raise ValueError(f"direction indices out of range for n={n}")
    if v.holomorphic:
        blk, coeff = 0, 2j
    else:
        blk, coeff = n, -2j
    G[blk + v.i, blk + v.j] = coeff
    G[blk + v.j, blk + v.i] = coeff
    return G


def omega_complex_frame(p):
    """omega = -(1/2i) sum w_ab dz_a ^ dzbar_b with W = Y^-1, as a matrix.

    Entry (a, b) is omega(e_a, e_b) in the (dz, dzbar) frame ordering.
    """
    n = p.n
    W = p.Yinv.astype(complex)
    O = np.zeros((2 * n, 2 * n), dtype=complex)
    O[:n, n:] = -W / 2j
    O[n:, :n] = W.T / 2j
    return O


def laplace_eigenvalue(p, mode):
    """Eigenvalue of the metric Laplacian on the phase F_{r,s}.

    For the metric g = 2 pi omega(., I(Z) .) the Laplacian acts diagonally
    on phases with eigenvalue

        lambda(r, s, Z) = -2 pi ((s - Xr).Y^-1 (s - Xr) + r.Y r) <= 0,

    vanishing only for the constant mode.
    """
    if not isinstance(mode, FourierMode):
        mode = FourierMode(*mode)
    r = np.array(mode.r, dtype=float)
    s = np.array(mode.s, dtype=float)
    u = s - p.X @ r
    return float(-2 * np.pi * (u @ p.Yinv @ u + r @ p.Y @ r))


def dlambda_dZ(p, mode, v):
    """Wirtinger derivative of the Laplace eigenvalue along a direction.

    Closed form, valid at any point: with u = Y^-1 (s - Xr) and D = D_ij,

        dlam/dX_ij = 4 pi u.D r,
        dlam/dY_ij = 2 pi (u.D u - r.D r),

    combined as (dX -/+ i dY)/2 for kind 'z' / 'zbar'.
    """
    if not isinstance(mode, FourierMode):
        mode = FourierMode(*mode)
    r = np.array(mode.r, dtype=float)
    s = np.array(mode.s, dtype=float)
    D = _delta(p.n, v.i, v.j)
    u = p.Yinv @ (s - p.X @ r)
    dX = 4 * np.pi * (u @ D @ r)
    dY = 2 * np.pi * (u @ D @ u - r @ D @ r)
    if v.holomorphic:
        return 0.5 * (dX - 1j * dY)
    return 0.5 * (dX + 1j * dY)
