"""Heat-flow trivialization, flatness checks, and the Moyal star product.

The metric Laplacian acts diagonally on pure phases, so the heat operator
exp(-(h/4) Delta) multiplies the mode (r, s) by exp(-h lambda(r,s,Z)/4) --
a factor >= 1 since the eigenvalues are nonpositive.  At h = 1/k this is
exactly the coefficient that makes the mode Toeplitz matrices independent
of the Siegel point; formally it trivializes the connection

    D_V f = V[f] - (h / 8 pi) Delta_{G(V)} f

over the Siegel space, which reduces per mode to the scalar identity
d_V lambda + mu_{G(V)} / (2 pi) = 0 checked here.  Conjugating the level-k
operator product by the heat flow yields a complex-structure-independent
star product whose first-order part is measured against the Moyal-Weyl
product

    f * g = mul o exp(-(i/2) h Q) (f x g),   Q = sum dx_i x dy_i - dy_i x dx_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import FourierFunction, FourierMode
from .siegel import (
    SiegelPoint,
    dlambda_dZ,
    gtilde_coefficients,
    laplace_eigenvalue,
)
from .toeplitz import (
    hs_inner,
    rescaled_toeplitz,
    toeplitz_mode_closed_form,
)

__all__ = [
    "FormalFourierSeries",
    "heat_coefficient",
    "heat_transform",
    "covariant_constancy_residual",
    "formal_hitchin_residual",
    "moyal_product",
    "TrivializedStarFit",
    "trivialized_star_compare",
]


def _mode(m):
    return m if isinstance(m, FourierMode) else FourierMode(*m)


@dataclass(frozen=True)
class FormalFourierSeries:
    """Power series in the deformation parameter with Fourier coefficients.

    ``coefficients[l]`` is the order-l coefficient function; all arithmetic
    truncates at the stored order.
    """

    order: int
    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if len(coeffs) != self.order + 1:
            raise ValueError("need order + 1 coefficient functions")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_function(cls, f, order):
        zero = FourierFunction.zero(f.n)
        return cls(order, (f,) + (zero,) * order)

    @classmethod
    def zeros(cls, n, order):
        return cls(order, tuple(FourierFunction.zero(n) for _ in range(order + 1)))

    @property
    def n(self):
        return self.coefficients[0].n

    def coefficient(self, l):
        return self.coefficients[l]

    def __add__(self, other):
        L = min(self.order, other.order)
        return FormalFourierSeries(
            L,
            tuple(
                self.coefficients[l] + other.coefficients[l] for l in range(L + 1)
            ),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if np.isscalar(other):
            return FormalFourierSeries(
                self.order, tuple(other * c for c in self.coefficients)
            )
        L = min(self.order, other.order)
        out = [FourierFunction.zero(self.n) for _ in range(L + 1)]
        for a in range(L + 1):
            for b in range(L + 1 - a):
                out[a + b] = out[a + b] + self.coefficients[a] * other.coefficients[b]
        return FormalFourierSeries(L, tuple(out))

    __rmul__ = __mul__

    def approx_eq(self, other, tol=1e-12):
        if self.order != other.order:
            return False
        return all(
            a.approx_eq(b, tol)
            for a, b in zip(self.coefficients, other.coefficients)
        )


def heat_coefficient(p, k, m):
    """Mode damping removed: exp((pi/2k)((s-Xr).Y^-1(s-Xr) + r.Yr)) >= 1.

    Reciprocal of the Gaussian factor eta and equal to
    exp(-lambda(r,s,Z)/(4k)).
    """
    m = _mode(m)
    r = np.array(m.r, dtype=float)
    s = np.array(m.s, dtype=float)
    u = s - p.X @ r
    return float(
        np.exp((np.pi / (2 * k)) * (u @ p.Yinv @ u))
        * np.exp((np.pi / (2 * k)) * (r @ p.Y @ r))
    )


def heat_transform(p, f, h_eval=None, order=None):
    """Apply exp(-(h/4) Delta) mode-diagonally.

    With ``h_eval`` supplied (typically 1/k) the result is numeric: every
    mode coefficient is scaled by exp(-h lambda / 4).  Without it the
    exponential is expanded formally to the series order (taken from ``f``
    when it already is a series, else from ``order``).
    """
    if h_eval is not None:
        def scale(fn):
            return FourierFunction(
                {
                    m: c * math.exp(-h_eval * laplace_eigenvalue(p, m) / 4.0)
                    for m, c in fn.terms.items()
                },
                n=fn.n,
            )

        if isinstance(f, FormalFourierSeries):
            return FormalFourierSeries(
                f.order, tuple(scale(c) for c in f.coefficients)
            )
        return scale(f)

    if isinstance(f, FourierFunction):
        if order is None:
            raise ValueError("formal transform of a plain function needs an order")
        f = FormalFourierSeries.from_function(f, order)
    L = f.order
    out = [dict() for _ in range(L + 1)]
    for a in range(L + 1):
        for m, c in f.coefficients[a].terms.items():
            lam = laplace_eigenvalue(p, m)
            for j in range(L + 1 - a):
                w = c * (-lam / 4.0) ** j / math.factorial(j)
                tgt = out[a + j]
                tgt[m] = tgt.get(m, 0.0) + w
    return FormalFourierSeries(
        L, tuple(FourierFunction(d, n=f.n) for d in out)
    )


def covariant_constancy_residual(p1, p2, k, m):
    """Entrywise distance of heat-rescaled mode operators at two points.

    The theta frames at the two points are identified label-wise (the frame
    is covariant constant for the flat heat connection), so the rescaled
    matrices must agree entry by entry; the un-rescaled ones differ by the
    gap between the Gaussian factors.
    """
    if p1.n != p2.n:
        raise ValueError("points have different dimension")
    m = _mode(m)
    A1 = heat_coefficient(p1, k, m) * toeplitz_mode_closed_form(p1, k, m)
    A2 = heat_coefficient(p2, k, m) * toeplitz_mode_closed_form(p2, k, m)
    return float(np.max(np.abs(A1.entries - A2.entries)))


def _mu_eigenvalue(p, m, v):
    """Eigenvalue of Delta_{G(v)} on the phase F_m.

    First-order complex-frame eigenvalues of the phase are pi w (dz sector,
    w = Y^-1(s - Zbar r)) and -pi w' (dzbar sector, w' = Y^-1(s - Zr));
    the bivector is constant, so the second-order eigenvalue is the
    coefficient contraction e.G e.
    """
    m = _mode(m)
    r = np.array(m.r, dtype=float)
    s = np.array(m.s, dtype=float)
    w = p.Yinv @ (s - np.conj(p.Z) @ r)
    wbar = p.Yinv @ (s - p.Z @ r)
    e = np.concatenate([np.pi * w, -np.pi * wbar])
    G = gtilde_coefficients(v, p.n)
    return complex(e @ G @ e)


def formal_hitchin_residual(p, m, v, fd_step=None):
    """|d_v lambda + mu_{G(v)} / (2 pi)| -- the per-mode flatness defect.

    Zero for the heat-flow frame at all series orders, since the flow acts
    mode-diagonally.  ``fd_step`` replaces the analytic eigenvalue
    derivative by central differences of that step in X and Y.
    """
    if p.n > 1 and not p.is_normal:
        from .siegel import NonNormalError

        raise NonNormalError("flatness closed form needs a normal point")
    m = _mode(m)
    if fd_step is None:
        dlam = dlambda_dZ(p, m, v)
    else:
        h = fd_step
        D = np.zeros((p.n, p.n))
        D[v.i, v.j] = 1.0
        D[v.j, v.i] = 1.0

        def lam(dz):
            return laplace_eigenvalue(SiegelPoint(p.Z + dz * D), m)

        dX = (lam(h) - lam(-h)) / (2 * h)
        dY = (lam(1j * h) - lam(-1j * h)) / (2 * h)
        sgn = -1j if v.holomorphic else 1j
        dlam = 0.5 * (dX + sgn * dY)
    mu = _mu_eigenvalue(p, m, v)
    return abs(dlam + mu / (2 * np.pi))


def _as_series(f, order):
    if isinstance(f, FormalFourierSeries):
        return f
    return FormalFourierSeries.from_function(f, order)


def moyal_product(f, g, order):
    """Truncated Moyal-Weyl product of Fourier data.

    On phases the bidifferential operator Q is the scalar
    -4 pi^2 (r.u - s.t), so the exponential series contributes
    (2 pi^2 i (r.u - s.t))^j / j! at order j; extended bilinearly and by
    the Cauchy rule over series orders.  Associative at every truncation.
    """
    f = _as_series(f, order)
    g = _as_series(g, order)
    L = min(order, f.order, g.order)
    out = [dict() for _ in range(L + 1)]
    for a in range(L + 1):
        fa = f.coefficients[a].terms
        if not fa:
            continue
        for b in range(L + 1 - a):
            gb = g.coefficients[b].terms
            if not gb:
                continue
            for m1, c1 in fa.items():
                for m2, c2 in gb.items():
                    q = m1.symplectic_pairing(m2)
                    msum = m1 + m2
                    base = c1 * c2
                    for j in range(L + 1 - a - b):
                        w = base * (2j * np.pi**2 * q) ** j / math.factorial(j)
                        tgt = out[a + b + j]
                        tgt[msum] = tgt.get(msum, 0.0) + w
    return FormalFourierSeries(
        L, tuple(FourierFunction(d, n=f.n) for d in out)
    )


@dataclass
class TrivializedStarFit:
    """First-order coefficient of the trivialized operator product vs Moyal."""

    order1: complex
    moyal_order1: complex
    constant: complex  # measured ratio order1 / moyal_order1 (0 when both vanish)
    cross_point_deviation: float
    condition_number: float


def trivialized_star_compare(p, m1, m2, k_values, order=3, other_point=None):
    """Measure the star product seen through heat-rescaled operators.

    For each level the product of the two rescaled mode operators is
    projected onto the rescaled operator of the mode sum and the scalar
    sequence is fitted in 1/k; the linear coefficient is compared with the
    Moyal value 2 pi^2 i (r.u - s.t) as a ratio (the global normalization
    constant).  A second Siegel point quantifies complex-structure
    independence.
    """
    m1, m2 = _mode(m1), _mode(m2)
    k_values = tuple(int(k) for k in k_values)
    if len(k_values) < order + 2:
        raise ValueError("need at least order + 2 levels for the fit")

    def fitted_order1(pt):
        samples = []
        for k in k_values:
            A = rescaled_toeplitz(pt, k, m1) @ rescaled_toeplitz(pt, k, m2)
            B = rescaled_toeplitz(pt, k, m1 + m2)
            samples.append(hs_inner(A, B) / hs_inner(B, B))
        x = 1.0 / np.asarray(k_values, dtype=float)
        V = np.vander(x, N=order + 1, increasing=True)
        sol, *_ = np.linalg.lstsq(V, np.asarray(samples), rcond=None)
        sv = np.linalg.svd(V, compute_uv=False)
        return sol[1], float(sv[0] / sv[-1])

    c1, cond = fitted_order1(p)
    q = m1.symplectic_pairing(m2)
    moyal = 2j * np.pi**2 * q
    constant = c1 / moyal if q != 0 else 0.0 + 0.0j
    cross = 0.0
    if other_point is not None:
        c1_other, _ = fitted_order1(other_point)
        cross = abs(c1 - c1_other) / max(abs(c1), 1e-300)
    return TrivializedStarFit(
        order1=complex(c1),
        moyal_order1=complex(moyal),
        constant=complex(constant),
        cross_point_deviation=float(cross),
        condition_number=cond,
    )
