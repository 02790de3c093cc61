"""Pure phase functions on the torus R^{2n}/Z^{2n} and their finite combinations.

The building blocks are the phases

    F_{r,s}(x, y) = exp(2 pi i (x.r + s.y)),   (r, s) integer n-vectors,

which form an orthonormal basis of L^2 of the torus with unit cell [0,1)^{2n}.
Finite complex combinations of them stand in for smooth functions throughout
the package.  The Poisson bracket below is the one induced by the symplectic
form omega = sum_i dx_i ^ dy_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FourierMode",
    "FourierFunction",
    "poisson_bracket",
    "fourier_eval",
    "dense_max_abs",
]


def _int_tuple(v):
    if np.isscalar(v):
        v = (v,)
    out = tuple(int(x) for x in v)
    for x, orig in zip(out, v):
        if x != orig:
            raise ValueError(f"mode entries must be integers, got {orig!r}")
    return out


@dataclass(frozen=True)
class FourierMode:
    """Integer frequency pair (r, s) labelling the phase F_{r,s}."""

    r: tuple
    s: tuple

    def __post_init__(self):
        object.__setattr__(self, "r", _int_tuple(self.r))
        object.__setattr__(self, "s", _int_tuple(self.s))
        if len(self.r) != len(self.s):
            raise ValueError("r and s must have equal length")

    @property
    def n(self):
        return len(self.r)

    def __neg__(self):
        return FourierMode(tuple(-a for a in self.r), tuple(-a for a in self.s))

    def __add__(self, other):
        return FourierMode(
            tuple(a + b for a, b in zip(self.r, other.r)),
            tuple(a + b for a, b in zip(self.s, other.s)),
        )

    def symplectic_pairing(self, other):
        """r.u - s.t for self=(r,s), other=(t,u); an exact integer."""
        return sum(a * b for a, b in zip(self.r, other.s)) - sum(
            a * b for a, b in zip(self.s, other.r)
        )


class FourierFunction:
    """Finite combination sum_m lambda_m F_m with complex coefficients.

    Instances are immutable; all arithmetic returns new objects.  Coefficients
    below ``prune_tol`` in magnitude are dropped at construction.
    """

    __slots__ = ("_terms", "_n")

    def __init__(self, terms, n=None, prune_tol=0.0):
        data = {}
        for mode, coeff in dict(terms).items():
            if not isinstance(mode, FourierMode):
                mode = FourierMode(*mode)
            coeff = complex(coeff)
            if abs(coeff) > prune_tol or (prune_tol == 0.0 and coeff != 0):
                data[mode] = data.get(mode, 0.0) + coeff
        dims = {m.n for m in data}
        if len(dims) > 1:
            raise ValueError(f"mixed mode dimensions {dims}")
        if n is None:
            if not dims:
                raise ValueError("empty function needs an explicit dimension n")
            n = dims.pop()
        elif dims and dims.pop() != n:
            raise ValueError("mode dimension does not match n")
        self._terms = data
        self._n = n

    @classmethod
    def mode(cls, r, s, coeff=1.0):
        return cls({FourierMode(r, s): coeff})

    @classmethod
    def constant(cls, value, n=1):
        z = (0,) * n
        return cls({FourierMode(z, z): value}, n=n)

    @classmethod
    def zero(cls, n=1):
        return cls({}, n=n)

    @property
    def n(self):
        return self._n

    @property
    def terms(self):
        return dict(self._terms)

    def modes(self):
        return list(self._terms)

    def coefficient(self, mode):
        if not isinstance(mode, FourierMode):
            mode = FourierMode(*mode)
        return self._terms.get(mode, 0.0 + 0.0j)

    def max_mode_entry(self):
        """Largest |entry| among all stored frequencies; 0 for constants."""
        best = 0
        for m in self._terms:
            best = max(best, max(abs(a) for a in m.r + m.s))
        return best

    def prune(self, tol):
        return FourierFunction(self._terms, n=self._n, prune_tol=tol)

    def conjugate(self):
        return FourierFunction(
            {-m: np.conj(c) for m, c in self._terms.items()}, n=self._n
        )

    def is_real(self, tol=1e-12):
        """True iff lambda_{-m} = conj(lambda_m) for every stored mode."""
        for m, c in self._terms.items():
            if abs(self._terms.get(-m, 0.0) - np.conj(c)) > tol:
                return False
        return True

    def approx_eq(self, other, tol=1e-12):
        for m in set(self._terms) | set(other._terms):
            if abs(self.coefficient(m) - other.coefficient(m)) > tol:
                return False
        return True

    def __add__(self, other):
        if np.isscalar(other):
            other = FourierFunction.constant(other, n=self._n)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0.0) + c
        return FourierFunction(out, n=self._n)

    __radd__ = __add__

    def __neg__(self):
        return FourierFunction(
            {m: -c for m, c in self._terms.items()}, n=self._n
        )

    def __sub__(self, other):
        if np.isscalar(other):
            other = FourierFunction.constant(other, n=self._n)
        return self + (-other)

    def __mul__(self, other):
        if np.isscalar(other):
            return FourierFunction(
                {m: other * c for m, c in self._terms.items()}, n=self._n
            )
        out = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 + m2
                out[m] = out.get(m, 0.0) + c1 * c2
        return FourierFunction(out, n=self._n)

    __rmul__ = __mul__

    def __call__(self, x, y):
        return fourier_eval(self, x, y)

    def __repr__(self):
        inner = ", ".join(
            f"F[{m.r},{m.s}]*{c:.6g}" for m, c in sorted(
                self._terms.items(), key=lambda kv: (kv[0].r, kv[0].s)
            )
        )
        return f"FourierFunction({inner or '0'})"


def fourier_eval(f, x, y):
    """Evaluate sum lambda_{r,s} e^{2 pi i (x.r + s.y)} at a point (x, y).

    ``x`` and ``y`` are real n-vectors (scalars for n = 1); the result is
    1-periodic in every coordinate.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    total = 0.0 + 0.0j
    for m, c in f.terms.items():
        total += c * np.exp(2j * np.pi * (x @ np.array(m.r) + np.array(m.s) @ y))
    return total


def poisson_bracket(f, g):
    """{f, g} for omega = sum dx_i ^ dy_i.

    On phases {F_{r,s}, F_{t,u}} = -4 pi^2 (r.u - s.t) F_{r+t, s+u}, extended
    bilinearly; antisymmetric, satisfies the Jacobi identity.
    """
    out = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            q = m1.symplectic_pairing(m2)
            if q == 0:
                continue
            m = m1 + m2
            out[m] = out.get(m, 0.0) + (-4 * np.pi**2) * q * c1 * c2
    return FourierFunction(out, n=f.n)


def dense_max_abs(f, points_per_dim=2048):
    """sup |f| approximated on a uniform grid of the unit cell.

    Used as the reference value in operator-norm asymptotics experiments.
    """
    n = f.n
    if n > 2:
        raise ValueError("dense grid sup only supported for n <= 2")
    if n == 2:
        points_per_dim = min(points_per_dim, 256)
    t = np.arange(points_per_dim) / points_per_dim
    axes = [t] * (2 * n)
    total = np.zeros((points_per_dim,) * (2 * n), dtype=complex)
    for m, c in f.terms.items():
        phases = [np.exp(2j * np.pi * m.r[a] * t) for a in range(n)]
        phases += [np.exp(2j * np.pi * m.s[a] * t) for a in range(n)]
        if n == 1:
            total += c * np.multiply.outer(phases[0], phases[1])
        else:
            total += c * np.einsum("a,b,c,d->abcd", *phases)
    del axes
    return float(np.max(np.abs(total)))
