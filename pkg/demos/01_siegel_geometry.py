"""Tour of the Siegel-space geometry layer.

Complex structures on the torus, their derivatives in the modulus Z, the
constant bivectors obtained by raising with the symplectic form, Laplace
eigenvalues on pure phases, and Poisson brackets.
"""

import numpy as np

from thetaquant import (
    FourierFunction,
    SiegelPoint,
    TangentDirection,
    complex_structure,
    dI_dZ,
    gtilde_coefficients,
    laplace_eigenvalue,
    poisson_bracket,
)

np.set_printoptions(precision=4, suppress=True)

# A point of the Siegel upper half space is a symmetric Z with Im Z > 0.
p = SiegelPoint(1j)
print("I(Z) at Z = i:")
print(complex_structure(p))

q = SiegelPoint(1 + 1j)
I = complex_structure(q)
print("\nI(Z) at Z = 1+i, and the defect of I^2 + Id:")
print(I)
print(np.max(np.abs(I @ I + np.eye(2))))

# Derivative of the complex structure along d/dZ, anti-commuting with I.
v = TangentDirection(0, 0, "z")
dI = dI_dZ(p, v)
Ip = complex_structure(p)
print("\ndI/dZ at Z = i:")
print(dI)
print("anti-commutator with I(Z):", np.max(np.abs(dI @ Ip + Ip @ dI)))

# Raising dI/dZ with omega gives constant bivector coefficients: 2i on the
# holomorphic block, -2i on the antiholomorphic one.
print("\nbivector coefficients (d/dZ, n=1):")
print(gtilde_coefficients(v, 1))
print("bivector coefficients (d/dZbar):")
print(gtilde_coefficients(TangentDirection(0, 0, "zbar"), 1))

# The metric Laplacian is diagonal on phases; eigenvalues are <= 0.
for mode in [((0,), (0,)), ((1,), (0,)), ((0,), (1,)), ((2,), (-1,))]:
    print(f"lambda{mode} at Z=i: {laplace_eigenvalue(p, mode):+.6f}")

# Poisson bracket of two phases: -4 pi^2 (r.u - s.t) times the sum phase.
f = FourierFunction.mode((1,), (0,))
g = FourierFunction.mode((0,), (1,))
print("\n{F_(1,0), F_(0,1)} =", poisson_bracket(f, g))
print("-4 pi^2 =", -4 * np.pi**2)
