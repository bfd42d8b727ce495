"""Reduce a random perturbation of a unitary to canonical form, then split it.

We build T = U + K with rank K = 3 on C^6, recover (U1, B, Gamma), check
the reconstruction, and separate the unitary summand of T from the
completely non-unitary block T0.
"""
import numpy as np

from charfunc import assemble_T, cnu_split, defect_operators, opnorm, reduce_to_gamma_form
from charfunc.verify import random_contraction_pair

U, K = random_contraction_pair(seed=11, d=6, k=3, saturate=True)
T = U + K
print("||T|| =", round(opnorm(T), 12), "  rank K =", np.linalg.matrix_rank(K))

g = reduce_to_gamma_form(U, K)
print("defect rank k =", g.k, "(one coupling direction is isometric, so it joins U1)")
print("Gamma eigenvalues:", np.round(g.gamma_eigenvalues(), 6))
print("reconstruction error ||U1 + B(Gamma - I)B*U1 - T|| =", opnorm(assemble_T(g) - T))

dt, dts = defect_operators(g)
print("rank D_T =", np.linalg.matrix_rank(dt, 1e-10), " rank D_T* =", np.linalg.matrix_rank(dts, 1e-10))

split = cnu_split(g)
print(f"\nH0 (c.n.u. part) has dimension {split.dim0}, H1 (unitary part) {split.dim1}")
print("spectral radius of T0:", split.spectral_radius)
if split.dim1:
    print("eigenvalue moduli of the unitary block:", np.round(np.abs(np.linalg.eigvals(split.V)), 12))
print("H0 reduces T:", np.allclose(T @ split.P0, split.P0 @ T))

# A hand-built example with a visible unitary summand: a rotation on e0.
from charfunc import GammaForm

U1 = np.zeros((3, 3), dtype=complex)
U1[0, 0] = np.exp(0.7j)
U1[1:, 1:] = [[0, 1], [1, 0]]
B = np.array([[0], [1], [0]], dtype=complex)
split = cnu_split(GammaForm(U1, B, np.array([[0.4]])))
print("\nblock example: dim H0 =", split.dim0, " dim H1 =", split.dim1, " V =", np.round(split.V.ravel(), 6))
