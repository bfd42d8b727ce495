"""The smallest interesting example: T = U + K with U = [1] and K = [gamma - 1].

T is multiplication by gamma, a strict contraction of a one-dimensional
space. Its characteristic function should be the Blaschke factor
(z - gamma) / (1 - gamma z), which is unimodular on the circle.
"""
import numpy as np

from charfunc import ThetaEvaluator, reduce_to_gamma_form

gamma = 0.5
g = reduce_to_gamma_form(np.eye(1), np.array([[gamma - 1.0]]))
print("canonical triple: U1 =", g.U1.ravel(), " B =", g.B.ravel(), " Gamma =", g.Gamma.ravel())

# four independent routes to theta
evaluators = ThetaEvaluator.all_for(g)
zs = np.array([0.0, 0.3, -0.4 + 0.2j, 0.9j])
exact = (zs - gamma) / (1 - gamma * zs)
print("\n   z              exact                 " + "  ".join(f"{m:>10s}" for m in evaluators))
for i, z in enumerate(zs):
    errs = [abs(ev(z)[0, 0] - exact[i]) for ev in evaluators.values()]
    print(f"{z!s:>14}  {exact[i]:.6f}  " + "  ".join(f"{e:10.1e}" for e in errs))

# on the circle the Blaschke factor has modulus one
boundary = evaluators["defect"].on_grid(16, 1.0)[:, 0, 0]
print("\nmax | |theta(xi)| - 1 | on 16 boundary points:", np.max(np.abs(np.abs(boundary) - 1)))

# the same function comes from the spectral measure route: a unit atom at 1
from charfunc import canonical_model

atom = ThetaEvaluator.from_model(canonical_model("atom"))
print("Herglotz route from the atom model at z = 0.3:", atom(0.3)[0, 0], " exact:", exact[1])
print("at the atom itself (z = 1) the pole limit gives", atom(1.0)[0, 0])
