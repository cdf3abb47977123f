"""A tour of the two generating functions behind the random GPU copulas.

The binomial family splits [0, 1] into theta equal cells; the negative
binomial family uses infinitely many cells that crowd towards 1, which is
where its upper-tail dependence comes from.
"""

import numpy as np

from gpucopula.partition import (
    Family,
    GeneratingSpec,
    alpha,
    breakpoint,
    component_params,
    locate,
    pmf,
    upper_tail_coefficient,
)

theta = 4
binom = GeneratingSpec(Family.BINOMIAL, theta)
negbin = GeneratingSpec(Family.NEGBINOMIAL, theta)

# The generating functions form a partition of unity at every u.
u = 0.37
print("binomial sum at u=0.37:", sum(pmf(binom, i, u) for i in range(1, theta + 1)))
print("negbin   sum at u=0.37:", sum(pmf(negbin, i, u) for i in range(1, 400)))

# Prior predictive masses alpha_i and the cell breakpoints Lambda_j.
print("\nbinomial alpha:", [float(alpha(binom, i)) for i in range(1, theta + 1)])
print("negbin   alpha:", np.round([float(alpha(negbin, i)) for i in range(1, 8)], 4))
print("negbin   breakpoints:", np.round([float(breakpoint(negbin, j)) for j in range(1, 8)], 4))

# An atom y picks the cell containing it; the cell fixes a beta kernel.
for y in (0.1, 0.5, 0.9, 0.99):
    jb, jn = int(locate(binom, y)), int(locate(negbin, y))
    ab = [float(t) for t in component_params(Family.BINOMIAL, theta, jb)]
    an = [float(t) for t in component_params(Family.NEGBINOMIAL, theta, jn)]
    print(f"y={y:4}: binomial cell {jb} -> Beta({ab[0]:g}, {ab[1]:g}), "
          f"negbin cell {jn} -> Beta({an[0]:g}, {an[1]:g})")

# Diagonal weights give an upper-tail coefficient that grows with theta.
for t in (1, 2, 5, 20):
    print(f"lambda_U at theta={t:2d}: {upper_tail_coefficient(t):.4f}")
