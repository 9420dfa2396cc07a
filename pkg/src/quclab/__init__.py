"""Numerical laboratory for stress-field regularity of divergence-form problems.

The package verifies, at desk scale, the machinery behind Sobolev estimates
for the stress field DF(Du) of Div(DF(Du)) = f with quasiuniformly convex
integrands F: the pointwise curl-reabsorption matrix bound, Riesz-transform
and div-curl identities on a periodic grid, Cordes-type admissibility
thresholds, a regularized minimization cascade with localized norm reports,
a closed-form radial solver with Holder diagnostics, and the Cantor
counterexample showing that an almost-everywhere eigenvalue-ratio bound
alone does not buy Sobolev regularity of the stress field.
"""

__version__ = "0.1.0"
