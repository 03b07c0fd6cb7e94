"""
Checked-in tolerances and thresholds.

Each constant carries a note on how it was derived. Rate-like thresholds are
empirical: convergence of partial sums to a(1) is proved without a rate.
"""

# Closed-form identities are exact up to a few ulps of O(1) quantities.
CLOSED_FORM_TOL = 1e-12

# Quadrature-backed values (Gauss-Legendre 128 vs. two-panel refinement).
QUADRATURE_TOL = 1e-9

# Monotonicity of quadrature moments is enforced post hoc within this slack.
MONOTONE_SLACK = 1e-9

# Completely monotone (Hausdorff) differences may dip this far below zero.
# (-1)^j Delta^j u_k is a binomial combination with |coefficients| summing to
# 2^j; at j = 20 rounding of u alone gives ~1e6 * 1e-16 in the worst case.
HAUSDORFF_TOL = 1e-10
HAUSDORFF_MAX_ORDER = 20

# Polynomial density checks.
POLY_NORMALIZATION_TOL = 1e-12
POLY_GRID_POINTS = 1001
POLY_NONNEG_SLACK = 1e-12
POLY_F1_ZERO_TOL = 1e-10

# Generic density normalization by quadrature.
GENERIC_NORMALIZATION_TOL = 1e-8

# Gauss-Legendre order for generic moments.
GENERIC_QUADRATURE_ORDER = 128

# Divergence detection for E[1/(1-phi)] on dyadic truncations 1 - 2^-j.
DIVERGENCE_LEVELS = (10, 30)
DIVERGENCE_WINDOW = 5
DIVERGENCE_GROWTH_FACTOR = 1.5
DIVERGENCE_CONVERGED_TOL = 1e-8
# f(x) ~ (1-x)^alpha near 1 gives per-level growth ~ 2^(-alpha j); a late/early
# growth ratio below 2^(-7.5) (alpha >= 1/2 over levels 10..30) is convergence.
DIVERGENCE_DECAY_RATIO = 2.0 ** -7.5

# Partial sums never exceed one by more than this for the implemented families
# (empirical; non-negativity of a_k is not known in general).
PARTIAL_SUM_SLACK = 1e-9

# Abel table r_j = 1 - 2^-j.
ABEL_LEVELS = (4, 24)
# Non-decreasing tolerance for a(r_j) (pure rounding of O(1) values).
ABEL_MONOTONE_SLACK = 1e-12

# m-increment ratio (m(r_J) - m(r_{J-1})) / (m(r_{J-10}) - m(r_{J-11})).
# Logarithmic divergence gives ~1, power divergence > 1, convergence with
# rate (1-r)^alpha gives 2^(-10 alpha). Below 0.5 (alpha > 0.1) the table shows
# a bounded m; above 0.9 an unbounded one; in between the channel abstains.
# Only generic densities are judged by the ratio; closed-form families know
# their class, and Beta with q just above 1 lands in the band.
ABEL_BOUNDED_RATIO = 0.5
ABEL_UNBOUNDED_RATIO = 0.9

# Matched-resolution discrepancy |S_K - a(1 - 1/K)|. For a_k >= 0,
#   a(r) - S_K = sum_{k>K} a_k r^k - sum_{k<=K} a_k (1 - r^k)
# with 1 - r^k <= k/K at r = 1 - 1/K, so the discrepancy is bounded by the
# Cesaro value (1/K) sum k a_k plus the gap a(1) - S_K. The slack absorbs
# rounding and the sign changes of non-uniform families.
MATCHED_RESOLUTION_SLACK = 1e-6

# Gauss-Jacobi orders for Beta evaluation off the real axis.
JACOBI_BASE_ORDER = 256
JACOBI_MAX_ORDER = 4096
JACOBI_AGREEMENT_TOL = 1e-11

# Series/integral agreement in m evaluation.
METHOD_AGREEMENT_TOL = 1e-8

# Injectivity: imaginary-part antisymmetry about pi.
ANTISYMMETRY_TOL = 1e-10

# Panel simulation.
DEFAULT_BURN_IN = 2000
BURN_IN_PHI_THRESHOLD = 0.999
BURN_IN_SCALE = 10.0
BURN_IN_CAP = 1_000_000
POLY_SAMPLING_KNOTS = 4096
UNIT_CHUNK = 256
