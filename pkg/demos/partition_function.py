"""
Partition function of the bridge ensemble
=========================================

The two-HCIZ partition function reduces to a Gaussian factor times a single
HCIZ integral. Here that closed form is compared with the Andreief
normalization of the eigenvalue density and with brute-force quadrature,
and its time derivative is checked against the closed flow rate.
"""
import math

from twohciz import (
    BoundaryData,
    andreief_consistency_check,
    flow_and_duality_check,
    flow_rate,
    km_normalization_log,
    km_normalization_quadrature,
    log_partition_collapsed,
)

A = BoundaryData.from_clusters([(0.0, 2), (1.0, 1)])
B = BoundaryData.from_clusters([(-1.0, 1), (0.5, 2)])

for t in (0.2, 0.4, 0.6, 0.8):
    logz = log_partition_collapsed(A, B, t).log_magnitude
    print(f"t={t}: log Z = {logz:.12f}   d/dt log Z = {flow_rate(A, B, t):+.6f}")

# time reversal swaps the roles of start and end
flow, dual = flow_and_duality_check(A, B, 0.4)
print(flow)
print(dual)

# the eigenvalue normalizer, exactly and by a 60^3-node tensor quadrature
exact = km_normalization_log(A, B, 0.4)
quad = km_normalization_quadrature(A, B, 0.4)
print("normalizer: exact", exact.log_magnitude, " quadrature", quad.log_magnitude,
      " rel diff", abs(math.expm1(quad.log_magnitude - exact.log_magnitude)))
print(andreief_consistency_check(A, B, 0.4))
