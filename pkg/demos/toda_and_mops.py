"""
Toda molecule and mixed multiple orthogonal polynomials
=======================================================

In the fully confluent slice the HCIZ determinants form a Toda molecule. The
eigenvalue weights also define mixed multiple orthogonal polynomials,
built here from a linear system and re-checked by Gauss-Hermite quadrature.
"""
from twohciz import BoundaryData, hirota_toda_check, mop_construct_and_verify

for n in range(1, 6):
    r = hirota_toda_check(n, 0.7, -0.4)
    print(f"n={n}: d_x d_y log D_n = {r.measured:.8f}, D_(n+1) D_(n-1) / D_n^2 = {r.expected:.8f}")

A = BoundaryData.from_clusters([(-0.5, 2), (0.8, 1)])
B = BoundaryData.from_clusters([(0.3, 3)])
report, coefficients = mop_construct_and_verify(A, B, 0.4)
print(report)
for value, coef in zip(A.values, coefficients):
    print(f"  polynomial attached to start point {value:+.2f}: coefficients {coef}")
