"""
Second moments and the dilation identity
========================================

The exact second moment E[Tr M^2] follows from the kernel trace. The
dilation identity ties it to the Euler derivative of log Z, and that holds to
rounding. The closed second-moment formula that averages the cross term over
plain Haar measure matches only when one side is scalar. Otherwise the gap is
printed.
"""
from twohciz import BoundaryData, cross_term_exact, exact_linear_statistic, ward_dilation_check

cases = {
    "scalar B": (BoundaryData.distinct([0.0, 1.0, 2.0]), BoundaryData.scalar(0.5, 3), 0.4),
    "n = 1": (BoundaryData.distinct([0.7]), BoundaryData.distinct([-0.2]), 0.4),
    "generic n = 2": (BoundaryData.distinct([0.0, 1.0]), BoundaryData.distinct([-1.0, 1.5]), 0.4),
    "confluent n = 3": (BoundaryData.from_clusters([(0.0, 2), (1.0, 1)]),
                        BoundaryData.from_clusters([(-1.0, 1), (0.5, 2)]), 0.4),
}

for name, (A, B, t) in cases.items():
    print(f"--- {name}: E[Tr M^2] = {exact_linear_statistic(2, A, B, t):.10f}")
    print(f"    weighted cross term {cross_term_exact(A, B):.6f} vs unweighted {A.trace() * B.trace() / A.n:.6f}")
    for report in ward_dilation_check(A, B, t):
        print("   ", report.status.ljust(11), report.check_name, f"{report.measured:.10f}", f"{report.expected:.10f}")
