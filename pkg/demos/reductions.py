"""
Reductions: scalar boundaries and the external-field model
==========================================================

With scalar boundary data the model is a shifted GUE. With a scalar end
matrix the spectrum matches the Gaussian external-field model, but the
eigenvectors do not: two-HCIZ eigenvectors stay uniformly spread while the
external field pins them to its own eigenbasis.
"""
from twohciz import (
    BoundaryData,
    ChainConfig,
    eigenvector_overlap_stats,
    make_rng,
    sample_external_field_matrix,
    sample_two_hciz_matrix,
    spectral_moment_estimate,
)

t = 0.4
A = BoundaryData.distinct([-1.0, 0.0, 1.5])
B = BoundaryData.scalar(0.5, 3)
chain = ChainConfig(burn_in=1000, thin=2, length=40_000)

two = sample_two_hciz_matrix(A, B, t, chain, make_rng(3, 0))
ext = sample_external_field_matrix(A, t, len(two), make_rng(3, 1), shift=t * 0.5)
for k in (1, 2, 3):
    print(f"k={k}: two-HCIZ {spectral_moment_estimate(two, k)}  external field {spectral_moment_estimate(ext, k)}")

print("two-HCIZ overlaps:\n", eigenvector_overlap_stats(two)[0].round(3))
print("external-field overlaps:\n", eigenvector_overlap_stats(ext)[0].round(3))
