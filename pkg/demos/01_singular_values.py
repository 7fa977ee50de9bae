"""
Where the lifted operator loses information
===========================================

For a window of support ``delta`` the measurements are linear in the
``2*delta - 1`` circulant diagonals of ``x x^*``. The resulting matrix is
block circulant, so its singular values come out of a handful of FFTs of the
window instead of a dense SVD.
"""

import numpy as np

from blockpr.spectral import block_svd, compute_z, lost_indices, parity_zero_set, singular_value_bins
from blockpr.masks import WindowSpec

d, delta = 64, 8
window = WindowSpec.gaussian(0.3, delta, d)
svd = block_svd(window)

# histogram of |z| with the first bin holding exact zeros
print("bin_lo      bin_hi      count")
for lo, hi, count in singular_value_bins(svd):
    print(f"{lo:<11.4g} {hi:<11.4g} {count}")

# all zeros sit in the row k = d/2 + 1 and follow a parity pattern
lost = lost_indices(svd)
print("\nlost (k, j):", lost.pairs())
print("parity pattern:", parity_zero_set(delta))

# an odd dimension avoids the zeros altogether, but not the small values
odd = np.abs(compute_z(WindowSpec.gaussian(0.3, delta, d - 1), d - 1))
print(f"\nd = {d - 1}: smallest |z| = {odd.min():.2e}, lost = {len(lost_indices(block_svd(WindowSpec.gaussian(0.3, delta, d - 1))))}")
