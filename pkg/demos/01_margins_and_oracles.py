"""Planted-margin data and the margin oracles.

Generates a dataset whose labels follow a hidden separator at margin 0.3,
verifies the margin with the certified oracle, then plants label flips and
watches the margin collapse and the outlier oracle recover the flips.
"""

import numpy as np

from dpmargin import (
    geometric_margin_oracle,
    min_outliers_oracle,
    synth_margin_dataset,
)

clean, w_star = synth_margin_dataset(n=150, d=10, gamma=0.3, n_outliers=0, seed=7)
print(f"clean dataset: n={clean.n}, d={clean.dim}")
print(f"oracle margin:  {geometric_margin_oracle(clean):.4f}  (planted 0.3)")

dirty, w_star = synth_margin_dataset(n=12, d=4, gamma=0.4, n_outliers=2, seed=7)
print(f"\nwith 2 label flips, margin = {geometric_margin_oracle(dirty):.4f}")

count, witness = min_outliers_oracle(dirty, gamma=0.4)
print(f"outlier oracle: remove {count} points {witness} to restore margin 0.4")

flipped = tuple(int(i) for i in np.nonzero(dirty.signed_features() @ w_star < 0)[0])
print(f"actually flipped rows: {flipped}")
