"""Rademacher projection keeps a third of the margin with high probability.

Projects 200-dimensional planted-margin data down through seeded sign
matrices and measures how often the projected margin clears gamma/3.
"""

from dpmargin import (
    geometric_margin_oracle,
    project_and_clip,
    projection_dim,
    sample_jl,
    synth_margin_dataset,
)

gamma, beta = 0.3, 0.1
data, _ = synth_margin_dataset(n=100, d=200, gamma=gamma, n_outliers=0, seed=1)
k = projection_dim(gamma, data.n, grid_size=1, beta=beta)
print(f"ambient d={data.dim}, projection k={k}, target margin >= {gamma / 3:.3f}")

hits = 0
trials = 30
for t in range(trials):
    phi = sample_jl(k, data.dim, seed=t)
    projected = project_and_clip(phi, data, data.norm_bound)
    margin = geometric_margin_oracle(projected, tol=1e-4)
    hits += margin >= gamma / 3
    if t < 5:
        print(f"  draw {t}: projected margin = {margin:.4f}")
print(f"preserved in {hits}/{trials} draws (expected >= {1 - beta:.0%})")
