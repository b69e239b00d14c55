"""Largest point of slice 5 in a 4 x 3 box under q^Volume, against the matching product-process point.

The KS distance shrinks as q approaches 1.
"""
from scipy.stats import ks_2samp

from prodmat.planepart import SkewShape, SliceSelection, marginal_extract, sample_plane_partitions, theorem_param_map
from prodmat.rmt import rng_stream, sample_product_process

shape, slices = SkewShape(4, 3), SliceSelection((4, 5))
params = theorem_param_map(shape, slices)
print("product process parameters:", params)
N = 20_000
ref = sample_product_process(params, rng_stream(0), N)[:, -1, -1]
for k, q in enumerate((0.5, 0.8, 0.9, 0.95)):
    fill = sample_plane_partitions(shape, q, N, rng=rng_stream(1, k), burn_in=1000, thin=20, chains=2000)
    top = marginal_extract(fill, slices, q, shape)[:, -1, -1]
    print(f"q = {q:.2f}  KS distance {ks_2samp(top, ref).statistic:.3f}")
