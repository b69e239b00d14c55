"""One-point density of a two-level product process: bin averages of the kernel diagonal vs a histogram of samples."""
import numpy as np
from scipy.integrate import quad

from prodmat.kernels import kernel_handle
from prodmat.rmt import ProcessParams, rng_stream, sample_product_process

params = ProcessParams(n=2, p=2, l=1, m=(6, 4), nu=(1, 0))
kernel = kernel_handle(params, "contour")
samples = sample_product_process(params, rng_stream(1), 100_000)

edges = np.linspace(0, 1, 11)
for level in (1, 2):
    counts, _ = np.histogram(samples[:, level - 1].ravel(), bins=edges)
    hist = counts / (len(samples) * np.diff(edges))
    print(f"level {level}:  bin          kernel  histogram")
    for lo, hi, h in zip(edges, edges[1:], hist):
        avg = quad(lambda x: kernel(level, x, level, x), lo, hi)[0] / (hi - lo)
        print(f"        [{lo:.1f}, {hi:.1f}]  {avg:7.4f}  {h:7.4f}")
