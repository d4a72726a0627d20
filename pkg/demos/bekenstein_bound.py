"""Entropy versus energy for localized and non-localized data.

Run ``python demos/bekenstein_bound.py``.
"""
import numpy as np

from wavebound.bekenstein import bekenstein_correction, check_localized, check_nonlocalized
from wavebound.bumps import plateau, random_cauchy_data
from wavebound.grid import CauchyData, GridSpec
from wavebound.regions import Ball, Box


def localized():
    print("Localized data: S <= 2 pi R E(B)")
    grid = GridSpec(2, 256, 1.5)
    for region in (Ball((0.0, 0.0), 1.0), Box((-1.0, -0.7), (1.0, 0.7))):
        for m in (0.0, 1.0):
            a = random_cauchy_data(grid, m, 1, region)
            rep = check_localized(a, region)
            print(f"  {type(region).__name__:4s} m={m}: S={rep.entropy:9.4f}  "
                  f"2 pi R E={rep.bound:9.4f}  [{rep.kind}] {rep.verdict}")


def plateau_counterexample():
    print("\nA field equal to 1 on the ball carries entropy but no local energy")
    grid = GridSpec(2, 256, 4.0)
    ball = Ball((0.0, 0.0), 1.0)
    f = plateau(grid, (0.0, 0.0), 1.3, 3.2)
    a = CauchyData(f, np.zeros_like(f), 0.0, grid, decay_tol=None)
    bare = check_nonlocalized(a, ball, 0.0)
    print(f"  S={bare.entropy:.4f}  2 pi R E={bare.bound:.2e}  margin={bare.margin:.4f}  {bare.verdict}")
    corr = bekenstein_correction(a, ball, n_theta=256)
    fixed = check_nonlocalized(a, ball, corr["correction"])
    print(f"  boundary correction (pi/2)(G_lo + G_hi) = {corr['correction']:.4f}")
    print(f"  corrected margin={fixed.margin:.4f}  {fixed.verdict}")


if __name__ == "__main__":
    localized()
    plateau_counterexample()
