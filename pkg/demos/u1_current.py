"""Half-line entropies of a chiral current profile.

Run ``python demos/u1_current.py``.
"""
import numpy as np

from wavebound.grid import GridSpec
from wavebound.u1 import (CurrentProfile, ant_check, balance_check, halfline_entropy,
                          u1_norm)


def main():
    f = CurrentProfile.from_function(lambda x: np.exp(-x**2), GridSpec(1, 1024, 20.0))
    print(f"Gaussian profile: norm={u1_norm(f):.6f}")
    for a in (-1.0, 0.0, 1.0):
        print(f"  S(x > {a:+.0f}) = {halfline_entropy(f, a):.6f}   "
              f"S(x < {a:+.0f}) = {halfline_entropy(f, a, '<'):.6f}")
    print(f"  S(x > 0) - pi/2 = {halfline_entropy(f, 0.0) - np.pi / 2:.1e}")

    rep = ant_check(f, 0.0)
    print(f"\nCut derivative at 0: finite difference {rep.fd_derivative:.8f}, "
          f"formula {rep.formula:.8f}")
    print(f"  minimizing continuation energy {rep.minimizer_energy:.6f}, "
          f"competitors {', '.join(f'{e:.4f}' for e in rep.competitor_energies)}")

    bal = balance_check(f, 0.0, 1.0)
    print(f"\nBalance between cuts 0 and 1: residual {bal.residual:.1e} "
          f"(relative {bal.relative:.1e})")


if __name__ == "__main__":
    main()
