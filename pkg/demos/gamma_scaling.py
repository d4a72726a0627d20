"""How the exterior energy Gamma responds to dilations.

Dilating the ball by ``lam`` while keeping ``m x`` fixed multiplies Gamma by
``lam^(d-1)``. Scaling the mass up with the ball instead does not give a
``lam^2`` law; the printed defects show by how much it misses.

Run ``python demos/gamma_scaling.py``.
"""
from wavebound.gamma import BoundaryData, ExteriorProblem, gamma, gamma_properties_report


def main():
    a, b, m = 0.5, 1.5, 1.0
    p = ExteriorProblem.interval(a, b, m, L_out=b + 40.0, delta=5e-4)
    h = BoundaryData([0.4, 1.0], 1)
    res = gamma(p, h)
    print(f"interval ({a}, {b}), m={m}: Gamma={res.value:.6f}, flux={res.flux_geometric:.6f}")
    for lam in (0.5, 1.5, 2.0):
        rep = gamma_properties_report(p, h, h.reflected(), masses=(1.0, 2.0), lam=lam)
        print(f"  lam={lam}: |G(lam B, m/lam)/(lam^(d-1) G) - 1| = {rep.scaling_dilation_error:.1e}"
              f"   |G(lam B, lam m)/(lam^2 G) - 1| = {rep.scaling_stated_error:.3f}")


if __name__ == "__main__":
    main()
