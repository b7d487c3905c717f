"""Grid convergence of eigenvalues and traces for one profile.

Prints, per grid size, the error of selected eigenvalues against a
Legendre-Galerkin reference and the trace error against the closed form,
along with the solver's own error estimate and bound.
"""

import argparse

import numpy as np
from numpy.polynomial import legendre as L
from scipy.linalg import eigh

from knds_spectral import HorizonGeometry, compute_spectrum, gamma0_closed, gammak_closed


def galerkin(xi, b2, k, n_basis=60, n_quad=300):
    x, wq = L.leggauss(n_quad)
    s = 1 - x * x
    f = s * (1 - xi * s) / (1 - b2 * s)
    V, dV = np.zeros((n_basis, x.size)), np.zeros((n_basis, x.size))
    for n in range(n_basis):
        c = np.zeros(n + 1)
        c[n] = 1
        pn, dpn = L.legval(x, c), L.legval(x, L.legder(c))
        V[n] = s ** (k / 2) * pn
        dV[n] = s ** (k / 2) * dpn - (k * x * s ** (k / 2 - 1) * pn if k else 0)
    vals = eigh((dV * f * wq) @ dV.T + k * k * (V / f * wq) @ V.T, (V * wq) @ V.T, eigvals_only=True)
    return vals[1:] if k == 0 else vals


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--xi", type=float, default=0.6)
    ap.add_argument("--beta-sq", type=float, default=0.5)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--grids", default="128,256,512,1024,2048")
    args = ap.parse_args()

    geom = HorizonGeometry.from_shape(1.0, np.sqrt(args.beta_sq), args.xi)
    closed = (gamma0_closed(geom) if args.k == 0 else gammak_closed(geom, args.k)) / geom.homothety
    ref = galerkin(args.xi, args.beta_sq, args.k)[:20]
    print(f"{'grid':>6} {'lam_1 err':>10} {'lam_20 err':>10} {'est_20':>10} {'trace err':>10} {'bound':>10}")
    for grid in (int(g) for g in args.grids.split(",")):
        count = max(20, grid // 32)
        table, res = compute_spectrum(geom.profile, args.k, count=count, grid_size=grid)
        e1 = abs(table.values[0] / ref[0] - 1)
        e20 = abs(table.values[19] / ref[19] - 1)
        print(
            f"{grid:>6} {e1:10.2e} {e20:10.2e} {table.errors[19] / table.values[19]:10.2e} "
            f"{abs(res.trace_total / closed - 1):10.2e} {res.error_bound / closed:10.2e}"
        )


if __name__ == "__main__":
    main()
