"""Sweep the external scattering matrix of a tadpole graph along the
positive energy axis and watch unitarity, phase winding, and pole skipping.

The graph is a loop of length 1.3 at vertex P connected by a stub of
length 0.7 to vertex Q, with a single lead attached at Q.  One lead means
the scattering matrix is a single reflection coefficient of unit modulus;
its phase carries all of the physics.
"""

import cmath
import math

from qgs import (CouplingMatrix, Edge, MetricGraph, Vertex, sigma_external,
                 sigma_sweep)


def main():
    g = MetricGraph([Vertex("P", 0.4), Vertex("Q", -0.8)],
                    [Edge("P", "P", 1.3), Edge("P", "Q", 0.7)],
                    leads=["Q"])
    k = CouplingMatrix.from_graph(g)

    print("reflection coefficient along s in [0.5, 30]:")
    print(f"  {'s':>6}  {'|r|':>18}  {'phase/pi':>9}  {'unitarity defect':>16}")
    for s in [0.5, 2.0, 5.0, 10.0, 18.0, 30.0]:
        sm = sigma_external(g, k, s)
        r = complex(sm.entries[0, 0])
        print(f"  {s:>6.1f}  {abs(r):>18.15f}  {cmath.phase(r) / math.pi:>9.4f}"
              f"  {sm.unitarity_defect:>16.2e}")

    # a dense sweep, salted with the exact energies where the loop's
    # Fourier kernel blows up: those points are dropped and reported
    # instead of returning garbage
    grid = sorted([0.05 * j for j in range(1, 1200)]
                  + [(n * math.pi / 1.3) ** 2 for n in (1, 2, 3)])
    results, skipped = sigma_sweep(g, k, grid)
    print(f"\ndense sweep: {len(results)} points kept,"
          f" {len(skipped)} skipped near poles")
    for s, reason in skipped:
        print(f"  skipped s = {s:.4f}  ({reason})")

    # total phase winding over the sweep, unwrapped step by step
    total = 0.0
    prev = cmath.phase(complex(results[0].entries[0, 0]))
    for sm in results[1:]:
        cur = cmath.phase(complex(sm.entries[0, 0]))
        step = cur - prev
        while step > math.pi:
            step -= 2 * math.pi
        while step < -math.pi:
            step += 2 * math.pi
        total += step
        prev = cur
    print(f"\nunwrapped phase change over the sweep: {total / math.pi:.3f} pi")
    print("(resonances wind the phase locally; much of it unwinds between them)")


if __name__ == "__main__":
    main()
