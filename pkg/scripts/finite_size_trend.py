"""C^max(N, p) at p/N = 0.4 for growing rings against the infinite ring at y = 0.2.

The infinite-ring value optimises the Bethe-ansatz energy over delta at fixed y.

Prints a CSV table: n, p, c_max, ow_concurrence, infinite_ring.
"""

from qubit_rings.bethe import optimize_at_fixed_y
from qubit_rings.exact_ring import RingSpec, cmax_fixed_p
from qubit_rings.model import ow_concurrence


def main() -> None:
    target = -optimize_at_fixed_y(0.2)[1]
    print("n,p,c_max,ow_concurrence,infinite_ring")
    for n in (5, 10):
        p = round(0.4 * n)
        c, _ = cmax_fixed_p(RingSpec(n, p))
        print(f"{n},{p},{c:.12g},{ow_concurrence(n, p):.12g},{target:.12g}")


if __name__ == "__main__":
    main()
