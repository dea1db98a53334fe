"""Gap between the order-K eps-series and the Nystrom solution as eps shrinks.

Prints a CSV table: b, eps, gap_y, gap_e, for K = 14 and M = 60 nodes.
"""

import numpy as np

from qubit_rings.bethe import solve_density
from qubit_rings.model import curve_point_from_delta
from qubit_rings.perturbation import energy_series


def main(order: int = 14) -> None:
    print("b,eps,gap_y,gap_e")
    for b in (0.5, 1.0, 1.351802, 2.0):
        s = energy_series(b, order)
        for eps in 0.8 / 2 ** np.arange(6):
            sol = solve_density(curve_point_from_delta(-1 / eps), b, 60)
            print(f"{b},{eps:.6g},{abs(sol.y - s.y_at(eps)):.3e},{abs(sol.e_gs - s.e_at(eps)):.3e}")


if __name__ == "__main__":
    main()
