"""Orbit points of PSL(2,Z) in the ball of radius log 3 and A_{log 3}(2)."""
from __future__ import annotations

import math
from fractions import Fraction

from ecglab import mobius


def main() -> None:
    ball = mobius.enumerate_ball(math.log(3))
    for x, y in mobius.orbit_points(ball):
        print(f"  {x} + {y} i")
    xi = Fraction(2)
    derivs = [Fraction(1) / (g.c * xi + g.d) ** 2 for g in ball if g.c * xi + g.d != 0]
    print(f"{len(ball)} matrices; A_log3(2) = {max(derivs)} (Lebesgue reference)")
    print(f"harmonic-reference maximum at 2: {max(mobius.poisson_ratio(g, 2.0) for g in ball):.6f}")


if __name__ == "__main__":
    main()
