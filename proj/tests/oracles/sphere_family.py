"""Independent scalar oracles for the round-sphere family and the embeddedness threshold.

Sphere of radius r with outward normal: H = 1/r, area 4 pi r^2, raw flux 4 pi r^3.
E(r) = 4 pi (1 - c0 r)^2 + 4 pi alpha r^2 + rho * 4 pi r^3  (flux convention)
"""
import math
from scipy.optimize import brentq


def energy(r, c0, alpha, rho):
    return 4 * math.pi * (1 - c0 * r) ** 2 + 4 * math.pi * alpha * r ** 2 + rho * 4 * math.pi * r ** 3


def denergy(r, c0, alpha, rho):
    return -8 * math.pi * c0 * (1 - c0 * r) + 8 * math.pi * alpha * r + 12 * math.pi * rho * r ** 2


def critical_radius(c0, alpha, rho):
    return brentq(lambda r: denergy(r, c0, alpha, rho), 1e-6, 100.0, xtol=1e-15)


if __name__ == "__main__":
    for p in [(1.0, 1.0, 0.0), (0.5, 1.0, 0.5)]:
        r = critical_radius(*p)
        print(f"critical radius {p}: {r:.17g}  E={energy(r, *p):.17g}")
    # unconstrained c0=0, alpha=1: E = 4pi + 4pi r^2, infimum 4pi at r -> 0
    print("c0=0,alpha=1 inf:", 4 * math.pi)
    # c0=1, alpha=1: minimum at r=1/2
    print("c0=1,alpha=1 min:", energy(0.5, 1, 1, 0))
    # embeddedness threshold at A0=4pi, inf W = 4pi
    A0 = 4 * math.pi
    eps = (math.sqrt(8 * math.pi) - math.sqrt(4 * math.pi)) / (2 * math.sqrt(A0))
    print(f"eps(4pi, 4pi/3) = {eps:.17g}  (sqrt2-1)/2 = {(math.sqrt(2)-1)/2:.17g}")
