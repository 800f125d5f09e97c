import numpy as np

from hardy_bellman import Exponents, validate_spoint
from hardy_bellman.RegionAtlas import s2_double_prime
from hardy_bellman.SpecialFunctions import h_function

P2Q15 = Exponents(p=2.0, q=1.5)

# H_{1.5}(1.2) as a double; the six-digit decimal 0.985901 is not matched to 1e-9
MATCHED_S2 = 0.9859006035092989


def matched_point(E, gamma):
    """(s1, s2) = (H_p(gamma), H_q(gamma)), where omega_p(s1) = omega_q(s2) = gamma."""
    return validate_spoint(E, h_function(E.p, gamma), h_function(E.q, gamma))


def random_points(E, count, seed=7):
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        s1 = rng.uniform(0.02, 0.98)
        lower = s1 ** E.slope
        s2 = rng.uniform(lower + 1e-6 * (1.0 - lower), 1.0 - 1e-6)
        points.append(validate_spoint(E, s1, s2))
    return points


def x_region_point(E):
    """A point strictly inside X, searched on fibers approaching s1 = 1."""
    for s1 in (0.9, 0.95, 0.98, 0.99, 0.995, 0.999, 0.9999):
        lower = s1 ** E.slope
        upper = s2_double_prime(E, s1)
        if upper > lower * (1.0 + 1e-6):
            return validate_spoint(E, s1, lower + 0.5 * (upper - lower))
    return None
