"""The conformal diffeomorphisms sigma: R^n -> S^n and tau: H^n -> S^n_+.

Both accept plain sequences of numbers or sequences of jets, so they can be
composed into chart maps.
"""

import numpy as np

from .errors import DomainError
from .jets import Jet

HYPERBOLOID_TOL = 1e-10


def sigma_map(u):
    """Inverse stereographic projection ``((1-|u|^2), 2u) / (1+|u|^2)``."""
    u = list(u)
    sq = sum(c * c for c in u)
    den = 1.0 / (1.0 + sq)
    out = [(1.0 - sq) * den] + [2.0 * c * den for c in u]
    return out if any(isinstance(c, Jet) for c in out) else np.array(out, dtype=float)


def tau_map(y, check=True):
    """``(1/y0, y1/y0)`` for ``y`` on the unit hyperboloid, ``y0 > 0``."""
    y = list(y)
    if check:
        vals = np.array([c.value if isinstance(c, Jet) else c for c in y], dtype=float)
        norm = -vals[0] ** 2 + np.dot(vals[1:], vals[1:])
        if vals[0] <= 0 or abs(norm + 1.0) > HYPERBOLOID_TOL:
            raise DomainError(f"point {vals.tolist()} is not on the hyperboloid H^n")
    inv0 = 1.0 / y[0]
    out = [inv0] + [c * inv0 for c in y[1:]]
    return out if any(isinstance(c, Jet) for c in out) else np.array(out, dtype=float)
