"""Cyclic Jacobi rotations for small dense symmetric matrices."""

import numpy as np

from .errors import NumericError, SymmetryError

OFF_DIAGONAL_TOL = 1e-13
SYMMETRY_TOL = 1e-10


def jacobi_eigh(a, tol=OFF_DIAGONAL_TOL, max_sweeps=64):
    """Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise SymmetryError("expected a square matrix")
    scale = max(1.0, np.max(np.abs(a))) if n else 1.0
    if n and np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise SymmetryError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    else:
        raise NumericError("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def cluster(values, tol):
    """Merge sorted values closer than ``tol * (1 + |value|)`` into (value, multiplicity)."""
    groups = []
    for x in sorted(values):
        if groups and abs(x - groups[-1][-1]) <= tol * (1.0 + abs(x)):
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(float(np.mean(g)), len(g)) for g in groups]
