"""Shared test oracles: brute-force lattice searches and random unimodular
bases with controlled conditioning."""

from __future__ import annotations

import numpy as np


def brute_force_lambda1(cols, box: int = 25):
    """Independent SVP oracle: minimum sup-norm over all nonzero integer
    coefficient triples with |c_i| <= box, against the given basis columns."""
    b = np.asarray(cols, dtype=float)  # row i is basis vector i
    rng = np.arange(-box, box + 1)
    c1, c2, c3 = np.meshgrid(rng, rng, rng, indexing="ij")
    coeffs = np.stack([c1.ravel(), c2.ravel(), c3.ravel()], axis=1)
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    vecs = coeffs @ b
    sups = np.max(np.abs(vecs), axis=1)
    i = int(np.argmin(sups))
    return float(sups[i]), tuple(int(x) for x in coeffs[i])


def brute_force_count(cols, r: float, box: int = 30) -> int:
    """Independent point-count oracle over a coefficient box."""
    b = np.asarray(cols, dtype=float)  # row i is basis vector i
    rng = np.arange(-box, box + 1)
    c1, c2, c3 = np.meshgrid(rng, rng, rng, indexing="ij")
    coeffs = np.stack([c1.ravel(), c2.ravel(), c3.ravel()], axis=1)
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    vecs = coeffs @ b
    sups = np.max(np.abs(vecs), axis=1)
    return int(np.sum(sups <= r))


def random_unimodular_columns(rng: np.random.Generator, log_cond_cap: float):
    """A random real unimodular 3x3 basis (det = +1) whose condition number
    is at most e^{log_cond_cap}: rotate a unit-determinant diagonal."""
    def rotation():
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return q

    L = log_cond_cap / 3.0
    u1, u2 = rng.uniform(-L, L, size=2)
    d = np.diag(np.exp([u1, u2, -u1 - u2]))
    m = rotation() @ d @ rotation()
    return [list(m[:, j]) for j in range(3)]
