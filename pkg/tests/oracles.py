"""Independent reference computations used by the tests."""

import itertools

import numpy as np


def simplex_projection_by_supports(values):
    """Exact Euclidean projection onto the probability simplex by support enumeration.

    For each candidate support S the unconstrained optimum on the face is
    ``v_S - (sum(v_S) - 1)/|S|``; the answer is the feasible candidate closest
    to ``v``.
    """
    v = np.asarray(values, float)
    best, best_d = None, np.inf
    for size in range(1, v.size + 1):
        for support in itertools.combinations(range(v.size), size):
            s = list(support)
            mu = np.zeros_like(v)
            mu[s] = v[s] - (v[s].sum() - 1.0) / size
            if mu.min() < -1e-15:
                continue
            d = np.sum((mu - v) ** 2)
            if d < best_d:
                best, best_d = np.clip(mu, 0.0, None), d
    return best


def simplex_projection_by_grid(values, step=0.005):
    """Brute-force grid search for the closest point on the 3-element simplex."""
    v = np.asarray(values, float)
    assert v.size == 3
    n = int(round(1 / step))
    best, best_d = None, np.inf
    for i in range(n + 1):
        for j in range(n + 1 - i):
            mu = np.array([i, j, n - i - j]) * step
            d = np.sum((mu - v) ** 2)
            if d < best_d:
                best, best_d = mu, d
    return best


def pauli_coefficients_direct(op, n):
    """Tr(op G_i) by explicit Kronecker products of normalized Paulis."""
    paulis = [
        np.eye(2),
        np.array([[0, 1], [1, 0]]),
        np.array([[0, -1j], [1j, 0]]),
        np.diag([1, -1]),
    ]
    out = []
    for idx in itertools.product(range(4), repeat=n):
        g = np.ones((1, 1))
        for a in idx:
            g = np.kron(g, paulis[a] / np.sqrt(2))
        out.append(np.trace(op @ g))
    return np.array(out)
