"""Independent brute-force references for freezing expected values.

Deliberately loop-based plain-Python implementations sharing no code with
the package internals: entropies and mutual informations by direct
summation, conditional mutual information by the triple sum, and gradients
by central finite differences.
"""

import math

import numpy as np


def entropy_oracle(p) -> float:
    return -sum(pi * math.log(pi) for pi in np.asarray(p).ravel() if pi > 0.0)


def mi_oracle(joint) -> float:
    """I(A;B) by the direct double sum over a 2-d joint."""
    j = np.asarray(joint, dtype=float)
    pa = [sum(j[a, b] for b in range(j.shape[1])) for a in range(j.shape[0])]
    pb = [sum(j[a, b] for a in range(j.shape[0])) for b in range(j.shape[1])]
    total = 0.0
    for a in range(j.shape[0]):
        for b in range(j.shape[1]):
            if j[a, b] > 0.0:
                total += j[a, b] * math.log(j[a, b] / (pa[a] * pb[b]))
    return total


def kl_oracle(p, q) -> float:
    total = 0.0
    for pi, qi in zip(np.asarray(p).ravel(), np.asarray(q).ravel()):
        if pi > 0.0:
            total += pi * math.log(pi / qi)
    return total


def grouped_mi_oracle(tensor_xsy) -> float:
    """I(X; S,Y) by the double sum over x and flattened (s, y) pairs."""
    t = np.asarray(tensor_xsy, dtype=float)
    return mi_oracle(t.reshape(t.shape[0], -1))


def conditional_mi_oracle(tensor_xsy) -> float:
    """I(X;S|Y) = sum_y p(y) I(X;S | Y=y) by direct summation."""
    t = np.asarray(tensor_xsy, dtype=float)
    total = 0.0
    for y in range(t.shape[2]):
        slab = t[:, :, y]
        py = slab.sum()
        if py > 0.0:
            total += py * mi_oracle(slab / py)
    return total


def fd_grad(f, x0, step=1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function of a matrix."""
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    for idx in np.ndindex(*x0.shape):
        xp = x0.copy()
        xm = x0.copy()
        xp[idx] += step
        xm[idx] -= step
        grad[idx] = (f(xp) - f(xm)) / (2.0 * step)
    return grad


def rel_err(analytic, reference) -> float:
    """Max absolute deviation scaled by the reference's own magnitude."""
    analytic = np.asarray(analytic, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = max(float(np.abs(reference).max()), 1e-6)
    return float(np.abs(analytic - reference).max()) / scale
