"""Pure numpy versions of the compiled kernels (the reference semantics)."""

import numpy as np


def joint_probs(rho_re, theta_a, theta_b):
    """Coincidence probabilities P(theta_a[k], theta_b[k]) for linear analyzers.

    The analyzer vectors are real, so only the real part of the density
    matrix contributes.
    """
    theta_a = np.asarray(theta_a, dtype=float)
    theta_b = np.asarray(theta_b, dtype=float)
    if theta_a.shape != theta_b.shape:
        raise ValueError("angle arrays differ in length")
    ca, sa = np.cos(theta_a), np.sin(theta_a)
    cb, sb = np.cos(theta_b), np.sin(theta_b)
    v = np.stack([ca * cb, ca * sb, sa * cb, sa * sb], axis=-1)
    return np.einsum("ki,ij,kj->k", v, np.asarray(rho_re, dtype=float), v)


def chsh_grid_max(corr):
    """Exhaustive max of |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')| over a grid.

    Cells with a == a' or b == b' are excluded. Ties resolve to the
    lexicographically smallest (a, a', b, b') index.
    """
    corr = np.asarray(corr, dtype=float)
    na, nb = corr.shape
    first = np.abs(corr[:, :, None] - corr[:, None, :])  # (a, b, b')
    second = np.abs(corr[:, :, None] + corr[:, None, :])  # (a', b, b')
    total = first[:, None, :, :] + second[None, :, :, :]
    total[np.arange(na), np.arange(na), :, :] = -np.inf
    total[:, :, np.arange(nb), np.arange(nb)] = -np.inf
    flat = int(np.argmax(total))
    i, ip, j, jp = np.unravel_index(flat, (na, na, nb, nb))
    return int(i), int(ip), int(j), int(jp), float(total.flat[flat])
