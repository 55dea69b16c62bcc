"""Compiled inner loops."""
import numpy as np
from numba import njit


@njit(cache=True)
def max_square_sizes(labels, n_labels):
    """Largest axis-aligned square (side length) inside each labeled region.

    ``side[y, x]`` is the side of the largest same-label square whose
    bottom-right corner is ``(y, x)``; the per-label maximum is returned.
    """
    h, w = labels.shape
    side = np.zeros((h, w), dtype=np.int32)
    best = np.zeros(n_labels, dtype=np.int32)
    for y in range(h):
        for x in range(w):
            lab = labels[y, x]
            s = 1
            if y > 0 and x > 0:
                if labels[y - 1, x] == lab and labels[y, x - 1] == lab and labels[y - 1, x - 1] == lab:
                    a = side[y - 1, x]
                    b = side[y, x - 1]
                    c = side[y - 1, x - 1]
                    m = a
                    if b < m:
                        m = b
                    if c < m:
                        m = c
                    s = m + 1
            side[y, x] = s
            if s > best[lab]:
                best[lab] = s
    return best


@njit(cache=True)
def quadratic_min_convolution(f, weight, out, v, z):
    """Lower envelope ``out[q] = min_p f[p] + weight * (p - q)**2``.

    Felzenszwalb-Huttenlocher distance transform, O(len(f)).  ``weight``
    must be positive; ``v`` (int) and ``z`` (float) are scratch buffers of
    length ``len(f)`` and ``len(f) + 1``.
    """
    n = f.shape[0]
    k = 0
    v[0] = 0
    z[0] = -np.inf
    z[1] = np.inf
    for q in range(1, n):
        p = v[k]
        s = ((f[q] + weight * q * q) - (f[p] + weight * p * p)) / (2.0 * weight * (q - p))
        while s <= z[k]:
            k -= 1
            p = v[k]
            s = ((f[q] + weight * q * q) - (f[p] + weight * p * p)) / (2.0 * weight * (q - p))
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        out[q] = weight * (q - p) * (q - p) + f[p]


@njit(cache=True)
def bp_messages(h_in, weights, new):
    """Min-sum messages for quadratic pairwise terms over integer labels.

    ``h_in[e]`` is the sender-side cost for directed edge ``e`` and
    ``weights[e]`` the pairwise coefficient per squared label step.
    Results are shifted to have minimum zero.
    """
    n_edges, n_labels = h_in.shape
    v = np.empty(n_labels, dtype=np.int64)
    z = np.empty(n_labels + 1, dtype=np.float64)
    row = np.empty(n_labels, dtype=np.float64)
    for e in range(n_edges):
        w = weights[e]
        if w <= 0.0:
            m = h_in[e, 0]
            for q in range(n_labels):
                if h_in[e, q] < m:
                    m = h_in[e, q]
            for q in range(n_labels):
                new[e, q] = 0.0
            continue
        quadratic_min_convolution(h_in[e], w, row, v, z)
        m = row[0]
        for q in range(1, n_labels):
            if row[q] < m:
                m = row[q]
        for q in range(n_labels):
            new[e, q] = row[q] - m
