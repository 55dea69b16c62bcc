import sys
import numpy as np
import pytest
from skimage.measure import label as cc_label

from hsaliency.inference import SaliencyGraph


def random_label_map(rng, max_side=64, n_rects=None):
    """Random 4-connected partition built from overlapping rectangles."""
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    n_rects = n_rects or int(rng.integers(1, 25))
    canvas = np.zeros((h, w), dtype=np.int64)
    for k in range(1, n_rects + 1):
        y0, x0 = rng.integers(0, h), rng.integers(0, w)
        y1 = y0 + rng.integers(1, max(2, h // 2 + 1))
        x1 = x0 + rng.integers(1, max(2, w // 2 + 1))
        canvas[y0:y1, x0:x1] = k
    # split each value into 4-connected components
    return (cc_label(canvas + 1, connectivity=1, background=0) - 1).astype(np.int32)


def brute_scale(labels, rid):
    """Largest t such that some in-image t x t window is entirely ``rid``."""
    h, w = labels.shape
    best = 0
    for t in range(1, min(h, w) + 1):
        found = False
        for y in range(h - t + 1):
            for x in range(w - t + 1):
                if np.all(labels[y : y + t, x : x + t] == rid):
                    found = True
                    break
            if found:
                break
        if not found:
            break
        best = t
    return best


def brute_below(labels, t):
    n = int(labels.max()) + 1
    h, w = labels.shape
    has = np.zeros(n, dtype=bool)
    for y in range(h - t + 1):
        for x in range(w - t + 1):
            win = labels[y : y + t, x : x + t]
            if np.all(win == win[0, 0]):
                has[win[0, 0]] = True
    return set(np.flatnonzero(~has).tolist())


def random_graph(rng, n_layers=3, max_nodes=200, loopy=True, gamma=1.0, beta=(0.5, 4.0, 2.0), lam=(4.0, 4.0)):
    """Random hierarchy forest plus optional random intra-layer edges."""
    sizes = [int(rng.integers(1, 6))]
    for _ in range(n_layers - 1):
        sizes.insert(0, int(rng.integers(sizes[0], sizes[0] * 4 + 1)))
    while sum(sizes) > max_nodes:
        sizes[0] = max(sizes[1], sizes[0] // 2)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    layer = np.concatenate([np.full(s, k) for k, s in enumerate(sizes)])
    hier, hw = [], []
    for k in range(n_layers - 1):
        nk, nup = sizes[k], sizes[k + 1]
        parent = np.concatenate([np.arange(nup), rng.integers(0, nup, nk - nup)])
        rng.shuffle(parent)
        for i, p in enumerate(parent):
            hier.append((offsets[k] + i, offsets[k + 1] + p))
            hw.append(lam[k])
    cons, cw = [], []
    if loopy:
        for k in range(n_layers):
            nk = sizes[k]
            if nk < 2:
                continue
            pairs = {(i, i + 1) for i in range(nk - 1)}
            for _ in range(int(rng.integers(0, 2 * nk))):
                a, b = sorted(rng.choice(nk, 2, replace=False))
                pairs.add((int(a), int(b)))
            for a, b in sorted(pairs):
                cons.append((offsets[k] + a, offsets[k] + b))
                cw.append(gamma * float(rng.uniform(0.05, 1.0)))
    return SaliencyGraph(
        prior=rng.uniform(0, 1, n),
        beta=np.array([beta[k] for k in layer]),
        layer=layer,
        hier_edges=np.array(hier).reshape(-1, 2),
        hier_weights=np.array(hw),
        cons_edges=np.array(cons, dtype=np.int64).reshape(-1, 2),
        cons_weights=np.array(cw),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
