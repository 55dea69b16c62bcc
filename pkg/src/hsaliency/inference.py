"""Hierarchical saliency fusion.

Every region of every layer is a node carrying its initial saliency.  The
energy to minimize is

    sum_i beta_i (s_i - prior_i)^2
    + sum_{child, parent} lambda (s_child - s_parent)^2
    + sum_{adjacent i < j} gamma * w_ij (s_i - s_j)^2

with ``w_ij = exp(-|c_i - c_j|^2 / sigma_c)``.  Each adjacent pair is
counted once.  The energy is a convex quadratic, so besides min-sum loopy
belief propagation over quantized saliency levels an exact sparse solve is
available as a reference, and the tree-only variant (no intra-layer edges)
is solved exactly by two sweeps over the hierarchy.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from ._kernels import bp_messages
from .cues import LayerCues
from .scale_merge import LayerHierarchy
from .segmentation import adjacency_pairs

__all__ = [
    "DegenerateInputError",
    "InferenceParams",
    "SaliencyGraph",
    "Assignment",
    "ConvergenceReport",
    "auto_sigma_c",
    "build_graph",
    "energy",
    "solve_exact",
    "loopy_bp",
    "hs_inference",
    "render_saliency",
]


class DegenerateInputError(ValueError):
    """The energy has no unique minimizer (a component without data weight)."""


@dataclass
class InferenceParams:
    beta: list[float] = field(default_factory=lambda: [0.5, 4.0, 2.0])
    lambda_h: list[float] = field(default_factory=lambda: [4.0, 4.0])
    gamma: list[float] = field(default_factory=lambda: [1.0, 1.0, 1.0])
    sigma_c: float | None = None  # None: tuned per image, see auto_sigma_c
    labels: int = 64
    max_iters: int = 100
    damping: float = 0.5
    tol: float = 1e-4

    def __post_init__(self):
        if len(self.lambda_h) != len(self.beta) - 1 or len(self.gamma) != len(self.beta):
            raise ValueError("need one beta and gamma per layer and one lambda per layer gap")
        if min([*self.beta, *self.lambda_h, *self.gamma]) < 0:
            raise ValueError("weights must be non-negative")
        if self.labels < 2:
            raise ValueError("at least two quantization levels are required")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.sigma_c is not None and self.sigma_c <= 0:
            raise ValueError("sigma_c must be positive")

    @classmethod
    def for_layers(cls, n_layers: int, **kwargs) -> "InferenceParams":
        if n_layers == 3:
            return cls(**kwargs)
        beta = [0.5] + [4.0] * (n_layers - 2) + [2.0]
        kwargs.setdefault("beta", beta)
        kwargs.setdefault("lambda_h", [4.0] * (n_layers - 1))
        kwargs.setdefault("gamma", [1.0] * n_layers)
        return cls(**kwargs)

    @property
    def n_layers(self) -> int:
        return len(self.beta)


@dataclass
class SaliencyGraph:
    """Nodes, hierarchy edges and intra-layer edges of the fusion energy.

    Attributes
    ----------
    prior : (N,) initial saliency per node
    beta : (N,) data weight per node
    layer : (N,) layer index per node; layer 0 is the finest
    hier_edges : (Eh, 2) ``(child, parent)`` node pairs
    hier_weights : (Eh,) lambda per hierarchy edge
    cons_edges : (Ec, 2) ``(i, j)`` same-layer adjacent pairs, ``i < j``
    cons_weights : (Ec,) ``gamma * w_ij`` per pair
    """

    prior: np.ndarray
    beta: np.ndarray
    layer: np.ndarray
    hier_edges: np.ndarray
    hier_weights: np.ndarray
    cons_edges: np.ndarray
    cons_weights: np.ndarray
    affinity: np.ndarray | None = None
    sigma_c: float | None = None

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=np.float64)
        self.beta = np.asarray(self.beta, dtype=np.float64)
        self.layer = np.asarray(self.layer, dtype=np.int64)
        self.hier_edges = np.asarray(self.hier_edges, dtype=np.int64).reshape(-1, 2)
        self.hier_weights = np.asarray(self.hier_weights, dtype=np.float64)
        self.cons_edges = np.asarray(self.cons_edges, dtype=np.int64).reshape(-1, 2)
        self.cons_weights = np.asarray(self.cons_weights, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return self.prior.size

    def layer_nodes(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.layer == k)

    def without_consistency(self) -> "SaliencyGraph":
        return SaliencyGraph(
            self.prior, self.beta, self.layer, self.hier_edges, self.hier_weights,
            np.zeros((0, 2), dtype=np.int64), np.zeros(0), None, self.sigma_c,
        )

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """All undirected edges and their weights."""
        return (
            np.concatenate([self.hier_edges, self.cons_edges]),
            np.concatenate([self.hier_weights, self.cons_weights]),
        )


@dataclass
class ConvergenceReport:
    iterations: int
    converged: bool
    max_delta: float
    energy: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass
class Assignment:
    """Saliency per node, clamped to ``[0, 1]``; ``raw`` keeps the unclamped solve."""

    values: np.ndarray
    raw: np.ndarray | None = None
    report: ConvergenceReport | None = None


def auto_sigma_c(labels: np.ndarray, colors: np.ndarray) -> float:
    """Twice the mean squared color distance over adjacent region pairs."""
    pairs = adjacency_pairs(labels)
    if len(pairs) == 0:
        return 1.0
    d2 = ((colors[pairs[:, 0]] - colors[pairs[:, 1]]) ** 2).sum(axis=1)
    m = float(d2.mean())
    return 2.0 * m if m > 0 else 1.0


def build_graph(
    hierarchy: LayerHierarchy, cues: list[LayerCues], params: InferenceParams | None = None
) -> SaliencyGraph:
    """Assemble the fusion graph from a layer hierarchy and its cues."""
    n_layers = hierarchy.n_layers
    params = params or InferenceParams.for_layers(n_layers)
    if params.n_layers != n_layers or len(cues) != n_layers:
        raise ValueError("parameters, cues and hierarchy disagree on the layer count")

    sizes = [len(r) for r in hierarchy.regions]
    if [len(c) for c in cues] != sizes:
        raise ValueError("one cue value per region is required")
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    colors = [np.array([r.mean_color for r in regs]).reshape(-1, 3) for regs in hierarchy.regions]
    sigma_c = params.sigma_c
    if sigma_c is None:
        sigma_c = auto_sigma_c(hierarchy.labels[0], colors[0])

    prior = np.concatenate([c.combined for c in cues])
    beta = np.concatenate([np.full(n, params.beta[k]) for k, n in enumerate(sizes)])
    layer = np.concatenate([np.full(n, k) for k, n in enumerate(sizes)])

    hier, hier_w = [], []
    for k, parent in enumerate(hierarchy.parent_of):
        child = np.arange(sizes[k]) + offsets[k]
        hier.append(np.stack([child, parent + offsets[k + 1]], axis=1))
        hier_w.append(np.full(sizes[k], params.lambda_h[k]))

    cons, cons_w, aff = [], [], []
    for k in range(n_layers):
        pairs = adjacency_pairs(hierarchy.labels[k])
        c = colors[k]
        d2 = ((c[pairs[:, 0]] - c[pairs[:, 1]]) ** 2).sum(axis=1)
        w = np.exp(-d2 / sigma_c)
        cons.append(pairs + offsets[k])
        aff.append(w)
        cons_w.append(params.gamma[k] * w)

    def cat(parts, width=None):
        if parts:
            return np.concatenate(parts)
        return np.zeros((0, width) if width else 0)

    return SaliencyGraph(
        prior=prior,
        beta=beta,
        layer=layer,
        hier_edges=cat(hier, 2),
        hier_weights=cat(hier_w),
        cons_edges=cat(cons, 2),
        cons_weights=cat(cons_w),
        affinity=cat(aff),
        sigma_c=float(sigma_c),
    )


def energy(g: SaliencyGraph, s: np.ndarray) -> float:
    """Evaluate the fusion energy at assignment ``s``."""
    s = np.asarray(s, dtype=np.float64)
    e = float(np.sum(g.beta * (s - g.prior) ** 2))
    if len(g.hier_edges):
        d = s[g.hier_edges[:, 0]] - s[g.hier_edges[:, 1]]
        e += float(np.sum(g.hier_weights * d * d))
    if len(g.cons_edges):
        d = s[g.cons_edges[:, 0]] - s[g.cons_edges[:, 1]]
        e += float(np.sum(g.cons_weights * d * d))
    return e


def _system(g: SaliencyGraph) -> tuple[sp.csr_matrix, np.ndarray]:
    n = g.n_nodes
    edges, w = g.edges()
    i, j = edges[:, 0], edges[:, 1]
    off = sp.coo_matrix((-w, (i, j)), shape=(n, n))
    deg = np.bincount(i, weights=w, minlength=n) + np.bincount(j, weights=w, minlength=n)
    a = (off + off.T + sp.diags(deg + g.beta)).tocsr()
    return a, g.beta * g.prior


def _check_components(g: SaliencyGraph) -> None:
    n = g.n_nodes
    edges, w = g.edges()
    keep = w > 0
    adj = sp.coo_matrix((np.ones(keep.sum()), (edges[keep, 0], edges[keep, 1])), shape=(n, n))
    n_comp, comp = connected_components(adj, directed=False)
    mass = np.bincount(comp, weights=g.beta, minlength=n_comp)
    if np.any(mass <= 0):
        bad = int(np.sum(mass <= 0))
        raise DegenerateInputError(f"{bad} connected component(s) carry no data weight")


def solve_exact(g: SaliencyGraph) -> Assignment:
    """Global minimizer via the sparse linear system ``grad E = 0``."""
    _check_components(g)
    a, b = _system(g)
    raw = np.atleast_1d(spsolve(a.tocsc(), b))
    return Assignment(values=np.clip(raw, 0.0, 1.0), raw=raw)


def residual(g: SaliencyGraph, s: np.ndarray) -> float:
    """Max-norm residual of the optimality system at ``s``."""
    a, b = _system(g)
    return float(np.max(np.abs(a @ s - b))) if g.n_nodes else 0.0


def hs_inference(g: SaliencyGraph) -> Assignment:
    """Exact minimizer of the hierarchy-only energy by two sweeps.

    Intra-layer edges are ignored.  The upward sweep folds each child's
    quadratic into its parent; the downward sweep recovers every child
    from its parent's value.
    """
    n = g.n_nodes
    child, parent = g.hier_edges[:, 0], g.hier_edges[:, 1]
    lam = g.hier_weights
    if np.bincount(child, minlength=n).max(initial=0) > 1:
        raise ValueError("a node has more than one parent; not a forest")
    if np.any(g.layer[parent] != g.layer[child] + 1):
        raise ValueError("hierarchy edges must join consecutive layers")

    curv = g.beta.copy()  # energy of node i as a function of s_i: curv*(s - lin/curv)^2
    lin = g.beta * g.prior
    layers = np.unique(g.layer)
    by_layer = {k: np.flatnonzero(g.layer[child] == k) for k in layers}

    for k in layers:
        e = by_layer[k]
        c, p, l = child[e], parent[e], lam[e]
        denom = curv[c] + l
        kappa = np.divide(curv[c] * l, denom, out=np.zeros_like(l), where=denom > 0)
        mean = np.divide(lin[c], curv[c], out=np.zeros_like(l), where=curv[c] > 0)
        np.add.at(curv, p, kappa)
        np.add.at(lin, p, kappa * mean)

    has_parent = np.zeros(n, dtype=bool)
    has_parent[child] = True
    roots = ~has_parent
    if np.any(curv[roots] <= 0):
        raise DegenerateInputError("a tree carries no data weight")
    s = np.zeros(n)
    s[roots] = lin[roots] / curv[roots]
    for k in layers[::-1]:
        e = by_layer[k]
        c, p, l = child[e], parent[e], lam[e]
        denom = curv[c] + l
        if np.any(denom <= 0):
            raise DegenerateInputError("a node is detached and has no data weight")
        s[c] = (lin[c] + l * s[p]) / denom
    return Assignment(values=np.clip(s, 0.0, 1.0), raw=s)


def _refine_argmin(belief: np.ndarray, half_window: int = 3) -> np.ndarray:
    """Continuous minimizer of each belief row, in label units.

    A parabola is least-squares fitted to the belief on the levels within
    ``half_window`` of the discrete argmin; its vertex, kept within one
    level of the argmin and inside the label range, is returned.
    Quantizing the neighbors leaves a ripple on the belief that a wider
    fit averages out.
    """
    n, n_labels = belief.shape
    k = np.argmin(belief, axis=1)
    if n_labels < 3:
        return k.astype(np.float64)
    hw = min(half_window, (n_labels - 1) // 2)
    c = np.clip(k, hw, n_labels - 1 - hw)
    offs = np.arange(-hw, hw + 1, dtype=np.float64)
    window = belief[np.arange(n)[:, None], c[:, None] + offs.astype(np.int64)[None, :]]
    design = np.stack([offs * offs, offs, np.ones_like(offs)], axis=1)
    coef = np.linalg.pinv(design) @ window.T  # (3, n)
    a2, a1 = coef[0], coef[1]
    vertex = np.divide(-a1, 2.0 * a2, out=(k - c).astype(np.float64), where=a2 > 1e-15)
    x = c + vertex
    return np.clip(x, np.maximum(k - 1.0, 0.0), np.minimum(k + 1.0, n_labels - 1.0))


def loopy_bp(g: SaliencyGraph, params: InferenceParams | None = None, refine: bool = True) -> Assignment:
    """Min-sum loopy belief propagation over uniformly quantized saliency.

    Messages are updated synchronously with damping and renormalized to a
    zero minimum.  Iteration stops when the largest message change drops
    below ``params.tol`` or after ``params.max_iters`` sweeps; the report
    says which.

    Each node then takes the minimizer of its belief.  With ``refine`` the
    belief is interpolated by a parabola around its best level, which
    recovers the continuous minimizer to well within one level; otherwise
    the best level itself is returned.
    """
    params = params or InferenceParams()
    n_labels = params.labels
    values = np.linspace(0.0, 1.0, n_labels)
    unary = g.beta[:, None] * (values[None, :] - g.prior[:, None]) ** 2

    edges, w = g.edges()
    keep = w > 0
    edges, w = edges[keep], w[keep]
    n_und = len(edges)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    rev = np.concatenate([np.arange(n_und) + n_und, np.arange(n_und)])
    step_w = np.concatenate([w, w]) / float((n_labels - 1) ** 2)
    n_dir = src.size

    inbox = sp.csr_matrix(
        (np.ones(n_dir), (dst, np.arange(n_dir))), shape=(g.n_nodes, n_dir)
    )
    msgs = np.zeros((n_dir, n_labels))
    new = np.empty_like(msgs)
    delta = 0.0
    converged = n_dir == 0
    it = 0
    while not converged and it < params.max_iters:
        it += 1
        belief = unary + inbox @ msgs
        h = np.ascontiguousarray(belief[src] - msgs[rev])
        bp_messages(h, step_w, new)
        damped = params.damping * msgs + (1.0 - params.damping) * new
        delta = float(np.max(np.abs(damped - msgs)))
        msgs = damped
        converged = delta < params.tol

    belief = unary + inbox @ msgs
    if refine:
        s = _refine_argmin(belief) / (n_labels - 1)
    else:
        s = values[np.argmin(belief, axis=1)]
    report = ConvergenceReport(it, bool(converged), delta, energy(g, s))
    return Assignment(values=s, raw=s.copy(), report=report)


def render_saliency(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Paint finest-layer node values onto pixels and min-max rescale.

    A constant map becomes uniformly 0.5.
    """
    values = np.asarray(values, dtype=np.float64)
    pix = values[np.asarray(labels)]
    lo, hi = pix.min(), pix.max()
    if hi - lo <= 0:
        return np.full(pix.shape, 0.5)
    return (pix - lo) / (hi - lo)
