"""Reduction instances from maximum independent set to SLqP power control.

A :class:`ComponentGraph` on ``K`` vertices has its first ``K - Kq`` vertices
isolated and its last ``Kq`` vertices forming one connected component. The
matching network has unit direct gains, cross gains ``L * Kq**2`` between
adjacent vertices, noise ``L`` and ``pmax = 1``. Its optimal SLqP rate is
``|I| * ln(1 + 1/L)``, where ``|I|`` is the component's maximum independent set
size; every quantity here is small enough to check by enumeration.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import NetworkInstance, rates
from .percentile import slqp

__all__ = [
    "ComponentGraph",
    "build_instance",
    "brute_force_binary_optimum",
    "mis_size",
    "max_independent_set",
    "expected_optimum",
    "achieving_assignment",
    "canonical_graphs",
    "read_graph",
    "write_graph",
    "coordinate_convexity_margin",
]

MAX_BRUTE_K = 20


@dataclass(frozen=True)
class ComponentGraph:
    """Vertices are numbered ``1..K``; ``edges`` holds pairs ``(j, k)`` with ``j < k``."""

    K: int
    Kq: int
    edges: frozenset
    L: float

    def __post_init__(self):
        K, Kq = self.K, self.Kq
        if not (2 <= Kq <= K):
            raise ValueError("need 2 <= Kq <= K (the reduction does not cover Kq = 1)")
        if not self.L > Kq:
            raise ValueError(f"need L > Kq, got L={self.L}, Kq={Kq}")
        norm = set()
        for j, k in self.edges:
            j, k = sorted((int(j), int(k)))
            if j == k:
                raise ValueError(f"self-loop at vertex {j}")
            if j <= K - Kq or k > K:
                raise ValueError(f"edge ({j}, {k}) leaves the component {K - Kq + 1}..{K}")
            norm.add((j, k))
        object.__setattr__(self, "edges", frozenset(norm))
        if not self._connected():
            raise ValueError("the component on the last Kq vertices is not connected")

    @property
    def component(self) -> range:
        return range(self.K - self.Kq + 1, self.K + 1)

    def _adjacency(self) -> dict:
        adj = {v: set() for v in self.component}
        for j, k in self.edges:
            adj[j].add(k)
            adj[k].add(j)
        return adj

    def _connected(self) -> bool:
        adj = self._adjacency()
        start = self.K - self.Kq + 1
        seen, todo = {start}, deque([start])
        while todo:
            for w in adj[todo.popleft()] - seen:
                seen.add(w)
                todo.append(w)
        return len(seen) == self.Kq

    @classmethod
    def from_component(cls, K: int, Kq: int, local_edges, L: float) -> "ComponentGraph":
        """Build from edges given on component-local labels ``0..Kq-1``."""
        off = K - Kq + 1
        return cls(K, Kq, frozenset((a + off, b + off) for a, b in local_edges), L)

    @classmethod
    def path(cls, K, Kq, L):
        return cls.from_component(K, Kq, [(i, i + 1) for i in range(Kq - 1)], L)

    @classmethod
    def cycle(cls, K, Kq, L):
        if Kq < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        return cls.from_component(K, Kq, [(i, (i + 1) % Kq) for i in range(Kq)], L)

    @classmethod
    def clique(cls, K, Kq, L):
        return cls.from_component(K, Kq, [(i, j) for i in range(Kq) for j in range(i + 1, Kq)], L)

    @classmethod
    def star(cls, K, Kq, L):
        return cls.from_component(K, Kq, [(0, i) for i in range(1, Kq)], L)


def build_instance(graph: ComponentGraph) -> NetworkInstance:
    """Normalized network: unit direct gains, ``L Kq^2`` across edges, noise ``L``, ``pmax = 1``."""
    G = np.eye(graph.K)
    eta = graph.L * graph.Kq**2
    for j, k in graph.edges:
        G[j - 1, k - 1] = G[k - 1, j - 1] = eta
    return NetworkInstance(G, graph.L, 1.0)


def _binary_block(start: int, stop: int, K: int) -> np.ndarray:
    # Row i is the binary expansion of i with user 0 as the most significant bit.
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(K - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(float)


def brute_force_binary_optimum(instance: NetworkInstance, Kq: int, chunk: int = 1 << 14):
    """Best on/off power vector for the SLqP rate, by enumerating ``{0, pmax}^K``.

    Returns ``(p, value)``. Among maximizers (values within 1e-12 relative)
    the lexicographically smallest vector is returned.
    """
    K = instance.K
    if K > MAX_BRUTE_K:
        raise ValueError(f"K={K} too large for enumeration (limit {MAX_BRUTE_K})")
    if int(Kq) != Kq or not 1 <= Kq <= K:
        raise ValueError(f"Kq must be an integer in [1, {K}]")
    Kq = int(Kq)
    vals = np.empty(1 << K)
    for start in range(0, 1 << K, chunk):
        P = instance.pmax * _binary_block(start, min(start + chunk, 1 << K), K)
        A = P * instance.direct
        B = P @ instance.cross + instance.sigma2
        r = np.log1p(A / B)
        vals[start:start + len(P)] = np.partition(r, Kq - 1, axis=1)[:, :Kq].sum(axis=1)
    best = vals.max()
    i = int(np.nonzero(vals >= best - 1e-12 * max(abs(best), 1.0))[0][0])
    p = instance.pmax * _binary_block(i, i + 1, K)[0]
    return p, slqp(rates(instance, p), Kq)


def _component_masks(graph: ComponentGraph):
    base = graph.K - graph.Kq + 1
    adj = np.zeros(graph.Kq, dtype=np.int64)
    for j, k in graph.edges:
        adj[j - base] |= 1 << (k - base)
        adj[k - base] |= 1 << (j - base)
    return adj


def max_independent_set(graph: ComponentGraph) -> list:
    """A maximum independent set of the component (vertex labels ``1..K``), by enumeration.

    The subset with the smallest bitmask among the largest is returned.
    """
    if graph.Kq > MAX_BRUTE_K:
        raise ValueError(f"component of {graph.Kq} vertices too large for enumeration")
    adj = _component_masks(graph)
    subsets = np.arange(1 << graph.Kq, dtype=np.int64)
    ok = np.ones(subsets.size, dtype=bool)
    for v in range(graph.Kq):
        ok &= ~(((subsets >> v) & 1).astype(bool) & ((subsets & adj[v]) != 0))
    sizes = np.zeros(subsets.size, dtype=np.int64)
    for v in range(graph.Kq):
        sizes += (subsets >> v) & 1
    sizes[~ok] = -1
    best = int(subsets[np.argmax(sizes)])
    base = graph.K - graph.Kq + 1
    return [base + v for v in range(graph.Kq) if best >> v & 1]


def mis_size(graph: ComponentGraph) -> int:
    """Exact maximum independent set size of the component."""
    return len(max_independent_set(graph))


def expected_optimum(graph: ComponentGraph) -> float:
    """``mis_size(graph) * ln(1 + 1/L)``."""
    return mis_size(graph) * math.log1p(1.0 / graph.L)


def achieving_assignment(graph: ComponentGraph) -> np.ndarray:
    """Full power on every isolated vertex and on one maximum independent set."""
    p = np.zeros(graph.K)
    p[: graph.K - graph.Kq] = 1.0
    for v in max_independent_set(graph):
        p[v - 1] = 1.0
    return p


def canonical_graphs() -> list:
    """Small graphs with known independence numbers, used by tests and ``verify``."""
    C = ComponentGraph
    return [
        C.path(2, 2, 3.0),
        C.path(3, 2, 3.0),
        C.path(5, 3, 4.0),
        C.path(8, 4, 5.0),
        C.path(9, 6, 7.5),
        C.cycle(6, 3, 4.0),
        C.cycle(8, 4, 6.0),
        C.cycle(10, 5, 6.0),
        C.cycle(12, 6, 10.0),
        C.clique(7, 4, 5.0),
        C.clique(10, 5, 20.0),
        C.star(9, 5, 6.0),
        C.from_component(11, 6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)], 8.0),
    ]


def read_graph(source) -> ComponentGraph:
    """Parse the edge-list format: a header ``K Kq L`` then one ``j k`` pair per line (1-indexed)."""
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else source
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty graph file")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("header must be 'K Kq L'")
    K, Kq, L = int(head[0]), int(head[1]), float(head[2])
    edges = []
    for n, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {n}: expected 'j k'")
        edges.append((int(parts[0]), int(parts[1])))
    return ComponentGraph(K, Kq, frozenset(edges), L)


def write_graph(graph: ComponentGraph, path=None) -> str:
    lines = [f"{graph.K} {graph.Kq} {graph.L!r}"] + [f"{j} {k}" for j, k in sorted(graph.edges)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def coordinate_convexity_margin(graph: ComponentGraph, samples: int = 20, grid: int = 9, seed=0) -> float:
    """Smallest ``max(f(p_k=0), f(p_k=1)) - f(p_k=t)`` over interior ``t``.

    Other coordinates sit at random on/off points with the isolated vertices
    at full power. A nonnegative result means no sampled interior value beats
    both endpoints, as convexity in each single power variable implies.
    """
    inst = build_instance(graph)
    rng = np.random.default_rng(seed)
    n_iso = graph.K - graph.Kq
    ts = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    margin = np.inf
    for _ in range(samples):
        p = np.ones(graph.K)
        p[n_iso:] = rng.integers(0, 2, graph.Kq)
        for k in range(n_iso, graph.K):
            def f(t):
                q = p.copy()
                q[k] = t
                return slqp(rates(inst, q), graph.Kq)
            ends = max(f(0.0), f(1.0))
            margin = min(margin, min(ends - f(t) for t in ts))
    return float(margin)
