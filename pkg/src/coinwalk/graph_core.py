"""Immutable undirected graphs and their stationary-walk analytics.

Graphs are stored in compressed sparse row form: ``offsets`` (length n+1)
indexes into a flat ``neighbors`` array, and each vertex's neighbor list is
strictly increasing.  Self-loop convention: a loop at v appears exactly once
in v's neighbor list and adds exactly 1 to v's degree.  Everything downstream
(stationary distribution, degree statistics, walkers) uses that once-counted
degree consistently.

A random walker on these graphs waits an Exp(1) holding time at each vertex
and then jumps to a uniformly chosen neighbor; a self-loop is a real jump
that lands back on the same vertex.  The stationary distribution of that
walk is degree-proportional, pi_v = degree(v) / D with D the total degree,
and the chance that two independent stationary walkers sit on the same
vertex is sum(pi_v^2) = (D2 + D) / D^2 where D2 = sum_v degree(v)(degree(v)-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: Largest supported vertex count; keeps every integer total (D, sum of
#: squared degrees) representable without surprise even on the fallback
#: paths, and bounds memory to something a workstation can hold.
MAX_VERTICES = 10**7


@dataclass(frozen=True)
class Graph:
    """Undirected graph in CSR form.  Instances are immutable.

    Attributes
    ----------
    n : int
        Number of vertices (ids are 0..n-1).
    offsets : np.ndarray
        int64 array of length n+1; vertex v's neighbors live at
        ``neighbors[offsets[v]:offsets[v+1]]``.
    neighbors : np.ndarray
        int32 array of neighbor ids, strictly increasing within each row.
        A self-loop at v appears once, as v itself.
    """

    n: int
    offsets: np.ndarray
    neighbors: np.ndarray

    @cached_property
    def degrees(self) -> np.ndarray:
        """Per-vertex degree (int64); self-loops count once."""
        d = np.diff(self.offsets)
        d.setflags(write=False)
        return d

    @cached_property
    def degree_cumsum(self) -> np.ndarray:
        """Cumulative degrees, used for stationary vertex sampling."""
        c = np.cumsum(self.degrees)
        c.setflags(write=False)
        return c

    @property
    def total_degree(self) -> int:
        """D = sum of degrees = 2 * (off-diagonal edges) + (self-loops)."""
        return int(self.offsets[-1])

    @cached_property
    def self_loop_count(self) -> int:
        starts = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.offsets))
        return int(np.count_nonzero(starts == self.neighbors))

    @property
    def edge_count(self) -> int:
        """Number of undirected edges, counting each self-loop once."""
        loops = self.self_loop_count
        return (len(self.neighbors) - loops) // 2 + loops

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
        )

    def __hash__(self) -> int:  # consistent with equality on small graphs
        return hash((self.n, self.neighbors.tobytes(), self.offsets.tobytes()))


@dataclass(frozen=True)
class StationaryDistribution:
    """Degree-proportional stationary law of the neighbor-jump walk."""

    probs: np.ndarray

    @property
    def sum_sq(self) -> float:
        """Probability two independent stationary positions coincide."""
        return float(np.dot(self.probs, self.probs))


@dataclass(frozen=True)
class DegreeStatistics:
    """Exact integer degree aggregates of one graph.

    ``D`` is the total degree, ``D2`` the number of ordered paths of length
    two through a common center, sum_v degree(v)(degree(v)-1), and
    ``sum_deg_sq`` the sum of squared degrees; the three are tied by
    ``sum_deg_sq = D2 + D``.  All three are defined (as zero) on an
    edgeless graph; ``coincidence_rate`` -- sum(pi_v^2) = sum_deg_sq / D^2
    -- needs at least one edge.
    """

    D: int
    D2: int
    sum_deg_sq: int

    @property
    def coincidence_rate(self) -> float:
        if self.D == 0:
            raise ValueError("coincidence rate undefined: graph has no edges")
        return self.sum_deg_sq / (self.D * self.D)


@dataclass(frozen=True)
class Theorem1Bounds:
    """Stationary-start coincidence and infection predictions.

    ``expected_tau`` is the exact expectation of the coincidence time up to
    ``t``; ``gamma_upper`` the concavity (Jensen) upper bound on the mean
    infection probability 1 - exp(-beta * tau).
    """

    expected_tau: float
    gamma_upper: float


def _check_vertex_count(n: int) -> None:
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    if n > MAX_VERTICES:
        raise ValueError(f"vertex count {n} exceeds supported maximum {MAX_VERTICES}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr_from_half_edges(n: int, u: np.ndarray, v: np.ndarray) -> Graph:
    """Build a Graph from deduplicated canonical edges (u <= v).

    Trusted internal constructor: callers guarantee bounds, canonical order
    and uniqueness.  Self-loops (u == v) produce a single adjacency entry.
    """
    off_diag = u != v
    src = np.concatenate([u, v[off_diag]])
    dst = np.concatenate([v, u[off_diag]])
    order = np.lexsort((dst, src))
    neighbors = dst[order].astype(np.int32, copy=False)
    counts = np.bincount(src, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return Graph(n=n, offsets=_freeze(offsets), neighbors=_freeze(neighbors))


def build_graph(n: int, edges, allow_self_loops: bool = False) -> Graph:
    """Build an undirected graph from an iterable or array of vertex pairs.

    Duplicate pairs (in either orientation) collapse to a single edge.
    Raises ValueError for endpoints outside 0..n-1 and, unless
    ``allow_self_loops`` is set, for any pair (v, v).
    """
    _check_vertex_count(n)
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                   dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise ValueError("edges must be pairs of vertex ids")
    if e.size and (e.min() < 0 or e.max() >= n):
        bad = e[(e < 0).any(axis=1) | (e >= n).any(axis=1)][0]
        raise ValueError(f"edge endpoint out of range: {tuple(bad)} with n={n}")
    u = np.minimum(e[:, 0], e[:, 1])
    v = np.maximum(e[:, 0], e[:, 1])
    if not allow_self_loops and np.any(u == v):
        loop_at = int(u[u == v][0])
        raise ValueError(f"self-loop at vertex {loop_at} but allow_self_loops is false")
    if u.size:
        key = u * np.int64(n) + v
        _, first = np.unique(key, return_index=True)
        u, v = u[first], v[first]
    return _csr_from_half_edges(n, u, v)


def validate_graph(g: Graph) -> None:
    """Check structural invariants; raises AssertionError on violation.

    Meant for tests and debugging, not hot paths.
    """
    assert g.offsets.shape == (g.n + 1,)
    assert g.offsets[0] == 0 and g.offsets[-1] == len(g.neighbors)
    assert np.all(np.diff(g.offsets) >= 0)
    if g.neighbors.size:
        assert g.neighbors.min() >= 0 and g.neighbors.max() < g.n
    # rows strictly increasing
    row_id = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees)
    same_row = row_id[1:] == row_id[:-1]
    assert np.all(np.diff(g.neighbors.astype(np.int64))[same_row] > 0)
    # symmetry: sorted (src, dst) equals sorted (dst, src)
    a = np.stack([row_id, g.neighbors.astype(np.int64)])
    b = np.stack([g.neighbors.astype(np.int64), row_id])
    a = a[:, np.lexsort((a[1], a[0]))]
    b = b[:, np.lexsort((b[1], b[0]))]
    assert np.array_equal(a, b)


def stationary_distribution(g: Graph) -> StationaryDistribution:
    """Degree-proportional stationary law pi_v = degree(v) / D."""
    total = g.total_degree
    if total == 0:
        raise ValueError("stationary distribution undefined: graph has no edges")
    probs = g.degrees / float(total)
    return StationaryDistribution(probs=_freeze(probs))


def degree_statistics(g: Graph) -> DegreeStatistics:
    """Exact degree aggregates D, D2 and the sum of squared degrees.

    Sums are taken in 64-bit integers when the worst-case bound
    n * max_degree^2 fits, else in arbitrary-precision Python integers, so
    results are exact for every supported graph.
    """
    degs = g.degrees
    total = g.total_degree
    max_deg = int(degs.max()) if g.n else 0
    if g.n * max_deg * max_deg < 2**62:
        sum_sq = int(np.dot(degs, degs))
        d2 = int(np.dot(degs, degs - 1))
    else:
        sum_sq = sum(int(d) ** 2 for d in degs)
        d2 = sum_sq - total
    return DegreeStatistics(D=total, D2=d2, sum_deg_sq=sum_sq)


def theorem1_bounds(g: Graph, t_horizon: float, beta: float) -> Theorem1Bounds:
    """Exact E[tau] and the Jensen bound on infection probability.

    For stationary independent walkers the coincidence indicator has
    constant expectation sum(pi_v^2), so E[tau(t)] = t * sum(pi_v^2); by
    concavity of 1 - exp(-beta x), E[1 - exp(-beta tau)] <= 1 -
    exp(-beta E[tau]).
    """
    if t_horizon < 0:
        raise ValueError("t_horizon must be non-negative")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    stats = degree_statistics(g)
    expected_tau = t_horizon * stats.coincidence_rate
    gamma_upper = -math.expm1(-beta * expected_tau)
    return Theorem1Bounds(expected_tau=expected_tau, gamma_upper=gamma_upper)


def is_connected(g: Graph) -> bool:
    """True when every vertex is reachable from vertex 0.

    A single-vertex graph is connected vacuously.  Self-loops play no role
    in reachability.
    """
    if g.n == 1:
        return True
    visited = np.zeros(g.n, dtype=bool)
    visited[0] = True
    frontier = np.array([0], dtype=np.int64)
    reached = 1
    offs, nbrs, degs = g.offsets, g.neighbors, g.degrees
    while frontier.size:
        counts = degs[frontier]
        total = int(counts.sum())
        if total == 0:
            break
        starts = offs[frontier]
        cand = nbrs[_slice_gather(starts, counts, total)]
        cand = np.unique(cand)
        new = cand[~visited[cand]]
        visited[new] = True
        reached += new.size
        frontier = new
    return reached == g.n


def _slice_gather(starts: np.ndarray, counts: np.ndarray, total: int) -> np.ndarray:
    """Flat indices covering [starts[i], starts[i]+counts[i]) for all i."""
    out = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    return out + np.arange(total, dtype=np.int64)


def write_edge_list(g: Graph, path) -> None:
    """Write the graph as text: one ``u v`` pair per line, 0-based ids.

    Lines starting with '#' are comments; the first comment records the
    vertex count so isolated vertices survive a round trip.  Each edge is
    written once with u <= v.
    """
    row_id = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees)
    keep = row_id <= g.neighbors
    pairs = np.stack([row_id[keep], g.neighbors[keep].astype(np.int64)], axis=1)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n}\n")
        for a, b in pairs:
            fh.write(f"{a} {b}\n")


def read_edge_list(path, n: int | None = None, allow_self_loops: bool = True) -> Graph:
    """Read a graph written in the edge-list text format.

    The vertex count is taken from the ``n`` argument if given, else from a
    leading ``# n=<count>`` comment, else inferred as max endpoint + 1.
    Malformed lines raise ValueError naming the line number.
    """
    pairs: list[tuple[int, int]] = []
    header_n: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if header_n is None and body.startswith("n="):
                    try:
                        header_n = int(body[2:])
                    except ValueError:
                        pass
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer vertex id in {line!r}") from None
            pairs.append((a, b))
    if n is None:
        n = header_n
    if n is None:
        if not pairs:
            raise ValueError("cannot infer vertex count from an empty edge list")
        n = max(max(a, b) for a, b in pairs) + 1
    return build_graph(n, pairs, allow_self_loops=allow_self_loops)
