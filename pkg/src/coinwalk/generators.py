"""Graph family generators with reproducible, splittable seeding.

Deterministic families (complete, circulant) are built directly in CSR
form.  Random families draw every bit of randomness from splitmix64
streams derived from the caller's seed, so an identical spec (including
seed) reproduces the identical edge set on any platform.

Two exact samplers cover the independent-pair models (uniform G(n, p) and
the expected-degree model where pair (u, v) appears with probability
w_u * w_v / W):

* a pair scan that draws one uniform per candidate pair in row-major
  order -- the correctness reference, used up to ``SCAN_LIMIT`` vertices;
* a skip sampler that jumps between accepted pairs geometrically, used
  above ``SCAN_LIMIT``.  For heterogeneous weights this is the
  sorted-weight envelope walk: weights are non-increasing, so the
  inclusion probability of the previous pair in a row upper-bounds all
  later ones and geometric skips under that envelope can be thinned to
  the exact per-pair probability.

Both samplers realize the same distribution; the test suite checks their
agreement on edge-count and degree moments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph_core import Graph, _check_vertex_count, _csr_from_half_edges, is_connected
from .rng import Stream, UniformBuffer, derive_seed

#: Largest n handled by the naive pair scan; above it the skip samplers run.
SCAN_LIMIT = 20_000

#: Pair scans draw the whole upper triangle in one block up to this many
#: pairs; beyond it they draw row by row (same order, same values).
_ONE_SHOT_PAIRS = 3_000_000


class GenerationError(RuntimeError):
    """A rejection-sampling loop exhausted its retry budget."""


# ---------------------------------------------------------------------------
# weight sequences


@dataclass(frozen=True)
class WeightSequence:
    """A non-increasing positive expected-degree sequence.

    Power-law sequences built by :func:`power_law_weights` carry their
    construction parameters; uniform sequences leave them None.
    """

    weights: np.ndarray
    gamma: float | None = None
    d: float | None = None
    m: float | None = None
    i0: float | None = None

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if w[-1] <= 0:
            raise ValueError("weights must be positive")
        if np.any(np.diff(w) > 0):
            raise ValueError("weights must be non-increasing")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @cached_property
    def total(self) -> float:
        """W = sum of all weights."""
        return float(self.weights.sum())

    @property
    def max_weight(self) -> float:
        return float(self.weights[0])

    def probabilities_valid(self) -> bool:
        """True when every pair probability w_u w_v / W is at most 1."""
        return self.max_weight**2 <= self.total


def uniform_weights(n: int, w: float) -> WeightSequence:
    """Constant weight sequence; with w = n*p this is the G(n, p) surrogate."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not (w > 0 and math.isfinite(w)):
        raise ValueError("weight must be positive and finite")
    return WeightSequence(weights=np.full(n, float(w)))


def power_law_weights(n: int, gamma: float, d: float, m: float) -> WeightSequence:
    """Power-law expected degrees with exponent gamma, mean ~d, maximum m.

    Weight i (0-based) is ``m * (1 + i / i0) ** (-1 / (gamma - 1))`` with
    ``i0 = n * (d (gamma-2) / (m (gamma-1))) ** (gamma-1)``.  The sequence
    is decreasing from w_0 = m, the number of vertices of expected degree
    at least x scales like x^-(gamma-1), and the total W is close to n*d
    when m is well below its sqrt(n*d) ceiling.
    """
    _check_vertex_count(n)
    if gamma <= 2:
        raise ValueError("gamma must exceed 2")
    if d <= 0:
        raise ValueError("d must be positive")
    if m <= d:
        raise ValueError("m must exceed d")
    i0 = n * (d * (gamma - 2) / (m * (gamma - 1))) ** (gamma - 1)
    idx = np.arange(n, dtype=np.float64)
    w = m * (1.0 + idx / i0) ** (-1.0 / (gamma - 1.0))
    return WeightSequence(weights=w, gamma=float(gamma), d=float(d), m=float(m), i0=float(i0))


@dataclass(frozen=True)
class AssumptionReport:
    """Pass/fail flags with measured slack for the power-law regime.

    The asymptotic results assume: d bounded below by delta, d small
    relative to m, m at most sqrt(n*d) (which also keeps every pair
    probability at most 1), and m/d growing strictly slower than
    n^(1/(gamma-1)).  ``log_m_over_log_n`` is a diagnostic only: it is the
    exponent a such that m = n^a, for judging whether m grows as a power
    of n.
    """

    n: int
    gamma: float
    d: float
    m: float
    delta: float
    d_ge_delta: bool
    d_slack: float
    d_lt_m: bool
    d_over_m: float
    m_le_sqrt_nd: bool
    m_slack: float
    md_growth_ok: bool
    md_growth_ratio: float
    w_valid: bool
    w_slack: float
    log_m_over_log_n: float

    @property
    def hard_ok(self) -> bool:
        """The two violations that make sampling itself invalid."""
        return self.d_ge_delta and self.w_valid

    @property
    def all_ok(self) -> bool:
        return (
            self.d_ge_delta
            and self.d_lt_m
            and self.m_le_sqrt_nd
            and self.md_growth_ok
            and self.w_valid
        )


def check_assumptions(n: int, gamma: float, d: float, m: float,
                      delta: float = 1.0) -> AssumptionReport:
    """Report which power-law regime assumptions hold for these parameters.

    Never raises: invalid combinations simply come back with failing flags
    (W-dependent slack is NaN when the weight sequence cannot be built).
    """
    constructible = n >= 1 and gamma > 2 and 0 < d < m
    if constructible:
        total = power_law_weights(n, gamma, d, m).total
        w_slack = total - m * m
        w_valid = bool(w_slack >= 0)
    else:
        w_slack = math.nan
        w_valid = False
    sqrt_nd = math.sqrt(n * d) if n >= 1 and d > 0 else math.nan
    if gamma > 2 and d > 0 and n > 1:
        md_ratio = (m / d) / n ** (1.0 / (gamma - 1.0))
    else:
        md_ratio = math.nan
    return AssumptionReport(
        n=n, gamma=gamma, d=d, m=m, delta=delta,
        d_ge_delta=bool(d >= delta),
        d_slack=d - delta,
        d_lt_m=bool(d < m),
        d_over_m=d / m if m > 0 else math.nan,
        m_le_sqrt_nd=bool(m <= sqrt_nd) if math.isfinite(sqrt_nd) else False,
        m_slack=sqrt_nd - m if math.isfinite(sqrt_nd) else math.nan,
        md_growth_ok=bool(md_ratio < 1) if math.isfinite(md_ratio) else False,
        md_growth_ratio=md_ratio,
        w_valid=w_valid,
        w_slack=w_slack,
        log_m_over_log_n=math.log(m) / math.log(n) if n > 1 and m > 0 else math.nan,
    )


# ---------------------------------------------------------------------------
# deterministic families


def gen_complete(n: int) -> Graph:
    """Complete graph K_n (no self-loops)."""
    _check_vertex_count(n)
    if n < 2:
        raise ValueError("complete graph needs at least 2 vertices")
    cols = np.arange(n - 1, dtype=np.int32)
    rows = np.arange(n, dtype=np.int32)[:, None]
    neighbors = (cols + (cols >= rows)).ravel()
    offsets = np.arange(0, n * (n - 1) + 1, n - 1, dtype=np.int64)
    neighbors.setflags(write=False)
    offsets.setflags(write=False)
    return Graph(n=n, offsets=offsets, neighbors=neighbors)


def gen_circulant(n: int, k: int) -> Graph:
    """Circulant graph: v adjacent to v +/- 1 ... v +/- k modulo n.

    Requires n >= 2k + 1 so the 2k neighbor offsets are all distinct;
    at n = 2k + 1 the result is the complete graph.
    """
    _check_vertex_count(n)
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < 2 * k + 1:
        raise ValueError(f"circulant needs n >= 2k + 1, got n={n}, k={k}")
    shifts = np.concatenate([np.arange(-k, 0), np.arange(1, k + 1)]).astype(np.int64)
    mat = (np.arange(n, dtype=np.int64)[:, None] + shifts[None, :]) % n
    mat.sort(axis=1)
    neighbors = mat.ravel().astype(np.int32)
    offsets = np.arange(0, n * 2 * k + 1, 2 * k, dtype=np.int64)
    neighbors.setflags(write=False)
    offsets.setflags(write=False)
    return Graph(n=n, offsets=offsets, neighbors=neighbors)


# ---------------------------------------------------------------------------
# random regular via stub pairing


def gen_random_regular(n: int, r: int, seed: int, max_retries: int = 1000) -> Graph:
    """Random r-regular graph by pairing stubs, rejecting imperfect samples.

    Each attempt pairs the n*r vertex stubs uniformly at random and is
    rejected wholesale if it produced a self-loop or a duplicate edge, so
    accepted graphs are uniform over simple pairings.  Attempt a uses the
    derived seed (seed, a).
    """
    _check_vertex_count(n)
    if r < 1:
        raise ValueError("degree r must be at least 1")
    if r >= n:
        raise ValueError("degree r must be below n")
    if (n * r) % 2 != 0:
        raise ValueError("n * r must be even for an r-regular graph")
    stubs = np.repeat(np.arange(n, dtype=np.int64), r)
    for attempt in range(max_retries):
        stream = Stream(derive_seed(seed, attempt))
        keys = stream.uniforms(n * r)
        perm = np.argsort(keys, kind="stable")
        shuffled = stubs[perm]
        a, b = shuffled[0::2], shuffled[1::2]
        u, v = np.minimum(a, b), np.maximum(a, b)
        if np.any(u == v):
            continue
        key = u * np.int64(n) + v
        key.sort()
        if np.any(key[1:] == key[:-1]):
            continue
        return _csr_from_half_edges(n, u, v)
    raise GenerationError(
        f"no simple {r}-regular pairing of {n} vertices in {max_retries} attempts")


# ---------------------------------------------------------------------------
# independent-pair samplers: G(n, p)


def _triangle_bases(n: int) -> np.ndarray:
    """Row starts of the strict upper triangle in row-major linear order."""
    i = np.arange(n, dtype=np.int64)
    return i * n - i * (i + 1) // 2


def _pairs_from_linear(linear: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert row-major strict-upper-triangle linear indices to (i, j)."""
    bases = _triangle_bases(n)
    i = np.searchsorted(bases, linear, side="right") - 1
    j = linear - bases[i] + i + 1
    return i, j


def _gnp_scan(n: int, p: float, stream: Stream) -> tuple[np.ndarray, np.ndarray]:
    """One uniform per unordered pair, row-major order."""
    total = n * (n - 1) // 2
    if total <= _ONE_SHOT_PAIRS:
        u = stream.uniforms(total)
        hit = np.nonzero(u < p)[0]
        return _pairs_from_linear(hit, n)
    us, vs = [], []
    for row in range(n - 1):
        block = stream.uniforms(n - 1 - row)
        hit = np.nonzero(block < p)[0]
        if hit.size:
            us.append(np.full(hit.size, row, dtype=np.int64))
            vs.append(hit + row + 1)
    if not us:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(us), np.concatenate(vs)


def _gnp_skip(n: int, p: float, stream: Stream) -> tuple[np.ndarray, np.ndarray]:
    """Geometric gaps between accepted pairs along the linear pair order."""
    total = n * (n - 1) // 2
    log_q = math.log1p(-p)
    taken: list[np.ndarray] = []
    cursor = 0
    while cursor < total:
        expect = (total - cursor) * p
        block = min(8_000_000, max(1024, int(expect * 1.15) + 64))
        u = stream.uniforms(block)
        gaps = np.floor(np.log1p(-u) / log_q)
        gaps = np.minimum(gaps, float(total)).astype(np.int64)
        pos = cursor + np.cumsum(gaps + 1) - 1
        inside = pos[pos < total]
        taken.append(inside)
        if inside.size < pos.size:
            cursor = total
        else:
            cursor = int(pos[-1]) + 1
    linear = np.concatenate(taken) if taken else np.empty(0, dtype=np.int64)
    return _pairs_from_linear(linear, n)


def gen_gnp(n: int, p: float, seed: int, require_connected: bool = False,
            max_retries: int = 100, method: str = "auto") -> Graph:
    """Uniform random graph: each of the C(n, 2) pairs is an edge w.p. p.

    ``method`` selects the sampler: "scan" draws one uniform per pair,
    "skip" jumps geometrically between edges, "auto" picks scan up to
    ``SCAN_LIMIT`` vertices and skip beyond.  With ``require_connected``
    the sample is regenerated from a fresh derived seed until connected,
    up to ``max_retries`` attempts.
    """
    _check_vertex_count(n)
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    if method not in ("auto", "scan", "skip"):
        raise ValueError(f"unknown sampling method {method!r}")
    if require_connected and n > 1 and n * p < math.log(n):
        warnings.warn(
            f"n*p = {n * p:.3g} is below log(n) = {math.log(n):.3g}; "
            "connected samples will be rare in this regime",
            stacklevel=2,
        )
    use_scan = method == "scan" or (method == "auto" and n <= SCAN_LIMIT)
    for attempt in range(max_retries):
        stream = Stream(derive_seed(seed, attempt))
        if p >= 1.0:
            g = gen_complete(n) if n >= 2 else build_trivial(n)
        elif p <= 0.0 or n == 1:
            g = _csr_from_half_edges(n, np.empty(0, np.int64), np.empty(0, np.int64))
        elif use_scan:
            g = _csr_from_half_edges(n, *_gnp_scan(n, p, stream))
        else:
            g = _csr_from_half_edges(n, *_gnp_skip(n, p, stream))
        if not require_connected or is_connected(g):
            return g
    raise GenerationError(f"no connected G({n}, {p}) sample in {max_retries} attempts")


def build_trivial(n: int) -> Graph:
    """Edgeless graph on n vertices."""
    return _csr_from_half_edges(n, np.empty(0, np.int64), np.empty(0, np.int64))


# ---------------------------------------------------------------------------
# independent-pair samplers: expected-degree model


def _chunglu_scan(w: np.ndarray, total: float, stream: Stream,
                  allow_self_loops: bool) -> tuple[np.ndarray, np.ndarray]:
    """One uniform per pair in row-major order (diagonal first per row).

    A pair probability above 1 accepts every uniform, so the scan
    realizes the clamped model min(1, w_u w_v / W) with no special case.
    """
    n = w.size
    k = 0 if allow_self_loops else 1
    pairs = n * (n + 1) // 2 if allow_self_loops else n * (n - 1) // 2
    if pairs <= _ONE_SHOT_PAIRS:
        iu, jv = np.triu_indices(n, k=k)
        probs = w[iu] * w[jv] / total
        hit = stream.uniforms(pairs) < probs
        return iu[hit].astype(np.int64), jv[hit].astype(np.int64)
    us, vs = [], []
    for row in range(n):
        lo = row + k
        if lo >= n:
            break
        block = stream.uniforms(n - lo)
        hit = np.nonzero(block < w[row] * w[lo:] / total)[0]
        if hit.size:
            us.append(np.full(hit.size, row, dtype=np.int64))
            vs.append(hit + lo)
    if not us:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(us), np.concatenate(vs)


def _chunglu_skip(w: np.ndarray, total: float, stream: Stream,
                  allow_self_loops: bool) -> tuple[np.ndarray, np.ndarray]:
    """Sorted-weight envelope walk with geometric skips, exact per pair.

    Within row u the pair probabilities q_v = min(1, w_u w_v / W) are
    non-increasing in v, so the probability at the last visited position
    bounds all later ones.  Candidate positions arrive at geometric gaps
    under that envelope p and are kept with probability q_v / p, which
    realizes independent Bernoulli(q_v) draws exactly while touching only
    O(edges) positions.
    """
    n = w.size
    wl = w.tolist()
    inv_total = 1.0 / total
    buf = UniformBuffer(stream, block=1 << 15)
    take = buf.take
    log1p = math.log1p
    us: list[int] = []
    vs: list[int] = []
    for u in range(n):
        wu = wl[u]
        if allow_self_loops and take() < wu * wu * inv_total:
            us.append(u)
            vs.append(u)
        v = u + 1
        if v >= n:
            continue
        p = min(1.0, wu * wl[v] * inv_total)
        while v < n and p > 0.0:
            if p < 1.0:
                v += int(log1p(-take()) / log1p(-p))
                if v >= n:
                    break
            q = min(1.0, wu * wl[v] * inv_total)
            if take() * p < q:
                us.append(u)
                vs.append(v)
            p = q
            v += 1
    return np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)


def gen_expected_degree(w: WeightSequence, seed: int, allow_self_loops: bool = True,
                        method: str = "auto", strict: bool = True) -> Graph:
    """Random graph where pair (u, v), u < v, is an edge w.p. w_u w_v / W.

    With ``allow_self_loops`` each vertex additionally receives a loop
    with probability w_v^2 / W; a loop adds 1 to the degree.  Expected
    degrees then equal the weights exactly when W >= max(w)^2, which
    keeps every probability at most 1; ``strict`` (the default) rejects
    weights that violate it.  With ``strict=False`` the sampler instead
    clamps each pair probability at 1 -- useful right at the m = sqrt(n*d)
    boundary, where finite-n weight sums fall a few percent short of n*d.
    ``method`` as in :func:`gen_gnp`.
    """
    if strict and not w.probabilities_valid():
        raise ValueError(
            f"invalid pair probabilities: max weight squared {w.max_weight**2:.6g} "
            f"exceeds total weight {w.total:.6g} (pass strict=False to clamp at 1)")
    if method not in ("auto", "scan", "skip"):
        raise ValueError(f"unknown sampling method {method!r}")
    n = w.n
    stream = Stream(derive_seed(seed, 0))
    use_scan = method == "scan" or (method == "auto" and n <= SCAN_LIMIT)
    if use_scan:
        u, v = _chunglu_scan(w.weights, w.total, stream, allow_self_loops)
    else:
        u, v = _chunglu_skip(w.weights, w.total, stream, allow_self_loops)
    return _csr_from_half_edges(n, u, v)


# ---------------------------------------------------------------------------
# unified spec


@dataclass(frozen=True)
class GenSpec:
    """One fully-resolved graph request; equal specs give equal graphs.

    Family parameters: ``k`` (circulant), ``r`` (random_regular), ``p``
    (gnp), either ``w`` (uniform expected-degree weight) or the triple
    ``gamma``/``d``/``m`` (power-law expected degrees).
    """

    family: str
    n: int
    seed: int = 0
    k: int | None = None
    r: int | None = None
    p: float | None = None
    gamma: float | None = None
    d: float | None = None
    m: float | None = None
    w: float | None = None
    allow_self_loops: bool = True
    require_connected: bool = False
    strict: bool = True
    max_retries: int = 100


FAMILIES = ("complete", "circulant", "random_regular", "gnp", "expected_degree")


def _require(spec: GenSpec, name: str):
    value = getattr(spec, name)
    if value is None:
        raise ValueError(f"family {spec.family!r} requires parameter {name!r}")
    return value


def weights_for(spec: GenSpec) -> WeightSequence:
    """The weight sequence an expected_degree spec resolves to."""
    if spec.family != "expected_degree":
        raise ValueError("weights are defined only for the expected_degree family")
    if spec.w is not None:
        return uniform_weights(spec.n, spec.w)
    return power_law_weights(spec.n, _require(spec, "gamma"),
                             _require(spec, "d"), _require(spec, "m"))


def sampler_for(spec: GenSpec):
    """Resolve a GenSpec to a seed -> Graph callable.

    Family parameters are validated once, up front; the returned callable
    applies connectivity conditioning when the spec asks for it (attempt a
    uses the derived seed (s, a), giving up after ``max_retries``).
    Deterministic families ignore the seed.
    """
    if spec.family not in FAMILIES:
        raise ValueError(f"unknown family {spec.family!r}")
    if spec.family in ("complete", "circulant"):
        if spec.family == "complete":
            g = gen_complete(spec.n)
        else:
            g = gen_circulant(spec.n, _require(spec, "k"))
        if spec.require_connected and not is_connected(g):
            raise GenerationError(f"{spec.family} graph with n={spec.n} is not connected")
        return lambda s: g
    if spec.family == "gnp":
        p = _require(spec, "p")
        return lambda s: gen_gnp(spec.n, p, s,
                                 require_connected=spec.require_connected,
                                 max_retries=spec.max_retries)
    if spec.family == "random_regular":
        r = _require(spec, "r")
        draw = lambda s: gen_random_regular(spec.n, r, s)
    else:
        w_seq = weights_for(spec)
        draw = lambda s: gen_expected_degree(
            w_seq, s, allow_self_loops=spec.allow_self_loops, strict=spec.strict)
    if not spec.require_connected:
        return draw

    def conditioned(s: int) -> Graph:
        for attempt in range(spec.max_retries):
            g = draw(derive_seed(s, attempt))
            if is_connected(g):
                return g
        raise GenerationError(
            f"no connected {spec.family} sample in {spec.max_retries} attempts")

    return conditioned


def generate(spec: GenSpec) -> Graph:
    """Build the graph a GenSpec describes, drawing with spec.seed."""
    return sampler_for(spec)(spec.seed)
