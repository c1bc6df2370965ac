"""Undirected simple graphs and their structural quantities.

Everything the sparsity hypothesis needs lives here: balls and spheres,
interior/exterior boundaries, tree excess of balls, exponentially decaying
vertex weights, maximal self-avoiding-path weights, plus seeded random
graph generation and the edge-list file format.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError
from .records import CheckRecord, Report
from .rng import make_rng

DEFAULT_NODE_BUDGET = 10 ** 8

# Chunk of BFS source rows held in memory at once during whole-graph scans.
_DIST_CHUNK = 512


class Graph:
    """Immutable simple graph on vertices 0..n-1 with sorted adjacency."""

    def __init__(self, n, edges):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        seen = set()
        adj = [[] for _ in range(n)]
        norm = []
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ValueError(f"parallel edge ({u},{v})")
            seen.add((u, v))
            norm.append((u, v))
            adj[u].append(v)
            adj[v].append(u)
        norm.sort()
        self.n = n
        self.edges = tuple(norm)
        self.adj = tuple(tuple(sorted(a)) for a in adj)
        self._csr = None

    @property
    def m(self):
        return len(self.edges)

    def degree(self, v):
        return len(self.adj[v])

    def csr_adjacency(self):
        """Sparse adjacency matrix, cached (the graph is immutable)."""
        if self._csr is None:
            from scipy.sparse import csr_matrix

            if self.m:
                ue = np.array([e[0] for e in self.edges])
                ve = np.array([e[1] for e in self.edges])
                rows = np.concatenate([ue, ve])
                cols = np.concatenate([ve, ue])
                data = np.ones(2 * self.m, dtype=np.int8)
            else:
                rows = cols = np.zeros(0, dtype=int)
                data = np.zeros(0, dtype=np.int8)
            self._csr = csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return self._csr

    def __eq__(self, other):
        return (isinstance(other, Graph)
                and self.n == other.n and self.edges == other.edges)

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def bfs_distances(g, sources, cutoff=None, within=None):
    """Hop distances from ``sources`` (vertex or iterable of vertices).

    ``within`` restricts the traversal to an induced vertex set (sources
    included unconditionally).  Returns {vertex: distance} for reached
    vertices only.
    """
    if isinstance(sources, int):
        sources = (sources,)
    dist = {}
    frontier = []
    for s in sources:
        if s not in dist:
            dist[s] = 0
            frontier.append(s)
    d = 0
    while frontier and (cutoff is None or d < cutoff):
        d += 1
        nxt = []
        for u in frontier:
            for w in g.adj[u]:
                if w in dist:
                    continue
                if within is not None and w not in within:
                    continue
                dist[w] = d
                nxt.append(w)
        frontier = nxt
    return dist


def ball(g, v, l):
    """V(v,l) and the induced edge list E(v,l), via BFS from v."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    if l < 0:
        raise ValueError("radius must be nonnegative")
    dist = bfs_distances(g, v, cutoff=l)
    verts = tuple(sorted(dist))
    vset = set(verts)
    edges = []
    for u in verts:
        for w in g.adj[u]:
            if w > u and w in vset:
                edges.append((u, w))
    edges.sort()
    return verts, tuple(edges)


def tree_excess(g, v, l):
    """|E(v,l)| - |V(v,l)| + 1 of the ball B(v,l); 0 iff it is a tree."""
    verts, edges = ball(g, v, l)
    return len(edges) - len(verts) + 1


@dataclass(frozen=True)
class AlphaWeight:
    value: float
    tail_bound: float


def alpha_weight(g, v, alpha, tail_tolerance=0.0):
    """phi_alpha(v) = sum over u != v of alpha^d(v,u); unreachable u add 0.

    With tail_tolerance > 0 the BFS stops at the first radius R satisfying
    alpha^R * n < tail_tolerance and the bound on the dropped mass is
    reported; tail_tolerance = 0 forces a full traversal.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    if tail_tolerance < 0.0:
        raise ValueError("tail_tolerance must be nonnegative")
    cutoff = None
    if tail_tolerance > 0.0 and g.n > 0:
        cutoff = 0
        while alpha ** cutoff * g.n >= tail_tolerance:
            cutoff += 1
    dist = bfs_distances(g, v, cutoff=cutoff)
    value = sum(alpha ** d for d in dist.values()) - 1.0
    tail = 0.0
    if cutoff is not None:
        unreached = g.n - len(dist)
        tail = alpha ** (cutoff + 1) * unreached
    return AlphaWeight(value, tail)


def _distance_chunks(g, chunk=_DIST_CHUNK, indices=None):
    """Yield (source indices, hop-distance rows) over the whole graph."""
    from scipy.sparse.csgraph import dijkstra

    csr = g.csr_adjacency()
    idx = np.arange(g.n) if indices is None else np.asarray(indices)
    for start in range(0, len(idx), chunk):
        sel = idx[start:start + chunk]
        dmat = dijkstra(csr, directed=False, unweighted=True, indices=sel)
        yield sel, np.atleast_2d(dmat)


def alpha_weights_all(g, alpha, chunk=_DIST_CHUNK):
    """Exact phi_alpha for every vertex at once (chunked whole-graph BFS)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    phi = np.zeros(g.n)
    for sel, dmat in _distance_chunks(g, chunk=chunk):
        # alpha ** inf == 0.0 handles unreachable vertices.
        phi[sel] = (alpha ** dmat).sum(axis=1) - 1.0
    return phi


def tree_excess_all(g, l, chunk=_DIST_CHUNK):
    """Tree excess of B(v,l) for every v (vectorized over source chunks)."""
    excess = np.zeros(g.n, dtype=np.int64)
    if g.m:
        eu = np.array([e[0] for e in g.edges])
        ev = np.array([e[1] for e in g.edges])
    else:
        eu = ev = np.zeros(0, dtype=int)
    for sel, dmat in _distance_chunks(g, chunk=chunk):
        mask = dmat <= l
        vcount = mask.sum(axis=1)
        if g.m:
            ecount = (mask[:, eu] & mask[:, ev]).sum(axis=1)
        else:
            ecount = np.zeros(len(sel), dtype=np.int64)
        excess[sel] = ecount - vcount + 1
    return excess


@dataclass(frozen=True)
class MaxPathWeight:
    value: float
    path: tuple


def max_path_alpha_weight(g, alpha, l, node_budget=DEFAULT_NODE_BUDGET,
                          phi=None):
    """Exact max over self-avoiding paths of at most ``l`` edges of the sum
    of phi_alpha over the path's vertices.

    Depth-first enumeration with branch-and-bound: a branch dies when its
    running sum plus (remaining edges) * (global max phi) cannot beat the
    incumbent.  A single vertex is a path of zero edges, so the result is
    at least max_v phi_alpha(v).  Exceeding ``node_budget`` DFS nodes is an
    error, never a silent approximation.
    """
    if l < 0:
        raise ValueError("path length cap must be nonnegative")
    if g.n == 0:
        return MaxPathWeight(0.0, ())
    if phi is None:
        phi = alpha_weights_all(g, alpha)
    phi = [float(x) for x in phi]
    l = min(l, g.n - 1)
    max_phi = max(phi)
    order = sorted(range(g.n), key=lambda v: -phi[v])
    best = -math.inf
    best_path = ()
    nodes = 0
    in_path = bytearray(g.n)
    path = []

    def extend(v, total, edges_left):
        nonlocal best, best_path, nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceededError(
                f"path enumeration exceeded {node_budget} nodes",
                reached=nodes)
        path.append(v)
        in_path[v] = 1
        total += phi[v]
        if total > best:
            best = total
            best_path = tuple(path)
        if edges_left > 0 and total + edges_left * max_phi > best:
            for w in g.adj[v]:
                if not in_path[w]:
                    extend(w, total, edges_left - 1)
        path.pop()
        in_path[v] = 0

    for v in order:
        if phi[v] + l * max_phi <= best:
            break
        extend(v, 0.0, l)
    return MaxPathWeight(best, best_path)


@dataclass(frozen=True)
class Boundaries:
    interior: tuple
    exterior: tuple


def boundaries(g, subset, relative_to=None):
    """Interior and exterior boundary of a vertex set.

    interior = members with a neighbor outside; exterior = non-members with
    a neighbor inside.  With ``relative_to`` (a superset W of the subset)
    the exterior is restricted to vertices outside W.
    """
    sset = set(subset)
    for u in sset:
        if not 0 <= u < g.n:
            raise ValueError(f"vertex {u} out of range")
    interior = []
    exterior = set()
    for u in sorted(sset):
        inside = True
        for w in g.adj[u]:
            if w not in sset:
                exterior.add(w)
                if inside:
                    interior.append(u)
                    inside = False
    if relative_to is not None:
        wset = set(relative_to)
        if not sset <= wset:
            raise ValueError("relative_to must contain the subset")
        exterior = {u for u in exterior if u not in wset}
    return Boundaries(tuple(interior), tuple(sorted(exterior)))


def exterior_boundary(g, subset):
    return boundaries(g, subset).exterior


@dataclass(frozen=True)
class HypothesisParams:
    a: float
    alpha: float
    t: int
    delta: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("a must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0,1)")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")


def log_radius(coef, n, base=math.e):
    """ceil(coef * log_base(n)) as an integer radius; n <= 1 gives 0."""
    if base <= 1.0:
        raise ValueError("log base must exceed 1")
    if n <= 1:
        return 0
    return math.ceil(coef * math.log(n) / math.log(base))


@dataclass
class HypothesisReport:
    params: HypothesisParams
    radius: int
    report: Report
    m_alpha: float
    phi: np.ndarray

    @property
    def passed(self):
        return self.report.passed

    @property
    def records(self):
        return self.report.records


def check_hypothesis(g, params, node_budget=DEFAULT_NODE_BUDGET,
                     log_base=math.e, witness_cap=20):
    """Check the two structural clauses on every vertex.

    Clause 1: tree excess of B(v, ceil(a*log n)) at most t, for all v.
    Clause 2: max path alpha-weight over paths of at most ceil(a*log n)
    edges strictly below delta*log n.  Logs use ``log_base``.
    """
    radius = log_radius(params.a, g.n, base=log_base)
    report = Report()

    excess = tree_excess_all(g, radius)
    bad = [int(v) for v in np.nonzero(excess > params.t)[0]]
    witness = [{"vertex": v, "excess": int(excess[v])}
               for v in bad[:witness_cap]]
    report.add(CheckRecord(
        check="tree-excess",
        passed=not bad,
        witness={"violations": len(bad), "first": witness},
        value=int(excess.max()) if g.n else 0,
        bound=params.t,
    ))

    phi = alpha_weights_all(g, params.alpha)
    mpw = max_path_alpha_weight(g, params.alpha, radius,
                                node_budget=node_budget, phi=phi)
    if g.n <= 1:
        path_bound = 0.0
    else:
        path_bound = params.delta * math.log(g.n) / math.log(log_base)
    report.add(CheckRecord(
        check="path-weight",
        passed=mpw.value < path_bound,
        witness={"path": list(mpw.path)},
        value=mpw.value,
        bound=path_bound,
    ))
    return HypothesisReport(params=params, radius=radius, report=report,
                            m_alpha=mpw.value, phi=phi)


def expansion_probe(g, smin, h, trials, seed=0):
    """Sample random connected subsets and check vertex expansion.

    Each trial grows a connected subset of size in [smin, 2*smin] by seeded
    uniform frontier additions, then checks that the number of vertices at
    distance exactly 1 is at most (h-1) * |subset|.  An empirical probe,
    not a proof; exhausted components smaller than smin are skipped.
    """
    if smin < 1:
        raise ValueError("smin must be at least 1")
    if h <= 1:
        raise ValueError("h must exceed 1")
    if g.n == 0:
        raise ValueError("empty graph")
    rng = make_rng(seed, "expansion")
    worst_ratio = -1.0
    worst_subset = ()
    violations = 0
    skipped = 0
    for _ in range(trials):
        target = rng.randint(smin, 2 * smin)
        start = rng.randrange(g.n)
        subset = {start}
        candidates = [w for w in g.adj[start]]
        while len(subset) < target and candidates:
            pick = candidates.pop(rng.randrange(len(candidates)))
            if pick in subset:
                continue
            subset.add(pick)
            candidates.extend(w for w in g.adj[pick] if w not in subset)
        if len(subset) < smin:
            skipped += 1
            continue
        bsize = len(exterior_boundary(g, subset))
        ratio = bsize / len(subset)
        if bsize > (h - 1) * len(subset):
            violations += 1
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst_subset = tuple(sorted(subset))
    report = Report()
    report.add(CheckRecord(
        check="expansion",
        passed=violations == 0,
        witness={"worst_subset": list(worst_subset), "skipped": skipped,
                 "violations": violations},
        value=worst_ratio,
        bound=h - 1,
    ))
    return report


def generate_er(n, d, seed):
    """G(n, p) with p = d/n, sampled by geometric edge skipping.

    Each unordered pair appears independently with probability d/n; the
    same (n, d, seed) always produces the identical graph.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if d < 0 or d > n:
        raise ValueError("mean degree must satisfy 0 <= d <= n")
    p = d / n
    edges = []
    if p >= 1.0:
        edges = [(u, v) for v in range(n) for u in range(v)]
    elif p > 0.0:
        rng = make_rng(seed, "er")
        log_q = math.log1p(-p)
        v, w = 1, -1
        while v < n:
            w += 1 + int(math.log1p(-rng.random()) / log_q)
            while w >= v and v < n:
                w -= v
                v += 1
            if v < n:
                edges.append((w, v))
    return Graph(n, edges)


def format_edge_list(g):
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text):
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line)
    if not rows:
        raise ValueError("edge list has no header line")
    head = rows[0].split()
    if len(head) != 2:
        raise ValueError(f"malformed header {rows[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(rows) - 1 != m:
        raise ValueError(f"header declares {m} edges, found {len(rows) - 1}")
    edges = []
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"malformed edge line {line!r}")
        u, v = int(parts[0]), int(parts[1])
        if u >= v:
            raise ValueError(f"edge {u} {v} violates u < v")
        edges.append((u, v))
    return Graph(n, edges)


def write_edge_list(g, path):
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))


def read_edge_list(path):
    with open(path) as fh:
        return parse_edge_list(fh.read())
