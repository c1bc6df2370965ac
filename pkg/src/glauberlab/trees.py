"""Exact conditional laws on tree-shaped vertex sets.

Given a model, a forest-inducing vertex set, and a boundary assignment,
an upward sweep of subtree weight tables gives exact marginals, exact
joint laws, and perfect samples without enumeration.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryInfeasibleError
from .models import NEG_INF
from .rng import derive_seed, sample_index


def _exp_tables(model):
    q = model.q
    expg = np.zeros((q, q))
    for i in range(q):
        for j in range(q):
            gij = model.g[i][j]
            expg[i, j] = 0.0 if gij == NEG_INF else np.exp(gij)
    exph = np.exp(np.array(model.h))
    return exph, expg


def _forest_structure(graph, block, roots):
    """Parents, children and a roots-first order; rejects cycles."""
    bset = set(block)
    comp_of = {}
    comp_roots = []
    for v in sorted(bset):
        if v in comp_of:
            continue
        stack = [v]
        comp_of[v] = len(comp_roots)
        members = [v]
        while stack:
            u = stack.pop()
            for w in graph.adj[u]:
                if w in bset and w not in comp_of:
                    comp_of[w] = len(comp_roots)
                    members.append(w)
                    stack.append(w)
        comp_roots.append(min(members))
    if roots is None:
        roots = tuple(comp_roots)
    else:
        roots = tuple(roots)
        if len(roots) != len(comp_roots):
            raise ValueError(
                f"need one root per component: got {len(roots)}, "
                f"forest has {len(comp_roots)}")
        seen_comps = {comp_of[r] for r in roots if r in bset}
        if any(r not in bset for r in roots) or len(seen_comps) != len(roots):
            raise ValueError("roots must cover each component exactly once")

    parent = {}
    children = {v: [] for v in bset}
    order = []
    visited = set()
    for r in roots:
        visited.add(r)
        order.append(r)
        queue = [r]
        while queue:
            u = queue.pop(0)
            for w in graph.adj[u]:
                if w not in bset:
                    continue
                if w in visited:
                    if parent.get(u) != w and parent.get(w) != u:
                        raise ValueError(
                            f"vertex set is not a forest: extra edge "
                            f"({min(u, w)},{max(u, w)})")
                    continue
                visited.add(w)
                parent[w] = u
                children[u].append(w)
                order.append(w)
                queue.append(w)
    return roots, parent, children, tuple(order)


@dataclass
class TreeTables:
    model: object
    graph: object
    block: tuple
    roots: tuple
    parent: dict
    children: dict
    order: tuple
    up: dict
    boundary: dict
    expg: np.ndarray


def build_tree_tables(model, graph, block, boundary, ignore=(), roots=None):
    """Upward subtree weight tables for a forest-inducing block.

    ``boundary`` pins every neighbor of the block outside it, except
    vertices listed in ``ignore`` (whose edges are dropped entirely, for
    callers that account for those interactions themselves).  up[v][x] is
    proportional to the total weight of v's subtree when v is in state x,
    max-normalized per vertex; a vertex with no feasible state raises
    BoundaryInfeasibleError.
    """
    block = tuple(sorted(set(block)))
    if not block:
        raise ValueError("empty block")
    bset = set(block)
    ignore = frozenset(ignore)
    for v in block:
        for w in graph.adj[v]:
            if w not in bset and w not in boundary and w not in ignore:
                raise ValueError(
                    f"neighbor {w} of block vertex {v} has no boundary "
                    f"assignment")
    roots, parent, children, order = _forest_structure(graph, block, roots)
    exph, expg = _exp_tables(model)

    up = {}
    for v in reversed(order):
        w_v = exph.copy()
        for w in graph.adj[v]:
            if w in ignore or w in bset:
                continue
            w_v = w_v * expg[:, boundary[w]]
        for c in children[v]:
            w_v = w_v * (expg @ up[c])
        mx = w_v.max()
        if mx <= 0.0:
            raise BoundaryInfeasibleError(
                f"no feasible state at vertex {v} under the given boundary")
        up[v] = w_v / mx
    return TreeTables(model=model, graph=graph, block=block, roots=roots,
                      parent=parent, children=children, order=order, up=up,
                      boundary=dict(boundary), expg=expg)


def tree_root_law(tables, root=None):
    """Exact marginal of a root's state (normalized)."""
    if root is None:
        if len(tables.roots) != 1:
            raise ValueError("forest has several roots; name one")
        root = tables.roots[0]
    if root not in tables.roots:
        raise ValueError(f"{root} is not a root")
    w = tables.up[root]
    return w / w.sum()


def _child_conditional(tables, v, parent_state):
    w = tables.up[v] * tables.expg[:, parent_state]
    total = w.sum()
    if total <= 0.0:
        raise BoundaryInfeasibleError(
            f"parent state {parent_state} leaves vertex {v} stuck")
    return w / total


def tree_law(tables):
    """Exact joint law of the block, as {config tuple: probability}.

    Configs are tuples aligned with tables.block (sorted vertex order).
    Exponential in the block size; meant for small blocks and oracles.
    """
    partial = [({}, 1.0)]
    for v in tables.order:
        if v in tables.parent:
            nxt = []
            for assign, p in partial:
                cond = _child_conditional(tables, v, assign[tables.parent[v]])
                for x in range(tables.model.q):
                    if cond[x] > 0.0:
                        a = dict(assign)
                        a[v] = x
                        nxt.append((a, p * cond[x]))
            partial = nxt
        else:
            law = tree_root_law(tables, v)
            nxt = []
            for assign, p in partial:
                for x in range(tables.model.q):
                    if law[x] > 0.0:
                        a = dict(assign)
                        a[v] = x
                        nxt.append((a, p * law[x]))
            partial = nxt
    out = {}
    for assign, p in partial:
        key = tuple(assign[v] for v in tables.block)
        out[key] = out.get(key, 0.0) + p
    return out


def tree_sample(tables, rng):
    """One exact sample of the block, as {vertex: state}."""
    out = {}
    for v in tables.order:
        if v in tables.parent:
            probs = _child_conditional(tables, v, out[tables.parent[v]])
        else:
            probs = tree_root_law(tables, v)
        out[v] = sample_index(probs.tolist(), rng.random())
    return out


def tree_sample_many(tables, count, seed):
    """``count`` independent exact samples, vectorized.

    Returns (matrix, order): matrix[k, i] is sample k's state at
    tables.order[i].  Uses a dedicated numpy generator derived from the
    seed, so results are reproducible but unrelated to the stdlib stream.
    """
    gen = np.random.Generator(np.random.PCG64(derive_seed(seed, "tree-batch")))
    q = tables.model.q
    order = tables.order
    col = {v: i for i, v in enumerate(order)}
    out = np.zeros((count, len(order)), dtype=np.int64)
    for v in order:
        u = gen.random(count)
        if v in tables.parent:
            cond = np.zeros((q, q))
            for xp in range(q):
                w = tables.up[v] * tables.expg[:, xp]
                t = w.sum()
                if t > 0.0:
                    cond[xp] = w / t
            cum = cond.cumsum(axis=1)
            rows = cum[out[:, col[tables.parent[v]]]]
            out[:, col[v]] = (u[:, None] < rows).argmax(axis=1)
        else:
            p = tree_root_law(tables, v)
            cum = p.cumsum()
            out[:, col[v]] = np.minimum(
                np.searchsorted(cum, u, side="right"), q - 1)
    return out, order


def batched_root_marginals(model, graph, block, root, boundary_vertices,
                           boundary_states):
    """Exact root marginals under many boundary assignments at once.

    ``boundary_states`` is a (batch, len(boundary_vertices)) int array.
    Returns (marginals, feasible): marginals is (batch, q) with rows
    normalized where feasible, zero rows otherwise; feasible is a boolean
    mask.  One upward sweep over the tree carries all batch rows.
    """
    block = tuple(sorted(set(block)))
    bset = set(block)
    bpos = {v: i for i, v in enumerate(boundary_vertices)}
    for v in block:
        for w in graph.adj[v]:
            if w not in bset and w not in bpos:
                raise ValueError(f"boundary vertex {w} missing from the list")
    roots, parent, children, order = _forest_structure(graph, block, (root,))
    exph, expg = _exp_tables(model)
    states = np.asarray(boundary_states)
    batch = states.shape[0]

    up = {}
    for v in reversed(order):
        w_v = np.broadcast_to(exph, (batch, model.q)).copy()
        for w in graph.adj[v]:
            if w in bset:
                continue
            w_v *= expg[states[:, bpos[w]], :]
        for c in children[v]:
            w_v *= up[c] @ expg
        mx = w_v.max(axis=1, keepdims=True)
        np.divide(w_v, mx, out=w_v, where=mx > 0.0)
        up[v] = w_v
    top = up[root]
    totals = top.sum(axis=1, keepdims=True)
    feasible = totals[:, 0] > 0.0
    marg = np.zeros_like(top)
    np.divide(top, totals, out=marg, where=totals > 0.0)
    return marg, feasible
