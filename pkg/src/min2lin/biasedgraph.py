"""Group-labelled graphs as biased graphs.

A GroupLabelledGraph carries oriented-edge labels in the unit group of
Z_q; a cycle is balanced when its ordered label product is 1 mod q.
Balance checking uses spanning-tree potentials and yields either a
consistent vertex labelling or a concrete unbalanced cycle.  Minimum
cleaning sets branch on witness cycles; important vertex subsets are
enumerated exhaustively with domination filtering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ring import is_unit, unit_inverse


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GroupLabelledGraph:
    """Multigraph with unit labels mod q; gamma(e, v, u) = gamma(e, u, v)^-1."""

    q: int
    vertices: tuple
    edges: tuple  # (edge_id, u, v, label) with label = gamma(e, u, v)

    def __post_init__(self):
        vset = set(self.vertices)
        ids = set()
        for eid, u, v, lab in self.edges:
            if u == v:
                raise GraphError(f"self-loop on {u!r} not supported")
            if u not in vset or v not in vset:
                raise GraphError(f"edge {eid} touches undeclared vertex")
            if not is_unit(lab, self.q):
                raise GraphError(f"label {lab} of edge {eid} is not a unit mod {self.q}")
            if eid in ids:
                raise GraphError(f"duplicate edge id {eid}")
            ids.add(eid)

    def label(self, eid, u, v):
        """gamma(e, u, v) for an orientation of edge eid."""
        e = self.edge_map()[eid]
        if (u, v) == (e[1], e[2]):
            return e[3]
        if (u, v) == (e[2], e[1]):
            return unit_inverse(e[3], self.q)
        raise GraphError(f"edge {eid} does not join {u!r} and {v!r}")

    def edge_map(self):
        if not hasattr(self, "_edge_map"):
            object.__setattr__(self, "_edge_map", {e[0]: e for e in self.edges})
        return self._edge_map

    def adjacency(self, vertex_set=None, removed=frozenset()):
        """vertex -> list of (edge_id, neighbour, label-out) within vertex_set."""
        vs = set(self.vertices if vertex_set is None else vertex_set)
        adj = {v: [] for v in vs}
        for eid, u, v, lab in self.edges:
            if eid in removed or u not in vs or v not in vs:
                continue
            adj[u].append((eid, v, lab))
            adj[v].append((eid, u, unit_inverse(lab, self.q)))
        return adj

    def boundary(self, X) -> set:
        """delta(X): ids of edges with exactly one endpoint in X."""
        X = set(X)
        return {eid for eid, u, v, _ in self.edges if (u in X) != (v in X)}

    def induced_edge_ids(self, X) -> set:
        X = set(X)
        return {eid for eid, u, v, _ in self.edges if u in X and v in X}

    def neighbourhood(self, X) -> set:
        X = set(X)
        out = set()
        for eid, u, v, _ in self.edges:
            if u in X and v not in X:
                out.add(v)
            elif v in X and u not in X:
                out.add(u)
        return out

    def components(self, vertex_set=None, removed=frozenset()):
        adj = self.adjacency(vertex_set, removed)
        seen = set()
        comps = []
        for start in adj:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            seen.add(start)
            while stack:
                x = stack.pop()
                for _, y, _ in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        comp.add(y)
                        stack.append(y)
            comps.append(comp)
        return comps


@dataclass(frozen=True)
class BalancedCertificate:
    """Consistent labelling: lam(v) = gamma(e, u, v) * lam(u) on every edge."""

    labelling: dict

    def verify(self, g: GroupLabelledGraph, vertex_set, removed=frozenset()) -> bool:
        lam = self.labelling
        for eid, u, v, lab in g.edges:
            if eid in removed or u not in vertex_set or v not in vertex_set:
                continue
            if lam[v] % g.q != lab * lam[u] % g.q:
                return False
        return True


@dataclass(frozen=True)
class ImportantSubset:
    vertex_set: frozenset
    cost: int
    cleaning: frozenset  # edge ids within G[X] whose removal balances it


def cycle_balanced(g: GroupLabelledGraph, cycle) -> bool:
    """cycle: sequence of (edge_id, u, v) oriented steps forming a closed walk."""
    if not cycle:
        raise GraphError("empty cycle")
    prod = 1
    for i, (eid, u, v) in enumerate(cycle):
        nxt = cycle[(i + 1) % len(cycle)]
        if nxt[1] != v:
            raise GraphError("steps do not form a closed walk")
        prod = prod * g.label(eid, u, v) % g.q
    return prod == 1


def check_balanced(g: GroupLabelledGraph, vertex_set=None, removed=frozenset()):
    """(True, BalancedCertificate) or (False, witness unbalanced cycle).

    Spanning-tree potentials per component: root gets 1, tree edges
    propagate labels, and the first failing non-tree edge closes a witness
    cycle through tree paths.
    """
    if vertex_set is None:
        vertex_set = set(g.vertices)
    vertex_set = set(vertex_set)
    removed = set(removed)
    adj = g.adjacency(vertex_set, removed)
    lam = {}
    parent = {}
    for root in sorted(adj, key=str):
        if root in lam:
            continue
        lam[root] = 1
        parent[root] = None
        queue = [root]
        order = []
        while queue:
            x = queue.pop(0)
            order.append(x)
            for eid, y, lab_out in adj[x]:
                if y not in lam:
                    lam[y] = lab_out * lam[x] % g.q
                    parent[y] = (x, eid)
                    queue.append(y)
        used_tree = {parent[x][1] for x in order if parent[x] is not None}
        for x in order:
            for eid, y, lab_out in adj[x]:
                if eid in used_tree:
                    continue
                if lam[y] != lab_out * lam[x] % g.q:
                    return False, _close_cycle(x, y, eid, parent)
    return True, BalancedCertificate(labelling=lam)


def _close_cycle(x, y, eid, parent):
    """Witness cycle: tree path y -> x plus the failing edge x -> y."""
    def path_to_root(a):
        out = [a]
        while parent[a] is not None:
            a = parent[a][0]
            out.append(a)
        return out

    px, py = path_to_root(x), path_to_root(y)
    sx, sy = set(px), set(py)
    meet = next(a for a in px if a in sy)
    steps = []
    a = y
    while a != meet:
        pa, pe = parent[a]
        steps.append((pe, a, pa))
        a = pa
    down = []
    a = x
    while a != meet:
        pa, pe = parent[a]
        down.append((pe, pa, a))
        a = pa
    steps.extend(reversed(down))
    steps.append((eid, x, y))
    return tuple(steps)


def subgraph_cost(g: GroupLabelledGraph, X, kept_edges) -> int:
    """|delta(X)| plus induced edges of G[X] absent from kept_edges."""
    kept = set(kept_edges)
    induced = g.induced_edge_ids(X)
    if not kept <= induced:
        raise GraphError("kept edges must lie inside G[X]")
    return len(g.boundary(X)) + len(induced - kept)


def min_cleaning_set(g: GroupLabelledGraph, X, budget: int):
    """Minimum-cardinality F with G[X] - F balanced, if of size <= budget.

    Iterative deepening; at each node branch on the edges of a witness
    unbalanced cycle (every cleaning set must hit every unbalanced cycle).
    """
    X = set(X)

    def search(removed, depth):
        if frozenset(removed) in seen:
            return None
        seen.add(frozenset(removed))
        ok, cert = check_balanced(g, X, removed)
        if ok:
            return set(removed)
        if depth == 0:
            return None
        for eid, _, _ in cert:
            got = search(removed | {eid}, depth - 1)
            if got is not None:
                return got
        return None

    for size in range(budget + 1):
        seen = set()
        got = search(frozenset(), size)
        if got is not None:
            ok, cert = check_balanced(g, X, got)
            assert ok and cert.verify(g, X, got)
            return got
    return None


def _connected_subsets(g: GroupLabelledGraph, within):
    """(X, boundary-size) for every nonempty X within `within` with G[X]
    connected.  The boundary count is maintained incrementally: adding y
    turns its edges into X from boundary to internal and its other edges
    into new boundary."""
    verts = sorted(within, key=str)
    pos = {v: i for i, v in enumerate(verts)}
    adj = g.adjacency(within)
    deg = {v: len(adj[v]) for v in verts}
    out = []

    def grow(current, boundary, banned):
        out.append((frozenset(current), boundary))
        cand = sorted({y for x in current for _, y, _ in adj[x]
                       if y not in current and y not in banned}, key=str)
        local_ban = set(banned)
        for y in cand:
            into = sum(1 for _, z, _ in adj[y] if z in current)
            grow(current | {y}, boundary - into + (deg[y] - into), local_ban)
            local_ban.add(y)

    for i, v in enumerate(verts):
        grow({v}, deg[v], {u for u in verts if pos[u] < i})
    return out


def important_subsets(g: GroupLabelledGraph, k: int, within=None):
    """All important connected vertex subsets of cost <= k (restricted to
    `within` when given), each with a minimum cleaning set."""
    within = set(g.vertices) if within is None else set(within)
    costed = {}
    for X, boundary in _connected_subsets(g, within):
        if boundary > k:
            continue
        cleaning = min_cleaning_set(g, X, k - boundary)
        if cleaning is not None:
            costed[X] = (boundary + len(cleaning), frozenset(cleaning))
    out = []
    for X, (cx, fx) in costed.items():
        dominated = False
        for Y, (cy, _) in costed.items():
            if X != Y and X <= Y and cy <= cx:
                dominated = True
                break
        if not dominated:
            out.append(ImportantSubset(vertex_set=X, cost=cx, cleaning=fx))
    out.sort(key=lambda s: (s.cost, sorted(map(str, s.vertex_set))))
    return out


def enumerate_important_subsets(g: GroupLabelledGraph, v, k: int):
    """The family X_v: important connected subsets containing v of cost <= k.

    Its size is at most 4^k; violations raise, so the bound is asserted on
    every call.
    """
    comp = next(c for c in g.components() if v in c)
    fam = [s for s in important_subsets(g, k, within=comp) if v in s.vertex_set]
    if len(fam) > 4**k:
        raise AssertionError(f"|X_v| = {len(fam)} exceeds 4^{k}")
    return fam


def theta_subgraphs(g: GroupLabelledGraph, limit=None):
    """Triples of internally vertex-disjoint paths between two vertices.

    Each path is a tuple of oriented steps (edge_id, u, v).  Intended for
    small graphs only.
    """
    adj = g.adjacency()
    verts = sorted(g.vertices, key=str)
    found = []
    for a, b in itertools.combinations(verts, 2):
        paths = []

        def extend(x, steps, inner):
            if x == b:
                paths.append(tuple(steps))
                return
            for eid, y, _ in adj[x]:
                if y == a or (y != b and y in inner) or any(s[0] == eid for s in steps):
                    continue
                extend(y, steps + [(eid, x, y)], inner | ({y} if y != b else set()))

        extend(a, [], set())
        for trio in itertools.combinations(paths, 3):
            inner_sets = [{s[2] for s in p if s[2] != b} for p in trio]
            edge_sets = [{s[0] for s in p} for p in trio]
            if any(inner_sets[i] & inner_sets[j] or edge_sets[i] & edge_sets[j]
                   for i, j in itertools.combinations(range(3), 2)):
                continue
            found.append((a, b, trio))
            if limit is not None and len(found) >= limit:
                return found
    return found


def theta_cycle_balance(g: GroupLabelledGraph, theta):
    """Balance flags of the three cycles of a theta subgraph."""
    a, b, (p1, p2, p3) = theta
    flags = []
    for first, second in ((p1, p2), (p1, p3), (p2, p3)):
        back = tuple((eid, v, u) for eid, u, v in reversed(second))
        flags.append(cycle_balanced(g, first + back))
    return flags
