"""Bijunctive MinSat with parameter k.

two_sat is implication-graph + strongly connected components, with
conflict paths recovered by breadth-first search.  solve_minsat keeps a
set of soft constraints, runs 2-SAT on crisp plus kept clauses, and on a
conflict branches on deleting each soft constraint whose clauses appear
on the conflict path; a crisp-only conflict is a global No.  Complete
because every solution must delete a soft constraint from every conflict.
"""

from __future__ import annotations

import itertools

import numpy as np

from .boolrelax import BoolInstance


class UnsupportedRelationError(ValueError):
    """Constraint with clauses longer than 2 literals."""


class TooLargeError(RuntimeError):
    pass


def _lit_node(lit: int) -> int:
    v = abs(lit) - 1
    return 2 * v + (0 if lit > 0 else 1)


def _node_lit(node: int) -> int:
    v = node // 2 + 1
    return v if node % 2 == 0 else -v


def two_sat(clauses, n_vars=None):
    """("sat", model) or ("unsat", (literal, path)).

    model is a list of booleans.  path is a list of (from_literal,
    to_literal, clause_index) arcs forming a derivation literal => -literal
    => literal; its clause indices replay to a genuine contradiction.
    """
    clauses = list(clauses)
    if n_vars is None:
        n_vars = max((abs(l) for cl in clauses for l in cl), default=0)
    n_nodes = 2 * n_vars
    adj = [[] for _ in range(n_nodes)]
    for idx, cl in enumerate(clauses):
        if len(cl) == 1:
            (a,) = cl
            adj[_lit_node(-a)].append((_lit_node(a), idx))
        elif len(cl) == 2:
            a, b = cl
            adj[_lit_node(-a)].append((_lit_node(b), idx))
            adj[_lit_node(-b)].append((_lit_node(a), idx))
        else:
            raise UnsupportedRelationError(f"clause {cl} is not a 1/2-clause")

    comp = _tarjan(adj)
    for v in range(n_vars):
        if comp[2 * v] == comp[2 * v + 1]:
            lit = v + 1
            path = _implication_path(adj, _lit_node(lit), _lit_node(-lit))
            path += _implication_path(adj, _lit_node(-lit), _lit_node(lit))
            return "unsat", (lit, path)
    # Tarjan numbers components in reverse topological order, so a literal
    # is set true when its component comes later (smaller id means later
    # completion is false; larger id completes earlier).
    model = [comp[2 * v] < comp[2 * v + 1] for v in range(n_vars)]
    for cl in clauses:
        assert any((l > 0) == model[abs(l) - 1] for l in cl), "2-SAT model broken"
    return "sat", model


def _tarjan(adj):
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack = []
    counter = itertools.count()
    comp_counter = itertools.count()
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = next(counter)
                stack.append(node)
                on_stack[node] = True
            advanced = False
            while ei < len(adj[node]):
                nxt = adj[node][ei][0]
                ei += 1
                if index[nxt] == -1:
                    work[-1] = (node, ei)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work[-1] = (node, ei)
            if low[node] == index[node]:
                cid = next(comp_counter)
                while True:
                    x = stack.pop()
                    on_stack[x] = False
                    comp[x] = cid
                    if x == node:
                        break
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comp


def _implication_path(adj, start, goal):
    """BFS arc path start -> goal in the implication graph."""
    prev = {start: None}
    queue = [start]
    while queue:
        x = queue.pop(0)
        if x == goal:
            break
        for y, idx in adj[x]:
            if y not in prev:
                prev[y] = (x, idx)
                queue.append(y)
    if goal not in prev:
        raise AssertionError("no implication path inside conflicting component")
    arcs = []
    x = goal
    while prev[x] is not None:
        px, idx = prev[x]
        arcs.append((_node_lit(px), _node_lit(x), idx))
        x = px
    arcs.reverse()
    return arcs


def replay_conflict(clauses, conflict) -> bool:
    """Check that the reported clause ids really derive lit => -lit => lit."""
    lit, path = conflict
    if not path:
        return False
    cur = path[0][0]
    if cur != lit:
        return False
    for frm, to, idx in path:
        if frm != cur:
            return False
        cl = clauses[idx]
        # the arc frm -> to comes from a clause containing -frm and to
        if -frm not in cl or to not in cl:
            return False
        cur = to
    return cur == lit


def _solver_clauses(b: BoolInstance, deleted: frozenset):
    """(clauses, tags): crisp cores plus kept soft cores; tag is the soft
    constraint index or None for crisp."""
    clauses = []
    tags = []
    for ci, c in enumerate(b.constraints):
        if c.crisp:
            for cl in c.core:
                clauses.append(cl)
                tags.append(None)
        elif ci not in deleted:
            for cl in c.core:
                clauses.append(cl)
                tags.append(ci)
    return clauses, tags


def solve_minsat(b: BoolInstance, k: int):
    """("yes", beta, violated_ids) iff some assignment violates at most k
    soft constraints and no crisp one, else ("no", None, None).  Complete
    search; the returned assignment is re-verified by direct evaluation."""
    n_vars = len(b.variables)
    for c in b.constraints:
        for cl in c.clauses:
            if len(cl) > 2:
                raise UnsupportedRelationError("non-bijunctive constraint")
    memo = {}

    def branch(deleted: frozenset, depth: int):
        prior = memo.get(deleted)
        if prior is not None and prior >= depth:
            return None
        clauses, tags = _solver_clauses(b, deleted)
        status, payload = two_sat(clauses, n_vars)
        if status == "sat":
            return payload
        _, path = payload
        conflict_softs = sorted({tags[idx] for _, _, idx in path
                                 if tags[idx] is not None})
        if not conflict_softs:
            raise _CrispConflict()
        if depth > 0:
            for ci in conflict_softs:
                got = branch(deleted | {ci}, depth - 1)
                if got is not None:
                    return got
        memo[deleted] = depth
        return None

    try:
        model = branch(frozenset(), k)
    except _CrispConflict:
        return "no", None, None
    if model is None:
        return "no", None, None
    beta = list(model)
    violated = {ci for ci, c in enumerate(b.constraints) if c.violated_by(beta)}
    assert not any(b.constraints[ci].crisp for ci in violated)
    assert len(violated) <= k
    return "yes", beta, violated


class _CrispConflict(Exception):
    pass


def minsat_optimum(b: BoolInstance, k_max: int):
    """Smallest number of violated soft constraints achievable, up to k_max;
    returns (cost, beta) or (None, None) when even k_max is not enough."""
    for k in range(k_max + 1):
        status, beta, violated = solve_minsat(b, k)
        if status == "yes":
            return len(violated), beta
    return None, None


def exhaustive_minsat(b: BoolInstance, k: int):
    """Same contract as solve_minsat, by enumeration over all assignments."""
    n = len(b.variables)
    if n > 22:
        raise TooLargeError(f"{n} Boolean variables is too large to enumerate")
    total = 1 << n
    cols = [((np.arange(total, dtype=np.int64) >> j) & 1).astype(bool)
            for j in range(n)]

    def clause_arr(cl):
        out = np.zeros(total, dtype=bool)
        for lit in cl:
            out |= cols[abs(lit) - 1] if lit > 0 else ~cols[abs(lit) - 1]
        return out

    ok_crisp = np.ones(total, dtype=bool)
    costs = np.zeros(total, dtype=np.int64)
    for c in b.constraints:
        sat = np.ones(total, dtype=bool)
        for cl in c.clauses:
            sat &= clause_arr(cl)
        if c.crisp:
            ok_crisp &= sat
        else:
            costs += ~sat
    if not ok_crisp.any():
        return "no", None, None
    costs_masked = np.where(ok_crisp, costs, np.iinfo(np.int64).max)
    j = int(np.argmin(costs_masked))
    if costs_masked[j] > k:
        return "no", None, None
    beta = [bool((j >> i) & 1) for i in range(n)]
    violated = {ci for ci, c in enumerate(b.constraints) if c.violated_by(beta)}
    return "yes", beta, violated


# --- Gaifman graphs of bijunctive relations ---------------------------------

class NotBijunctiveError(ValueError):
    pass


def complete_formula(relation, arity):
    """All 1/2-clauses derivable from pairwise projections of the relation
    (the unique complete bijunctive formula when the relation is
    bijunctive)."""
    relation = set(relation)
    if not relation:
        raise NotBijunctiveError("empty relation")
    clauses = []
    for i in range(arity):
        for j in range(i + 1, arity):
            proj = {(t[i], t[j]) for t in relation}
            if (0, 0) not in proj:
                clauses.append((i + 1, j + 1))
            if (0, 1) not in proj:
                clauses.append((-(i + 1), j + 1))
            if (1, 0) not in proj:
                clauses.append((i + 1, -(j + 1)))
            if (1, 1) not in proj:
                clauses.append((-(i + 1), -(j + 1)))
    if arity == 1:
        vals = {t[0] for t in relation}
        if vals == {1}:
            clauses.append((1,))
        elif vals == {0}:
            clauses.append((-1,))
    return clauses


def gaifman_2k2_check(relation, arity=None, candidates=None) -> bool:
    """True iff the relation is bijunctive with a 2K2-free Gaifman graph.

    The relation must equal the satisfying set of its complete formula;
    otherwise NotBijunctiveError.  For arity > 16 the caller must supply
    `candidates`, a superset of the formula's satisfying assignments (for
    encoder constraints, the product of per-variable domain assignments
    works because the complete formula subsumes the domain clauses).
    """
    relation = {tuple(t) for t in relation}
    if arity is None:
        arity = len(next(iter(relation)))
    clauses = complete_formula(relation, arity)

    def sat(t):
        return all(any((t[abs(l) - 1] == 1) == (l > 0) for l in cl) for cl in clauses)

    for t in relation:
        if not sat(t):
            raise AssertionError("complete formula rejects a relation tuple")
    if candidates is None:
        if arity > 16:
            raise TooLargeError("arity > 16 needs an explicit candidate set")
        candidates = itertools.product((0, 1), repeat=arity)
    for t in candidates:
        if sat(tuple(t)) and tuple(t) not in relation:
            raise NotBijunctiveError("complete formula accepts a non-member")

    edge_set = {frozenset((abs(cl[0]), abs(cl[1]))) for cl in clauses
                if len(cl) == 2 and abs(cl[0]) != abs(cl[1])}
    edges = [tuple(e) for e in edge_set]
    for e1, e2 in itertools.combinations(edges, 2):
        if set(e1) & set(e2):
            continue
        if not any(frozenset((a, b)) in edge_set for a in e1 for b in e2):
            return False
    return True
