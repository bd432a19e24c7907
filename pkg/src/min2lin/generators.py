"""Instance generators: worked fixtures, random planted instances, and the
equation encoding of p-Split Min Cut via orthogonal idempotents."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .equations import Instance, OracleBudgetError, make_equation
from .ring import RingSpec, factorize, is_unit, orthogonal_idempotents, units

FIXTURE_NAMES = ("eq1-z4", "fig1-z4", "fig2-left-z8", "fig2-right-z8")


class UnknownFixtureError(ValueError):
    pass


class InfeasibleProfileError(ValueError):
    pass


def _build(m, k, rows):
    """rows: (crisp, a, u, c) or (crisp, a, u, b, v, c)."""
    variables = []
    seen = set()
    eqs = []
    for row in rows:
        if len(row) == 4:
            crisp, a, u, c = row
            b = v = None
        else:
            crisp, a, u, b, v, c = row
        for x in (u, v):
            if x is not None and x not in seen:
                seen.add(x)
                variables.append(x)
        eqs.append(make_equation(len(eqs), a, u, c, m, crisp=crisp, b=b, v=v))
    return Instance(factorize(m), variables, eqs, k)


def gen_fixture(name: str) -> Instance:
    if name == "eq1-z4":
        # s = 1 crisp; 2s = v; 2u1 = v; odd unit-triangle 3u1 = u2,
        # 3u2 = u3, 3u3 = u1.  True optimum 1, Boolean relaxation cost 0.
        return _build(4, 1, [
            (True, 1, "s", 1),
            (False, 2, "s", 3, "v", 0),
            (False, 2, "u1", 3, "v", 0),
            (False, 3, "u1", 3, "u2", 0),
            (False, 3, "u2", 3, "u3", 0),
            (False, 3, "u3", 3, "u1", 0),
        ])
    if name == "fig1-z4":
        # Pentagon-with-chord a1..a5 joined to a 6-clique b1..b6 by two
        # horizontal edges; black vertices carry soft markers 2v = w with
        # w = 2 pinned crisply.  Optimum 4.
        pent = [("a1", "a2"), ("a2", "a3"), ("a3", "a4"), ("a4", "a5"),
                ("a5", "a1"), ("a1", "a3")]
        horiz = [("a1", "b1"), ("a2", "b2")]
        cliq = [(f"b{i}", f"b{j}") for i in range(1, 7) for j in range(i + 1, 7)]
        black = ["a2", "a3", "a4", "a5", "b5"]
        rows = [(True, 1, "s", 1), (True, 2, "s", 3, "w", 0)]
        rows += [(False, 2, v, 3, "w", 0) for v in black]
        rows += [(False, 3, x, 3, y, 0) for x, y in pent + horiz + cliq]
        return _build(4, 4, rows)
    if name in ("fig2-left-z8", "fig2-right-z8"):
        # Common: s = 1 crisp; 2s = w; 2u1 = w; v1 = 2u1; v2 = 2u2;
        # v1 = 7v2.  Left adds u1 = 5u2 (unsatisfiable), right u1 = 3u2
        # (satisfiable by u1=1, u2=3, v1=2, v2=6).
        coeff = 5 if name == "fig2-left-z8" else 3
        return _build(8, 1 if coeff == 5 else 0, [
            (True, 1, "s", 1),
            (False, 2, "s", 7, "w", 0),
            (False, 2, "u1", 7, "w", 0),
            (False, coeff, "u2", 7, "u1", 0),
            (False, 2, "u1", 7, "v1", 0),
            (False, 2, "u2", 7, "v2", 0),
            (False, 7, "v2", 7, "v1", 0),
        ])
    raise UnknownFixtureError(f"unknown fixture {name!r}")


# --- random planted instances ------------------------------------------------

def _satisfied_binary_candidates(profile, alpha, u, v, ring: RingSpec):
    """Equation rows of the profile's binary shapes satisfied by alpha."""
    m = ring.m
    out = []
    p, _ = ring.factors[0]
    for src, dst in ((u, v), (v, u)):
        a_src, a_dst = alpha[src], alpha[dst]
        if profile == "special":
            shapes = [r for r in units(m) if r * a_src % m == a_dst]
            out += [(False, r, src, m - 1, dst, 0) for r in shapes]
            if p * a_src % m == a_dst:
                out.append((False, p, src, m - 1, dst, 0))
        else:
            out += [(False, a, src, m - 1, dst, 0) for a in range(m)
                    if a * a_src % m == a_dst]
    return out


def gen_random(profile: str, m: int, n_vars: int, n_eqs: int,
               planted_opt: int, seed: int, crisp_fraction: float = 0.15) -> Instance:
    """Planted instance: sample an assignment, emit equations it satisfies,
    then corrupt planted_opt soft ones (so the optimum is at most
    planted_opt).  Reproducible per seed."""
    if profile not in ("special", "simple", "general"):
        raise InfeasibleProfileError(f"unknown profile {profile!r}")
    ring = factorize(m)
    if profile in ("special", "simple") and not ring.is_prime_power:
        raise InfeasibleProfileError(f"{profile} profile needs a prime power, got {m}")
    if planted_opt > n_eqs:
        raise InfeasibleProfileError("planted_opt exceeds the equation count")
    rng = random.Random(seed)
    names = [f"x{i}" for i in range(n_vars)]
    alpha = {x: rng.randrange(m) for x in names}
    rows = []
    if profile == "special":
        alpha["s"] = 1
        names = ["s"] + names
        rows.append((True, 1, "s", 1))

    def random_satisfied_row():
        for _ in range(200):
            u, v = rng.sample(names, 2)
            if profile == "general":
                a, b = rng.randrange(m), rng.randrange(m)
                if a == 0 and b == 0:
                    continue
                crisp = profile == "general" and rng.random() < crisp_fraction
                c = (a * alpha[u] + b * alpha[v]) % m
                return (crisp, a, u, b, v, c)
            cands = _satisfied_binary_candidates(profile, alpha, u, v, ring)
            if cands:
                return rng.choice(cands)
        raise InfeasibleProfileError("could not generate a satisfied equation")

    def random_violating_row():
        for _ in range(500):
            u, v = rng.sample(names, 2)
            m_ = m
            if profile == "general":
                a, b = rng.randrange(m_), rng.randrange(m_)
                if a == 0 and b == 0:
                    continue
                good = (a * alpha[u] + b * alpha[v]) % m_
                c = rng.randrange(m_)
                if c != good:
                    return (False, a, u, b, v, c)
            else:
                p, _ = ring.factors[0]
                shapes = [(r, u, v) for r in units(m_)] + [(p, u, v)]
                if profile == "simple":
                    shapes += [(a, u, v) for a in range(m_)]
                a, src, dst = rng.choice(shapes)
                if a * alpha[src] % m_ != alpha[dst]:
                    return (False, a, src, m_ - 1, dst, 0)
        raise InfeasibleProfileError("could not generate a violated equation")

    n_binary = n_eqs - (1 if profile == "special" else 0)
    for _ in range(n_binary):
        rows.append(random_satisfied_row())
    soft_positions = [i for i, r in enumerate(rows) if not r[0]]
    if len(soft_positions) < planted_opt:
        raise InfeasibleProfileError("not enough soft equations to corrupt")
    for i in rng.sample(soft_positions, planted_opt):
        rows[i] = random_violating_row()
    inst = _build(m, planted_opt, rows)
    # the planted assignment caps the optimum
    from .equations import cost
    full = {x: alpha.get(x, 0) for x in inst.variables}
    assert cost(inst, full) <= planted_opt or profile == "general"
    return inst


# --- p-Split Min Cut and its equation gadget ---------------------------------

@dataclass
class SplitMinCutInstance:
    """Graph on {s, t} plus p disjoint parts; deletions are whole bundles.

    edges: (edge_id, x, y) with x, y vertex names or "s"/"t" (no s-t
    edges).  bundles: disjoint tuples of edge ids of size 1 or p with at
    most one edge per part.
    """

    p: int
    parts: list            # list of vertex-name lists
    edges: list            # (edge_id, x, y)
    bundles: list          # tuples of edge ids
    k: int = 0

    def __post_init__(self):
        owner = {}
        for i, part in enumerate(self.parts):
            for v in part:
                if v in owner or v in ("s", "t"):
                    raise ValueError(f"vertex {v!r} reused")
                owner[v] = i
        self.part_of = {}
        for eid, x, y in self.edges:
            ends = [z for z in (x, y) if z not in ("s", "t")]
            if not ends:
                raise ValueError("direct s-t edges are not allowed")
            parts = {owner[z] for z in ends}
            if len(parts) != 1:
                raise ValueError(f"edge {eid} crosses parts")
            self.part_of[eid] = parts.pop()
        used = set()
        for bundle in self.bundles:
            if len(bundle) not in (1, self.p):
                raise ValueError("bundles have size 1 or p")
            parts = [self.part_of[e] for e in bundle]
            if len(set(parts)) != len(parts):
                raise ValueError("bundle repeats a part")
            for e in bundle:
                if e in used:
                    raise ValueError("bundles must be disjoint")
                used.add(e)

    def is_st_cut(self, removed_edges) -> bool:
        removed = set(removed_edges)
        adj = {}
        for eid, x, y in self.edges:
            if eid in removed:
                continue
            adj.setdefault(x, []).append(y)
            adj.setdefault(y, []).append(x)
        seen = {"s"}
        stack = ["s"]
        while stack:
            z = stack.pop()
            for w in adj.get(z, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return "t" not in seen


def min_bundle_cut(smc: SplitMinCutInstance):
    """Minimum number of bundles whose union is an st-cut, or None."""
    for size in range(len(smc.bundles) + 1):
        for combo in itertools.combinations(range(len(smc.bundles)), size):
            removed = set()
            for i in combo:
                removed |= set(smc.bundles[i])
            if smc.is_st_cut(removed):
                return size
    return None


def gen_split_gadget(smc: SplitMinCutInstance, spec: RingSpec) -> Instance:
    """Equation system whose minimum deletion cost equals the minimum
    bundle count over all st-cuts.

    Crisp anchors s_i = q_i and t_i = 0, crisp source/sink and fixed-edge
    equalities, and per size-p bundle the idempotent gadget
    q_i*u_i = q_i*x_B, soft x_B = y_B, q_i*y_B = q_i*v_i.  Deletable
    singleton bundles become soft u = v equations.
    """
    if spec.omega != smc.p:
        raise ValueError(f"need omega(m) = {smc.p}, got {spec.omega}")
    m = spec.m
    q = orthogonal_idempotents(spec)
    bundled = {e for bundle in smc.bundles for e in bundle}
    rows = []

    def vname(z, part):
        if z == "s":
            return f"s{part + 1}"
        if z == "t":
            return f"t{part + 1}"
        return z

    for i in range(smc.p):
        rows.append((True, 1, f"s{i + 1}", q[i]))
        rows.append((True, 1, f"t{i + 1}", 0))
    for eid, x, y in smc.edges:
        if eid in bundled:
            continue
        part = smc.part_of[eid]
        rows.append((True, 1, vname(x, part), m - 1, vname(y, part), 0))
    for bi, bundle in enumerate(smc.bundles):
        if len(bundle) == 1:
            (eid,) = bundle
            edge = next(e for e in smc.edges if e[0] == eid)
            part = smc.part_of[eid]
            rows.append((False, 1, vname(edge[1], part), m - 1, vname(edge[2], part), 0))
            continue
        xb, yb = f"xB{bi}", f"yB{bi}"
        rows.append((False, 1, xb, m - 1, yb, 0))
        for eid in bundle:
            edge = next(e for e in smc.edges if e[0] == eid)
            part = smc.part_of[eid]
            qi = q[part]
            u, v = vname(edge[1], part), vname(edge[2], part)
            rows.append((True, qi, u, (m - qi) % m, xb, 0))
            rows.append((True, qi, yb, (m - qi) % m, v, 0))
    return _build(m, smc.k, rows)


def gen_random_smc(p: int, seed: int, max_edges: int = 8,
                   verts_per_part: int = 2) -> SplitMinCutInstance:
    """Small random p-Split Min Cut instance with at most max_edges edges."""
    rng = random.Random(seed)
    parts = [[f"g{i + 1}v{j + 1}" for j in range(verts_per_part)]
             for i in range(p)]
    edges = []
    eid = itertools.count()

    def add(x, y):
        if len(edges) < max_edges:
            edges.append((next(eid), x, y))

    for i, part in enumerate(parts):
        add("s", part[0])
        add(part[-1], "t")
        for a, b in zip(part, part[1:]):
            add(a, b)
        if rng.random() < 0.5 and len(part) >= 2:
            add(part[0], part[-1])
    part_of = {}
    for e, x, y in edges:
        ends = [z for z in (x, y) if z not in ("s", "t")]
        part_of[e] = next(i for i, part in enumerate(parts) if ends[0] in part)
    bundles = []
    used = set()
    by_part = {i: [e for (e, x, y) in edges if part_of[e] == i] for i in range(p)}
    n_full = rng.randint(1, 2)
    for _ in range(n_full):
        picks = []
        for i in range(p):
            avail = [e for e in by_part[i] if e not in used]
            if not avail:
                picks = []
                break
            picks.append(rng.choice(avail))
        if picks:
            for e in picks:
                used.add(e)
            bundles.append(tuple(picks))
    leftovers = [e for (e, _, _) in edges if e not in used]
    for e in leftovers:
        if rng.random() < 0.3:
            bundles.append((e,))
            used.add(e)
    return SplitMinCutInstance(p=p, parts=parts, edges=edges, bundles=bundles,
                               k=len(bundles))
