"""Boolean coset relaxation of special instances.

Every source variable v gets one Boolean variable per coset S(s, l, i) of
Z_{p^d} (singletons included); crisp clauses K(v) encode the laminar
containment structure, each equation becomes a bijunctive constraint, and
a finite-cost Boolean assignment picks, per variable, either nothing
(value 0) or a unique maximal coset.  Assignments that pick a non-singleton
maximal coset are ambiguous; the disambiguation step resolves them using
consistent labellings of the cover-cleaned auxiliary graphs without
increasing the cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .biasedgraph import check_balanced
from .equations import SpecialInstance
from .ring import (Coset, all_cosets, coset_relation, coset_value, order,
                   suffix, unit_inverse, units,
                   DISJOINT, PROPER_SUBSET, PROPER_SUPERSET)


class NotFiniteCostError(ValueError):
    """Boolean assignment violates a crisp constraint."""


class StillAmbiguousError(ValueError):
    """debool needs an unambiguous assignment."""


class InconsistentCoverDataError(RuntimeError):
    """Cover annotation contradicts the structure the soundness argument
    guarantees; indicates corrupted cover data."""


@dataclass(frozen=True)
class BoolVar:
    source: str
    coset: Coset

    def sort_key(self):
        return (self.source, self.coset.order, self.coset.suffix_len, self.coset.suffix)


@dataclass(frozen=True)
class BoolConstraint:
    """Conjunction of 1/2-clauses; literals are +-(index + 1).

    clauses is the full relation (including the K parts for equation
    constraints); core drops clauses already enforced crisply elsewhere,
    and is what the solver feeds to the 2-SAT engine for soft constraints.
    """

    clauses: tuple
    core: tuple
    crisp: bool
    origin: str
    eq_id: int | None = None

    def violated_by(self, beta) -> bool:
        return any(not _clause_sat(cl, beta) for cl in self.clauses)


def _clause_sat(clause, beta) -> bool:
    for lit in clause:
        val = beta[abs(lit) - 1]
        if (lit > 0) == bool(val):
            return True
    return False


@dataclass
class BoolInstance:
    p: int
    d: int
    source_vars: list
    variables: list          # BoolVar, index order
    index: dict              # BoolVar -> int
    constraints: list        # BoolConstraint
    k: int

    @property
    def q(self) -> int:
        return self.p**self.d

    def var_index(self, source, coset: Coset) -> int:
        return self.index[BoolVar(source, coset)]

    def singleton_index(self, source, value: int) -> int:
        i = order(value, self.p, self.d)
        if i == self.d:
            raise ValueError("value 0 has no Boolean variable")
        return self.var_index(source, Coset(i, self.d - i, value // self.p**i))

    def vars_of(self, source) -> list:
        return [j for j, bv in enumerate(self.variables) if bv.source == source]

    def with_extra(self, extra_constraints) -> "BoolInstance":
        return BoolInstance(self.p, self.d, self.source_vars, self.variables,
                            self.index, self.constraints + list(extra_constraints),
                            self.k)


def _k_clauses(b: BoolInstance, v) -> list:
    """Laminar-family clauses for B(v): negative clause per disjoint pair,
    implication per proper containment."""
    cosets = all_cosets(b.p, b.d)
    out = []
    for x in range(len(cosets)):
        for y in range(x + 1, len(cosets)):
            rel = coset_relation(cosets[x], cosets[y], b.p, b.d)
            ix = b.var_index(v, cosets[x])
            iy = b.var_index(v, cosets[y])
            if rel == DISJOINT:
                out.append((-(ix + 1), -(iy + 1)))
            elif rel == PROPER_SUBSET:
                out.append((-(ix + 1), iy + 1))
            elif rel == PROPER_SUPERSET:
                out.append((-(iy + 1), ix + 1))
    return out


def encode(special: SpecialInstance) -> BoolInstance:
    """bool(I): crisp K(v) per variable, a crisp unit clause for s = 1, and
    one constraint per equation combining the K parts with the equation's
    biconditional family."""
    inst = special.instance
    p, d = inst.ring.factors[0]
    cosets = all_cosets(p, d)
    variables = []
    index = {}
    for v in inst.variables:
        for c in cosets:
            bv = BoolVar(v, c)
            index[bv] = len(variables)
            variables.append(bv)
    b = BoolInstance(p, d, list(inst.variables), variables, index, [], inst.k)

    kc = {v: tuple(_k_clauses(b, v)) for v in inst.variables}
    for v in inst.variables:
        b.constraints.append(BoolConstraint(
            clauses=kc[v], core=kc[v], crisp=True, origin=f"domain:{v}"))

    s_eq = next(eq for eq in inst.equations if eq.v is None)
    s_clause = ((b.singleton_index(special.svar, 1) + 1,),)
    b.constraints.append(BoolConstraint(
        clauses=s_clause, core=s_clause, crisp=True,
        origin=f"eq:{s_eq.id}", eq_id=s_eq.id))

    for eq_id, r, u, v, crisp in special.unit_eqs:
        core = []
        for i in range(d):
            for l in range(1, d - i + 1):
                for a in units(p**l):
                    bnew = a * r % p**l
                    if bnew % p == 0:
                        raise AssertionError("unit times unit must stay a unit")
                    iu = b.var_index(u, Coset(i, l, a))
                    iv = b.var_index(v, Coset(i, l, bnew))
                    core.append((-(iu + 1), iv + 1))
                    core.append((-(iv + 1), iu + 1))
        core = tuple(core)
        b.constraints.append(BoolConstraint(
            clauses=kc[u] + kc[v] + core, core=core, crisp=crisp,
            origin=f"eq:{eq_id}", eq_id=eq_id))

    for eq_id, u, v, crisp in special.p_eqs:
        core = []
        for l in range(1, d + 1):
            for a in units(p**l):
                core.append((-(b.var_index(v, Coset(0, l, a)) + 1),))
        for i in range(d):
            for l in range(1, d - i):
                for a in units(p**l):
                    iu = b.var_index(u, Coset(i, l, a))
                    iv = b.var_index(v, Coset(i + 1, l, a))
                    core.append((-(iu + 1), iv + 1))
                    core.append((-(iv + 1), iu + 1))
        core = tuple(core)
        b.constraints.append(BoolConstraint(
            clauses=kc[u] + kc[v] + core, core=core, crisp=crisp,
            origin=f"eq:{eq_id}", eq_id=eq_id))
    return b


def lift(b: BoolInstance, alpha) -> list:
    """Boolean image of a ring assignment: value 0 maps to all-false,
    a nonzero value to its singleton plus the cosets containing it."""
    beta = [False] * len(b.variables)
    for v in b.source_vars:
        val = alpha[v] % b.q
        if val == 0:
            continue
        i = order(val, b.p, b.d)
        for l in range(1, b.d - i + 1):
            beta[b.var_index(v, Coset(i, l, suffix(val, b.p, b.d, l)))] = True
    return beta


ZERO = "zero"
UNAMBIGUOUS = "unambiguous"
AMBIGUOUS = "ambiguous"


def classify(b: BoolInstance, beta, v):
    """(ZERO, None), (UNAMBIGUOUS, value), or (AMBIGUOUS, (order, suffix,
    weight)) for source variable v; beta must satisfy K(v)."""
    true_vars = [b.variables[j] for j in b.vars_of(v) if beta[j]]
    if not true_vars:
        return ZERO, None
    best = max(true_vars, key=lambda bv: bv.coset.suffix_len)
    c = best.coset
    expected = {BoolVar(v, Coset(c.order, l, c.suffix % b.p**l))
                for l in range(1, c.suffix_len + 1)}
    if set(true_vars) != expected:
        raise NotFiniteCostError(f"K({v}) violated: not an upward-closed coset choice")
    if c.is_singleton(b.d):
        return UNAMBIGUOUS, coset_value(c, b.p, b.d)
    return AMBIGUOUS, (c.order, c.suffix, c.suffix_len)


def ord_suff_wgt(b: BoolInstance, beta, v):
    """(order, suffix, weight) of v under beta, with value-0 conventions
    (order d, no suffix)."""
    kind, data = classify(b, beta, v)
    if kind == ZERO:
        return b.d, None, None
    if kind == UNAMBIGUOUS:
        val = data
        i = order(val, b.p, b.d)
        return i, val // b.p**i, b.d - i
    return data


def boolean_cost(b: BoolInstance, beta):
    bad_soft = 0
    for c in b.constraints:
        if c.violated_by(beta):
            if c.crisp:
                return float("inf")
            bad_soft += 1
    return bad_soft


def violated_equations(b: BoolInstance, beta) -> set:
    """Equation ids whose Boolean constraint beta violates."""
    return {c.eq_id for c in b.constraints
            if c.eq_id is not None and c.violated_by(beta)}


def annotate(b: BoolInstance, covers) -> BoolInstance:
    """I+: crisp level annotations from a cover run.

    Per level i: variables outside S_i lose their order-i cosets; variables
    in T_i with drawn unit s_v are forced to the concrete value
    g_v = s_v * p^i whenever they take an order-i coset compatible with
    s_v, and banned from incompatible ones.
    """
    p, d = b.p, b.d
    extra = []
    for lvl in covers.levels:
        i = lvl.i
        for v in b.source_vars:
            if v not in lvl.s_set:
                clauses = tuple((-(b.var_index(v, Coset(i, 1, a)) + 1),)
                                for a in units(p))
                extra.append(BoolConstraint(
                    clauses=clauses, core=clauses, crisp=True,
                    origin=f"annot:{i}:outside:{v}"))
        for v, s_v in sorted(lvl.guesses.items(), key=lambda t: str(t[0])):
            g_index = b.var_index(v, Coset(i, d - i, s_v))
            clauses = []
            for l in range(1, d - i + 1):
                for a in units(p**l):
                    j = b.var_index(v, Coset(i, l, a))
                    if a == s_v % p**l:
                        if j != g_index:
                            clauses.append((-(j + 1), g_index + 1))
                    else:
                        clauses.append((-(j + 1),))
            clauses = tuple(clauses)
            extra.append(BoolConstraint(
                clauses=clauses, core=clauses, crisp=True,
                origin=f"annot:{i}:guess:{v}={s_v}"))
    return b.with_extra(extra)


def disambiguate(b: BoolInstance, beta, covers):
    """Extend a finite-cost assignment on I+ until no variable is ambiguous,
    never breaking a constraint the input satisfied.

    Levels are processed in increasing ambiguity weight.  Each pass takes
    the cover-cleaned auxiliary graph at level d - l - 1, removes the edges
    of currently violated equations, computes a consistent labelling of the
    surviving subgraph, and uses one group element per connected component
    to pick concrete longer suffixes for its l-ambiguous variables.
    """
    p, d = b.p, b.d
    beta = list(beta)
    if any(c.crisp and c.violated_by(beta) for c in b.constraints):
        raise NotFiniteCostError("crisp constraint violated")
    violated_before = {id(c) for c in b.constraints if c.violated_by(beta)}
    passes = []

    while True:
        amb = {}
        for v in b.source_vars:
            kind, data = classify(b, beta, v)
            if kind == AMBIGUOUS:
                amb[v] = data
        if not amb:
            break
        l = min(w for (_, _, w) in amb.values())
        level_index = d - l - 1
        lvl = covers.levels[level_index]
        aux = lvl.aux
        z_now = violated_equations(b, beta)
        removed = set(lvl.cover.edge_set)
        for eq_id in z_now:
            removed |= aux.edges_of.get(eq_id, set())
        sprime = {node for node in lvl.cover.vertex_set
                  if node[0] in covers.levels[node[1]].s_set}
        ok, cert = check_balanced(aux.graph, sprime, removed)
        if not ok:
            raise InconsistentCoverDataError("cover-cleaned level graph is unbalanced")
        lam = cert.labelling
        modulus = p ** (l + 1)

        comps = aux.graph.components(sprime, removed)
        targets = {v: (i, s) for v, (i, s, w) in amb.items() if w == l}
        for v in targets:
            if (v, targets[v][0]) not in sprime:
                raise InconsistentCoverDataError(
                    f"no surviving copy for ambiguous variable {v!r}")
        for comp in comps:
            members = sorted((v for v in targets if (v, targets[v][0]) in comp),
                             key=str)
            if not members:
                continue
            rep = members[0]
            rep_node = (rep, targets[rep][0])
            c_elem = unit_inverse(lam[rep_node], modulus) * targets[rep][1] % modulus
            for v in members:
                i_v, s_v = targets[v]
                s_new = lam[(v, i_v)] * c_elem % modulus
                if s_new % p**l != s_v:
                    raise InconsistentCoverDataError(
                        f"labelling disagrees with suffix of {v!r}")
                beta[b.var_index(v, Coset(i_v, l + 1, s_new))] = True
        passes.append((l, cert))

    violated_after = {id(c) for c in b.constraints if c.violated_by(beta)}
    if not violated_after <= violated_before:
        raise InconsistentCoverDataError("disambiguation broke a satisfied constraint")
    return beta, passes


def debool(b: BoolInstance, beta) -> dict:
    """Ring assignment of an unambiguous finite-cost Boolean assignment."""
    alpha = {}
    for v in b.source_vars:
        kind, data = classify(b, beta, v)
        if kind == AMBIGUOUS:
            raise StillAmbiguousError(f"variable {v!r} is still ambiguous")
        alpha[v] = 0 if kind == ZERO else data
    return alpha


def domain_options(b: BoolInstance, v) -> list:
    """Satisfying assignments of K(v) as true-index frozensets: all-false
    plus one upward-closed choice per coset."""
    out = [frozenset()]
    for c in all_cosets(b.p, b.d):
        closure = {b.var_index(v, Coset(c.order, l, c.suffix % b.p**l))
                   for l in range(1, c.suffix_len + 1)}
        out.append(frozenset(closure))
    return out


def relation_of_constraint(b: BoolInstance, constraint: BoolConstraint):
    """(scope, relation, candidates) of an encoder constraint.

    scope lists the Boolean variable indices in position order; candidates
    is the product of the per-source K(v) assignments, which contains every
    satisfying assignment of the constraint's complete formula because the
    complete formula subsumes the K clauses.
    """
    import itertools as _it

    sources = sorted({b.variables[abs(l) - 1].source
                      for cl in constraint.clauses for l in cl})
    scope = [j for src in sources for j in b.vars_of(src)]
    candidates = set()
    relation = set()
    per_source = [domain_options(b, src) for src in sources]
    for combo in _it.product(*per_source):
        true_set = set().union(*combo) if combo else set()
        t = tuple(1 if j in true_set else 0 for j in scope)
        candidates.add(t)
        full = [j in true_set for j in range(len(b.variables))]
        if not constraint.violated_by(full):
            relation.add(t)
    # re-index clauses into scope positions for callers that want them
    return scope, relation, candidates


def project_clauses(constraint: BoolConstraint, scope) -> list:
    pos = {j: idx for idx, j in enumerate(scope)}
    out = []
    for cl in constraint.clauses:
        out.append(tuple((pos[abs(l) - 1] + 1) * (1 if l > 0 else -1) for l in cl))
    return out


def dump(b: BoolInstance) -> str:
    """Debug text dump, one origin-tagged group per constraint."""
    names = {j: f"x[{bv.source};{bv.coset.suffix},{bv.coset.suffix_len},{bv.coset.order}]"
             for j, bv in enumerate(b.variables)}
    lines = [f"p bool {len(b.variables)} {len(b.constraints)}"]
    for c in b.constraints:
        lines.append(f"c origin={c.origin} crisp={int(c.crisp)}")
        for cl in c.clauses:
            lines.append(" ".join(("-" if lit < 0 else "") + names[abs(lit) - 1]
                                  for lit in cl))
    return "\n".join(lines) + "\n"
