"""Balanced subgraph covering: randomized sampling and derandomized lists.

random_cover samples a subfamily of the important connected subsets with
probability 4^-k each, keeps the sampled sets that are "chosen" (contained
in the sampled union with no sampled neighbour), and returns a vertex set
S and edge set F with delta(S) <= F and (G - F)[S] balanced -- checked
after every call.  derandomized_covers replaces the sampling by iterating
over a cover-free family.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .biasedgraph import GroupLabelledGraph, check_balanced, important_subsets
from .rng import spawn_seed


class CffBudgetError(RuntimeError):
    """Requested cover-free family is too large for the configured budget."""


@dataclass(frozen=True)
class CoverOutput:
    vertex_set: frozenset  # S
    edge_set: frozenset    # F
    chosen: tuple          # ImportantSubset records actually chosen
    seed: int | None       # None for derandomized outputs

    def covers(self, g: GroupLabelledGraph, subgraph_vertices, k: int) -> bool:
        """The success event for a balanced subgraph H of cost <= k:
        V(H) <= S and at most k edges of F touch V(H)."""
        hv = set(subgraph_vertices)
        if not hv <= self.vertex_set:
            return False
        em = g.edge_map()
        touching = sum(1 for eid in self.edge_set
                       if em[eid][1] in hv or em[eid][2] in hv)
        return touching <= k


def _family_cache(g: GroupLabelledGraph, k: int):
    """Union of the families X_v over the unbalanced part of g, cached on
    the graph; balanced components are handled separately."""
    cache = getattr(g, "_cover_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(g, "_cover_cache", cache)
    if k not in cache:
        balanced_comps = []
        unbalanced = set()
        for comp in g.components():
            ok, _ = check_balanced(g, comp)
            if ok:
                balanced_comps.append(frozenset(comp))
            else:
                unbalanced |= comp
        fam = important_subsets(g, k, within=unbalanced) if unbalanced else []
        cache[k] = (fam, balanced_comps)
    return cache[k]


def _assemble(g: GroupLabelledGraph, family, sampled_flags, balanced_comps, seed):
    """Steps 3-6 of the sampling procedure for a fixed sampled subfamily."""
    union = set()
    for s, flag in zip(family, sampled_flags):
        if flag:
            union |= s.vertex_set
    chosen = []
    S: set = set()
    F: set = set()
    for s in family:
        if s.vertex_set <= union and not (g.neighbourhood(s.vertex_set) & union):
            chosen.append(s)
            S |= s.vertex_set
            F |= s.cleaning
            F |= g.boundary(s.vertex_set)
    for comp in balanced_comps:
        S |= comp
    out = CoverOutput(vertex_set=frozenset(S), edge_set=frozenset(F),
                      chosen=tuple(chosen), seed=seed)
    _check_output(g, out)
    return out


def _check_output(g: GroupLabelledGraph, out: CoverOutput):
    assert g.boundary(out.vertex_set) <= out.edge_set, "delta(S) not inside F"
    ok, _ = check_balanced(g, out.vertex_set, out.edge_set)
    assert ok, "(G - F)[S] is not balanced"


def random_cover(g: GroupLabelledGraph, k: int, rng=None, seed=None) -> CoverOutput:
    """One run of the sampling procedure with inclusion probability 4^-k."""
    if rng is None:
        rng = random.Random(seed)
    family, balanced_comps = _family_cache(g, k)
    p = 4.0**-k
    flags = [rng.random() < p for _ in family]
    return _assemble(g, family, flags, balanced_comps, seed)


def derandomized_covers(g: GroupLabelledGraph, k: int,
                        budget: int = 200_000) -> list[CoverOutput]:
    """Deterministic list of covers; for every balanced subgraph H of cost
    <= k some list element covers it (via the exact-components member of
    the cover-free family)."""
    family, balanced_comps = _family_cache(g, k)
    n = len(family)
    cff = build_cff(n, k, k * 4**k, budget=budget)
    outputs = []
    seen_flagsets = set()
    for member in cff.members:
        flags = tuple(i in member for i in range(n))
        if flags in seen_flagsets:
            continue
        seen_flagsets.add(flags)
        outputs.append(_assemble(g, family, flags, balanced_comps, None))
    return outputs


# --- cover-free families -----------------------------------------------------

@dataclass(frozen=True)
class CffFamily:
    ground_size: int
    r: int
    s: int
    members: tuple  # frozensets over range(ground_size)


def _requirements(n, r, s):
    """Disjoint pairs (A, B) with |A| <= r, |B| <= s; the usual (=, =)
    definition is the subset with exact sizes."""
    universe = range(n)
    for ra in range(r + 1):
        for A in itertools.combinations(universe, ra):
            rest = [x for x in universe if x not in A]
            for rb in range(min(s, len(rest)) + 1):
                for B in itertools.combinations(rest, rb):
                    yield frozenset(A), frozenset(B)


def _requirement_count(n, r, s):
    import math
    total = 0
    for ra in range(r + 1):
        ca = math.comb(n, ra)
        total += ca * sum(math.comb(n - ra, rb) for rb in range(min(s, n - ra) + 1))
        if total > 10**9:
            return total
    return total


def verify_cff(fam: CffFamily) -> bool:
    """Exhaustive check of the covering property over all (A, B) pairs."""
    for A, B in _requirements(fam.ground_size, fam.r, fam.s):
        if not any(A <= m and not (B & m) for m in fam.members):
            return False
    return True


def build_cff(n: int, r: int, s: int, budget: int = 200_000) -> CffFamily:
    """Greedy cover-free family, exhaustively verified when the requirement
    universe fits the budget; otherwise the family of all subsets of size
    <= r, which satisfies every (A, B) requirement via the member A itself.
    """
    if n == 0:
        return CffFamily(0, r, s, (frozenset(),))
    reqs = _requirement_count(n, r, s)
    if reqs <= budget:
        fam = _greedy_cff(n, r, s)
        if not verify_cff(fam):
            raise AssertionError("greedy cover-free family failed verification")
        return fam
    import math
    size = sum(math.comb(n, j) for j in range(r + 1))
    if size > budget:
        raise CffBudgetError(
            f"cover-free family for (n={n}, r={r}, s={s}) needs {size} members"
            f" > budget {budget}")
    members = tuple(frozenset(A) for j in range(r + 1)
                    for A in itertools.combinations(range(n), j))
    return CffFamily(n, r, s, members)


def _greedy_cff(n, r, s):
    """Greedy set cover of the requirements by indicator vectors from a
    pseudorandom pool (plus each A itself, which guarantees feasibility)."""
    reqs = list(_requirements(n, r, s))
    pool = []
    rng = random.Random(0xC0FFEE)
    density = max(1, r) / max(1, r + s)
    for _ in range(64):
        pool.append(frozenset(i for i in range(n) if rng.random() < density))
    pool.extend({frozenset(A) for A, _ in reqs})
    members = []
    uncovered = set(range(len(reqs)))
    while uncovered:
        best, best_hits = None, -1
        for cand in pool:
            hits = sum(1 for i in uncovered
                       if reqs[i][0] <= cand and not (reqs[i][1] & cand))
            if hits > best_hits:
                best, best_hits = cand, hits
        members.append(best)
        uncovered = {i for i in uncovered
                     if not (reqs[i][0] <= best and not (reqs[i][1] & best))}
    return CffFamily(n, r, s, tuple(members))


# --- function families -------------------------------------------------------

def function_family(n: int, kappa: int, domain, budget: int = 2_000_000):
    """Family of maps [n] -> domain hitting every partial map on <= kappa
    points: for every S with |S| <= kappa and g : S -> domain some member
    agrees with g on S.  Exhaustively verified under the budget; when kappa
    >= n the family of all |domain|^n maps is returned."""
    domain = list(domain)
    if n == 0:
        return [()]
    if kappa >= n:
        if len(domain) ** n > budget:
            raise CffBudgetError(f"{len(domain)}^{n} maps exceed budget {budget}")
        return [tuple(vals) for vals in itertools.product(domain, repeat=n)]
    reqs = []
    for S in itertools.combinations(range(n), kappa):
        for vals in itertools.product(domain, repeat=kappa):
            reqs.append(tuple(zip(S, vals)))
            if len(reqs) > budget:
                raise CffBudgetError(
                    f"function family for (n={n}, kappa={kappa}, |D|={len(domain)})"
                    f" exceeds budget {budget}")
    rng = random.Random(0xFEED)
    pool = [tuple(rng.choice(domain) for _ in range(n)) for _ in range(128)]
    members = []
    uncovered = set(range(len(reqs)))

    def covered_by(req, f):
        return all(f[i] == val for i, val in req)

    while uncovered:
        best, best_hits = None, -1
        for cand in pool:
            hits = sum(1 for i in uncovered if covered_by(reqs[i], cand))
            if hits > best_hits:
                best, best_hits = cand, hits
        if best_hits == 0:
            req = reqs[next(iter(uncovered))]
            fixed = dict(req)
            best = tuple(fixed.get(i, domain[0]) for i in range(n))
        members.append(best)
        uncovered = {i for i in uncovered if not covered_by(reqs[i], best)}
    for req in reqs:
        assert any(covered_by(req, f) for f in members)
    return members


def verify_function_family(members, n, kappa, domain) -> bool:
    domain = list(domain)
    if n == 0:
        return bool(members)
    kappa = min(kappa, n)
    for S in itertools.combinations(range(n), kappa):
        for vals in itertools.product(domain, repeat=kappa):
            if not any(all(f[i] == v for i, v in zip(S, vals)) for f in members):
                return False
    return True


def run_trials(g: GroupLabelledGraph, k: int, trials: int, base_seed: int):
    """Independent random_cover runs with seeds split from base_seed."""
    outs = []
    for t in range(trials):
        seed = spawn_seed(base_seed, t)
        outs.append(random_cover(g, k, rng=random.Random(seed), seed=seed))
    return outs
