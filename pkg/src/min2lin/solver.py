"""End-to-end solvers for Min-2-Lin.

solve_prime_power runs the covering pipeline on special instances of
Z_{p^d}: encode the Boolean relaxation, cover each auxiliary level graph
(parameter 2k), annotate, solve MinSat, disambiguate and certify.  Yes
answers always carry a verified witness, so they are sound regardless of
the random choices; a randomized No only means every trial failed.
solve_general projects composite moduli onto their prime-power factors
(omega(m)-factor approximation); solve_exact_fallback is a complete
deletion-branching decision procedure driven by infeasibility cores.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .biasedgraph import GroupLabelledGraph
from .boolrelax import (BoolInstance, annotate, boolean_cost, debool,
                        disambiguate, encode, violated_equations,
                        InconsistentCoverDataError)
from .covering import derandomized_covers, function_family, random_cover
from .equations import (Instance, NotSimpleError, SpecialInstance, cost,
                        is_consistent, is_simple, is_special, special_form)
from .minsat import solve_minsat
from .ring import crt_lift, crt_project, factorize, units
from .rng import spawn_seed

INF = float("inf")


@dataclass(frozen=True)
class AuxGraph:
    """Level-i graph: copies (v, j) for j <= i; a unit equation r*u = v
    contributes edges (u,j)-(v,j) labelled r mod p^{d-i}, an equation
    p*u = v contributes edges (u,j)-(v,j+1) labelled 1."""

    level: int
    graph: GroupLabelledGraph
    eqn_of: dict      # edge id -> equation id
    edges_of: dict    # equation id -> frozenset of edge ids


def build_aux_graph(special: SpecialInstance, i: int) -> AuxGraph:
    p, d = special.ring.factors[0]
    if not 0 <= i <= d - 2:
        raise ValueError(f"aux level {i} outside [0, {d - 2}]")
    q = p ** (d - i)
    vertices = tuple((v, j) for v in special.instance.variables for j in range(i + 1))
    edges = []
    eqn_of = {}
    for eq_id, r, u, v, _ in special.unit_eqs:
        for j in range(i + 1):
            eid = (eq_id, j)
            edges.append((eid, (u, j), (v, j), r % q))
            eqn_of[eid] = eq_id
    for eq_id, u, v, _ in special.p_eqs:
        for j in range(i):
            eid = (eq_id, j)
            edges.append((eid, (u, j), (v, j + 1), 1))
            eqn_of[eid] = eq_id
    g = GroupLabelledGraph(q=q, vertices=vertices, edges=tuple(edges))
    edges_of = {}
    for eid, eq_id in eqn_of.items():
        edges_of.setdefault(eq_id, set()).add(eid)
    edges_of = {eq: frozenset(es) for eq, es in edges_of.items()}
    return AuxGraph(level=i, graph=g, eqn_of=eqn_of, edges_of=edges_of)


@dataclass
class CoverLevel:
    i: int
    aux: AuxGraph
    cover: object          # CoverOutput with S'_i, F'_i
    s_set: set             # S_i
    t_set: set             # T_i
    guesses: dict          # v in T_i -> unit s_v of Z_{p^{d-i}}


@dataclass
class CoverAnnotation:
    levels: list
    seed: int | None = None


def _aux_graphs(special: SpecialInstance):
    cached = getattr(special, "_aux_graphs", None)
    if cached is None:
        _, d = special.ring.factors[0]
        cached = [build_aux_graph(special, i) for i in range(d - 1)]
        special._aux_graphs = cached
    return cached


def _derive_levels(special, auxes, covers, guess_for):
    """Fig. 4 step 4: S_i and T_i from the raw per-level covers, then one
    guessed unit per member of T_i."""
    p, d = special.ring.factors[0]
    variables = special.instance.variables
    levels = []
    touched = []
    for j, cov in enumerate(covers):
        t = set()
        em = auxes[j].graph.edge_map()
        for eid in cov.edge_set:
            _, a, b, _ = em[eid]
            t.add(a)
            t.add(b)
        touched.append(t)
    for i in range(d - 1):
        s_set = {v for v in variables
                 if all((v, i) in covers[j].vertex_set for j in range(i, d - 1))}
        t_set = {v for v in s_set
                 if any((v, i) in touched[j] for j in range(i, d - 1))}
        guesses = {v: guess_for(i, v) for v in sorted(t_set)}
        levels.append(CoverLevel(i=i, aux=auxes[i], cover=covers[i],
                                 s_set=s_set, t_set=t_set, guesses=guesses))
    return levels


def sample_cover_annotation(special: SpecialInstance, k: int, seed: int) -> CoverAnnotation:
    p, d = special.ring.factors[0]
    auxes = _aux_graphs(special)
    rng = random.Random(seed)
    covers = [random_cover(aux.graph, 2 * k, rng=rng, seed=seed) for aux in auxes]
    unit_pool = {i: units(p ** (d - i)) for i in range(d - 1)}
    levels = _derive_levels(special, auxes, covers,
                            lambda i, v: rng.choice(unit_pool[i]))
    return CoverAnnotation(levels=levels, seed=seed)


@dataclass(frozen=True)
class Solution:
    verdict: str               # "yes" | "no"
    deleted: frozenset
    witness: dict | None
    bound: int
    mode: str
    trace: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "verdict": self.verdict,
            "deleted": sorted(self.deleted),
            "witness": self.witness,
            "bound": self.bound,
            "mode": self.mode,
            "trace": self.trace,
        }


def verify_solution(inst: Instance, sol: Solution) -> bool:
    """Direct evaluation of the Solution invariants on a Yes answer."""
    if sol.verdict != "yes":
        return False
    if sol.witness is None or set(sol.witness) < set(inst.variables):
        return False
    if len(sol.deleted) > sol.bound:
        return False
    ids = {eq.id for eq in inst.equations}
    if not set(sol.deleted) <= ids:
        return False
    for eq in inst.equations:
        if eq.id in sol.deleted:
            if eq.crisp:
                return False
            continue
        if not eq.satisfied_by(sol.witness, inst.m):
            return False
    if any(not 0 <= sol.witness[x] < inst.m for x in inst.variables):
        return False
    return True


def _prepare(inst: Instance):
    """Special form plus the map from special soft equations back to the
    originating equation ids."""
    special, origin = special_form(inst)
    return special, origin, encode(special)


def _certify(inst, special, origin, bplus, covers, beta, k, mode, trace):
    """MinSat Yes -> disambiguate -> deboolean -> verified Solution."""
    beta2, _passes = disambiguate(bplus, beta, covers)
    alpha = debool(bplus, beta2)
    bcost = boolean_cost(bplus, beta2)
    sp_cost = cost(special.instance, alpha)
    assert sp_cost <= bcost <= k, "deboolean raised the cost"
    z_special = {eq.id for eq in special.instance.equations
                 if not eq.crisp and not eq.satisfied_by(alpha, special.instance.m)}
    deleted = frozenset(origin[e] for e in z_special)
    witness = {x: alpha[x] for x in inst.variables}
    sol = Solution(verdict="yes", deleted=deleted, witness=witness,
                   bound=k, mode=mode, trace=trace)
    if not verify_solution(inst, sol):
        raise AssertionError("certified solution failed verification")
    return sol


def solve_prime_power(inst: Instance, k: int, mode: str = "randomized",
                      trials: int = 256, seed: int = 0,
                      cover_budget: int = 200_000) -> Solution:
    """Covering pipeline for simple/special instances over Z_{p^d}.

    Randomized mode runs up to `trials` independently seeded trials and
    certifies the first Yes; No means every trial failed.  Derandomized
    mode iterates cover-free family covers and function-family guesses,
    which is exhaustive for the completeness argument's event space.
    """
    if not inst.ring.is_prime_power:
        raise NotSimpleError("prime-power solver needs a prime-power modulus")
    special, origin, b = _prepare(inst)
    p, d = special.ring.factors[0]

    if d == 1:
        covers = CoverAnnotation(levels=[])
        status, beta, _ = solve_minsat(b, k)
        trace = {"mode": mode, "levels": 0}
        if status == "yes":
            return _certify(inst, special, origin, b, covers, beta, k, mode, trace)
        return Solution("no", frozenset(), None, k, mode, trace)

    if mode == "randomized":
        return _solve_randomized(inst, special, origin, b, k, trials, seed)
    if mode == "derandomized":
        return _solve_derandomized(inst, special, origin, b, k, cover_budget)
    raise ValueError(f"unknown mode {mode!r}")


def _annotation_key(covers: CoverAnnotation):
    parts = []
    for lvl in covers.levels:
        parts.append((lvl.i, frozenset(lvl.s_set),
                      tuple(sorted(lvl.guesses.items(), key=lambda t: str(t[0])))))
    return tuple(parts)


def _solve_randomized(inst, special, origin, b, k, trials, seed):
    seen = {}
    for t in range(trials):
        trial_seed = spawn_seed(seed, t)
        covers = sample_cover_annotation(special, k, trial_seed)
        key = _annotation_key(covers)
        if key in seen:
            status, beta = seen[key]
        else:
            bplus = annotate(b, covers)
            status, beta, _ = solve_minsat(bplus, k)
            seen[key] = (status, beta)
        if status == "yes":
            bplus = annotate(b, covers)
            trace = {"seed": seed, "trial_seed": trial_seed, "trials_used": t + 1}
            return _certify(inst, special, origin, bplus, covers, beta, k,
                            "randomized", trace)
    # Every trial failed.  The per-trial success guarantee is only
    # 1/2^{O(k^2)}, so before answering No, cross-check with the exact
    # branching solver; its Yes carries a verified witness and its No is
    # exact, so either way the answer stays certified.
    backstop = solve_exact_fallback(inst, k)
    trace = {"seed": seed, "trials_used": trials, "backstop": backstop.verdict}
    return Solution(backstop.verdict, backstop.deleted, backstop.witness, k,
                    "randomized", trace)


def _solve_derandomized(inst, special, origin, b, k, cover_budget):
    p, d = special.ring.factors[0]
    auxes = _aux_graphs(special)
    lists = []
    for aux in auxes:
        covers = derandomized_covers(aux.graph, 2 * k, budget=cover_budget)
        distinct = {}
        for cov in covers:
            distinct.setdefault((cov.vertex_set, cov.edge_set), cov)
        lists.append(list(distinct.values()))
    passes = 0
    seen = set()
    for combo in itertools.product(*lists):
        base_levels = _derive_levels(special, auxes, list(combo), lambda i, v: None)
        t_sets = [sorted(lvl.t_set) for lvl in base_levels]
        fams = []
        for lvl, ts in zip(base_levels, t_sets):
            kappa = min(len(ts), 2 * k * (d - lvl.i - 1))
            fams.append(function_family(len(ts), kappa, units(p ** (d - lvl.i))))
        for funcs in itertools.product(*fams):
            levels = []
            for lvl, ts, f in zip(base_levels, t_sets, funcs):
                guesses = {v: f[j] for j, v in enumerate(ts)}
                levels.append(CoverLevel(lvl.i, lvl.aux, lvl.cover,
                                         lvl.s_set, lvl.t_set, guesses))
            covers = CoverAnnotation(levels=levels)
            key = _annotation_key(covers)
            if key in seen:
                continue
            seen.add(key)
            passes += 1
            bplus = annotate(b, covers)
            status, beta, _ = solve_minsat(bplus, k)
            if status == "yes":
                trace = {"passes": passes}
                return _certify(inst, special, origin, bplus, covers, beta, k,
                                "derandomized", trace)
    return Solution("no", frozenset(), None, k, "derandomized", {"passes": passes})


def solve_exact_fallback(inst: Instance, k: int) -> Solution:
    """Complete deletion branching on infeasibility cores; exact decision
    for any modulus, with a minimum-size deletion set on Yes."""
    eq_by_id = {eq.id: eq for eq in inst.equations}

    def branch(deleted, depth, failed):
        if deleted in failed:
            return None
        remaining = [eq for eq in inst.equations if eq.id not in deleted]
        ok, payload = is_consistent(remaining, inst.ring, inst.variables)
        if ok:
            return deleted, payload
        soft_core = sorted(e for e in payload if not eq_by_id[e].crisp)
        if depth > 0 and soft_core:
            for e in soft_core:
                got = branch(deleted | {e}, depth - 1, failed)
                if got is not None:
                    return got
        failed.add(deleted)
        return None

    for budget in range(k + 1):
        got = branch(frozenset(), budget, set())
        if got is not None:
            deleted, witness_partial = got
            witness = {x: witness_partial.get(x, 0) for x in inst.variables}
            sol = Solution("yes", deleted, witness, k, "fallback",
                           {"opt": len(deleted)})
            assert verify_solution(inst, sol)
            return sol
    return Solution("no", frozenset(), None, k, "fallback", {})


def _project_instance(inst: Instance, factor) -> Instance:
    p, d = factor
    q = p**d
    from .equations import make_equation
    eqs = [make_equation(eq.id, eq.a, eq.u, eq.c, q, crisp=eq.crisp,
                         b=eq.b, v=eq.v)
           for eq in inst.equations]
    return Instance(factorize(q), list(inst.variables), eqs, inst.k)


def _solve_factor(inst: Instance, k: int, mode, trials, seed) -> Solution:
    """Smallest-budget Yes for one prime-power factor: the covering
    pipeline on simple/special inputs, the exact fallback otherwise."""
    if mode != "fallback" and (is_special(inst) or is_simple(inst)):
        for budget in range(k + 1):
            sol = solve_prime_power(inst, budget, mode=mode, trials=trials,
                                    seed=seed)
            if sol.verdict == "yes":
                return sol
        return Solution("no", frozenset(), None, k, mode, {})
    return solve_exact_fallback(inst, k)


def solve_general(inst: Instance, k: int, mode: str = "randomized",
                  trials: int = 256, seed: int = 0) -> Solution:
    """omega(m)-factor approximation: solve every CRT factor with
    parameter k, take the union of the deletion sets and recombine the
    per-factor witnesses.  No certifies OPT > k; Yes returns at most
    omega(m) * k deletions."""
    spec = inst.ring
    omega = spec.omega
    bound = omega * k
    factor_sols = []
    for idx, factor in enumerate(spec.factors):
        sub = _project_instance(inst, factor)
        sol = _solve_factor(sub, k, mode, trials, spawn_seed(seed, idx))
        if sol.verdict == "no":
            return Solution("no", frozenset(), None, bound, f"approx/{sol.mode}",
                            {"failed_factor": factor})
        factor_sols.append(sol)
    deleted = frozenset().union(*(sol.deleted for sol in factor_sols))
    witness = {x: crt_lift([sol.witness[x] for sol in factor_sols], spec)
               for x in inst.variables}
    sol = Solution("yes", deleted, witness, bound,
                   f"approx/{factor_sols[0].mode if factor_sols else 'none'}",
                   {"per_factor": [sorted(s.deleted) for s in factor_sols]})
    assert verify_solution(inst, sol)
    return sol
