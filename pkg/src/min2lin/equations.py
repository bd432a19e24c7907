"""Equation systems over Z_m: data model, cost, consistency, oracle, I/O.

An Instance is a multiset of unary/binary equations over Z_m with soft and
crisp flags and a deletion budget k.  Consistency checking is exact: per
prime-power factor we run elimination with minimum-valuation pivots (every
entry of Z_{p^d} is unit * p^v, and a global-minimum-valuation pivot can
eliminate its column everywhere, after which each row is solvable
independently of the free variables).  Infeasibility cores are extracted by
deletion filtering.  The brute-force oracle enumerates assignments with
numpy, after propagating values forced by crisp equations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ring import RingSpec, crt_lift, factorize, is_unit, order, unit_inverse

INF = math.inf


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(msg if line is None else f"line {line}: {msg}")


class NotSimpleError(ValueError):
    """Instance is outside the simple fragment (a*u = v, crisp unary v = b)."""


class OracleBudgetError(RuntimeError):
    """Brute-force enumeration would exceed the configured budget."""


@dataclass(frozen=True)
class Equation:
    """a*u = c (unary) or a*u + b*v = c (binary), reduced mod m."""

    id: int
    a: int
    u: str
    c: int
    crisp: bool = False
    b: int | None = None
    v: str | None = None

    @property
    def is_binary(self) -> bool:
        return self.v is not None

    def variables(self) -> tuple[str, ...]:
        return (self.u,) if self.v is None else (self.u, self.v)

    def satisfied_by(self, assignment, m: int) -> bool:
        lhs = self.a * assignment[self.u]
        if self.v is not None:
            lhs += self.b * assignment[self.v]
        return lhs % m == self.c % m


def make_equation(eq_id, a, u, c, m, crisp=False, b=None, v=None) -> Equation:
    """Normalize coefficients mod m; a degenerate binary with u = v folds
    to the unary (a+b)*u = c."""
    if v is not None and v == u:
        a, b, v = (a + b) % m, None, None
    return Equation(id=eq_id, a=a % m, u=u, c=c % m, crisp=crisp,
                    b=None if b is None else b % m, v=v)


@dataclass
class Instance:
    ring: RingSpec
    variables: list[str]
    equations: list[Equation]
    k: int = 0

    def __post_init__(self):
        declared = set(self.variables)
        for eq in self.equations:
            for x in eq.variables():
                if x not in declared:
                    raise ParseError(f"undeclared variable {x!r} in equation {eq.id}")
        if self.k < 0:
            raise ParseError("param k must be >= 0")

    @property
    def m(self) -> int:
        return self.ring.m

    def soft_ids(self) -> list[int]:
        return [eq.id for eq in self.equations if not eq.crisp]

    def by_id(self, eq_id: int) -> Equation:
        return next(eq for eq in self.equations if eq.id == eq_id)

    def without(self, deleted: set[int]) -> "Instance":
        return Instance(self.ring, list(self.variables),
                        [eq for eq in self.equations if eq.id not in deleted], self.k)


Assignment = dict


def cost(inst: Instance, alpha: Assignment):
    """Number of violated soft equations; inf if any crisp one is violated."""
    m = inst.m
    c = 0
    for eq in inst.equations:
        if not eq.satisfied_by(alpha, m):
            if eq.crisp:
                return INF
            c += 1
    return c


def violated_ids(inst: Instance, alpha: Assignment) -> set[int]:
    m = inst.m
    return {eq.id for eq in inst.equations if not eq.satisfied_by(alpha, m)}


# --- exact consistency ----------------------------------------------------

def _solve_prime_power(eqs, variables, p, d):
    """Solve the system over Z_{p^d}; returns an assignment dict or None.

    Elimination with global minimum-valuation pivots: subtracting multiples
    never lowers a valuation below the pivot's, so after elimination each
    pivot row is solvable independently of the free variables (set to 0).
    """
    q = p**d
    col = {x: j for j, x in enumerate(variables)}
    n = len(variables)
    rows = []
    for eq in eqs:
        r = [0] * (n + 1)
        r[col[eq.u]] = (r[col[eq.u]] + eq.a) % q
        if eq.v is not None:
            r[col[eq.v]] = (r[col[eq.v]] + eq.b) % q
        r[n] = eq.c % q
        rows.append(r)

    def val(x):
        if x == 0:
            return d
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    active_rows = list(range(len(rows)))
    active_cols = set(range(n))
    pivots = []
    while True:
        best = None
        for ri in active_rows:
            for cj in active_cols:
                a = rows[ri][cj]
                if a != 0:
                    v = val(a)
                    if best is None or v < best[0]:
                        best = (v, ri, cj)
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, ri, cj = best
        a = rows[ri][cj]
        a_unit = a // p**v
        inv = unit_inverse(a_unit, p ** (d - v))
        for rj in active_rows:
            if rj == ri:
                continue
            b = rows[rj][cj]
            if b == 0:
                continue
            t = (b // p**v) * inv % p ** (d - v)
            rows[rj] = [(x - t * y) % q for x, y in zip(rows[rj], rows[ri])]
        pivots.append((ri, cj))
        active_rows.remove(ri)
        active_cols.discard(cj)

    for ri in active_rows:
        if rows[ri][n] % q != 0:
            return None

    # A pivot row may still contain later pivots' columns (it leaves the
    # active set before they are eliminated), so substitute in reverse.
    x = {j: 0 for j in range(n)}
    for ri, cj in reversed(pivots):
        s = rows[ri][cj]
        t = (rows[ri][n] - sum(rows[ri][j] * x[j] for j in range(n) if j != cj)) % q
        v = val(s)
        if t % p**v != 0:
            return None
        x[cj] = (t // p**v) * unit_inverse(s // p**v, p ** (d - v)) % p ** (d - v)
    return {variables[j]: x[j] % q for j in range(n)}


def solve_exactly(eqs, variables, ring: RingSpec):
    """Satisfying assignment over Z_m for the equation set, or None."""
    per_factor = []
    for p, d in ring.factors:
        q = p**d
        projected = [replace(eq, a=eq.a % q, c=eq.c % q,
                             b=None if eq.b is None else eq.b % q)
                     for eq in eqs]
        sol = _solve_prime_power(projected, variables, p, d)
        if sol is None:
            return None
        per_factor.append(sol)
    return {x: crt_lift([sol[x] for sol in per_factor], ring) for x in variables}


def is_consistent(eqs, ring: RingSpec, variables=None):
    """(True, witness) if satisfiable, else (False, core) with core an
    inclusion-minimal inconsistent subset of equation ids."""
    eqs = list(eqs)
    if variables is None:
        variables = sorted({x for eq in eqs for x in eq.variables()})
    witness = solve_exactly(eqs, variables, ring)
    if witness is not None:
        return True, witness
    # Deletion filter: drop equations whose removal keeps the system
    # inconsistent.  Soft equations are probed first so that cores keep a
    # soft member whenever one participates in every contradiction.
    core = sorted(eqs, key=lambda e: (e.crisp, e.id))
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if solve_exactly(trial, variables, ring) is None:
            core = trial
        else:
            i += 1
    return False, {eq.id for eq in core}


# --- brute-force oracle ----------------------------------------------------

def _propagate_crisp(inst: Instance):
    """Values forced by crisp equations alone (unit-coefficient chains).

    Returns (forced dict, contradiction flag).  Only propagates when a
    value is uniquely determined, so the optimum over finite-cost
    assignments is preserved.
    """
    m = inst.m
    forced = {}
    changed = True
    while changed:
        changed = False
        for eq in inst.equations:
            if not eq.crisp:
                continue
            if eq.v is None:
                if is_unit(eq.a, m):
                    val = unit_inverse(eq.a, m) * eq.c % m
                    if forced.get(eq.u, val) != val:
                        return forced, True
                    if eq.u not in forced:
                        forced[eq.u] = val
                        changed = True
                elif eq.u in forced and (eq.a * forced[eq.u]) % m != eq.c % m:
                    return forced, True
            else:
                known_u, known_v = eq.u in forced, eq.v in forced
                if known_u and not known_v and is_unit(eq.b, m):
                    val = unit_inverse(eq.b, m) * (eq.c - eq.a * forced[eq.u]) % m
                    forced[eq.v] = val
                    changed = True
                elif known_v and not known_u and is_unit(eq.a, m):
                    val = unit_inverse(eq.a, m) * (eq.c - eq.b * forced[eq.v]) % m
                    forced[eq.u] = val
                    changed = True
                elif known_u and known_v:
                    if (eq.a * forced[eq.u] + eq.b * forced[eq.v]) % m != eq.c % m:
                        return forced, True
    return forced, False


def brute_force_opt(inst: Instance, budget: int = 10**7, chunk: int = 1 << 20):
    """Exact minimum cost over all assignments, with a witness.

    Enumerates m^f assignments for the f variables not forced by crisp
    equations; errors out if that exceeds the budget.
    """
    m = inst.m
    forced, contradiction = _propagate_crisp(inst)
    if contradiction:
        return INF, {x: forced.get(x, 0) for x in inst.variables}
    free = [x for x in inst.variables if x not in forced]
    total = m ** len(free)
    if total > budget:
        raise OracleBudgetError(
            f"oracle too large: {m}^{len(free)} = {total} > budget {budget}")
    if not free:
        alpha = dict(forced)
        return cost(inst, alpha), alpha

    idx = {x: j for j, x in enumerate(free)}
    best_cost = None
    best_index = 0
    big = np.int64(len(inst.equations) + 1)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        t = np.arange(start, stop, dtype=np.int64)
        digits = [(t // m**j) % m for j in range(len(free))]
        costs = np.zeros(stop - start, dtype=np.int64)
        for eq in inst.equations:
            lhs = eq.a * (digits[idx[eq.u]] if eq.u in idx else forced[eq.u])
            if eq.v is not None:
                lhs = lhs + eq.b * (digits[idx[eq.v]] if eq.v in idx else forced[eq.v])
            bad = (lhs % m) != (eq.c % m)
            costs += bad * (big if eq.crisp else np.int64(1))
        j = int(np.argmin(costs))
        if best_cost is None or costs[j] < best_cost:
            best_cost = int(costs[j])
            best_index = start + j
    alpha = dict(forced)
    for x, j in idx.items():
        alpha[x] = (best_index // m**j) % m
    if best_cost >= int(big):
        return INF, alpha
    return best_cost, alpha


def brute_force_opt_slow(inst: Instance):
    """Independent pure-Python oracle used to cross-check the numpy one."""
    best = (INF, {x: 0 for x in inst.variables})
    for values in itertools.product(range(inst.m), repeat=len(inst.variables)):
        alpha = dict(zip(inst.variables, values))
        c = cost(inst, alpha)
        if c < best[0]:
            best = (c, alpha)
    return best


def min_deletion_opt(inst: Instance, budget: int = 1 << 22):
    """Minimum number of soft deletions making the system consistent, by
    brute force over deletion subsets (exact; exponential in #soft)."""
    soft = inst.soft_ids()
    if 2 ** len(soft) > budget:
        raise OracleBudgetError(f"2^{len(soft)} deletion subsets exceed budget")
    for size in range(len(soft) + 1):
        for combo in itertools.combinations(soft, size):
            ok, witness = is_consistent(
                [eq for eq in inst.equations if eq.id not in combo],
                inst.ring, inst.variables)
            if ok:
                full = {x: witness.get(x, 0) for x in inst.variables}
                return size, set(combo), full
    return None, None, None


# --- simple and special instances ------------------------------------------

def classify_binary(eq: Equation, ring: RingSpec):
    """Shape of a binary equation within Z_{p^d}, up to unit scaling.

    Returns ("unit", r, src, dst) when equivalent to r*src = dst with r a
    unit, ("p", src, dst) when equivalent to p*src = dst, and None
    otherwise.  Requires a prime-power ring.
    """
    p, d = ring.factors[0]
    m = ring.m
    if eq.v is None or eq.c % m != 0:
        return None
    for a, u, b, v in ((eq.a, eq.u, eq.b, eq.v), (eq.b, eq.v, eq.a, eq.u)):
        if is_unit(b, m):
            r = (-unit_inverse(b, m) * a) % m
            if is_unit(r, m):
                return ("unit", r, u, v)
            if r == p % m:
                return ("p", u, v)
    return None


def is_simple(inst: Instance) -> bool:
    """Simple fragment: binaries a*u = v (any a), unaries crisp v = b."""
    if not inst.ring.is_prime_power:
        return False
    m = inst.m
    for eq in inst.equations:
        if eq.v is None:
            if not eq.crisp or not is_unit(eq.a, m):
                return False
        else:
            if eq.c % m != 0 or not (is_unit(eq.a, m) or is_unit(eq.b, m)):
                return False
    return True


@dataclass
class SpecialInstance:
    """Instance restricted to one crisp s = 1, unit equations r*u = v, and
    p-equations p*u = v.

    unit_eqs holds (eq_id, r, src, dst, crisp); p_eqs holds
    (eq_id, src, dst, crisp).
    """

    instance: Instance
    svar: str
    unit_eqs: list[tuple] = field(default_factory=list)
    p_eqs: list[tuple] = field(default_factory=list)

    @property
    def ring(self) -> RingSpec:
        return self.instance.ring

    @classmethod
    def from_instance(cls, inst: Instance) -> "SpecialInstance":
        if not inst.ring.is_prime_power:
            raise NotSimpleError("special instances live over a prime power")
        m = inst.m
        svar = None
        unit_eqs, p_eqs = [], []
        for eq in inst.equations:
            if eq.v is None:
                if not (eq.crisp and is_unit(eq.a, m)
                        and unit_inverse(eq.a, m) * eq.c % m == 1):
                    raise NotSimpleError(f"unary equation {eq.id} is not crisp s = 1")
                if svar is not None:
                    raise NotSimpleError("more than one crisp s = 1 equation")
                svar = eq.u
            else:
                shape = classify_binary(eq, inst.ring)
                if shape is None:
                    raise NotSimpleError(f"binary equation {eq.id} is not special")
                if shape[0] == "unit":
                    unit_eqs.append((eq.id, shape[1], shape[2], shape[3], eq.crisp))
                else:
                    p_eqs.append((eq.id, shape[1], shape[2], eq.crisp))
        if svar is None:
            raise NotSimpleError("missing the crisp s = 1 equation")
        return cls(instance=inst, svar=svar, unit_eqs=unit_eqs, p_eqs=p_eqs)


def is_special(inst: Instance) -> bool:
    try:
        SpecialInstance.from_instance(inst)
        return True
    except NotSimpleError:
        return False


def special_form(inst: Instance) -> tuple[SpecialInstance, dict]:
    """Yes/no-equivalent special instance for a simple input, same k.

    Every binary a*u = v with a = r * p^l is replaced by a crisp chain
    p*u = z_1, ..., p*z_{l-1} = z_l and an equation v = r*z_l of the
    original softness; crisp unaries v = b become equations against a
    global s with crisp s = 1.  Returns the special instance and a map
    from new equation ids to originating equation ids (chain links map to
    their original equation as well).
    """
    if is_special(inst):
        sp = SpecialInstance.from_instance(inst)
        return sp, {eq.id: eq.id for eq in inst.equations}
    if not is_simple(inst):
        raise NotSimpleError("input is neither special nor simple")
    m = inst.m
    p, d = inst.ring.factors[0]
    variables = list(inst.variables)
    svar = "_s"
    while svar in variables:
        svar += "_"
    variables.append(svar)
    equations: list[Equation] = []
    origin: dict[int, int] = {}
    counter = itertools.count()

    def emit(a, u, c, crisp, b=None, v=None, orig=None):
        eq = make_equation(next(counter), a, u, c, m, crisp=crisp, b=b, v=v)
        equations.append(eq)
        if orig is not None:
            origin[eq.id] = orig
        return eq

    emit(1, svar, 1, True)

    aux = itertools.count()

    def chain_from(start_var, length, orig):
        """Crisp chain p*start = z_1, ..., of the given length; returns the
        last variable (start_var when length = 0)."""
        cur = start_var
        for _ in range(length):
            z = f"_z{next(aux)}"
            variables.append(z)
            emit(p, cur, 0, True, b=m - 1, v=z, orig=orig)
            cur = z
        return cur

    for eq in inst.equations:
        if eq.v is None:
            # crisp unary v = b, normalized so b = inv(a) * c
            b = unit_inverse(eq.a, m) * eq.c % m
            l = order(b, p, d)
            if l == 0:
                emit(b, svar, 0, True, b=m - 1, v=eq.u, orig=eq.id)
            else:
                r = b // p**l % m if b != 0 else 1
                last = chain_from(svar, min(l, d), eq.id)
                emit(r if b != 0 else 1, last, 0, True, b=m - 1, v=eq.u, orig=eq.id)
        else:
            # binary a'*u = v with u, v oriented so the target has a unit
            # coefficient
            if is_unit(eq.b, m):
                u, v, a = eq.u, eq.v, (-unit_inverse(eq.b, m) * eq.a) % m
            else:
                u, v, a = eq.v, eq.u, (-unit_inverse(eq.a, m) * eq.b) % m
            l = order(a, p, d)
            if l == 0:
                emit(a, u, 0, eq.crisp, b=m - 1, v=v, orig=eq.id)
            else:
                r = a // p**l % m if a != 0 else 1
                last = chain_from(u, min(l, d), eq.id)
                emit(r if a != 0 else 1, last, 0, eq.crisp, b=m - 1, v=v, orig=eq.id)

    out = Instance(inst.ring, variables, equations, inst.k)
    return SpecialInstance.from_instance(out), origin


# --- text and JSON formats --------------------------------------------------

def parse(text: str) -> Instance:
    """Parse the one-statement-per-line instance format.

    "mod M", "param K", then equations "[!] A*x + B*y = C" or
    "[!] A*x = C"; "!" marks crisp; "#" starts a comment.
    """
    m = None
    k = 0
    variables: list[str] = []
    seen = set()
    equations: list[Equation] = []

    def note_var(x, ln):
        if not x or not (x[0].isalpha() or x[0] == "_"):
            raise ParseError(f"bad variable name {x!r}", ln)
        if x not in seen:
            seen.add(x)
            variables.append(x)

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("mod "):
            try:
                m = int(line[4:])
            except ValueError:
                raise ParseError("bad modulus", ln)
            if m < 2:
                raise ParseError(f"invalid modulus {m}", ln)
            continue
        if line.startswith("param "):
            try:
                k = int(line[6:])
            except ValueError:
                raise ParseError("bad param", ln)
            continue
        if m is None:
            raise ParseError("equation before mod line", ln)
        crisp = line.startswith("!")
        if crisp:
            line = line[1:].strip()
        if "=" not in line:
            raise ParseError("missing '='", ln)
        lhs, _, rhs = line.partition("=")
        try:
            c = int(rhs.strip())
        except ValueError:
            raise ParseError("bad right-hand side", ln)
        terms = []
        for part in lhs.split("+"):
            part = part.strip()
            if "*" not in part:
                raise ParseError(f"bad term {part!r} (need A*x)", ln)
            coeff, _, var = part.partition("*")
            try:
                a = int(coeff.strip())
            except ValueError:
                raise ParseError(f"bad coefficient {coeff!r}", ln)
            terms.append((a, var.strip()))
        if len(terms) not in (1, 2):
            raise ParseError("equations have one or two terms", ln)
        if not 0 <= c < m or any(not 0 <= a < m for a, _ in terms):
            raise ParseError("coefficient out of range [0, m)", ln)
        for _, x in terms:
            note_var(x, ln)
        if len(terms) == 1:
            eq = make_equation(len(equations), terms[0][0], terms[0][1], c, m, crisp=crisp)
        else:
            eq = make_equation(len(equations), terms[0][0], terms[0][1], c, m,
                               crisp=crisp, b=terms[1][0], v=terms[1][1])
        equations.append(eq)
    if m is None:
        raise ParseError("missing mod line")
    return Instance(factorize(m), variables, equations, k)


def serialize(inst: Instance) -> str:
    """Canonical text form; parse(serialize(x)) == x."""
    lines = [f"mod {inst.m}", f"param {inst.k}"]
    for eq in inst.equations:
        prefix = "! " if eq.crisp else ""
        if eq.v is None:
            lines.append(f"{prefix}{eq.a}*{eq.u} = {eq.c}")
        else:
            lines.append(f"{prefix}{eq.a}*{eq.u} + {eq.b}*{eq.v} = {eq.c}")
    return "\n".join(lines) + "\n"


def to_json_dict(inst: Instance) -> dict:
    eqs = []
    for eq in inst.equations:
        d = {"crisp": eq.crisp, "a": eq.a, "u": eq.u, "c": eq.c}
        if eq.v is not None:
            d["b"] = eq.b
            d["v"] = eq.v
        eqs.append(d)
    return {"mod": inst.m, "param": inst.k, "equations": eqs}


def from_json_dict(data: dict) -> Instance:
    m = data["mod"]
    if m < 2:
        raise ParseError(f"invalid modulus {m}")
    variables: list[str] = []
    seen = set()
    equations = []
    for i, d in enumerate(data["equations"]):
        for key in ("u", "v"):
            x = d.get(key)
            if x is not None and x not in seen:
                seen.add(x)
                variables.append(x)
        equations.append(make_equation(i, d["a"], d["u"], d["c"], m,
                                       crisp=d.get("crisp", False),
                                       b=d.get("b"), v=d.get("v")))
    return Instance(factorize(m), variables, equations, data.get("param", 0))
