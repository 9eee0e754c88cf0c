"""Permutation representation, subgroup machinery and the brute-force oracle.

Functions here are generic over a *group context*: any object exposing
`identity`, `mul`, `inv`, `element_order`, and (for point actions)
`point_list()` and `act(g, point)` with the identity point listed first.
GroupSpec and the individual Hol factors from `algebra` all qualify, as does
the DirectCyclicGroup helper used by test oracles.

Subgroup objects are immutable once built.  The enumeration and
classification loops are independent per work item; deduplication by
element-set identity is the only merge point, so parallel drivers only need
to serialise that final dict update.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


class CapExceeded(RuntimeError):
    def __init__(self, lower_bound):
        self.lower_bound = lower_bound
        super().__init__(f"subgroup order exceeds cap (>= {lower_bound})")


class TooLarge(RuntimeError):
    pass


class DirectCyclicGroup:
    """Direct product of cyclic groups, written additively (test oracle use)."""

    def __init__(self, orders):
        self.orders = tuple(int(m) for m in orders)
        self.identity = (0,) * len(self.orders)

    def mul(self, g, h):
        return tuple((a + b) % m for a, b, m in zip(g, h, self.orders))

    def inv(self, g):
        return tuple(-a % m for a, m in zip(g, self.orders))

    def element_order(self, g):
        out = 1
        for a, m in zip(g, self.orders):
            o = m // _gcd(a, m) if a else 1
            out = out * o // _gcd(out, o)
        return out

    def elements(self):
        return itertools.product(*(range(m) for m in self.orders))


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def closure(ctx, gens, cap=None):
    """Element set of <gens> by breadth-first multiplication.

    Raises CapExceeded once more than `cap` elements have been seen.
    """
    gens = [g for g in gens if g != ctx.identity]
    elems = {ctx.identity}
    frontier = [ctx.identity]
    mul = ctx.mul
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        if cap is not None and len(elems) > cap:
            raise CapExceeded(len(elems))
        frontier = new
    return frozenset(elems)


@dataclass(frozen=True)
class PermSubgroup:
    """Subgroup of a group context, with cached element set.

    `meta` carries structured enumeration data (family ids, gluing
    descriptors); it never affects identity or hashing, which go through
    the element set.
    """

    ctx: object = field(compare=False, repr=False)
    gens: tuple = field(compare=False)
    elements: frozenset = field(compare=True)
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def order(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.elements

    def __len__(self):
        return len(self.elements)

    def sorted_elements(self):
        return sorted(self.elements)

    def __hash__(self):
        return hash(self.elements)


def subgroup_from_gens(ctx, gens, cap=None, meta=None) -> PermSubgroup:
    return PermSubgroup(
        ctx=ctx, gens=tuple(gens), elements=closure(ctx, gens, cap), meta=meta or {}
    )


def trivial_subgroup(ctx) -> PermSubgroup:
    return PermSubgroup(ctx=ctx, gens=(), elements=frozenset([ctx.identity]))


# -- point actions -----------------------------------------------------------


def to_permutation(spec, g) -> tuple:
    """Image array of the natural action; entry i is the image of point i."""
    pts = spec.point_list()
    index = {pt: i for i, pt in enumerate(pts)}
    return tuple(index[spec.act(g, pt)] for pt in pts)


def permutation_cycles(perm) -> str:
    """Disjoint-cycle text form of an image array; identity prints as ()."""
    seen = set()
    out = []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            seen.add(i)
            continue
        cyc = [i]
        j = perm[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        seen.add(i)
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) if out else "()"


def orbit(ctx, gens, point):
    seen = {point}
    frontier = [point]
    while frontier:
        new = []
        for pt in frontier:
            for g in gens:
                q = ctx.act(g, pt)
                if q not in seen:
                    seen.add(q)
                    new.append(q)
        frontier = new
    return seen


def is_transitive(ctx, M: PermSubgroup) -> bool:
    pts = ctx.point_list()
    gens = M.gens if M.gens else tuple(M.elements)
    return len(orbit(ctx, gens, pts[0])) == len(pts)


def is_regular(ctx, M: PermSubgroup) -> bool:
    return is_transitive(ctx, M) and M.order == len(ctx.point_list())


def stabilizer(ctx, M: PermSubgroup, point=None) -> PermSubgroup:
    """Point stabilizer; defaults to the identity point."""
    if point is None:
        point = ctx.point_list()[0]
    elems = frozenset(g for g in M.elements if ctx.act(g, point) == point)
    return PermSubgroup(ctx=ctx, gens=tuple(sorted(elems)), elements=elems)


# -- brute-force subgroup enumeration (cyclic extension over solvable G) -----


def all_subgroups(G: PermSubgroup, cap=None, order_divides=None) -> list[PermSubgroup]:
    """Every subgroup of G exactly once, via prime cyclic extensions.

    Sound for solvable G (everything in this package is solvable).  With
    `order_divides` set, only subgroups whose order divides that value are
    built, which also restricts every intermediate chain.
    """
    ctx = G.ctx
    if cap is not None and G.order > cap:
        raise CapExceeded(G.order)
    mul, inv = ctx.mul, ctx.inv
    g_elems = G.sorted_elements()
    primes = _prime_divisors(G.order)

    found: dict[frozenset, PermSubgroup] = {}
    triv = trivial_subgroup(ctx)
    found[triv.elements] = triv
    queue = [triv]
    qi = 0
    while qi < len(queue):
        H = queue[qi]
        qi += 1
        h_order = H.order
        valid_p = []
        for p in primes:
            if (G.order // h_order) % p:
                continue
            if order_divides is not None and order_divides % (h_order * p):
                continue
            valid_p.append(p)
        if not valid_p:
            continue
        h_set = H.elements
        h_gens = H.gens
        seen_by_p = {p: set() for p in valid_p}
        for g in g_elems:
            if g in h_set:
                continue
            g_inv = inv(g)
            if h_gens and not all(
                mul(mul(g, h), g_inv) in h_set for h in h_gens
            ):
                continue
            for p in valid_p:
                if g in seen_by_p[p]:
                    continue
                gp = g
                for _ in range(p - 1):
                    gp = mul(gp, g)
                if gp not in h_set:
                    continue
                new_elems = set(h_set)
                coset = h_set
                gi = g
                for _ in range(p - 1):
                    coset = {mul(h, gi) for h in h_set}
                    new_elems |= coset
                    gi = mul(gi, g)
                fs = frozenset(new_elems)
                seen_by_p[p] |= fs
                if fs not in found:
                    S = PermSubgroup(ctx=ctx, gens=h_gens + (g,), elements=fs)
                    found[fs] = S
                    queue.append(S)
                break
    return sorted(found.values(), key=lambda S: (S.order, S.sorted_elements()))


def _prime_divisors(m):
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def transitive_subgroups_oracle(spec, cap=None) -> list[PermSubgroup]:
    """Brute force: every transitive subgroup of Hol(N) for this spec."""
    gens = list(spec.named_generators().values())
    G = subgroup_from_gens(spec, gens, cap=cap)
    if G.order != spec.hol_order:
        raise AssertionError("named generators do not span Hol(N)")
    return [M for M in all_subgroups(G, cap=cap) if is_transitive(spec, M)]


# -- isomorphism machinery ----------------------------------------------------


def _generating_sequence(ctx, elements, seed=()):
    """Short deterministic generating sequence, covering `seed` first.

    Greedy by maximal closure growth: short sequences keep the
    isomorphism search tree narrow.
    """
    elems = frozenset(elements)
    gens = []
    have = frozenset([ctx.identity])

    def grow(pool, target):
        nonlocal gens, have
        while not target <= have:
            best = None
            best_size = -1
            for g in pool:
                if g in have:
                    continue
                grown = closure(ctx, gens + [g])
                if len(grown) > best_size:
                    best, best_size, best_cl = g, len(grown), grown
            gens.append(best)
            have = best_cl

    if seed:
        grow(sorted(seed), frozenset(seed) | have)
    grow(sorted(elems), elems)
    return gens, have


def _fingerprints(ctx, elements, refine=True):
    """Per-element invariants: order, plus centralizer size on small groups."""
    elems = list(elements)
    orders = {g: ctx.element_order(g) for g in elems}
    if not refine or len(elems) > 3000:
        return {g: (orders[g],) for g in elems}
    mul = ctx.mul
    out = {}
    for g in elems:
        cent = sum(1 for h in elems if mul(g, h) == mul(h, g))
        out[g] = (orders[g], cent)
    return out


def _extend_partial(ctx1, ctx2, gen_pairs, size_bound):
    """Close a generator-image assignment into a homomorphism, or fail.

    Returns the word-closure map if consistent (every Cayley-graph edge
    checked), else None.
    """
    mul1, mul2 = ctx1.mul, ctx2.mul
    known = {ctx1.identity: ctx2.identity}
    frontier = [ctx1.identity]
    while frontier:
        new = []
        for x in frontier:
            fx = known[x]
            for g, h in gen_pairs:
                y = mul1(x, g)
                img = mul2(fx, h)
                prev = known.get(y)
                if prev is None:
                    if len(known) >= size_bound and y not in known:
                        return None
                    known[y] = img
                    new.append(y)
                elif prev != img:
                    return None
        frontier = new
    return known


def _iso_backtrack(ctx1, M1, stab1, ctx2, M2, stab2, count_all, iso_cap,
                   extra_domain=None):
    """Shared engine for perm_isomorphic / count_aut_fixing_stab.

    Searches isomorphisms M1 -> M2 carrying stab1 onto stab2; `extra_domain`
    maps chosen generators to required image sets (used for the
    normal-part-preserving variants).
    """
    if iso_cap is not None and max(len(M1), len(M2)) > iso_cap:
        raise TooLarge(f"order {max(len(M1), len(M2))} beyond isomorphism cap")
    if len(M1) != len(M2) or len(stab1) != len(stab2):
        return 0 if count_all else None
    fp1 = _fingerprints(ctx1, M1)
    fp2 = _fingerprints(ctx2, M2)
    if sorted(fp1.values()) != sorted(fp2.values()):
        return 0 if count_all else None

    stab_seed = sorted(stab1)
    gens, _ = _generating_sequence(ctx1, M1, seed=stab_seed)
    in_stab1 = frozenset(stab1)
    in_stab2 = frozenset(stab2)

    domains = []
    for g in gens:
        cand = [h for h in sorted(M2) if fp2[h] == fp1[g]]
        if g in in_stab1:
            cand = [h for h in cand if h in in_stab2]
        if extra_domain is not None and g in extra_domain:
            allowed = extra_domain[g]
            cand = [h for h in cand if h in allowed]
        domains.append(cand)

    n_target = len(M1)
    count = 0
    sofar = []

    def rec(idx):
        nonlocal count
        if idx == len(gens):
            known = _extend_partial(ctx1, ctx2, list(zip(gens, sofar)), n_target + 1)
            if known is None or len(known) != n_target:
                return None
            if len(set(known.values())) != n_target:
                return None
            if count_all:
                count += 1
                return None
            return known
        for h in domains[idx]:
            sofar.append(h)
            partial = _extend_partial(
                ctx1, ctx2, list(zip(gens, sofar)), n_target + 1
            )
            if partial is not None:
                res = rec(idx + 1)
                if res is not None:
                    sofar.pop()
                    return res
            sofar.pop()
        return None

    res = rec(0)
    if count_all:
        return count
    return res


def perm_isomorphic(M1: PermSubgroup, M2: PermSubgroup, iso_cap=10_000):
    """Stabilizer-preserving isomorphism M1 -> M2 as a dict, or None."""
    s1 = stabilizer(M1.ctx, M1)
    s2 = stabilizer(M2.ctx, M2)
    return _iso_backtrack(
        M1.ctx, M1.elements, s1.elements, M2.ctx, M2.elements, s2.elements,
        count_all=False, iso_cap=iso_cap,
    )


def abstract_isomorphic(ctx1, elems1, ctx2, elems2, iso_cap=10_000):
    """Plain group isomorphism search (no stabilizer condition)."""
    triv1 = frozenset([ctx1.identity])
    triv2 = frozenset([ctx2.identity])
    return _iso_backtrack(
        ctx1, elems1, triv1, ctx2, elems2, triv2, count_all=False, iso_cap=iso_cap
    )


def count_aut_fixing_stab(M: PermSubgroup, iso_cap=10_000) -> int:
    """|Aut(M, M')| with M' the identity-point stabilizer, by backtracking."""
    s = stabilizer(M.ctx, M)
    return _iso_backtrack(
        M.ctx, M.elements, s.elements, M.ctx, M.elements, s.elements,
        count_all=True, iso_cap=iso_cap,
    )


def isomorphic_fixing_subgroup(M1, M2, fixed1, fixed2, iso_cap=10_000):
    """Isomorphism M1 -> M2 with the designated subgroup mapped onto, or None.

    Both stabilizers must also correspond.  Used for the abelian rigidity
    check: N x| A vs N x| A' with the N-part forced onto the N-part.
    """
    s1 = stabilizer(M1.ctx, M1)
    s2 = stabilizer(M2.ctx, M2)
    dom = {g: frozenset(fixed2) for g in fixed1}
    return _iso_backtrack(
        M1.ctx, M1.elements, s1.elements, M2.ctx, M2.elements, s2.elements,
        count_all=False, iso_cap=iso_cap, extra_domain=dom,
    )


def has_normal_complement(M: PermSubgroup, npoints=None, cap=200_000) -> bool:
    """True iff some normal subgroup of order npoints meets the stabilizer
    trivially (almost classically Galois test)."""
    ctx = M.ctx
    if npoints is None:
        npoints = len(ctx.point_list())
    if M.order % npoints:
        return False
    stab = stabilizer(ctx, M).elements
    mul, inv = ctx.mul, ctx.inv
    for K in all_subgroups(M, cap=cap, order_divides=npoints):
        if K.order != npoints:
            continue
        if len(K.elements & stab) != 1:
            continue
        if all(
            mul(mul(g, k), inv(g)) in K.elements
            for g in M.gens
            for k in K.gens
        ):
            return True
    return False
