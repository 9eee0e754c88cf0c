"""Structured enumeration of the transitive subgroups of Hol(N).

Hol(N) factors into blocks: maximal consecutive runs of cyclic coordinates
(each a Cunningham chain of its own) and one factor per semidirect pair.
A transitive subgroup M is determined by

  * its projection to every block (a transitive subgroup of that block's
    holomorph, from the per-block catalogues below), and
  * a gluing subgroup T of the product of the blocks' maximal quotients at
    the shared primes, with all block projections surjective.

Shared primes are 2 (between every pair of blocks) and, for a semidirect
pair at position i whose chain predecessor i-2 is cyclic, the prime
p_{i-1}: the run ending at i-2 has a unit of that order, and the pair's
translation plane carries quotients of that order exactly when the matrix
part fixes one of the two axes.  Subgroups with transitive block
projections are transitive because the block point counts are coprime.

Everything is emitted in a fixed parameter order with structural
descriptors; element sets are only materialised on demand.  Instantiation
is independent per family row, so drivers may parallelise across rows and
merge by the canonical descriptor key.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .arith import divisors, elem_abelian_2_total, valid_index_sets
from .algebra import CyclicFactor, GroupSpec, MetacyclicFactor
from .permgroup import PermSubgroup, closure, orbit


class InvalidParams(ValueError):
    pass


class UnsupportedShape(ValueError):
    pass


# -- subgroups of the mixed 2-groups (row echelon enumeration) ---------------


def rref_matrices_f2(ncols: int):
    """All matrices over F_2 in reduced row echelon form, as row tuples."""
    out = [()]
    for pivots in _pivot_sets(ncols):
        k = len(pivots)
        if k == 0:
            continue
        free_positions = []
        for i, p in enumerate(pivots):
            cols = [c for c in range(p + 1, ncols) if c not in pivots]
            free_positions.append(cols)
        for fills in itertools.product(
            *(itertools.product((0, 1), repeat=len(c)) for c in free_positions)
        ):
            rows = []
            for i, p in enumerate(pivots):
                row = [0] * ncols
                row[p] = 1
                for c, v in zip(free_positions[i], fills[i]):
                    row[c] = v
                rows.append(tuple(row))
            out.append(tuple(rows))
    return out


def _pivot_sets(ncols):
    for k in range(ncols + 1):
        yield from itertools.combinations(range(ncols), k)


def mixed_two_subgroup_rows(e: int, x: int):
    """Subgroups of (C_2)^e x C_{2^x}, one row set each.

    Rows are (b_1..b_e, t) with bits b_j and t the exponent of the C_{2^x}
    generator (0 or 2^{x-c} for the row set's depth c).  Depth-0 sets are
    the pure (C_2)^e subgroups; each deeper c in 1..x contributes the RREF
    matrices over e+1 columns whose last column is nonzero.
    """
    out = []
    for rows in rref_matrices_f2(e):
        out.append((0, tuple(r + (0,) for r in rows)))
    for c in range(1, x + 1):
        scale = 2 ** (x - c)
        for rows in rref_matrices_f2(e + 1):
            if not any(r[-1] for r in rows):
                continue
            out.append((c, tuple(r[:-1] + (r[-1] * scale,) for r in rows)))
    return out


def independent_two_basis(rows, x: int):
    """Rebase RREF rows into independent generators with their orders.

    At most one generator of order > 2 survives (the one carrying the
    deepest C_{2^x} tail); rows sharing that tail are divided by it.
    """
    tailed = [r for r in rows if r[-1]]
    pure = [r for r in rows if not r[-1]]
    basis = []
    if tailed:
        g = tailed[0]
        c = x - (g[-1].bit_length() - 1)
        basis.append((g, 2**c if c > 0 else 1))
        for r in tailed[1:]:
            adj = tuple(a ^ b for a, b in zip(r[:-1], g[:-1])) + (0,)
            basis.append((adj, 2))
    basis.extend((r, 2) for r in pure)
    return basis


# -- cyclic runs ---------------------------------------------------------------


@dataclass(frozen=True)
class RunBlock:
    coords: tuple[int, ...]
    primes: tuple[int, ...]
    x: int  # 2-exponent of the last prime's unit group
    s: int  # odd cofactor of (last prime - 1)
    shared_delta_prime: int | None  # s itself when the next coordinate is twisted

    @property
    def npoints(self):
        out = 1
        for p in self.primes:
            out *= p
        return out

    def label(self):
        return "C_" + "x".join(str(p) for p in self.primes)


@dataclass(frozen=True)
class MetaBlock:
    i: int
    p: int
    q: int
    k: int

    @property
    def npoints(self):
        return self.p * self.q


def decompose_blocks(spec: GroupSpec):
    """Blocks of Hol(N) in coordinate order."""
    chain = spec.chain
    l = chain.length
    blocks = []
    run = []
    for j in range(1, l + 1):
        if (j + 1) in spec.shape.I:
            if run:
                blocks.append(_close_run(chain, run))
                run = []
            blocks.append(
                MetaBlock(
                    i=j + 1, p=chain.prime(j), q=chain.prime(j + 1),
                    k=chain.k_at(j + 1),
                )
            )
        elif j in spec.shape.I:
            continue
        else:
            run.append(j)
    if run:
        blocks.append(_close_run(chain, run))
    return blocks


def _close_run(chain, coords):
    b = coords[-1]
    if b == chain.length:
        x, s, shared = chain.x, chain.s, None
    else:
        # p_b - 1 = 2 * p_{b+1}; that odd prime also divides the adjacent
        # semidirect factor's order, so the run's delta is glueable
        x, s, shared = 1, chain.prime(b + 1), chain.prime(b + 1)
    return RunBlock(
        coords=tuple(coords),
        primes=tuple(chain.prime(j) for j in coords),
        x=x,
        s=s,
        shared_delta_prime=shared,
    )


@dataclass(frozen=True)
class TwistParams:
    """Index set and twist sequence for a regular subgroup of a cyclic run."""

    I: tuple[int, ...]
    t: tuple[int, ...]

    def __post_init__(self):
        if len(self.I) != len(self.t):
            raise InvalidParams("one twist per index")
        if any(b - a < 2 for a, b in zip(self.I, self.I[1:])):
            raise InvalidParams("consecutive indices")


@dataclass(frozen=True)
class BlockInstance:
    """One transitive subgroup of one block, with its gluing decorations.

    gens are full Hol(N) elements.  two_top lists (lift, order) pairs for
    an independent basis of the maximal 2-quotient; odd_quot describes the
    shared-odd-prime quotient as (prime, lift, quot_map_tag) or None.
    aut_mm is |Aut(M_b, M_b')| for the block subgroup; aut_mm_glued is the
    kernel of its action on the odd quotient (used when diagonally glued).
    """

    block_index: int
    key: tuple
    class_key: tuple
    gens: tuple
    order: int
    label: str
    aut_mm: int
    two_top: tuple  # ((lift, order), ...)
    odd_quot: tuple | None  # (prime, lift_element, tag)
    aut_mm_glued: int | None = None
    hgs_direct: int | None = None  # cyclic-type structure count (runs only)
    meta: dict = field(default_factory=dict, compare=False, hash=False)


def _sigma_gen(spec, j):
    """sigma_j as a Hol element (works inside either factor kind)."""
    f = spec.coord_to_factor[j]
    if f.kind == "cyclic":
        return spec.single(j, (1, 1))
    if j == f.i - 1:
        return spec.single(f, (1, 0, 1, 1))
    return spec.single(f, (0, 0, f.k, 1))


def run_instances(spec: GroupSpec, block: RunBlock, block_index: int):
    """Transitive subgroups of the run's holomorph: twisted regular core
    extended by a subgroup of the allowed unit group."""
    chain = spec.chain
    coords = block.coords
    b = coords[-1]
    gens_named = {}
    for j in coords:
        f = spec.coord_to_factor[j]
        gens_named[("sigma", j)] = spec.single(j, (1, 1))
        if j < b:
            gens_named[("alpha", j)] = spec.single(
                j, (0, spec._aut_gens[j]["alpha"])
            )
            gens_named[("beta", j)] = spec.single(j, (0, f.p - 1))
        else:
            if j == chain.length:
                gens_named[("gamma", j)] = spec.single(
                    j, (0, spec._aut_gens[j]["gamma"])
                )
                gens_named[("delta", j)] = spec.single(
                    j, (0, spec._aut_gens[j]["delta"])
                )
            else:
                gens_named[("gamma", j)] = spec.single(j, (0, f.p - 1))
                gens_named[("delta", j)] = spec.single(
                    j, (0, spec._aut_gens[j]["alpha"])
                )

    out = []
    interior = coords[1:]
    for I_r in _no_consecutive_subsets(interior, coords):
        twist_ranges = [range(1, chain.prime(i)) for i in I_r]
        alpha_allowed = [
            j for j in coords if j < b and j not in I_r and (j + 1) not in I_r
        ]
        beta_cols = [j for j in coords if j < b and j not in I_r]
        has_tail = b not in I_r
        x_run = block.x if has_tail else 0
        s_run = block.s if has_tail else 1
        two_choices = mixed_two_subgroup_rows(len(beta_cols), x_run)
        delta_choices = divisors(s_run)
        for t in itertools.product(*twist_ranges):
            core_gens = []
            for j in coords:
                if j not in I_r:
                    core_gens.append(gens_named[("sigma", j)])
            for i, ti in zip(I_r, t):
                tw = spec.mul(
                    gens_named[("sigma", i)],
                    spec.power(gens_named[("alpha", i - 1)], ti),
                )
                core_gens.append(tw)
            for alpha_set in _subsets(alpha_allowed):
                for c_depth, rows in two_choices:
                    for a_div in delta_choices:
                        out.append(
                            _build_run_instance(
                                spec, block, block_index, gens_named,
                                I_r, t, alpha_set, rows, c_depth, a_div,
                                beta_cols, core_gens, s_run,
                            )
                        )
    return out


def _build_run_instance(spec, block, block_index, gens_named, I_r, t,
                        alpha_set, rows, c_depth, a_div, beta_cols,
                        core_gens, s_run):
    chain = spec.chain
    b = block.coords[-1]
    gens = list(core_gens)
    order = block.npoints
    for j in alpha_set:
        gens.append(gens_named[("alpha", j)])
        order *= chain.prime(j + 1)

    def row_element(row):
        el = spec.identity
        for j, bit in zip(beta_cols, row[:-1]):
            if bit:
                el = spec.mul(el, gens_named[("beta", j)])
        if row[-1]:
            el = spec.mul(el, spec.power(gens_named[("gamma", b)], row[-1]))
        return el

    basis = independent_two_basis(rows, block.x)
    two_top = []
    for row, row_order in basis:
        two_top.append((row_element(row), row_order))
        order *= row_order
    gens.extend(el for el, _ in two_top)

    delta_lift = None
    if a_div > 1:
        delta_lift = spec.power(gens_named[("delta", b)], s_run // a_div)
        gens.append(delta_lift)
        order *= a_div

    # |Aut(M, M')| for the run subgroup: unit-group order per untwisted
    # coordinate, times p_{i-1} per twisted i whose inverting unit is absent
    aut = 1
    for j in block.coords:
        if j not in I_r:
            aut *= chain.prime(j) - 1
    hgs = 1
    y_flags = {}
    two_elems = _two_part_elements(rows, block.x)
    for i in I_r:
        col = beta_cols.index(i - 1)
        beta_vec = tuple(
            (1 if c == col else 0) for c in range(len(beta_cols))
        ) + (0,)
        y = 0 if beta_vec in two_elems else 1
        y_flags[i] = y
        aut *= chain.prime(i - 1) ** y
        hgs *= chain.prime(i - 1) ** y

    odd_quot = None
    if block.shared_delta_prime is not None and a_div == block.shared_delta_prime:
        odd_quot = (block.shared_delta_prime, delta_lift, ("run_delta", b))

    jlabel = _run_core_label(chain, block, I_r)
    akey = (tuple(I_r), tuple(sorted(alpha_set)), rows, a_div)
    a_order = order // block.npoints
    label = jlabel if a_order == 1 else f"{jlabel} : C_{a_order}"
    return BlockInstance(
        block_index=block_index,
        key=(akey, t),
        class_key=("run", akey),
        gens=tuple(gens),
        order=order,
        label=label,
        aut_mm=aut,
        two_top=tuple(two_top),
        odd_quot=odd_quot,
        aut_mm_glued=aut,  # unit action on the delta quotient is trivial
        hgs_direct=hgs,
        meta={
            "I": tuple(I_r), "t": t, "alpha": tuple(sorted(alpha_set)),
            "rows": rows, "c": c_depth, "a": a_div, "y": y_flags,
        },
    )


def _two_part_elements(rows, x):
    """Full element set of the 2-part subgroup: bits xor, tail mod 2^x."""
    mod = 2**x if x else 1
    if not rows:
        return {()}
    width = len(rows[0])
    zero = tuple([0] * width)
    elems = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for row in rows:
                w = tuple(a ^ b for a, b in zip(v[:-1], row[:-1]))
                w += ((v[-1] + row[-1]) % mod,)
                if w not in elems:
                    elems.add(w)
                    nxt.append(w)
        frontier = nxt
    return elems


def _run_core_label(chain, block, I_r):
    parts = []
    skip = set()
    for j in block.coords:
        if j in skip:
            continue
        if (j + 1) in I_r:
            parts.append(f"(C_{chain.prime(j)} : C_{chain.prime(j + 1)})")
            skip.add(j + 1)
        else:
            parts.append(f"C_{chain.prime(j)}")
    return " x ".join(parts)


def _no_consecutive_subsets(candidates, coords):
    out = []
    cand = list(candidates)
    for size in range(len(cand) + 1):
        for combo in itertools.combinations(cand, size):
            if all(b - a >= 2 for a, b in zip(combo, combo[1:])):
                out.append(combo)
    return out


def _subsets(items):
    for size in range(len(items) + 1):
        yield from itertools.combinations(items, size)


# -- metacyclic factor catalogue ----------------------------------------------


def _meta_families(p, q, k):
    """Family rows for the transitive subgroups of Hol(C_p x| C_q).

    Each entry: (family id, parameter iterator, builder).  The builder
    returns (odd_gens, b_lift, p_quot, order, class_key, label) with
    factor-local elements; p_quot is (axis, lift) with axis 1 or 2 when the
    subgroup has a C_p quotient (matrix part fixing that axis).
    """
    kinv = pow(k, -1, p)

    def D(u):
        return (0, 0, pow(k, u + 1, p), pow(k, u, p))

    E1 = (1, 0, 1, 1)
    E2 = (0, 1, 1, 1)
    S = D(0)
    B = (0, 0, p - 1, p - 1)
    A = (0, 0, k, k)

    def tr(v1, v2, m):
        return (v1 % p, v2 % p, m[2], m[3])

    def u_class(u):
        if u == 0 or u == q - 1:
            return ("split",)
        return ("twist", min(u, q - 1 - u))

    fams = []

    def add(fid, params, build):
        fams.append((fid, params, build))

    add("p2q2", [()], lambda _: ([E1, E2, S, A], None, None, p * p * q * q,
                                 ("p2q2",), f"F_{p}^2 : (C_{q} x C_{q})"))
    add("2p2q2", [()], lambda _: ([E1, E2, S, A], B, None, 2 * p * p * q * q,
                                  ("2p2q2",), f"Hol(C_{p} : C_{q})"))

    def build_p2q(u):
        quot = None
        if u == 0:
            quot = (2, E2)
        elif u == q - 1:
            quot = (1, E1)
        label = (f"C_{p} x (C_{p} : C_{q})" if quot
                 else f"F_{p}^2 :{min(u, q - 1 - u)} C_{q}")
        return ([E1, E2, D(u)], None, quot, p * p * q,
                ("p2q",) + u_class(u), label)

    add("p2q", [(u,) for u in range(q)], lambda a: build_p2q(*a))

    def build_2p2q(u):
        label = (f"(C_{p} x (C_{p} : C_{q})) : C_2" if u in (0, q - 1)
                 else f"F_{p}^2 :{min(u, q - 1 - u)} C_{2 * q}")
        return ([E1, E2, D(u)], B, None, 2 * p * p * q,
                ("2p2q",) + u_class(u), label)

    add("2p2q", [(u,) for u in range(q)], lambda a: build_2p2q(*a))

    lbl_pq2 = f"C_{q} x (C_{p} : C_{q})"
    add("pq2_e1", [(lam,) for lam in range(p)],
        lambda a: ([E1, S, tr(0, a[0], A)], None, None, p * q * q,
                   ("pq2",), lbl_pq2))
    add("pq2_e2", [(lam,) for lam in range(p)],
        lambda a: ([E2, tr(a[0], 0, S), tr(a[0], 0, A)], None, None,
                   p * q * q, ("pq2",), lbl_pq2))

    lbl_2pq2 = f"C_{q} x (C_{p} : C_{2 * q})"
    add("2pq2_e1", [(lam,) for lam in range(p)],
        lambda a: ([E1, S, tr(0, (1 - k) * a[0], A)], tr(0, 2 * a[0], B),
                   None, 2 * p * q * q, ("2pq2",), lbl_2pq2))
    add("2pq2_e2", [(lam,) for lam in range(p)],
        lambda a: ([E2, tr(a[0], 0, S), tr((1 - k) * a[0], 0, A)],
                   tr(2 * a[0], 0, B), None, 2 * p * q * q,
                   ("2pq2",), lbl_2pq2))

    lbl_frob_q = f"C_{p} : C_{q}"
    lbl_cyc = f"C_{p * q}"
    add("pq_e1", [(u, lam) for u in range(1, q - 1) for lam in range(p)],
        lambda a: ([E1, tr(0, a[1], D(a[0]))], None, None, p * q,
                   ("pq_frob",), lbl_frob_q))
    add("pq_cyc_e1", [(lam,) for lam in range(p)],
        lambda a: ([E1, tr(0, a[0], D(q - 1))], None, (1, E1), p * q,
                   ("pq_cyc",), lbl_cyc))
    add("pq_N_e1", [()],
        lambda a: ([E1, S], None, None, p * q, ("pq_frob",), lbl_frob_q))
    add("pq_e2", [(u, lam) for u in range(1, q - 1) for lam in range(p)],
        lambda a: ([E2, tr(a[1], 0, D(a[0]))], None, None, p * q,
                   ("pq_frob",), lbl_frob_q))
    add("pq_cyc_e2", [(lam,) for lam in range(p)],
        lambda a: ([E2, tr(a[0], 0, S)], None, (2, E2), p * q,
                   ("pq_cyc",), lbl_cyc))
    add("pq_N_e2", [()],
        lambda a: ([E2, D(q - 1)], None, None, p * q, ("pq_frob",),
                   lbl_frob_q))

    lbl_frob_2q = f"C_{p} : C_{2 * q}"
    lbl_dih = f"D_{2 * p} x C_{q}"
    add("2pq_e1", [(u, lam) for u in range(1, q - 1) for lam in range(p)],
        lambda a: ([E1, tr(0, (1 - pow(k, a[0], p)) * a[1], D(a[0]))],
                   tr(0, 2 * a[1], B), None, 2 * p * q,
                   ("2pq_frob",), lbl_frob_2q))
    add("2pq_dih_e1", [(lam,) for lam in range(p)],
        lambda a: ([E1, tr(0, (1 - kinv) * a[0], D(q - 1))],
                   tr(0, 2 * a[0], B), None, 2 * p * q,
                   ("2pq_dih",), lbl_dih))
    add("2pq_N_e1", [(lam,) for lam in range(p)],
        lambda a: ([E1, S], tr(0, a[0], B), None, 2 * p * q,
                   ("2pq_frob",), lbl_frob_2q))
    add("2pq_e2", [(u, lam) for u in range(1, q - 1) for lam in range(p)],
        lambda a: ([E2, tr((1 - pow(k, a[0] + 1, p)) * a[1], 0, D(a[0]))],
                   tr(2 * a[1], 0, B), None, 2 * p * q,
                   ("2pq_frob",), lbl_frob_2q))
    add("2pq_dih_e2", [(lam,) for lam in range(p)],
        lambda a: ([E2, tr((1 - k) * a[0], 0, S)], tr(2 * a[0], 0, B),
                   None, 2 * p * q, ("2pq_dih",), lbl_dih))
    add("2pq_N_e2", [(lam,) for lam in range(p)],
        lambda a: ([E2, D(q - 1)], tr(a[0], 0, B), None, 2 * p * q,
                   ("2pq_frob",), lbl_frob_2q))
    return fams


def meta_aut_table(p, q):
    """|Aut(M, M')| per factor class, with the kernel order under the
    C_p-quotient action for the glueable classes (brute-force verified)."""
    full = {
        ("p2q2",): 2 * p * (p - 1),
        ("2p2q2",): 2 * p * (p - 1),
        ("p2q", "split"): p * (p - 1),
        ("2p2q", "split"): p * (p - 1),
        ("pq2",): (p - 1) * (q - 1),
        ("2pq2",): (p - 1) * (q - 1),
        ("pq_frob",): p * (p - 1),
        ("pq_cyc",): (p - 1) * (q - 1),
        ("2pq_frob",): p - 1,
        ("2pq_dih",): (p - 1) * (q - 1),
    }
    for u in range(1, q - 1):
        key = ("twist", min(u, q - 1 - u))
        self_paired = (2 * u) % q == q - 1
        full[("p2q",) + key] = (2 if self_paired else 1) * p * p * (p - 1)
        full[("2p2q",) + key] = (2 if self_paired else 1) * p * (p - 1)
    glued_kernel = {
        ("p2q", "split"): p,
        ("pq_cyc",): q - 1,
    }
    return full, glued_kernel


def meta_instances(spec: GroupSpec, factor: MetacyclicFactor, block_index: int):
    """Catalogue of transitive subgroups of one semidirect factor."""
    p, q, k = factor.p, factor.q, factor.k
    aut_full, aut_glued = meta_aut_table(p, q)
    out = []
    for fid, params, build in _meta_families(p, q, k):
        for args in params:
            odd_local, b_local, quot, order, class_key, label = build(args)
            gens = tuple(spec.single(factor, g) for g in odd_local)
            two_top = ()
            if b_local is not None:
                two_top = ((spec.single(factor, b_local), 2),)
            odd_quot = None
            if quot is not None:
                axis, lift_local = quot
                odd_quot = (p, spec.single(factor, lift_local),
                            ("meta_axis", factor.i, axis))
            out.append(
                BlockInstance(
                    block_index=block_index,
                    key=(fid,) + tuple(args),
                    class_key=("meta",) + class_key,
                    gens=gens + tuple(el for el, _ in two_top),
                    order=order,
                    label=label,
                    aut_mm=aut_full[class_key],
                    two_top=two_top,
                    odd_quot=odd_quot,
                    aut_mm_glued=aut_glued.get(class_key),
                    meta={"family": fid, "args": tuple(args)},
                )
            )
    return out


# -- the glue engine -----------------------------------------------------------


@dataclass(frozen=True)
class TransitiveSubgroup:
    """One emitted transitive subgroup of Hol(N), by structure not elements."""

    spec: object = field(compare=False, repr=False)
    gens: tuple = field(compare=False)
    order: int
    key: tuple  # canonical identity: block keys + glue data
    class_key: tuple
    label: str
    aut_mm: int
    hgs_direct: int | None = None
    blocks: tuple = field(default=(), compare=False, repr=False)
    glue2: tuple = ()
    glue_odd: tuple = ()

    def __hash__(self):
        return hash(self.key)

    def materialize(self, cap=None) -> PermSubgroup:
        return PermSubgroup(
            ctx=self.spec, gens=self.gens,
            elements=closure(self.spec, self.gens, cap=cap),
            meta={"structured": self},
        )


def block_instances(spec: GroupSpec):
    blocks = decompose_blocks(spec)
    per_block = []
    for idx, blk in enumerate(blocks):
        if isinstance(blk, RunBlock):
            per_block.append(run_instances(spec, blk, idx))
        else:
            per_block.append(meta_instances(spec, spec.coord_to_factor[blk.i],
                                            idx))
    return blocks, per_block


def transitive_subgroups(spec: GroupSpec, verify=True):
    """Every transitive subgroup of Hol(N), glued across blocks.

    Emission order is deterministic: block-instance tuples in catalogue
    order, then the 2-gluing subgroups in row-echelon order, then the odd
    diagonals by residue.
    """
    blocks, per_block = block_instances(spec)
    emitted = []
    for combo in itertools.product(*per_block):
        emitted.extend(_glue_combo(spec, blocks, combo, verify=verify))
    keys = [m.key for m in emitted]
    if len(set(keys)) != len(keys):
        raise AssertionError("duplicate emission")
    return emitted


def _glue_combo(spec, blocks, combo, verify=True):
    # 2-part: joint basis columns = per-block independent generators
    cols = []  # (block_index, lift, order)
    for inst in combo:
        for lift, row_order in inst.two_top:
            cols.append((inst.block_index, lift, row_order))
    big = [c for c in cols if c[2] > 2]
    if len(big) > 1:
        raise UnsupportedShape("more than one deep 2-column")
    # put the deep column last to match the row-echelon enumerator
    cols.sort(key=lambda c: (c[2] > 2, c[0]))
    e_cols = len(cols) - (1 if big else 0)
    x0 = big[0][2].bit_length() - 1 if big else 0

    # odd shared primes: (prime, run_inst, meta_inst) present sides
    odd_sites = []
    for prime in _shared_odd_primes(blocks):
        run_side = None
        meta_side = None
        for inst in combo:
            if inst.odd_quot and inst.odd_quot[0] == prime:
                if inst.odd_quot[2][0] == "run_delta":
                    run_side = inst
                else:
                    meta_side = inst
        odd_sites.append((prime, run_side, meta_side))

    out = []
    for c_depth, rows in mixed_two_subgroup_rows(e_cols, x0):
        if not _projections_onto(rows, cols, x0):
            continue
        odd_choice_lists = []
        for prime, run_side, meta_side in odd_sites:
            if run_side is not None and meta_side is not None:
                choices = [("full",)] + [("diag", mu) for mu in range(1, prime)]
            else:
                choices = [("full",)]
            odd_choice_lists.append(choices)
        for odd_choice in itertools.product(*odd_choice_lists):
            out.append(
                _assemble(spec, blocks, combo, cols, c_depth, rows, x0,
                          odd_sites, odd_choice, verify)
            )
    return out


def _shared_odd_primes(blocks):
    primes = []
    for blk in blocks:
        if isinstance(blk, RunBlock) and blk.shared_delta_prime:
            primes.append(blk.shared_delta_prime)
    return primes


def _projections_onto(rows, cols, x0):
    """T must project onto each block's full 2-top.

    Joint vectors have one slot per plain column plus a final slot for the
    deep column (which is cols[-1] when a deep column exists).
    """
    per_block_cols = {}
    for idx, (b, _, order) in enumerate(cols):
        per_block_cols.setdefault(b, []).append((idx, order))
    if not per_block_cols:
        return True
    width = len(rows[0]) if rows else len(cols) + 1
    elems = _joint_two_elements(rows, x0, width)
    for b, bcols in per_block_cols.items():
        target = 1
        for _, order in bcols:
            target *= order
        proj = {tuple(v[i] for i, _ in bcols) for v in elems}
        if len(proj) != target:
            return False
    return True


def _joint_two_elements(rows, x0, width):
    mod = 2**x0 if x0 else 1
    zero = tuple([0] * width)
    elems = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for row in rows:
                w = tuple(a ^ b for a, b in zip(v[:-1], row[:-1]))
                w += ((v[-1] + row[-1]) % mod,)
                if w not in elems:
                    elems.add(w)
                    nxt.append(w)
        frontier = nxt
    return elems


def _assemble(spec, blocks, combo, cols, c_depth, rows, x0, odd_sites,
              odd_choice, verify):
    gens = []
    order = 1
    aut = 1
    for inst in combo:
        # odd kernel part: everything except the 2-top lifts
        top_lifts = {el for el, _ in inst.two_top}
        for g in inst.gens:
            if g not in top_lifts:
                gens.append(g)
        top_order = 1
        for _, o in inst.two_top:
            top_order *= o
        order *= inst.order // top_order
    # glued 2-part generators
    t2_size = 1
    for row in rows:
        el = spec.identity
        for (b, lift, _), bit in zip(cols, row[:-1]):
            if bit:
                el = spec.mul(el, lift)
        if row[-1]:
            big_lift = cols[-1][1]
            el = spec.mul(el, spec.power(big_lift, row[-1]))
        gens.append(el)
        t2_size *= _row_order(row, x0)
    order *= _two_group_order(rows, x0)

    glue_odd_key = []
    for (prime, run_side, meta_side), choice in zip(odd_sites, odd_choice):
        both = run_side is not None and meta_side is not None
        if choice[0] == "diag":
            mu = choice[1]
            run_lift = run_side.odd_quot[1]
            meta_lift = meta_side.odd_quot[1]
            diag = spec.mul(run_lift, spec.power(meta_lift, mu))
            # remove the pure lifts contributed by the block gens
            gens = [g for g in gens if g not in (run_lift, meta_lift)]
            gens.append(diag)
            order //= prime
            glue_odd_key.append((prime, "diag", mu))
        elif both:
            glue_odd_key.append((prime, "full"))
        else:
            glue_odd_key.append((prime, "none"))

    for inst in combo:
        a = inst.aut_mm
        for (prime, run_side, meta_side), choice in zip(odd_sites, odd_choice):
            if choice[0] == "diag" and inst is meta_side:
                a = inst.aut_mm_glued
        aut *= a

    key = (tuple(inst.key for inst in combo), rows, tuple(glue_odd_key))
    class_key = (
        tuple(inst.class_key for inst in combo),
        rows,
        tuple((prime, kind) for prime, kind, *_ in
              [(gk + (None,))[:3] if len(gk) == 2 else gk for gk in glue_odd_key]),
    )
    label = _glued_label(combo, rows, c_depth, glue_odd_key)
    hgs = None
    if all(isinstance(b, RunBlock) for b in blocks):
        hgs = 1
        for inst in combo:
            hgs *= inst.hgs_direct
    sub = TransitiveSubgroup(
        spec=spec, gens=tuple(gens), order=order, key=key,
        class_key=class_key, label=label, aut_mm=aut, hgs_direct=hgs,
        blocks=tuple(inst.key for inst in combo),
        glue2=rows, glue_odd=tuple(glue_odd_key),
    )
    if verify:
        _verify_transitive(spec, sub)
    return sub


def _row_order(row, x0):
    if row[-1]:
        return 2 ** (x0 - (row[-1].bit_length() - 1))
    return 2


def _two_group_order(rows, x0):
    return len(_joint_two_elements(rows, x0, (len(rows[0]) if rows else 1)))


def _glued_label(combo, rows, c_depth, glue_odd_key):
    parts = [inst.label for inst in combo]
    label = " x ".join(parts)
    tags = []
    if any(r[-1] for r in rows) and c_depth:
        tags.append(f"2^{c_depth}-glued")
    for gk in glue_odd_key:
        if gk[1] == "diag":
            tags.append(f"{gk[0]}-glued")
    if tags:
        label += "  [" + ", ".join(tags) + "]"
    return label


def _verify_transitive(spec, sub: TransitiveSubgroup):
    """Per-coordinate orbit check; coordinate point counts are coprime, so
    coordinatewise transitivity is equivalent to transitivity on N."""
    for f in spec.factors:
        pts = f.point_list()
        local = {pts[0]}
        frontier = [pts[0]]
        idx = spec.factors.index(f)
        gens_local = [g[idx] for g in sub.gens]
        while frontier:
            nxt = []
            for pt in frontier:
                for g in gens_local:
                    q = f.act(g, pt)
                    if q not in local:
                        local.add(q)
                        nxt.append(q)
            frontier = nxt
        if len(local) != f.point_count:
            raise AssertionError(
                f"emitted subgroup not transitive on factor {f}: {sub.key}"
            )
