"""Element arithmetic for N, Aut(N) and Hol(N) over every shape.

A shape selects which consecutive prime pairs of the chain are joined by a
semidirect product.  Hol(N) then splits as a direct product of independent
*factors*:

* one affine factor AGL(1, p_j) = Hol(C_{p_j}) for each prime p_j left
  cyclic, with elements (t, u): c -> t + u*c mod p_j;
* one factor Hol(C_p x| C_q) for each selected pair (p, q) = (p_{i-1}, p_i),
  realised as affine maps on F_p^2: elements (v1, v2, d1, d2) acting as
  w -> v + diag(d1, d2) w, constrained by d1/d2 in <k> where k has order
  q mod p.  The basis is e1 = the p-translation of N and e2 = the commuting
  p-element mixing in the order-p automorphism; S = diag(k, 1), A = diag(k, k)
  and B = -I generate the point group.

A Hol(N) element is a tuple with one component tuple per factor.  All
operations are pure; GroupSpec is immutable after construction, so elements
and specs may be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arith import Chain, smallest_of_order, valid_index_sets


class InvalidShape(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Shape:
    """Index set I of semidirect positions plus the cyclic cofactor order m."""

    l: int
    I: frozenset[int]
    m: int

    def __str__(self):
        if not self.I:
            return "I={}"
        return "I={" + ",".join(str(i) for i in sorted(self.I)) + "}"


def make_shape(chain: Chain, I) -> Shape:
    I = frozenset(int(i) for i in I)
    l = chain.length
    for i in I:
        if i < 2 or i > l:
            raise InvalidShape(f"index {i} outside 2..{l}")
        if i - 1 in I:
            raise InvalidShape(f"consecutive indices {i - 1},{i}")
    m = 1
    used = set()
    for i in I:
        used.update((i - 1, i))
    for j in range(1, l + 1):
        if j not in used:
            m *= chain.prime(j)
    return Shape(l=l, I=I, m=m)


class CyclicFactor:
    """Hol(C_p) for one cyclic coordinate j: elements (t, u), c -> t + u*c."""

    kind = "cyclic"

    def __init__(self, coord: int, p: int):
        self.coord = coord
        self.p = p
        self.coords = (coord,)
        self.point_count = p
        self.order = p * (p - 1)
        self.identity = (0, 1)

    def mul(self, g, h):
        p = self.p
        return ((g[0] + g[1] * h[0]) % p, g[1] * h[1] % p)

    def inv(self, g):
        p = self.p
        ui = pow(g[1], -1, p)
        return (-ui * g[0] % p, ui)

    def act(self, g, pt):
        return ((g[0] + g[1] * pt[0]) % self.p,)

    def n_part(self, g):
        return (g[0],)

    def element_order(self, g):
        t, u = g
        if u == 1:
            return 1 if t == 0 else self.p
        d = 1
        x = g
        while x != self.identity:
            x = self.mul(x, g)
            d += 1
        return d

    def elements(self):
        for t in range(self.p):
            for u in range(1, self.p):
                yield (t, u)

    def encode(self, g):
        return g[0] * (self.p - 1) + (g[1] - 1)

    def point_list(self):
        return [(c,) for c in range(self.p)]

    def __repr__(self):
        return f"CyclicFactor(p={self.p})"


class MetacyclicFactor:
    """Hol(C_p x| C_q) as affine maps (v1, v2, d1, d2) on F_p^2."""

    kind = "metacyclic"

    def __init__(self, i: int, p: int, q: int, k: int):
        self.i = i
        self.p = p
        self.q = q
        self.k = k
        self.coords = (i - 1, i)
        self.point_count = p * q
        self.order = 2 * p * p * q * q
        self.identity = (0, 0, 1, 1)
        # discrete logs base k on <k>; powers of k are the allowed d1/d2 ratios
        self.dlog = {}
        kp = 1
        for e in range(q):
            self.dlog[kp] = e
            kp = kp * k % p
        self.kpow = [pow(k, e, p) for e in range(q)]

    def mul(self, g, h):
        p = self.p
        return (
            (g[0] + g[2] * h[0]) % p,
            (g[1] + g[3] * h[1]) % p,
            g[2] * h[2] % p,
            g[3] * h[3] % p,
        )

    def inv(self, g):
        p = self.p
        d1 = pow(g[2], -1, p)
        d2 = pow(g[3], -1, p)
        return (-d1 * g[0] % p, -d2 * g[1] % p, d1, d2)

    def sigma_exp(self, g) -> int:
        """Exponent of the order-q N-generator inside g (the S-grading)."""
        return self.dlog[g[2] * pow(g[3], -1, self.p) % self.p]

    def act(self, g, pt):
        c, d = pt
        s = self.sigma_exp(g)
        return (
            (g[0] + g[2] * c + g[1] * self.kpow[(s + d) % self.q]) % self.p,
            (d + s) % self.q,
        )

    def n_part(self, g):
        s = self.sigma_exp(g)
        return ((g[0] + g[1] * self.kpow[s]) % self.p, s)

    def element_order(self, g):
        d = 1
        x = g
        while x != self.identity:
            x = self.mul(x, g)
            d += 1
        return d

    def elements(self):
        p, q = self.p, self.q
        for d2 in range(1, p):
            for s in range(q):
                d1 = d2 * self.kpow[s] % p
                for v1 in range(p):
                    for v2 in range(p):
                        yield (v1, v2, d1, d2)

    def encode(self, g):
        p = self.p
        return ((g[0] * p + g[1]) * p + (g[2] - 1)) * p + (g[3] - 1)

    def from_n(self, a: int, b: int):
        """Embed the N-element e1^a * S^b of this factor."""
        return (a % self.p, 0, self.kpow[b % self.q], 1)

    def from_aut(self, lam: int, mu: int):
        """Automorphism scaling the p-part by lam and shearing by mu.

        In affine coordinates this is translation by mu/(k-1)*(-1, 1)
        together with the scalar matrix lam*I.
        """
        p = self.p
        w = mu * pow(self.k - 1, -1, p) % p
        return (-w % p, w, lam % p, lam % p)

    def point_list(self):
        return [(c, d) for c in range(self.p) for d in range(self.q)]

    def __repr__(self):
        return f"MetacyclicFactor(p={self.p}, q={self.q}, k={self.k})"


class GroupSpec:
    """Immutable context for one (chain, shape) pair.

    Holds the factor decomposition of Hol(N), point indexing (mixed radix,
    first coordinate most significant) and the named generators.
    """

    def __init__(self, chain: Chain, shape: Shape):
        if shape.l != chain.length:
            raise InvalidShape("shape length does not match chain")
        self.chain = chain
        self.shape = shape
        self.n = chain.n
        l = chain.length
        self.factors: list = []
        coord_to_factor = {}
        j = 1
        while j <= l:
            if (j + 1) in shape.I:
                f = MetacyclicFactor(
                    j + 1, chain.prime(j), chain.prime(j + 1), chain.k_at(j + 1)
                )
                self.factors.append(f)
                coord_to_factor[j] = f
                coord_to_factor[j + 1] = f
                j += 2
            else:
                f = CyclicFactor(j, chain.prime(j))
                self.factors.append(f)
                coord_to_factor[j] = f
                j += 1
        self.coord_to_factor = coord_to_factor
        self.identity = tuple(f.identity for f in self.factors)
        self.hol_order = 1
        for f in self.factors:
            self.hol_order *= f.order
        # unit-group generators per cyclic coordinate
        self._aut_gens = {}
        for f in self.factors:
            if f.kind != "cyclic":
                continue
            p, j = f.p, f.coord
            if j < l:
                self._aut_gens[j] = {
                    "alpha": smallest_of_order(chain.prime(j + 1), p),
                    "beta": p - 1,
                }
            else:
                self._aut_gens[j] = {
                    "gamma": smallest_of_order(2**chain.x, p),
                    "delta": smallest_of_order(chain.s, p),
                }
        self._radix = []
        rad = 1
        for j in range(l, 0, -1):
            self._radix.append(rad)
            rad *= chain.prime(j)
        self._radix.reverse()  # _radix[j-1] = weight of coordinate j

    # -- element operations ------------------------------------------------

    def mul(self, g, h):
        return tuple(f.mul(a, b) for f, a, b in zip(self.factors, g, h))

    def inv(self, g):
        return tuple(f.inv(a) for f, a in zip(self.factors, g))

    def power(self, g, e: int):
        out = self.identity
        base = g if e >= 0 else self.inv(g)
        for _ in range(abs(e)):
            out = self.mul(out, base)
        return out

    def element_order(self, g) -> int:
        order = 1
        for f, a in zip(self.factors, g):
            o = f.element_order(a)
            order = order * o // _gcd(order, o)
        return order

    def act(self, g, point):
        """Natural Hol(N) action on a point of N (residue tuple)."""
        out = [0] * self.chain.length
        for f, a in zip(self.factors, g):
            img = f.act(a, tuple(point[c - 1] for c in f.coords))
            for c, r in zip(f.coords, img):
                out[c - 1] = r
        return tuple(out)

    def encode(self, g) -> int:
        """Pack an element into one integer (for fast set arithmetic)."""
        out = 0
        for f, a in zip(self.factors, g):
            out = out * f.order + f.encode(a)
        return out

    # -- N / Aut views -----------------------------------------------------

    def n_part(self, g):
        """Residue vector of the N-component of g = [eta, alpha]."""
        out = [0] * self.chain.length
        for f, a in zip(self.factors, g):
            for c, r in zip(f.coords, f.n_part(a)):
                out[c - 1] = r
        return tuple(out)

    def embed_n(self, residues):
        """Hol element [eta, id] for eta given as a residue vector."""
        parts = []
        for f in self.factors:
            if f.kind == "cyclic":
                parts.append((residues[f.coord - 1] % f.p, 1))
            else:
                a, b = residues[f.coords[0] - 1], residues[f.coords[1] - 1]
                parts.append(f.from_n(a, b))
        return tuple(parts)

    def aut_part(self, g):
        """The automorphism component: embed_n(n_part(g))^-1 * g."""
        return self.mul(self.inv(self.embed_n(self.n_part(g))), g)

    def is_automorphism(self, g) -> bool:
        return self.n_part(g) == (0,) * self.chain.length

    def point_index(self, point) -> int:
        return sum(r * w for r, w in zip(point, self._radix))

    def point_from_index(self, idx: int):
        out = []
        for j, w in enumerate(self._radix, start=1):
            out.append(idx // w)
            idx %= w
        return tuple(out)

    @property
    def points(self):
        return range(self.n)

    def point_list(self):
        return [self.point_from_index(i) for i in range(self.n)]

    # -- named generators ----------------------------------------------------

    def single(self, coord_or_factor, local):
        """Element that is `local` in one factor and identity elsewhere."""
        parts = list(self.identity)
        for idx, f in enumerate(self.factors):
            if f is coord_or_factor or coord_or_factor in f.coords:
                parts[idx] = local
                return tuple(parts)
        raise ValueError("no such factor")

    def named_generators(self) -> dict:
        """The presentation generators as Hol elements.

        sigma_j for every coordinate; alpha_j/beta_j per cyclic coordinate
        (gamma/delta for the last one); e1_i, e2_i, S_i, A_i, B_i and
        theta_i per semidirect position i.  Trivial generators (order 1)
        are included so downstream enumeration stays uniform.
        """
        l = self.chain.length
        out = {}
        for f in self.factors:
            if f.kind == "cyclic":
                j = f.coord
                out[f"sigma_{j}"] = self.single(j, (1, 1))
                for name, val in self._aut_gens[j].items():
                    out[f"{name}_{j}"] = self.single(j, (0, val))
            else:
                i = f.i
                out[f"sigma_{i - 1}"] = self.single(f, (1, 0, 1, 1))
                out[f"sigma_{i}"] = self.single(f, (0, 0, f.k, 1))
                out[f"e1_{i}"] = self.single(f, (1, 0, 1, 1))
                out[f"e2_{i}"] = self.single(f, (0, 1, 1, 1))
                out[f"S_{i}"] = self.single(f, (0, 0, f.k, 1))
                out[f"A_{i}"] = self.single(f, (0, 0, f.k, f.k))
                out[f"B_{i}"] = self.single(f, (0, 0, f.p - 1, f.p - 1))
                out[f"theta_{i}"] = self.single(f, f.from_aut(1, 1))
        if l in self.coord_to_factor and self.coord_to_factor[l].kind == "cyclic":
            out["gamma"] = out[f"gamma_{l}"]
            out["delta"] = out[f"delta_{l}"]
        return out

    def structure_label(self) -> str:
        """Direct/semidirect product description of N, e.g. (C_7 : C_3) x C_5."""
        parts = []
        for f in self.factors:
            if f.kind == "cyclic":
                parts.append(f"C_{f.p}")
            else:
                parts.append(f"(C_{f.p} : C_{f.q})")
        label = " x ".join(parts)
        if all(f.kind == "cyclic" for f in self.factors):
            return f"C_{self.n}"
        return label

    def __repr__(self):
        return f"GroupSpec(chain={self.chain}, {self.shape})"


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def build_group(chain: Chain, I) -> GroupSpec:
    """Spec for the group selected by the index set I (validated)."""
    return GroupSpec(chain, make_shape(chain, I))


def all_group_specs(chain: Chain) -> list[GroupSpec]:
    """The full family for this chain, in fixed shape order."""
    return [build_group(chain, I) for I in valid_index_sets(chain.length)]


# -- spec-level operation wrappers ------------------------------------------


def n_mul(spec: GroupSpec, a, b):
    """Product of two N elements in normal-form residue vectors."""
    return spec.n_part(spec.mul(spec.embed_n(a), spec.embed_n(b)))


def aut_apply(spec: GroupSpec, alpha, eta):
    """Image of the N element eta under the automorphism alpha."""
    return spec.n_part(spec.mul(alpha, spec.embed_n(eta)))


def hol_mul(spec: GroupSpec, g, h):
    return spec.mul(g, h)


def hol_inv(spec: GroupSpec, g):
    return spec.inv(g)


def hall_pi_subgroup(spec: GroupSpec) -> list:
    """Generators of the unique Hall subgroup of Hol(N) over the chain primes.

    Only defined for the cyclic shape: sigma_1..sigma_l together with the
    alpha_j of chain-prime order.
    """
    if spec.shape.I:
        raise ShapeMismatch("Hall subgroup generators need the cyclic shape")
    gens = spec.named_generators()
    out = [gens[f"sigma_{j}"] for j in range(1, spec.chain.length + 1)]
    out += [gens[f"alpha_{j}"] for j in range(1, spec.chain.length)]
    return out
