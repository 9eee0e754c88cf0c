"""Number theory for Cunningham chains and closed-form subgroup counts.

Everything here is exact integer arithmetic, independent of any group
construction.  A *Cunningham chain* is a list of odd primes p1 > ... > pl
with p_i = 2*p_{i+1} + 1; its product indexes the group family the rest of
the package works with.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction


class ChainError(ValueError):
    """Base class for chain validation failures; `index` is 1-based."""

    def __init__(self, index, message):
        self.index = index
        super().__init__(message)


class NotPrime(ChainError):
    def __init__(self, index, value):
        super().__init__(index, f"entry {index} = {value} is not prime")


class EvenPrime(ChainError):
    def __init__(self, index, value):
        super().__init__(index, f"entry {index} = {value} must be odd")


class ChainBroken(ChainError):
    def __init__(self, index, value, expected):
        super().__init__(
            index, f"entry {index} = {value} != 2*{(expected - 1) // 2} + 1"
        )


class NotCoprime(ValueError):
    pass


class KOutOfRange(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic trial division; inputs here are desk-scale."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def multiplicative_order(a: int, p: int) -> int:
    """Smallest d >= 1 with a**d == 1 mod p."""
    a %= p
    if a == 0 or _gcd(a, p) != 1:
        raise NotCoprime(f"{a} is not a unit mod {p}")
    d = 1
    x = a
    while x != 1:
        x = x * a % p
        d += 1
    return d


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def smallest_of_order(order: int, p: int) -> int:
    """Smallest unit mod p of the given multiplicative order.

    Requires order | p - 1.  order == 1 returns 1.
    """
    if (p - 1) % order != 0:
        raise ValueError(f"no element of order {order} mod {p}")
    if order == 1:
        return 1
    for a in range(2, p):
        if pow(a, order, p) == 1 and multiplicative_order(a, p) == order:
            return a
    raise ValueError(f"no element of order {order} mod {p}")  # unreachable


def two_adic_split(m: int) -> tuple[int, int]:
    """Write m = 2**x * s with s odd; returns (x, s)."""
    if m < 1:
        raise ValueError("m must be positive")
    x = 0
    while m % 2 == 0:
        m //= 2
        x += 1
    return x, m


def divisors(s: int) -> list[int]:
    return [d for d in range(1, s + 1) if s % d == 0]


def sigma0(s: int) -> int:
    """Number of divisors of s."""
    if s < 1:
        raise ValueError("s must be positive")
    return len(divisors(s))


@dataclass(frozen=True)
class Chain:
    """A validated Cunningham chain with its derived constants.

    primes are descending; p_l - 1 = 2**x * s with s odd; k[i] (for
    2 <= i <= l) is the smallest residue of multiplicative order p_i
    modulo p_{i-1}.
    """

    primes: tuple[int, ...]
    x: int
    s: int
    k: tuple[int, ...]  # k[j] has order primes[j+1] mod primes[j]

    @property
    def length(self) -> int:
        return len(self.primes)

    @property
    def n(self) -> int:
        out = 1
        for p in self.primes:
            out *= p
        return out

    def prime(self, i: int) -> int:
        """1-based prime access: prime(1) = p1 is the largest."""
        return self.primes[i - 1]

    def k_at(self, i: int) -> int:
        """k_i for 2 <= i <= l: order-p_i element mod p_{i-1}."""
        return self.k[i - 2]

    def __str__(self):
        return "(" + ",".join(str(p) for p in self.primes) + ")"


def validate_chain(primes) -> Chain:
    """Check the chain conditions and derive x, s and the k_i."""
    primes = tuple(int(p) for p in primes)
    if not primes:
        raise ValueError("empty prime list")
    for idx, p in enumerate(primes, start=1):
        if not is_prime(p):
            raise NotPrime(idx, p)
        if p % 2 == 0:
            raise EvenPrime(idx, p)
    for idx in range(len(primes) - 1):
        if primes[idx] != 2 * primes[idx + 1] + 1:
            raise ChainBroken(idx + 1, primes[idx], primes[idx])
    x, s = two_adic_split(primes[-1] - 1)
    k = tuple(
        smallest_of_order(primes[j + 1], primes[j]) for j in range(len(primes) - 1)
    )
    return Chain(primes=primes, x=x, s=s, k=k)


def find_chains(length: int, max_start: int) -> list[Chain]:
    """All chains of the given length with p1 <= max_start, ascending by p1."""
    if length < 1:
        raise ValueError("length must be >= 1")
    out = []
    for p1 in range(3, max_start + 1, 2):
        if not is_prime(p1):
            continue
        primes = [p1]
        ok = True
        for _ in range(length - 1):
            nxt, rem = divmod(primes[-1] - 1, 2)
            if rem != 0 or not is_prime(nxt) or nxt < 3:
                ok = False
                break
            primes.append(nxt)
        if ok:
            out.append(validate_chain(primes))
    return out


def fibonacci_groups(l: int) -> int:
    """Number of groups whose order is a length-l chain product.

    Fibonacci-type recurrence with F(1) = 1, F(2) = 2.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    a, b = 1, 2
    if l == 1:
        return a
    for _ in range(l - 2):
        a, b = b, a + b
    return b


def gaussian_binomial_2(l: int, k: int) -> int:
    """Number of k-dimensional subspaces of F_2^l (empty product = 1)."""
    if k < 0 or k > l:
        raise KOutOfRange(f"k = {k} out of range for l = {l}")
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= Fraction(2 ** (l - (i - 1)) - 1, 2**i - 1)
    assert out.denominator == 1
    return int(out)


def elem_abelian_2_total(l: int) -> int:
    """Total number of subgroups of (C_2)^l."""
    if l < 0:
        raise ValueError("l must be >= 0")
    return sum(gaussian_binomial_2(l, k) for k in range(l + 1))


def mixed_two_group_total(e: int, x: int) -> int:
    """Number of subgroups of (C_2)^e x C_{2^x}.

    Closed form: sum_{k=0}^{e} (2^{e-k} x + 1) * gaussian_binomial_2(e, k).
    """
    if e < 0 or x < 0:
        raise ValueError("e and x must be >= 0")
    return sum(
        (2 ** (e - k) * x + 1) * gaussian_binomial_2(e, k) for k in range(e + 1)
    )


def sigma_l(l: int, x: int) -> int:
    """Subgroup count of (C_2)^{l-1} x C_{2^x}; l >= 1, x >= 1."""
    if l < 1 or x < 1:
        raise ValueError("need l >= 1 and x >= 1")
    return mixed_two_group_total(l - 1, x)


def valid_index_sets(l: int) -> list[frozenset[int]]:
    """Subsets I of {2,...,l} with no two consecutive members.

    Ordered by size then lexicographically, so reports are diffable;
    position in this list is the CLI's shape index.
    """
    out = []
    for size in range(0, l // 2 + 1):
        for combo in itertools.combinations(range(2, l + 1), size):
            if all(b - a >= 2 for a, b in zip(combo, combo[1:])):
                out.append(frozenset(combo))
    return out


def cyclic_class_count_params(l: int, x: int, s: int) -> int:
    """Permutation-isomorphism class count for the cyclic group, from (l, x, s)."""
    total = 0
    for I in valid_index_sets(l):
        u = len(I)
        if l in I:
            total += 2 ** (l - 2 * u) * elem_abelian_2_total(l - u)
        else:
            total += 2 ** (l - 1 - 2 * u) * sigma_l(l - u, x) * sigma0(s)
    return total


def cyclic_class_count(chain: Chain) -> int:
    """Class count for cyclic type at a concrete chain."""
    return cyclic_class_count_params(chain.length, chain.x, chain.s)
