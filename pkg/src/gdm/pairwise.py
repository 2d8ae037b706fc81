"""Pairwise-independent label families with exact rational marginals.

Events are the affine maps h(i) = a*i + b over a finite field of prime-power
order Q; item i gets its label from whether h(i) falls in a fixed window.
For any two distinct items the pair (h(i), h(j)) ranges uniformly over all
Q^2 field pairs, so joint label frequencies factor exactly, in rationals,
with no sampling involved.

The marginal alpha must have a prime-power denominator t; the window size
alpha * Q is then an integer for the field of order t^m.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterator


def prime_power_base(n: int):
    """Return (p, j) with n == p**j for prime p, or None."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if p * p > n:
            return (n, 1)  # n is prime
        if n % p:
            continue
        j, m = 0, n
        while m % p == 0:
            m //= p
            j += 1
        return (p, j) if m == 1 else None
    return None


def _poly_mul_mod(a: tuple, b: tuple, p: int, modulus: tuple) -> tuple:
    deg = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # reduce by the monic modulus
    for i in range(len(prod) - 1, deg - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(deg):
                prod[i - deg + j] = (prod[i - deg + j] - c * modulus[j]) % p
    out = prod[:deg]
    out += [0] * (deg - len(out))
    return tuple(out)


def _find_irreducible(p: int, m: int) -> tuple:
    """Monic irreducible polynomial of degree m over F_p, low-to-high coeffs."""
    if m == 1:
        return (0, 1)

    def is_irreducible(poly):
        # no monic factor of degree 1..m//2
        for d in range(1, m // 2 + 1):
            for cand_idx in range(p ** d):
                cand = _int_to_digits(cand_idx, p, d) + (1,)
                if _poly_divides(cand, poly, p):
                    return False
        return True

    for idx in range(p ** m):
        poly = _int_to_digits(idx, p, m) + (1,)
        if poly[0] != 0 and is_irreducible(poly):
            return poly
    raise RuntimeError(f"no irreducible polynomial found for GF({p}^{m})")


def _poly_divides(d: tuple, poly: tuple, p: int) -> bool:
    rem = list(poly)
    dd = len(d) - 1
    while len(rem) - 1 >= dd:
        lead = rem[-1]
        if lead:
            shift = len(rem) - 1 - dd
            for i, di in enumerate(d):
                rem[shift + i] = (rem[shift + i] - lead * di) % p
        rem.pop()
    return all(c == 0 for c in rem)


def _int_to_digits(n: int, p: int, m: int) -> tuple:
    out = []
    for _ in range(m):
        out.append(n % p)
        n //= p
    return tuple(out)


def _digits_to_int(d: tuple, p: int) -> int:
    out = 0
    for c in reversed(d):
        out = out * p + c
    return out


class FiniteField:
    """GF(p^m) with elements encoded as integers 0..p^m-1 (base-p digits)."""

    def __init__(self, p: int, m: int):
        self.p, self.m = p, m
        self.order = p ** m
        self.modulus = _find_irreducible(p, m)

    def add(self, a: int, b: int) -> int:
        da, db = _int_to_digits(a, self.p, self.m), _int_to_digits(b, self.p, self.m)
        return _digits_to_int(tuple((x + y) % self.p for x, y in zip(da, db)),
                              self.p)

    def mul(self, a: int, b: int) -> int:
        da, db = _int_to_digits(a, self.p, self.m), _int_to_digits(b, self.p, self.m)
        return _digits_to_int(_poly_mul_mod(da, db, self.p, self.modulus), self.p)


FAMILY_SIZE_CAP = 400_000


class PairwiseFamily:
    """All Q^2 affine labelings of n items with P[label] = alpha exactly."""

    def __init__(self, n_items: int, alpha: Fraction):
        if not 0 <= alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        base = prime_power_base(alpha.denominator)
        if base is None and alpha.denominator != 1:
            raise ValueError(
                f"alpha denominator {alpha.denominator} is not a prime power")
        self.alpha = alpha
        t = alpha.denominator
        if t == 1:
            # degenerate constant labeling; a single event suffices
            self.field = None
            self.n_items = n_items
            self.threshold = None
            return
        p, j = base
        m = 1
        while t ** m < max(n_items, 1):
            m += 1
        self.field = FiniteField(p, j * m)
        if self.field.order ** 2 > FAMILY_SIZE_CAP:
            raise ValueError(
                f"family of {self.field.order ** 2} events exceeds the cap "
                f"{FAMILY_SIZE_CAP}; this derandomisation is desk-scale only")
        self.n_items = n_items
        self.threshold = alpha.numerator * (t ** (m - 1)) * (p ** 0)
        # window size alpha * Q, an exact integer
        assert self.threshold == alpha * self.field.order

    def __len__(self) -> int:
        if self.field is None:
            return 1
        return self.field.order ** 2

    def events(self) -> Iterator[tuple[bool, ...]]:
        """Yield one boolean label per item for every event."""
        if self.field is None:
            yield tuple(bool(self.alpha == 1) for _ in range(self.n_items))
            return
        F = self.field
        for a in range(F.order):
            a_times = [F.mul(a, i) for i in range(self.n_items)]
            for b in range(F.order):
                yield tuple(F.add(ai, b) < self.threshold for ai in a_times)
