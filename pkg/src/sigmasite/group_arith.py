"""Exact arithmetic in a prime-order subgroup of the units mod p.

Everything here is desk scale: ``p < 2**20`` and ``q < 2**10`` so that the
full exponent space, and the ``q**2`` transcript space built on it, can be
enumerated exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt

from .exceptions import DomainError, ScaleError

MAX_P = 2**20
MAX_Q = 2**10


def is_prime(n: int) -> bool:
    """Deterministic trial division; fine for the desk-scale bound."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class ValidationReport:
    failures: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class GroupParams:
    """Order-``q`` subgroup of (Z/pZ)* generated by ``g``.

    Construction does not validate; call :func:`validate_group` (or
    :meth:`checked`) before trusting the parameters.
    """

    p: int
    q: int
    g: int

    def checked(self) -> GroupParams:
        report = validate_group(self)
        if not report.valid:
            raise DomainError("invalid group parameters: " + "; ".join(report.failures))
        return self

    def check_scale(self) -> None:
        if self.p >= MAX_P or self.q >= MAX_Q:
            raise ScaleError(
                f"parameters exceed desk-scale bound (p < {MAX_P}, q < {MAX_Q}): "
                f"p={self.p}, q={self.q}"
            )

    def exp(self, r: int) -> int:
        """``g**r mod p``."""
        return pow(self.g, r % self.q, self.p)

    def contains(self, value: int) -> bool:
        return isinstance(value, int) and 1 <= value < self.p and pow(value, self.q, self.p) == 1

    def elements(self) -> list[int]:
        """Subgroup elements in sorted order."""
        return sorted(self.exp(r) for r in range(self.q))

    def scalars(self) -> range:
        return range(self.q)


def validate_group(params: GroupParams) -> ValidationReport:
    """Check every GroupParams invariant and list the ones that fail."""
    p, q, g = params.p, params.q, params.g
    failures = []
    if not is_prime(p):
        failures.append("p not prime")
    if not is_prime(q):
        failures.append("q not prime")
    if q <= 0 or (p - 1) % q != 0:
        failures.append("q does not divide p - 1")
    if not 1 <= g < p:
        failures.append("generator out of range")
    elif g == 1:
        failures.append("generator is identity")
    elif q > 0 and pow(g, q, p) != 1:
        failures.append("generator order does not divide q")
    return ValidationReport(tuple(failures))


@dataclass(frozen=True)
class GroupElement:
    """A residue mod p, validated to lie in the subgroup generated by g."""

    value: int
    params: GroupParams = field(repr=False)

    def __post_init__(self):
        if not self.params.contains(self.value):
            raise DomainError(f"{self.value} is not in the order-{self.params.q} subgroup mod {self.params.p}")

    def __mul__(self, other: GroupElement) -> GroupElement:
        return GroupElement(self.value * other.value % self.params.p, self.params)

    def __pow__(self, exp: int) -> GroupElement:
        return GroupElement(pow_mod(self.value, exp, self.params), self.params)

    def inverse(self) -> GroupElement:
        return GroupElement(inv_mod(self.value, self.params.p), self.params)

    def __int__(self) -> int:
        return self.value


def scalar(value: int, params: GroupParams) -> int:
    """Validate a residue of Z_q."""
    if not isinstance(value, int) or not 0 <= value < params.q:
        raise DomainError(f"scalar {value!r} not in Z_{params.q}")
    return value


def pow_mod(base, exp: int, params: GroupParams) -> int:
    """``base**exp mod p`` for a unit ``base`` (int or GroupElement).

    Negative exponents are reduced mod q, which is only meaningful for
    subgroup members.
    """
    b = int(base) % params.p
    if gcd(b, params.p) != 1:
        raise DomainError(f"{base} is not a unit mod {params.p}")
    if exp < 0:
        exp %= params.q
    return pow(b, exp, params.p)


def inv_mod(a: int, m: int) -> int:
    if gcd(a, m) != 1:
        raise DomainError(f"{a} is not invertible mod {m}")
    return pow(a, -1, m)


def dlog_bruteforce(h, params: GroupParams) -> int:
    """The unique ``r`` in Z_q with ``g**r == h``, by exhaustive scan."""
    h = int(h)
    acc = 1
    for r in range(params.q):
        if acc == h:
            return r
        acc = acc * params.g % params.p
    raise DomainError(f"{h} is not in the subgroup generated by {params.g} mod {params.p}")
