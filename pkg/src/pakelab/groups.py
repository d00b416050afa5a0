"""Cyclic groups for the protocol lab.

Two kinds of group are supported: the prime-order-q subgroup of Z_p^* with
p = t*q + 1, and the prime-order-q subgroup of a short Weierstrass curve
y^2 = x^3 + a*x + b over F_p with cofactor t.

Arithmetic (``exp``, ``mul``, ``inv``) works in the *ambient* group, Z_p^* or
the full curve, because several attacks deliberately manipulate values that
are outside the subgroup.  ``is_subgroup_member`` is the only subgroup-aware
predicate.

Elements are plain Python values: an ``int`` for Z_p^*, an ``(x, y)`` tuple
or ``INFINITY`` (``None``) for curves.
"""

from __future__ import annotations

import enum
import functools
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import sympy

INFINITY = None

Point = Optional[Tuple[int, int]]
Element = Union[int, Point]


class GroupError(ValueError):
    """Invalid group parameters or an unsupported operation for the group kind."""


class DecodeError(ValueError):
    """Byte string does not encode an element of the ambient group."""


class Kind(str, enum.Enum):
    MODP = "modp"
    EC = "ec"


def byte_len(n: int) -> int:
    return (n.bit_length() + 7) // 8


def _sqrt_mod(a: int, p: int) -> Optional[int]:
    """A square root of a mod p, or None if a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    return int(sympy.sqrt_mod(a, p))


@dataclass(frozen=True)
class GroupParams:
    """Public parameters of a cyclic group <g> of prime order q.

    For ``Kind.MODP`` the ambient group is Z_p^* and ``p - 1 == t * q``.
    For ``Kind.EC`` the ambient group is E_{a,b}(F_p) with ``#E == t * q``.
    """

    kind: Kind
    p: int
    q: int
    t: int
    g: Element
    a: int = 0
    b: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not sympy.isprime(self.p):
            raise GroupError(f"p={self.p} is not prime")
        if not sympy.isprime(self.q):
            raise GroupError(f"q={self.q} is not prime")
        if self.kind is Kind.MODP:
            if self.p - 1 != self.t * self.q:
                raise GroupError("p - 1 must equal t*q")
            if math.gcd(self.t, self.q) != 1:
                raise GroupError("gcd(t, q) must be 1")
            if not isinstance(self.g, int) or not 1 < self.g < self.p:
                raise GroupError("generator must be an integer in [2, p-1]")
        else:
            if (4 * self.a**3 + 27 * self.b**2) % self.p == 0:
                raise GroupError("singular curve: 4a^3 + 27b^2 == 0 mod p")
            if self.g is INFINITY or not self.on_curve(self.g):
                raise GroupError("generator is not a point on the curve")
        if self.exp(self.g, self.q) != self.identity:
            raise GroupError("generator order does not divide q")

    # -- basic properties ------------------------------------------------

    @property
    def identity(self) -> Element:
        return 1 if self.kind is Kind.MODP else INFINITY

    @property
    def p_bits(self) -> int:
        return self.p.bit_length()

    @property
    def ambient_order(self) -> int:
        return self.p - 1 if self.kind is Kind.MODP else self.t * self.q

    @property
    def element_len(self) -> int:
        """Byte width of ``encode`` output."""
        n = byte_len(self.p)
        return n if self.kind is Kind.MODP else 1 + 2 * n

    def on_curve(self, pt: Point) -> bool:
        if pt is INFINITY:
            return True
        x, y = pt
        p = self.p
        return 0 <= x < p and 0 <= y < p and (y * y - (x * x * x + self.a * x + self.b)) % p == 0

    # -- ambient group law ---------------------------------------------

    def mul(self, u: Element, v: Element) -> Element:
        if self.kind is Kind.MODP:
            return u * v % self.p
        return self._ec_add(u, v)

    def inv(self, u: Element) -> Element:
        if self.kind is Kind.MODP:
            return pow(u, -1, self.p)
        if u is INFINITY:
            return INFINITY
        return (u[0], -u[1] % self.p)

    def div(self, u: Element, v: Element) -> Element:
        return self.mul(u, self.inv(v))

    def exp(self, base: Element, e: int) -> Element:
        """``base`` composed with itself ``e`` times; negative ``e`` inverts."""
        if self.kind is Kind.MODP:
            return pow(base, e, self.p)
        if e < 0:
            base, e = self.inv(base), -e
        result = INFINITY
        addend = base
        while e:
            if e & 1:
                result = self._ec_add(result, addend)
            addend = self._ec_add(addend, addend)
            e >>= 1
        return result

    def gexp(self, e: int) -> Element:
        return self.exp(self.g, e % self.q)

    def _ec_add(self, u: Point, v: Point) -> Point:
        if u is INFINITY:
            return v
        if v is INFINITY:
            return u
        p = self.p
        x1, y1 = u
        x2, y2 = v
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return INFINITY
            lam = (3 * x1 * x1 + self.a) * pow(2 * y1, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    # -- predicates used by the attacks ---------------------------------

    def is_element(self, u) -> bool:
        """True for any value of the ambient group (not just the subgroup)."""
        if self.kind is Kind.MODP:
            return isinstance(u, int) and 1 <= u < self.p
        return u is INFINITY or (isinstance(u, tuple) and self.on_curve(u))

    def is_subgroup_member(self, u: Element) -> bool:
        if not self.is_element(u):
            return False
        if self.kind is Kind.EC and self.t == 1:
            # Prime-order curve: every point is in <g>.
            return True
        return self.exp(u, self.q) == self.identity

    def cofactor_project(self, u: int) -> int:
        """Raise ``u`` to the q-th power, landing in the order-t subgroup."""
        if self.kind is not Kind.MODP:
            raise GroupError("cofactor projection is only defined for Z_p^* subgroups")
        return pow(u, self.q, self.p)

    def next_element(self, u: int) -> int:
        """Increment an integer (or x-coordinate candidate) with wraparound mod p."""
        return (u + 1) % self.p

    def point_from_x(self, x: int, odd: bool = False) -> Point:
        """The curve point with abscissa x and the requested y parity, or None."""
        rhs = (x * x * x + self.a * x + self.b) % self.p
        y = _sqrt_mod(rhs, self.p)
        if y is None:
            return None
        if y == 0:
            return (x, 0) if not odd else None
        if (y & 1) != odd:
            y = self.p - y
        return (x, y)

    def random_scalar(self, rng: random.Random) -> int:
        """Uniform exponent in [1, q-1]."""
        return rng.randrange(1, self.q)

    # -- encodings --------------------------------------------------------

    def encode(self, u: Element) -> bytes:
        """Fixed-width big-endian encoding; curves use a flag byte (0 = infinity, 4 = point)."""
        n = byte_len(self.p)
        if self.kind is Kind.MODP:
            if not self.is_element(u):
                raise DecodeError(f"{u!r} is not in Z_{self.p}^*")
            return u.to_bytes(n, "big")
        if u is INFINITY:
            return bytes(1 + 2 * n)
        return b"\x04" + u[0].to_bytes(n, "big") + u[1].to_bytes(n, "big")

    def decode(self, data: bytes) -> Element:
        if len(data) != self.element_len:
            raise DecodeError(f"expected {self.element_len} bytes, got {len(data)}")
        if self.kind is Kind.MODP:
            v = int.from_bytes(data, "big")
            if not 1 <= v < self.p:
                raise DecodeError(f"value {v} out of range [1, {self.p - 1}]")
            return v
        n = byte_len(self.p)
        flag = data[0]
        if flag == 0 and not any(data[1:]):
            return INFINITY
        if flag != 4:
            raise DecodeError(f"bad point flag {flag}")
        pt = (int.from_bytes(data[1 : 1 + n], "big"), int.from_bytes(data[1 + n :], "big"))
        if not self.on_curve(pt):
            raise DecodeError(f"{pt} is not on the curve")
        return pt

    def field_bytes(self, v: int) -> bytes:
        """Encode a raw residue in [0, p-1] (used for SRP's 3*beta + g^y)."""
        return (v % self.p).to_bytes(byte_len(self.p), "big")

    # -- misc ---------------------------------------------------------------

    def ambient_generator(self) -> Element:
        """A generator of the whole ambient group (order t*q).

        Raises GroupError when the ambient group is not cyclic.
        """
        return _ambient_generator(self)

    def _find_ambient_generator(self) -> Element:
        n = self.ambient_order
        primes = sorted(sympy.factorint(self.t)) + [self.q]
        primes = sorted(set(primes))

        def full_order(u):
            return all(self.exp(u, n // r) != self.identity for r in primes)

        if self.kind is Kind.MODP:
            for c in range(2, self.p):
                if full_order(c):
                    return c
        else:
            for x in range(self.p):
                for odd in (False, True):
                    pt = self.point_from_x(x, odd)
                    if pt is not None and full_order(pt):
                        return pt
        raise GroupError("ambient group is not cyclic")

    def describe(self) -> dict:
        d = {"kind": self.kind.value, "p": self.p, "q": self.q, "t": self.t}
        if self.kind is Kind.MODP:
            d["g"] = self.g
        else:
            d.update(g=list(self.g), a=self.a, b=self.b)
        return d


@functools.lru_cache(maxsize=64)
def _ambient_generator(params: GroupParams) -> Element:
    return params._find_ambient_generator()


# -- presets ---------------------------------------------------------------


def safe_prime_group(bits: int, seed: int = 0) -> GroupParams:
    """A random safe-prime group p = 2q + 1 with ``bits``-bit p and g = 4."""
    return _safe_prime_group(bits, seed)


@functools.lru_cache(maxsize=None)
def _safe_prime_group(bits: int, seed: int) -> GroupParams:
    rng = random.Random(f"safe-prime:{bits}:{seed}")
    while True:
        q = rng.getrandbits(bits - 1) | (1 << (bits - 2)) | 1
        if sympy.isprime(q) and sympy.isprime(2 * q + 1):
            # Any quadratic residue other than 1 has order q when p = 2q + 1.
            return GroupParams(Kind.MODP, 2 * q + 1, q, 2, 4, name=f"safe{bits}-{seed}")


def rotation_groups(count: int, bits: int = 64, seed: int = 0) -> list[GroupParams]:
    """``count`` distinct safe-prime groups (t = 2), one per observed session."""
    return [safe_prime_group(bits, seed * 1_000_003 + i) for i in range(count)]


MODP23 = GroupParams(Kind.MODP, p=23, q=11, t=2, g=2, name="modp23")

def _first_point_of_order(p: int, a: int, b: int, q: int) -> Point:
    # Brute-force enumeration; only meant for toy curves.
    for x in range(p):
        for y in range(p):
            if (y * y - (x**3 + a * x + b)) % p:
                continue
            pt, acc = (x, y), (x, y)
            for _ in range(q - 1):
                acc = _toy_add(p, a, acc, pt)
            if acc is INFINITY:
                return pt
    raise GroupError(f"no point of order {q}")


def _toy_add(p, a, u, v):
    if u is INFINITY:
        return v
    if (u[0] - v[0]) % p == 0 and (u[1] + v[1]) % p == 0:
        return INFINITY
    if u == v:
        lam = (3 * u[0] ** 2 + a) * pow(2 * u[1], -1, p) % p
    else:
        lam = (v[1] - u[1]) * pow(v[0] - u[0], -1, p) % p
    x3 = (lam * lam - u[0] - v[0]) % p
    return (x3, (lam * (u[0] - x3) - u[1]) % p)


# y^2 = x^3 + x + 1 over F_23 has 28 = 4 * 7 points.
EC23 = GroupParams(Kind.EC, 23, 7, 4, _first_point_of_order(23, 1, 1, 7), 1, 1, name="ec23")

# Prime-order curve y^2 = x^3 + x + 74 over F_65519: #E = 65407 (prime), so t = 1.
EC65519 = GroupParams(
    Kind.EC, p=65519, q=65407, t=1, g=(2, 55556), a=1, b=74, name="ec65519"
)

PRESETS = {
    "modp23": lambda: MODP23,
    "safe64": lambda: safe_prime_group(64, 0),
    "ec23": lambda: EC23,
    "ec65519": lambda: EC65519,
}


def preset(name: str) -> GroupParams:
    try:
        return PRESETS[name]()
    except KeyError:
        raise GroupError(f"unknown group preset {name!r}; choose from {sorted(PRESETS)}") from None


def parse_params(text: str) -> GroupParams:
    """Parse a ``key = value`` group description.

    Keys: kind, p, q, t, g, a, b.  Integers are decimal; a curve generator is
    written ``g = x,y``.
    """
    fields = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise GroupError(f"malformed line {raw!r}")
        fields[key.strip()] = value.strip()
    try:
        kind = Kind(fields.get("kind", "modp"))
        ints = {k: int(fields[k]) for k in ("p", "q", "t")}
        if kind is Kind.MODP:
            g = int(fields["g"])
            return GroupParams(kind, g=g, **ints)
        gx, gy = (int(c) for c in fields["g"].split(","))
        return GroupParams(kind, g=(gx, gy), a=int(fields["a"]), b=int(fields["b"]), **ints)
    except KeyError as exc:
        raise GroupError(f"missing field {exc.args[0]!r}") from None


def load_params(path) -> GroupParams:
    return parse_params(Path(path).read_text())
