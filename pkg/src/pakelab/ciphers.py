"""Concrete realisations of the password-keyed cipher E_beta(X).

=============  ====================================  ==================
name           encryption                            groups
=============  ====================================  ==================
mulhash        X * (H(beta) mod p)                   Z_p^* only
mulexphash     X * g^(H(beta) mod q)                 both
randmulhash    (r, X * (H(r || beta) mod p))         Z_p^* only
blockcipher    ideal permutation keyed by beta       both
muliota        X * iota(H(beta))                     both
=============  ====================================  ==================

``mulhash`` multiplies by the raw hash residue; ``muliota`` first maps the
same hash output onto an order-q element.  The two are deliberately kept as
separate instantiations.

Wire format of a ciphertext::

    [1-byte tag][2-byte nonce length][nonce]   (randmulhash only)
    [payload, fixed width]
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Optional

from .groups import DecodeError, Element, GroupError, GroupParams, Kind
from .oracles import OracleSuite, concat, iota

MASK_LABEL = "H.mask"


class Instantiation(str, enum.Enum):
    MUL_HASH = "mulhash"
    MUL_EXP_HASH = "mulexphash"
    RAND_MUL_HASH = "randmulhash"
    BLOCK_CIPHER = "blockcipher"
    MUL_IOTA = "muliota"

    @property
    def tag(self) -> int:
        return list(Instantiation).index(self) + 1

    @classmethod
    def from_tag(cls, tag: int) -> "Instantiation":
        members = list(cls)
        if not 1 <= tag <= len(members):
            raise CiphertextError(f"unknown instantiation tag {tag}")
        return members[tag - 1]


class CiphertextError(ValueError):
    pass


class _NotAnElement:
    """Decryption produced a bit string that names no ambient group element."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_AN_ELEMENT"

    def __bool__(self):
        return False


NOT_AN_ELEMENT = _NotAnElement()


@dataclass(frozen=True)
class InstantiationSpec:
    kind: Instantiation
    nonce_bits: int = 64

    def __post_init__(self):
        object.__setattr__(self, "kind", Instantiation(self.kind))
        if self.kind is Instantiation.RAND_MUL_HASH and self.nonce_bits < 64:
            raise ValueError("randmulhash needs nonce_bits >= 64")

    @classmethod
    def parse(cls, name: str) -> "InstantiationSpec":
        try:
            return cls(Instantiation(name.lower()))
        except ValueError:
            choices = ", ".join(i.value for i in Instantiation)
            raise ValueError(f"unknown instantiation {name!r}; choose from {choices}") from None

    @property
    def name(self) -> str:
        return self.kind.value

    def supports(self, params: GroupParams) -> bool:
        if params.kind is Kind.EC:
            return self.kind not in (Instantiation.MUL_HASH, Instantiation.RAND_MUL_HASH)
        return True

    def check(self, params: GroupParams) -> None:
        if not self.supports(params):
            raise GroupError(f"{self.name} multiplies by a raw residue and is undefined on curves")


@dataclass(frozen=True)
class Ciphertext:
    kind: Instantiation
    payload: bytes
    nonce: Optional[bytes] = None

    def to_bytes(self) -> bytes:
        out = bytes([self.kind.tag])
        if self.kind is Instantiation.RAND_MUL_HASH:
            out += len(self.nonce).to_bytes(2, "big") + self.nonce
        return out + self.payload

    @classmethod
    def from_bytes(cls, data: bytes, params: GroupParams) -> "Ciphertext":
        if not data:
            raise CiphertextError("empty ciphertext")
        kind = Instantiation.from_tag(data[0])
        rest = data[1:]
        nonce = None
        if kind is Instantiation.RAND_MUL_HASH:
            if len(rest) < 2:
                raise CiphertextError("truncated nonce length")
            n = int.from_bytes(rest[:2], "big")
            nonce, rest = rest[2 : 2 + n], rest[2 + n :]
            if len(nonce) != n:
                raise CiphertextError("truncated nonce")
        if len(rest) != payload_len(kind, params):
            raise CiphertextError(f"payload is {len(rest)} bytes, expected {payload_len(kind, params)}")
        return cls(kind, rest, nonce)


# -- block cipher domain ----------------------------------------------------


def block_width(params: GroupParams) -> int:
    """Bit width of the ideal-permutation domain.

    |p| for Z_p^*; |p| + 1 for curves, whose points are compressed to
    2*x + (y mod 2) so that a random string decodes to a point with
    probability close to 1/2.
    """
    return params.p_bits if params.kind is Kind.MODP else params.p_bits + 1


def payload_len(kind: Instantiation, params: GroupParams) -> int:
    if kind is Instantiation.BLOCK_CIPHER:
        return (block_width(params) + 7) // 8
    return params.element_len


def to_block(params: GroupParams, x: Element) -> int:
    if params.kind is Kind.MODP:
        return x
    if x is None:
        raise GroupError("the point at infinity has no compressed encoding")
    return 2 * x[0] + (x[1] & 1)


def from_block(params: GroupParams, v: int):
    if params.kind is Kind.MODP:
        return v if 1 <= v < params.p else NOT_AN_ELEMENT
    x, odd = v >> 1, bool(v & 1)
    if x >= params.p:
        return NOT_AN_ELEMENT
    pt = params.point_from_x(x, odd)
    return NOT_AN_ELEMENT if pt is None else pt


# -- masks --------------------------------------------------------------------


def hash_output(params: GroupParams, suite: OracleSuite, key: bytes) -> bytes:
    """The |p|-bit mask-generation hash shared by mulhash, randmulhash and muliota."""
    return suite.oracle(MASK_LABEL, params.p_bits)(key)


def mask(spec: InstantiationSpec, params: GroupParams, suite: OracleSuite,
         beta: Element, nonce: Optional[bytes] = None) -> Element:
    """The multiplier that a multiplicative instantiation applies under ``beta``."""
    key = params.encode(beta)
    kind = spec.kind
    if kind is Instantiation.MUL_HASH:
        return int.from_bytes(hash_output(params, suite, key), "big") % params.p or 1
    if kind is Instantiation.RAND_MUL_HASH:
        if nonce is None:
            raise CiphertextError("randmulhash mask needs the nonce r")
        return int.from_bytes(hash_output(params, suite, concat(nonce, key)), "big") % params.p or 1
    if kind is Instantiation.MUL_EXP_HASH:
        return params.gexp(suite.hash_to_scalar(MASK_LABEL, key, params.q))
    if kind is Instantiation.MUL_IOTA:
        return iota(params, hash_output(params, suite, key))
    raise CiphertextError(f"{kind.value} is not multiplicative")


def encrypt(spec: InstantiationSpec, params: GroupParams, suite: OracleSuite,
            beta: Element, x: Element, rng: random.Random) -> Ciphertext:
    spec.check(params)
    kind = spec.kind
    if kind is Instantiation.BLOCK_CIPHER:
        perm = suite.cipher(block_width(params))[params.encode(beta)]
        y = perm.encrypt_int(to_block(params, x))
        return Ciphertext(kind, y.to_bytes(payload_len(kind, params), "big"))
    nonce = None
    if kind is Instantiation.RAND_MUL_HASH:
        nonce = rng.getrandbits(spec.nonce_bits).to_bytes((spec.nonce_bits + 7) // 8, "big")
    m = mask(spec, params, suite, beta, nonce)
    return Ciphertext(kind, params.encode(params.mul(x, m)), nonce)


def decrypt(spec: InstantiationSpec, params: GroupParams, suite: OracleSuite,
            beta: Element, c: Ciphertext):
    """Invert ``encrypt``; returns NOT_AN_ELEMENT when the result names no group element."""
    spec.check(params)
    if c.kind is not spec.kind:
        raise CiphertextError(f"ciphertext is {c.kind.value}, expected {spec.name}")
    if c.kind is Instantiation.BLOCK_CIPHER:
        perm = suite.cipher(block_width(params))[params.encode(beta)]
        return from_block(params, perm.decrypt_int(int.from_bytes(c.payload, "big")))
    try:
        y = params.decode(c.payload)
    except DecodeError:
        return NOT_AN_ELEMENT
    return params.div(y, mask(spec, params, suite, beta, c.nonce))

