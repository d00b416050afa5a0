"""Simulated idealised primitives: random oracles, an ideal cipher, and iota.

Every primitive is lazily sampled.  Fresh samples are drawn from SHAKE-256
keyed by the suite seed and a domain-separation label, so a given seed
reproduces every table byte-for-byte regardless of thread scheduling, and two
labels never share a table.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from typing import Dict, Iterator, Tuple

from .groups import GroupParams, Kind

log = logging.getLogger(__name__)


def concat(*fields: bytes) -> bytes:
    """Unambiguous concatenation: each field is prefixed by a 4-byte big-endian length."""
    return b"".join(len(f).to_bytes(4, "big") + f for f in fields)


def _sample(seed: int, *parts: bytes, nbytes: int) -> bytes:
    return hashlib.shake_256(concat(seed.to_bytes(8, "big"), *parts)).digest(nbytes)


class RandomOracle:
    """A lazily sampled random function {0,1}* -> {0,1}^output_bits."""

    def __init__(self, label: str, output_bits: int = 256, seed: int = 0):
        if output_bits <= 0:
            raise ValueError("output_bits must be positive")
        self.label = label
        self.output_bits = output_bits
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self.table: Dict[bytes, bytes] = {}
        self._lock = threading.Lock()
        self._nbytes = (output_bits + 7) // 8
        self._excess = 8 * self._nbytes - output_bits

    def __call__(self, data: bytes) -> bytes:
        with self._lock:
            out = self.table.get(data)
            if out is None:
                raw = _sample(self.seed, b"RO", self.label.encode(), data, nbytes=self._nbytes)
                if self._excess:
                    raw = bytes([raw[0] & (0xFF >> self._excess)]) + raw[1:]
                out = self.table[data] = raw
                log.debug("oracle %s %s -> %s", self.label, data.hex(), out.hex())
            return out

    query = __call__

    def as_int(self, data: bytes) -> int:
        return int.from_bytes(self(data), "big")

    def dump(self) -> Iterator[str]:
        """Query/answer pairs as ``label query_hex output_hex`` lines, in query order."""
        for q, a in self.table.items():
            yield f"{self.label} {q.hex()} {a.hex()}"


class IdealPermutation:
    """A lazily sampled uniformly random permutation of {0,1}^width_bits for one key."""

    def __init__(self, key: bytes, width_bits: int, seed: int = 0):
        self.key = key
        self.width_bits = width_bits
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self.forward: Dict[int, int] = {}
        self.backward: Dict[int, int] = {}
        self.nbytes = (width_bits + 7) // 8
        self._lock = threading.Lock()

    def _draw(self, direction: bytes, value: int, taken: Dict[int, int]) -> int:
        # Rejection sampling against the already-sampled range keeps the map a bijection.
        mask = (1 << self.width_bits) - 1
        ctr = 0
        while True:
            raw = _sample(
                self.seed, b"IC", self.key, direction, value.to_bytes(self.nbytes, "big"),
                ctr.to_bytes(4, "big"), nbytes=self.nbytes + 8,
            )
            out = int.from_bytes(raw, "big") & mask
            if out not in taken:
                return out
            ctr += 1

    def encrypt_int(self, x: int) -> int:
        if x < 0 or x >> self.width_bits:
            raise ValueError(f"input does not fit in {self.width_bits} bits")
        with self._lock:
            y = self.forward.get(x)
            if y is None:
                y = self._draw(b"E", x, self.backward)
                self.forward[x] = y
                self.backward[y] = x
            return y

    def decrypt_int(self, y: int) -> int:
        if y < 0 or y >> self.width_bits:
            raise ValueError(f"input does not fit in {self.width_bits} bits")
        with self._lock:
            x = self.backward.get(y)
            if x is None:
                x = self._draw(b"D", y, self.forward)
                self.backward[y] = x
                self.forward[x] = y
            return x

    def _check(self, data: bytes) -> int:
        if len(data) != self.nbytes:
            raise ValueError(f"expected {self.nbytes} bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v >> self.width_bits:
            raise ValueError(f"input exceeds {self.width_bits} bits")
        return v

    def encrypt(self, x: bytes) -> bytes:
        return self.encrypt_int(self._check(x)).to_bytes(self.nbytes, "big")

    def decrypt(self, y: bytes) -> bytes:
        return self.decrypt_int(self._check(y)).to_bytes(self.nbytes, "big")


class IdealCipher:
    """A family of independent ideal permutations indexed by key."""

    def __init__(self, width_bits: int, seed: int = 0, label: str = "E"):
        self.width_bits = width_bits
        self.seed = seed
        self.label = label
        self._perms: Dict[bytes, IdealPermutation] = {}
        self._lock = threading.Lock()

    def __getitem__(self, key: bytes) -> IdealPermutation:
        with self._lock:
            perm = self._perms.get(key)
            if perm is None:
                perm = IdealPermutation(self.label.encode() + b"|" + key, self.width_bits, self.seed)
                self._perms[key] = perm
            return perm


class OracleSuite:
    """All idealised primitives owned by one trial, derived from a single seed."""

    def __init__(self, seed: int = 0):
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self._oracles: Dict[Tuple[str, int], RandomOracle] = {}
        self._ciphers: Dict[int, IdealCipher] = {}
        self._lock = threading.Lock()

    def oracle(self, label: str, output_bits: int = 256) -> RandomOracle:
        key = (label, output_bits)
        with self._lock:
            ro = self._oracles.get(key)
            if ro is None:
                # The width is part of the label so that tables never overlap.
                ro = self._oracles[key] = RandomOracle(f"{label}/{output_bits}", output_bits, self.seed)
            return ro

    def cipher(self, width_bits: int) -> IdealCipher:
        with self._lock:
            ic = self._ciphers.get(width_bits)
            if ic is None:
                ic = self._ciphers[width_bits] = IdealCipher(width_bits, self.seed)
            return ic

    def hash_to_scalar(self, label: str, data: bytes, q: int) -> int:
        """Oracle output reduced mod q."""
        return self.oracle(label, 256).as_int(data) % q

    def hash_to_residue(self, label: str, data: bytes, p: int) -> int:
        """|p|-bit oracle output reduced mod p, with 0 sent to 1."""
        return self.oracle(label, p.bit_length()).as_int(data) % p or 1

    def stream_xor(self, key: bytes, data: bytes) -> bytes:
        """XOR ``data`` with the keystream H(key || 0) || H(key || 1) || ..."""
        ro = self.oracle("H.stream", 256)
        blocks = (len(data) + 31) // 32
        stream = b"".join(ro(concat(key, i.to_bytes(4, "big"))) for i in range(blocks))
        return bytes(a ^ b for a, b in zip(data, stream))

    def dump(self) -> Iterator[str]:
        for key in sorted(self._oracles):
            yield from self._oracles[key].dump()


def iota(params: GroupParams, data: bytes) -> object:
    """Map a byte string to a group element of order exactly q.

    The bytes are read as an integer mod p and incremented until they name a
    non-identity subgroup member.  On curves the integer is an x-coordinate
    candidate and the point with even y is taken.
    """
    c = int.from_bytes(data, "big") % params.p
    for _ in range(params.p + 1):
        if params.kind is Kind.MODP:
            if c and params.is_subgroup_member(c) and c != 1:
                return c
        else:
            pt = params.point_from_x(c)
            if pt is not None and params.is_subgroup_member(pt):
                return pt
        c = params.next_element(c)
    raise AssertionError("subgroup has no non-identity element")
