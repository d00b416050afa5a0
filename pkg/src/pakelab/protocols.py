"""Executable AuthA, OEKE, SRP6/SRP5/EC-SRP1 and plain Diffie-Hellman.

Each protocol is split into a client and a server endpoint so that attacks
can stand in for either side; the ``*_session`` functions wire two honest
endpoints together and record a :class:`Transcript`.

Parties never raise on bad input from the wire.  They set ``accepted`` to
False and stop, which is what a network adversary gets to observe.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import ciphers
from .ciphers import NOT_AN_ELEMENT, Ciphertext, CiphertextError, Instantiation, InstantiationSpec
from .groups import DecodeError, Element, GroupError, GroupParams, Kind
from .oracles import OracleSuite, concat

CLIENT_ID = b"client"
APP_HEADER = b"APPDATA1"  # 64 bits of known plaintext redundancy
SERVER_ID = b"server"

PROTOCOLS = ("autha", "oeke", "srp6", "srp5", "ecsrp1", "dh")


class AuthMode(str, enum.Enum):
    SERVER = "server"
    CLIENT = "client"
    MUTUAL = "mutual"


class Sender(str, enum.Enum):
    CLIENT = "client"
    SERVER = "server"
    ADVERSARY = "adversary"


@dataclass(frozen=True)
class Message:
    sender: Sender
    tag: str
    payload: bytes


@dataclass
class Transcript:
    protocol: str
    params: GroupParams
    instantiation: Optional[str] = None
    messages: List[Message] = field(default_factory=list)
    keys: Dict[str, Optional[bytes]] = field(default_factory=dict)
    accepted: Dict[str, Optional[bool]] = field(default_factory=dict)

    def record(self, sender: Sender, tag: str, payload: bytes) -> bytes:
        self.messages.append(Message(Sender(sender), tag, payload))
        return payload

    def by_tag(self, prefix: str) -> List[Message]:
        return [m for m in self.messages if m.tag.startswith(prefix)]

    def finish(self, client, server) -> "Transcript":
        self.keys = {"client": client.key, "server": server.key}
        # A party still waiting for a flow when the run ends has not accepted.
        self.accepted = {"client": bool(client.accepted), "server": bool(server.accepted)}
        return self

    @property
    def agreed(self) -> bool:
        return (
            self.accepted.get("client") is True
            and self.accepted.get("server") is True
            and self.keys["client"] is not None
            and self.keys["client"] == self.keys["server"]
        )

    def lines(self) -> List[str]:
        return [f"{i} {m.sender.value} {m.tag} {m.payload.hex()}"
                for i, m in enumerate(self.messages, 1)]

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def summary(self) -> dict:
        return {
            "protocol": self.protocol,
            "instantiation": self.instantiation,
            "group": self.params.describe(),
            "keys": {k: (v.hex() if v is not None else None) for k, v in self.keys.items()},
            "accepted": dict(self.accepted),
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, indent=2)


def parse_transcript(text: str) -> List[Message]:
    """Parse ``flow_index sender tag hex`` records; indices must run 1, 2, 3, ..."""
    messages = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) not in (3, 4):
            raise ValueError(f"line {lineno}: expected 'index sender tag hex'")
        idx, sender, tag = parts[:3]
        payload = bytes.fromhex(parts[3]) if len(parts) == 4 else b""
        if int(idx) != len(messages) + 1:
            raise ValueError(f"line {lineno}: flow index {idx} out of order")
        messages.append(Message(Sender(sender), tag, payload))
    return messages


# -- password files -----------------------------------------------------------


@dataclass(frozen=True)
class PasswordFile:
    client: bytes
    password: bytes
    verifier: Element
    salt: bytes = b""
    v: Optional[int] = None

    def __post_init__(self):
        if not self.client:
            raise ValueError("client identity must be nonempty")


def password_scalar(params: GroupParams, suite: OracleSuite, password: bytes) -> int:
    """alpha as an exponent in [1, q-1]."""
    return 1 + suite.hash_to_scalar("H.pw", password, params.q - 1)


def srp_exponent(params: GroupParams, suite: OracleSuite, salt: bytes, client: bytes,
                 password: bytes) -> int:
    """v = H(s || C || alpha) mod q."""
    return suite.hash_to_scalar("H", concat(salt, client, password), params.q)


def make_password_file(params: GroupParams, suite: OracleSuite, password: bytes,
                       client: bytes = CLIENT_ID) -> PasswordFile:
    """Verifier beta = g^alpha for AuthA and OEKE."""
    return PasswordFile(client, password, params.gexp(password_scalar(params, suite, password)))


def make_srp_password_file(params: GroupParams, suite: OracleSuite, password: bytes,
                           salt: bytes, client: bytes = CLIENT_ID) -> PasswordFile:
    v = srp_exponent(params, suite, salt, client, password)
    return PasswordFile(client, password, params.gexp(v), salt=salt, v=v)


@dataclass(frozen=True)
class Credential:
    """A client key pair whose private half is wrapped under the password."""

    public: Element
    wrapped: bytes


def make_credential(params: GroupParams, suite: OracleSuite, password: bytes,
                    rng: random.Random) -> Credential:
    priv = params.random_scalar(rng)
    blob = priv.to_bytes((params.q.bit_length() + 7) // 8, "big")
    return Credential(params.gexp(priv), suite.stream_xor(credential_key(suite, password), blob))


def credential_key(suite: OracleSuite, password: bytes) -> bytes:
    return suite.oracle("H.cred")(password)


# -- shared endpoint plumbing -----------------------------------------------


class Party:
    def __init__(self, params: GroupParams, suite: OracleSuite, rng: random.Random):
        self.params = params
        self.suite = suite
        self.rng = rng
        self.key: Optional[bytes] = None
        self.accepted: Optional[bool] = None

    def H(self, *fields: bytes) -> bytes:
        return self.suite.oracle("H")(concat(*fields))

    def reject(self):
        self.accepted = False
        self.key = None
        return None

    def enc(self, u: Element) -> bytes:
        return self.params.encode(u)


# -- AuthA --------------------------------------------------------------------


class AuthAClient(Party):
    def __init__(self, params, suite, spec: InstantiationSpec, pw: PasswordFile,
                 mode: AuthMode, rng, server_id: bytes = SERVER_ID):
        super().__init__(params, suite, rng)
        spec.check(params)
        self.spec, self.pw, self.mode, self.server_id = spec, pw, AuthMode(mode), server_id
        self.alpha = password_scalar(params, suite, pw.password)
        self.beta = params.gexp(self.alpha)

    def start(self) -> bytes:
        self.x = self.params.random_scalar(self.rng)
        self.X = self.params.gexp(self.x)
        return ciphers.encrypt(self.spec, self.params, self.suite, self.beta, self.X, self.rng).to_bytes()

    def receive(self, flow2: bytes) -> Optional[bool]:
        """Process E_beta(g^y); returns False if the flow is unusable."""
        try:
            Y = ciphers.decrypt(self.spec, self.params, self.suite, self.beta,
                                Ciphertext.from_bytes(flow2, self.params))
        except CiphertextError:
            return self.reject()
        if Y is NOT_AN_ELEMENT or not self.params.is_subgroup_member(Y) or Y == self.params.identity:
            return self.reject()
        self.Y = Y
        self._K = self.H(self.pw.client, self.server_id, self.enc(self.X), self.enc(Y),
                         self.enc(self.params.exp(Y, self.x)))
        if self.mode is AuthMode.CLIENT:
            self.accepted, self.key = True, self._K
        return True

    def check_server_auth(self, tag: bytes) -> bool:
        if self.accepted is False:
            return False
        if tag != self.H(self._K, b"\x02"):
            self.reject()
            return False
        self.accepted, self.key = True, self._K
        return True

    def client_auth(self) -> Optional[bytes]:
        if self.accepted is False:
            return None
        # g^(alpha*y) computed from the received g^y.
        return self.H(self._K, self.enc(self.params.exp(self.Y, self.alpha)))


class AuthAServer(Party):
    def __init__(self, params, suite, spec: InstantiationSpec, pw: PasswordFile,
                 mode: AuthMode, rng, server_id: bytes = SERVER_ID,
                 credential: Optional[Credential] = None):
        super().__init__(params, suite, rng)
        spec.check(params)
        self.spec, self.pw, self.mode, self.server_id = spec, pw, AuthMode(mode), server_id
        self.credential = credential

    def respond(self, flow1: bytes) -> Optional[bytes]:
        P = self.params
        try:
            X = ciphers.decrypt(self.spec, P, self.suite, self.pw.verifier,
                                Ciphertext.from_bytes(flow1, P))
        except CiphertextError:
            return self.reject()
        if X is NOT_AN_ELEMENT or not P.is_subgroup_member(X) or X == P.identity:
            return self.reject()
        self.y = P.random_scalar(self.rng)
        Y = P.gexp(self.y)
        self._K = self.H(self.pw.client, self.server_id, self.enc(X), self.enc(Y),
                         self.enc(P.exp(X, self.y)))
        if self.mode is AuthMode.SERVER:
            self.accepted, self.key = True, self._K
        return ciphers.encrypt(self.spec, P, self.suite, self.pw.verifier, Y, self.rng).to_bytes()

    def server_auth(self) -> bytes:
        return self.H(self._K, b"\x02")

    def check_client_auth(self, tag: bytes) -> bool:
        if self.accepted is False:
            return False
        if tag != self.H(self._K, self.enc(self.params.exp(self.pw.verifier, self.y))):
            self.reject()
            return False
        self.accepted, self.key = True, self._K
        return True

    # Material the session key later protects; an impersonator can test guesses against it.

    def send_application_data(self) -> bytes:
        """E_K(m) for an application record m = APP_HEADER || 24 random bytes."""
        return self.suite.stream_xor(self._K, APP_HEADER + self.rng.randbytes(24))

    def send_credential(self) -> bytes:
        if self.credential is None:
            raise ValueError("no credential stored for this client")
        return self.suite.stream_xor(self._K, self.credential.wrapped)


def autha_session(params: GroupParams, suite: OracleSuite, spec: InstantiationSpec,
                  pw: PasswordFile, mode: AuthMode = AuthMode.MUTUAL,
                  rng: Optional[random.Random] = None) -> Transcript:
    rng = rng or random.Random()
    mode = AuthMode(mode)
    client = AuthAClient(params, suite, spec, pw, mode, rng)
    server = AuthAServer(params, suite, spec, pw, mode, rng)
    tr = Transcript("autha", params, spec.name)

    flow2 = server.respond(tr.record(Sender.CLIENT, "E_beta(gx)", client.start()))
    if flow2 is None:
        client.accepted = False
        return tr.finish(client, server)
    if not client.receive(tr.record(Sender.SERVER, "E_beta(gy)", flow2)):
        return tr.finish(client, server)
    if mode in (AuthMode.SERVER, AuthMode.MUTUAL):
        if not client.check_server_auth(tr.record(Sender.SERVER, "H(K|2)", server.server_auth())):
            return tr.finish(client, server)
    if mode in (AuthMode.CLIENT, AuthMode.MUTUAL):
        server.check_client_auth(tr.record(Sender.CLIENT, "H(K|g^ay)", client.client_auth()))
    return tr.finish(client, server)


# -- OEKE -------------------------------------------------------------------


class OEKEClient(Party):
    def __init__(self, params, suite, spec: InstantiationSpec, pw: PasswordFile, rng,
                 server_id: bytes = SERVER_ID):
        super().__init__(params, suite, rng)
        spec.check(params)
        self.spec, self.pw, self.server_id = spec, pw, server_id
        self.beta = params.gexp(password_scalar(params, suite, pw.password))

    def start(self) -> bytes:
        self.x = self.params.random_scalar(self.rng)
        self.X = self.params.gexp(self.x)
        return self.enc(self.X)

    def receive(self, flow2: bytes) -> Optional[bytes]:
        """Decrypt E_beta(g^y) and return Auth, or None on rejection."""
        P = self.params
        try:
            Y = ciphers.decrypt(self.spec, P, self.suite, self.beta, Ciphertext.from_bytes(flow2, P))
        except CiphertextError:
            return self.reject()
        if Y is NOT_AN_ELEMENT or not P.is_subgroup_member(Y) or Y == P.identity:
            return self.reject()
        material = concat(self.pw.client, self.server_id, self.enc(self.X), self.enc(Y),
                          self.enc(P.exp(Y, self.x)))
        self.accepted = True
        self.key = self.suite.oracle("H0")(material)
        return self.suite.oracle("H1")(material)


class OEKEServer(Party):
    def __init__(self, params, suite, spec: InstantiationSpec, pw: PasswordFile, rng,
                 server_id: bytes = SERVER_ID):
        super().__init__(params, suite, rng)
        spec.check(params)
        self.spec, self.pw, self.server_id = spec, pw, server_id

    def respond(self, flow1: bytes) -> Optional[bytes]:
        P = self.params
        try:
            X = P.decode(flow1)
        except DecodeError:
            return self.reject()
        if not P.is_subgroup_member(X) or X == P.identity:
            return self.reject()
        y = P.random_scalar(self.rng)
        Y = P.gexp(y)
        self._material = concat(self.pw.client, self.server_id, self.enc(X), self.enc(Y),
                                self.enc(P.exp(X, y)))
        return ciphers.encrypt(self.spec, P, self.suite, self.pw.verifier, Y, self.rng).to_bytes()

    def verify(self, auth: bytes) -> bool:
        if self.accepted is False or auth != self.suite.oracle("H1")(self._material):
            self.reject()
            return False
        self.accepted = True
        self.key = self.suite.oracle("H0")(self._material)
        return True


def oeke_session(params: GroupParams, suite: OracleSuite, spec: InstantiationSpec,
                 pw: PasswordFile, rng: Optional[random.Random] = None) -> Transcript:
    rng = rng or random.Random()
    client = OEKEClient(params, suite, spec, pw, rng)
    server = OEKEServer(params, suite, spec, pw, rng)
    tr = Transcript("oeke", params, spec.name)
    flow2 = server.respond(tr.record(Sender.CLIENT, "gx", client.start()))
    if flow2 is None:
        client.accepted = False
        return tr.finish(client, server)
    auth = client.receive(tr.record(Sender.SERVER, "E_beta(gy)", flow2))
    if auth is None:
        return tr.finish(client, server)
    server.verify(tr.record(Sender.CLIENT, "Auth", auth))
    return tr.finish(client, server)


# -- SRP family ------------------------------------------------------------

SRP_VARIANTS = ("srp6", "srp5", "ecsrp1")
_IOTA = InstantiationSpec(Instantiation.MUL_IOTA)


class _SRPParty(Party):
    def __init__(self, variant, params, suite, rng, u_override=None):
        super().__init__(params, suite, rng)
        if variant not in SRP_VARIANTS:
            raise ValueError(f"unknown SRP variant {variant!r}")
        if variant == "srp6" and params.kind is not Kind.MODP:
            raise GroupError("srp6 adds field elements (3*beta + g^y) and needs Z_p^*")
        self.variant = variant
        self.u_override = u_override

    def encode_B(self, B) -> bytes:
        return self.params.field_bytes(B) if self.variant == "srp6" else self.enc(B)

    def u(self, A_bytes: bytes, B_bytes: bytes) -> int:
        if self.u_override is not None:
            return self.u_override % self.params.q
        return self.suite.hash_to_scalar("H", concat(A_bytes, B_bytes), self.params.q)


class SRPClient(_SRPParty):
    def __init__(self, variant, params, suite, client: bytes, password: bytes, rng,
                 u_override=None):
        super().__init__(variant, params, suite, rng, u_override)
        self.client, self.password = client, password

    def hello(self) -> bytes:
        return self.client

    def receive_salt(self, salt: bytes) -> bytes:
        P = self.params
        self.v = srp_exponent(P, self.suite, salt, self.client, self.password)
        self.beta = P.gexp(self.v)
        self.x = P.random_scalar(self.rng)
        self.A_bytes = self.enc(P.gexp(self.x))
        return self.A_bytes

    def unmask(self, B_bytes: bytes):
        """Recover g^y from the fourth flow, or NOT_AN_ELEMENT."""
        P = self.params
        if self.variant == "srp6":
            if len(B_bytes) != P.element_len:
                return NOT_AN_ELEMENT
            B = int.from_bytes(B_bytes, "big")
            if B >= P.p:
                return NOT_AN_ELEMENT
            gy = (B - 3 * self.beta) % P.p
            return gy or NOT_AN_ELEMENT
        try:
            B = P.decode(B_bytes)
        except DecodeError:
            return NOT_AN_ELEMENT
        if self.variant == "srp5":
            return P.div(B, ciphers.mask(_IOTA, P, self.suite, self.beta))
        return B

    def receive_B(self, B_bytes: bytes) -> Optional[bytes]:
        P = self.params
        gy = self.unmask(B_bytes)
        if gy is NOT_AN_ELEMENT or not P.is_subgroup_member(gy) or gy == P.identity:
            return self.reject()
        u = self.u(self.A_bytes, B_bytes)
        S = self.enc(P.exp(gy, (self.x + u * self.v) % P.q))
        self.S = S
        self.M = self.H(self.A_bytes, B_bytes, S)
        return self.M

    def receive_confirm(self, confirm: bytes) -> bool:
        if self.accepted is False or confirm != self.H(self.A_bytes, self.M, self.S):
            self.reject()
            return False
        self.accepted, self.key = True, self.H(self.S)
        return True


class SRPServer(_SRPParty):
    def __init__(self, variant, params, suite, pw: PasswordFile, rng, u_override=None):
        super().__init__(variant, params, suite, rng, u_override)
        self.pw = pw

    def receive_hello(self, client: bytes) -> Optional[bytes]:
        if client != self.pw.client:
            return self.reject()
        return self.pw.salt

    def receive_A(self, A_bytes: bytes) -> Optional[bytes]:
        P = self.params
        try:
            A = P.decode(A_bytes)
        except DecodeError:
            return self.reject()
        if not P.is_subgroup_member(A) or A == P.identity:
            return self.reject()
        y = P.random_scalar(self.rng)
        gy = P.gexp(y)
        beta = self.pw.verifier
        if self.variant == "srp6":
            B = (3 * beta + gy) % P.p
        elif self.variant == "srp5":
            B = P.mul(gy, ciphers.mask(_IOTA, P, self.suite, beta))
        else:
            B = gy
        B_bytes = self.encode_B(B)
        u = self.u(A_bytes, B_bytes)
        self.A_bytes = A_bytes
        self.S = self.enc(P.exp(P.mul(A, P.exp(beta, u)), y))
        self.B_bytes = B_bytes
        return B_bytes

    def receive_M(self, M: bytes) -> Optional[bytes]:
        if self.accepted is False or M != self.H(self.A_bytes, self.B_bytes, self.S):
            return self.reject()
        self.accepted, self.key = True, self.H(self.S)
        return self.H(self.A_bytes, M, self.S)


def srp_session(variant: str, params: GroupParams, suite: OracleSuite, pw: PasswordFile,
                rng: Optional[random.Random] = None, u_override: Optional[int] = None) -> Transcript:
    rng = rng or random.Random()
    client = SRPClient(variant, params, suite, pw.client, pw.password, rng, u_override)
    server = SRPServer(variant, params, suite, pw, rng, u_override)
    tr = Transcript(variant, params)
    salt = server.receive_hello(tr.record(Sender.CLIENT, "C", client.hello()))
    if salt is None:
        client.accepted = False
        return tr.finish(client, server)
    A = client.receive_salt(tr.record(Sender.SERVER, "s", salt))
    B = server.receive_A(tr.record(Sender.CLIENT, "gx", A))
    if B is None:
        client.accepted = False
        return tr.finish(client, server)
    M = client.receive_B(tr.record(Sender.SERVER, "B", B))
    if M is None:
        server.reject()
        return tr.finish(client, server)
    confirm = server.receive_M(tr.record(Sender.CLIENT, "M", M))
    if confirm is None:
        client.reject()
        return tr.finish(client, server)
    client.receive_confirm(tr.record(Sender.SERVER, "H(gx|M|S)", confirm))
    return tr.finish(client, server)


def srp6_session(params, suite, pw, rng=None, u_override=None) -> Transcript:
    return srp_session("srp6", params, suite, pw, rng, u_override)


def srp5_session(params, suite, pw, rng=None) -> Transcript:
    return srp_session("srp5", params, suite, pw, rng)


def ecsrp1_session(params, suite, pw, rng=None) -> Transcript:
    return srp_session("ecsrp1", params, suite, pw, rng)


# -- unauthenticated Diffie-Hellman -----------------------------------------


class DHParty(Party):
    """One side of a Diffie-Hellman exchange over the whole ambient group."""

    def __init__(self, params, suite, rng, generator=None):
        super().__init__(params, suite, rng)
        if params.t <= 1:
            raise GroupError("small-subgroup demo needs ambient order q*t with t > 1")
        self.generator = generator if generator is not None else params.ambient_generator()

    def start(self) -> bytes:
        self.secret = self.rng.randrange(1, self.params.ambient_order)
        return self.enc(self.params.exp(self.generator, self.secret))

    def receive(self, peer: bytes) -> bool:
        try:
            other = self.params.decode(peer)
        except DecodeError:
            return self.reject()
        self.shared = self.params.exp(other, self.secret)
        self.accepted, self.key = True, self.enc(self.shared)
        return True

    def send_record(self, data: bytes) -> bytes:
        """Application traffic protected under the agreed key."""
        return self.suite.stream_xor(self.key, data)


def plain_dh_session(params: GroupParams, suite: OracleSuite,
                     rng: Optional[random.Random] = None) -> Transcript:
    rng = rng or random.Random()
    gen = params.ambient_generator()
    client, server = DHParty(params, suite, rng, gen), DHParty(params, suite, rng, gen)
    tr = Transcript("dh", params)
    X = tr.record(Sender.CLIENT, "gx", client.start())
    Y = tr.record(Sender.SERVER, "gy", server.start())
    server.receive(X)
    client.receive(Y)
    return tr.finish(client, server)


# -- generic driver -----------------------------------------------------------


def run_protocol(protocol: str, params: GroupParams, suite: OracleSuite, password: bytes,
                 rng: random.Random, spec: Optional[InstantiationSpec] = None,
                 mode: AuthMode = AuthMode.MUTUAL, salt: Optional[bytes] = None) -> Transcript:
    """Run one honest session of ``protocol`` (one of PROTOCOLS)."""
    if protocol in ("autha", "oeke"):
        if spec is None:
            raise ValueError(f"{protocol} needs an instantiation")
        pw = make_password_file(params, suite, password)
        if protocol == "autha":
            return autha_session(params, suite, spec, pw, mode, rng)
        return oeke_session(params, suite, spec, pw, rng)
    if protocol in SRP_VARIANTS:
        salt = salt if salt is not None else rng.getrandbits(64).to_bytes(8, "big")
        pw = make_srp_password_file(params, suite, password, salt)
        return srp_session(protocol, params, suite, pw, rng)
    if protocol == "dh":
        return plain_dh_session(params, suite, rng)
    raise ValueError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")


def check_wire_format(protocol: str, params: GroupParams, messages: List[Message]) -> List[str]:
    """Structural problems with a recorded message list (empty when well formed)."""
    problems = []
    for i, m in enumerate(messages, 1):
        try:
            if m.tag.startswith("E_beta"):
                Ciphertext.from_bytes(m.payload, params)
            elif m.tag in ("gx", "gy") or (m.tag == "B" and protocol in ("srp5", "ecsrp1")):
                params.decode(m.payload)
            elif m.tag == "B" and len(m.payload) != params.element_len:
                problems.append(f"flow {i}: B has {len(m.payload)} bytes")
        except (CiphertextError, DecodeError) as exc:
            problems.append(f"flow {i} ({m.tag}): {exc}")
    return problems


def compare_transcripts(recorded: List[Message], replayed: Transcript) -> List[str]:
    """Byte-level differences between a recorded transcript and a replayed session."""
    problems = []
    if len(recorded) != len(replayed.messages):
        problems.append(f"{len(recorded)} flows recorded, {len(replayed.messages)} replayed")
    for i, (a, b) in enumerate(zip(recorded, replayed.messages), 1):
        if (a.sender, a.tag, a.payload) != (b.sender, b.tag, b.payload):
            problems.append(f"flow {i}: recorded {a.tag}={a.payload.hex()} "
                            f"but replay gave {b.tag}={b.payload.hex()}")
    return problems
