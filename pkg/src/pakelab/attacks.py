"""Adversaries against the instantiated protocols.

Passive partition filters take recorded transcripts and a dictionary and
delete every candidate that is provably inconsistent with what was seen.
Active attacks drive an honest endpoint (server or client) directly.

Nothing here looks at ``Dictionary.true_index``; the harness uses it only to
score the reports afterwards.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import ciphers
from .ciphers import (
    MASK_LABEL, NOT_AN_ELEMENT, Ciphertext, Instantiation, InstantiationSpec,
)
from .groups import Element, GroupError, GroupParams, Kind
from .oracles import OracleSuite, concat
from .protocols import (
    APP_HEADER, CLIENT_ID, SERVER_ID, AuthAServer, DHParty, SRPClient, SRPServer, Transcript,
    credential_key, password_scalar, srp_exponent,
)


class AttackError(ValueError):
    """An attack was pointed at a protocol or instantiation it does not apply to."""


@dataclass
class Dictionary:
    words: List[bytes]
    true_index: Optional[int] = None

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise ValueError("dictionary entries must be distinct")
        if self.true_index is not None and not 0 <= self.true_index < len(self.words):
            raise ValueError("true_index out of range")

    def __len__(self):
        return len(self.words)

    @property
    def true_password(self) -> Optional[bytes]:
        return None if self.true_index is None else self.words[self.true_index]


@dataclass
class AttackReport:
    """Survivor counts per observed session plus the recovered password, if any.

    ``rounds`` starts with ``(0, len(dictionary))``.  ``round_sets`` keeps the
    surviving dictionary indices after each round so that a harness can check
    soundness; it is not serialised.
    """

    attack: str
    protocol: str
    instantiation: Optional[str]
    dictionary_size: int
    rounds: List[Tuple[int, int]] = field(default_factory=list)
    recovered: Optional[bytes] = None
    active: bool = False
    round_sets: List[frozenset] = field(default_factory=list, repr=False)
    notes: Dict[str, object] = field(default_factory=dict)

    def add_round(self, session: int, survivors: Sequence[int]) -> None:
        if self.rounds and len(survivors) > self.rounds[-1][1]:
            raise AssertionError("survivor count increased")
        self.rounds.append((session, len(survivors)))
        self.round_sets.append(frozenset(survivors))

    @property
    def survivors(self) -> int:
        return self.rounds[-1][1]

    @property
    def bits_leaked_estimate(self) -> float:
        bits = 0.0
        for (_, before), (_, after) in zip(self.rounds, self.rounds[1:]):
            if after:
                bits += math.log2(before / after)
        return bits

    @property
    def sessions_to_unique(self) -> Optional[int]:
        for session, n in self.rounds:
            if n == 1:
                return session
        return None

    def to_dict(self) -> dict:
        return {
            "attack": self.attack,
            "protocol": self.protocol,
            "instantiation": self.instantiation,
            "dictionary_size": self.dictionary_size,
            "rounds": [list(r) for r in self.rounds],
            "recovered": self.recovered.decode("latin-1") if self.recovered is not None else None,
            "bits_leaked_estimate": round(self.bits_leaked_estimate, 6),
            "sessions_to_unique": self.sessions_to_unique,
            "active": self.active,
            **({"notes": self.notes} if self.notes else {}),
        }


def _finish(report: AttackReport, dictionary: Dictionary, survivors: Sequence[int]) -> AttackReport:
    if len(survivors) == 1:
        report.recovered = dictionary.words[survivors[0]]
    return report


class _Verifiers:
    """Per-group cache of the verifier beta' = g^alpha' for each candidate."""

    def __init__(self, dictionary: Dictionary, suite: OracleSuite):
        self.words = dictionary.words
        self.suite = suite
        self._cache: Dict[Tuple[GroupParams, int], Element] = {}

    def __call__(self, params: GroupParams, j: int) -> Element:
        key = (params, j)
        beta = self._cache.get(key)
        if beta is None:
            beta = self._cache[key] = params.gexp(password_scalar(params, self.suite, self.words[j]))
        return beta


# -- passive partition filters ---------------------------------------------


def _encrypted_flows(tr: Transcript) -> List[Ciphertext]:
    return [Ciphertext.from_bytes(m.payload, tr.params) for m in tr.by_tag("E_beta")]


def _check_specs(transcripts, allowed, attack):
    for tr in transcripts:
        if tr.protocol not in ("autha", "oeke"):
            raise AttackError(f"{attack} needs AuthA or OEKE transcripts, got {tr.protocol}")
        if tr.instantiation not in allowed:
            raise AttackError(f"{attack} does not apply to {tr.instantiation} transcripts")


def _residue_filter(attack, allowed, dictionary, transcripts, suite) -> AttackReport:
    # Filter: (payload)^q == (mask')^q.  Multiplying by g^x (order q) is invisible
    # after raising to q, so the projection of the payload is the projection of the mask.
    transcripts = list(transcripts)
    _check_specs(transcripts, allowed, attack)
    first = transcripts[0] if transcripts else None
    report = AttackReport(attack, first.protocol if first else "", first.instantiation if first else None,
                          len(dictionary))
    verifiers = _Verifiers(dictionary, suite)
    alive = list(range(len(dictionary)))
    report.add_round(0, alive)
    for i, tr in enumerate(transcripts, 1):
        params = tr.params
        if params.kind is not Kind.MODP:
            raise AttackError(f"{attack} is stated for subgroups of Z_p^*")
        spec = InstantiationSpec.parse(tr.instantiation)
        for c in _encrypted_flows(tr):
            sigma = params.cofactor_project(int.from_bytes(c.payload, "big"))
            alive = [
                j for j in alive
                if params.cofactor_project(ciphers.mask(spec, params, suite, verifiers(params, j), c.nonce))
                == sigma
            ]
        report.add_round(i, alive)
    return _finish(report, dictionary, alive)


def filter_partition_mulhash(dictionary: Dictionary, transcripts: Sequence[Transcript],
                             suite: OracleSuite) -> AttackReport:
    """Residue-class filter against E(X) = X * H(beta) (muliota accepted as a control)."""
    return _residue_filter("partition-mulhash", ("mulhash", "muliota"), dictionary, transcripts, suite)


def filter_partition_randmulhash(dictionary: Dictionary, transcripts: Sequence[Transcript],
                                 suite: OracleSuite) -> AttackReport:
    """Same filter against E(X) = (r, X * H(r || beta)); a fresh r makes every session count."""
    return _residue_filter("partition-randmulhash", ("randmulhash", "muliota"), dictionary, transcripts,
                           suite)


def filter_partition_blockcipher(dictionary: Dictionary, transcripts: Sequence[Transcript],
                                 suite: OracleSuite) -> AttackReport:
    """Trial-decrypt every enciphered flow and drop candidates that yield a non-member."""
    transcripts = list(transcripts)
    _check_specs(transcripts, ("blockcipher", "muliota"), "partition-blockcipher")
    first = transcripts[0] if transcripts else None
    report = AttackReport("partition-blockcipher", first.protocol if first else "",
                          first.instantiation if first else None, len(dictionary))
    verifiers = _Verifiers(dictionary, suite)
    alive = list(range(len(dictionary)))
    report.add_round(0, alive)
    for i, tr in enumerate(transcripts, 1):
        params = tr.params
        spec = InstantiationSpec.parse(tr.instantiation)
        for c in _encrypted_flows(tr):
            kept = []
            for j in alive:
                x = ciphers.decrypt(spec, params, suite, verifiers(params, j), c)
                if x is not NOT_AN_ELEMENT and params.is_subgroup_member(x):
                    kept.append(j)
            alive = kept
        report.add_round(i, alive)
    return _finish(report, dictionary, alive)


PARTITION_FILTERS: Dict[str, Callable] = {
    "partition-mulhash": filter_partition_mulhash,
    "partition-randmulhash": filter_partition_randmulhash,
    "partition-blockcipher": filter_partition_blockcipher,
}


# -- active impersonation against X * g^H(beta) -----------------------------


class ConfirmationOracle(str, enum.Enum):
    """What the honest server sends after the key exchange."""

    AUTH_HASH = "authhash"                      # H(K || 2)
    REDUNDANT_PLAINTEXT = "redundant"           # E_K(m), m has a known 64-bit header
    ENCRYPTED_CREDENTIAL = "credential"         # E_K(pi), pi = client private key wrapped under alpha


def attack_impersonate_mulexphash(params: GroupParams, suite: OracleSuite, dictionary: Dictionary,
                                  oracle: ConfirmationOracle, server: AuthAServer,
                                  rng: random.Random, client_id: bytes = CLIENT_ID,
                                  server_id: bytes = SERVER_ID) -> AttackReport:
    """Impersonate the client once, then test every candidate off-line.

    The adversary sends g^z in place of E_beta(g^x) and receives g^(y + H(beta)).
    For a guess beta' the server's view would be x = z - H(beta') and
    g^y = g^(y + H(beta)) / g^H(beta'), which reproduces K exactly when beta' = beta.
    """
    oracle = ConfirmationOracle(oracle)
    if server.spec.kind is not Instantiation.MUL_EXP_HASH:
        raise AttackError("impersonation attack targets the mulexphash instantiation")
    P = params
    report = AttackReport("impersonate", "autha", "mulexphash", len(dictionary), active=True)
    report.notes["oracle"] = oracle.value
    alive = list(range(len(dictionary)))
    report.add_round(0, alive)

    z = P.random_scalar(rng)
    flow2 = server.respond(Ciphertext(Instantiation.MUL_EXP_HASH, P.encode(P.gexp(z))).to_bytes())
    if flow2 is None:
        report.add_round(1, alive)
        return report
    W = P.decode(Ciphertext.from_bytes(flow2, P).payload)

    if oracle is ConfirmationOracle.AUTH_HASH:
        tag = server.server_auth()
        H = suite.oracle("H")
        test = lambda K, j: H(concat(K, b"\x02")) == tag
    elif oracle is ConfirmationOracle.REDUNDANT_PLAINTEXT:
        record = server.send_application_data()
        test = lambda K, j: suite.stream_xor(K, record[: len(APP_HEADER)]) == APP_HEADER
    else:
        blob = server.send_credential()
        public = server.credential.public

        def test(K, j):
            wrapped = suite.stream_xor(K, blob)
            priv = int.from_bytes(suite.stream_xor(credential_key(suite, dictionary.words[j]), wrapped), "big")
            return P.gexp(priv) == public

    H = suite.oracle("H")
    survivors = []
    for j, word in enumerate(dictionary.words):
        beta = P.gexp(password_scalar(P, suite, word))
        h = suite.hash_to_scalar(MASK_LABEL, P.encode(beta), P.q)
        X = P.gexp(z - h)
        Y = P.div(W, P.gexp(h))
        Z = P.exp(Y, (z - h) % P.q)
        K = H(concat(client_id, server_id, P.encode(X), P.encode(Y), P.encode(Z)))
        if test(K, j):
            survivors.append(j)
    report.add_round(1, survivors)
    return _finish(report, dictionary, survivors)


# -- small-subgroup man in the middle -------------------------------------


def attack_small_subgroup_mitm(params: GroupParams, suite: OracleSuite, client: DHParty,
                               server: DHParty) -> Tuple[Optional[bytes], int]:
    """Raise both flows to the q-th power in transit, then search the order-t subgroup.

    The adversary identifies the key among the t candidates using the
    client's first application record, whose header is known.
    Returns ``(recovered_key, search_space_size)``.
    """
    P = params
    X, Y = client.start(), server.start()
    server.receive(P.encode(P.exp(P.decode(X), P.q)))
    client.receive(P.encode(P.exp(P.decode(Y), P.q)))
    record = client.send_record(APP_HEADER + b"hello")

    h = P.exp(client.generator, P.q)
    candidate = P.identity
    for _ in range(P.t):
        key = P.encode(candidate)
        if suite.stream_xor(key, record[: len(APP_HEADER)]) == APP_HEADER:
            return key, P.t
        candidate = P.mul(candidate, h)
    return None, P.t


# -- SRP6 with a fixed u --------------------------------------------------


def attack_srp6_fixed_u(params: GroupParams, suite: OracleSuite, client: bytes, beta: int,
                        u_fixed: int, server: SRPServer, rng: random.Random) -> Tuple[bool, Optional[bytes]]:
    """Log in as ``client`` knowing only the stolen verifier beta.

    Sends A = g^x * beta^(-u); when the server uses the same u it computes
    S = (A * beta^u)^y = g^(xy), which the adversary gets as (B - 3*beta)^x.
    Returns ``(server_accepted, adversary_session_key)``.
    """
    P = params
    if P.kind is not Kind.MODP:
        raise AttackError("srp6 is defined over Z_p^*")
    H = suite.oracle("H")
    if server.receive_hello(client) is None:
        return False, None
    x = P.random_scalar(rng)
    A_bytes = P.encode(P.mul(P.gexp(x), P.exp(beta, -u_fixed % P.q)))
    B_bytes = server.receive_A(A_bytes)
    if B_bytes is None:
        return False, None
    gy = (int.from_bytes(B_bytes, "big") - 3 * beta) % P.p
    S = P.encode(P.exp(gy, x))
    server.receive_M(H(concat(A_bytes, B_bytes, S)))
    return server.accepted is True, H(concat(S))


# -- EC-SRP1 off-line dictionary attack ------------------------------------


def attack_ecsrp1_dictionary(params: GroupParams, suite: OracleSuite, dictionary: Dictionary,
                             client: SRPClient, rng: random.Random) -> AttackReport:
    """Impersonate the server for one login and test every password off-line.

    The adversary picks the salt s' and y, sends g^y unmasked, and receives
    g^x and M.  For each guess: v' = H(s' || C || alpha'),
    S' = (g^x * g^(v' u))^y, keep the guess iff M == H(g^x || g^y || S').

    Against SRP5 the client first strips iota(H(beta)) from the fourth flow,
    so a guess's shared secret would need the discrete log of
    g^y / iota(H(beta')); no guess is testable and none is removed.
    """
    P = params
    report = AttackReport("ecsrp1-dictionary", client.variant, None, len(dictionary), active=True)
    alive = list(range(len(dictionary)))
    report.add_round(0, alive)
    H = suite.oracle("H")

    C = client.hello()
    salt = rng.randbytes(8)
    A_bytes = client.receive_salt(salt)
    y = P.random_scalar(rng)
    B_bytes = P.encode(P.gexp(y))
    M = client.receive_B(B_bytes)
    if M is None:
        report.add_round(1, alive)
        return report
    A = P.decode(A_bytes)
    u = suite.hash_to_scalar("H", concat(A_bytes, B_bytes), P.q)

    matches = []
    for j, word in enumerate(dictionary.words):
        v = srp_exponent(P, suite, salt, C, word)
        S = P.encode(P.exp(P.mul(A, P.gexp(v * u)), y))
        if H(concat(A_bytes, B_bytes, S)) == M:
            matches.append(j)
    report.notes["literal_matches"] = len(matches)
    if client.variant == "srp5":
        survivors = alive
    elif client.variant == "ecsrp1":
        survivors = matches
    else:
        raise AttackError("the EC-SRP1 adversary targets ecsrp1 (or srp5 as a control)")
    report.add_round(1, survivors)
    return _finish(report, dictionary, survivors)
