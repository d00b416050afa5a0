import random

import pytest

from pakelab import ciphers
from pakelab.ciphers import Ciphertext, Instantiation, InstantiationSpec
from pakelab.groups import EC23, EC65519, MODP23, GroupError, Kind, safe_prime_group
from pakelab.oracles import OracleSuite, concat
from pakelab.protocols import (
    AuthAClient, AuthAServer, AuthMode, Sender, SRPClient, SRPServer, autha_session,
    check_wire_format, compare_transcripts, ecsrp1_session, make_password_file,
    make_srp_password_file, oeke_session, parse_transcript, plain_dh_session, run_protocol,
    srp5_session, srp6_session,
)

SAFE64 = safe_prime_group(64)
GROUPS = [MODP23, SAFE64, EC23, EC65519]
PW = b"swordfish"


def specs_for(P):
    return [InstantiationSpec(k) for k in Instantiation if InstantiationSpec(k).supports(P)]


@pytest.mark.parametrize("P", GROUPS, ids=lambda g: g.name)
@pytest.mark.parametrize("mode", list(AuthMode), ids=lambda m: m.value)
def test_autha_honest(P, mode):
    suite, rng = OracleSuite(1), random.Random(1)
    for spec in specs_for(P):
        for _ in range(20):
            tr = autha_session(P, suite, spec, make_password_file(P, suite, PW), mode, rng)
            assert tr.agreed, (spec.name, tr.summary())
            assert len(tr.messages) == {AuthMode.MUTUAL: 4}.get(mode, 3)


def test_autha_mulexphash_wire_payloads():
    P, suite = SAFE64, OracleSuite(2)
    spec = InstantiationSpec(Instantiation.MUL_EXP_HASH)
    pw = make_password_file(P, suite, PW)
    client = AuthAClient(P, suite, spec, pw, AuthMode.MUTUAL, random.Random(3))
    server = AuthAServer(P, suite, spec, pw, AuthMode.MUTUAL, random.Random(4))
    h = suite.hash_to_scalar(ciphers.MASK_LABEL, P.encode(pw.verifier), P.q)
    flow1 = client.start()
    flow2 = server.respond(flow1)
    assert P.decode(Ciphertext.from_bytes(flow1, P).payload) == P.gexp(client.x + h)
    assert P.decode(Ciphertext.from_bytes(flow2, P).payload) == P.gexp(server.y + h)


def test_autha_tampered_second_flow_rejected():
    P, suite = SAFE64, OracleSuite(5)
    for kind in (Instantiation.MUL_HASH, Instantiation.MUL_IOTA, Instantiation.BLOCK_CIPHER):
        spec = InstantiationSpec(kind)
        pw = make_password_file(P, suite, PW)
        client = AuthAClient(P, suite, spec, pw, AuthMode.MUTUAL, random.Random(6))
        server = AuthAServer(P, suite, spec, pw, AuthMode.MUTUAL, random.Random(7))
        flow2 = bytearray(server.respond(client.start()))
        flow2[-1] ^= 1
        if client.receive(bytes(flow2)):
            assert not client.check_server_auth(server.server_auth())
        assert client.accepted is False and client.key is None


def test_autha_wrong_password_rejected():
    P, suite, rng = SAFE64, OracleSuite(8), random.Random(8)
    spec = InstantiationSpec(Instantiation.MUL_IOTA)
    client = AuthAClient(P, suite, spec, make_password_file(P, suite, b"guess"), AuthMode.MUTUAL, rng)
    server = AuthAServer(P, suite, spec, make_password_file(P, suite, PW), AuthMode.MUTUAL, rng)
    ok = client.receive(server.respond(client.start()))
    assert not ok or not client.check_server_auth(server.server_auth())


@pytest.mark.parametrize("P", GROUPS, ids=lambda g: g.name)
def test_oeke_honest(P):
    suite, rng = OracleSuite(9), random.Random(9)
    for spec in specs_for(P):
        for _ in range(20):
            tr = oeke_session(P, suite, spec, make_password_file(P, suite, PW), rng)
            assert tr.agreed
            gx, _, auth = tr.messages
            assert gx.tag == "gx" and P.is_subgroup_member(P.decode(gx.payload))
            assert auth.payload != tr.keys["client"]


@pytest.mark.parametrize("P", [MODP23, SAFE64], ids=lambda g: g.name)
def test_srp6_honest_and_fixed_u(P):
    suite, rng = OracleSuite(10), random.Random(10)
    for u in (None, 5):
        for _ in range(20):
            pw = make_srp_password_file(P, suite, PW, rng.randbytes(8))
            tr = srp6_session(P, suite, pw, rng, u_override=u)
            assert tr.agreed
            B = int.from_bytes(tr.by_tag("B")[0].payload, "big")
            assert P.is_subgroup_member((B - 3 * pw.verifier) % P.p)


def test_srp6_rejected_on_curves():
    suite = OracleSuite(0)
    pw = make_srp_password_file(EC23, suite, PW, b"salt")
    with pytest.raises(GroupError):
        srp6_session(EC23, suite, pw, random.Random(0))


@pytest.mark.parametrize("P", GROUPS, ids=lambda g: g.name)
def test_srp5_honest_and_flow4_in_subgroup(P):
    suite, rng = OracleSuite(11), random.Random(11)
    for _ in range(20):
        tr = srp5_session(P, suite, make_srp_password_file(P, suite, PW, rng.randbytes(8)), rng)
        assert tr.agreed
        assert P.is_subgroup_member(P.decode(tr.by_tag("B")[0].payload))


@pytest.mark.parametrize("P", GROUPS, ids=lambda g: g.name)
def test_ecsrp1_flow4_is_plain_gy_and_secrets_match(P):
    suite = OracleSuite(12)
    pw = make_srp_password_file(P, suite, PW, b"salt")
    client = SRPClient("ecsrp1", P, suite, pw.client, PW, random.Random(1))
    server = SRPServer("ecsrp1", P, suite, pw, random.Random(2))
    A = client.receive_salt(server.receive_hello(client.hello()))
    B = server.receive_A(A)
    M = client.receive_B(B)
    y_point = P.decode(B)
    assert B == P.encode(y_point) and P.is_subgroup_member(y_point)
    assert client.S == server.S
    client.receive_confirm(server.receive_M(M))
    assert client.key == server.key is not None
    assert ecsrp1_session(P, suite, pw, random.Random(3)).agreed


@pytest.mark.parametrize("P", [MODP23, SAFE64, EC23], ids=lambda g: g.name)
def test_plain_dh(P):
    suite, rng = OracleSuite(13), random.Random(13)
    tr = plain_dh_session(P, suite, rng)
    assert tr.agreed and len(tr.messages) == 2


def test_plain_dh_needs_cofactor():
    with pytest.raises(GroupError):
        plain_dh_session(EC65519, OracleSuite(0), random.Random(0))


def test_transcript_text_roundtrip_and_compare():
    suite = OracleSuite(14)
    tr = run_protocol("autha", SAFE64, suite, PW, random.Random(1), InstantiationSpec.parse("randmulhash"))
    parsed = parse_transcript(tr.to_text())
    assert [(m.sender, m.tag, m.payload) for m in parsed] == [(m.sender, m.tag, m.payload) for m in tr.messages]
    assert check_wire_format("autha", SAFE64, parsed) == []
    again = run_protocol("autha", SAFE64, OracleSuite(14), PW, random.Random(1),
                         InstantiationSpec.parse("randmulhash"))
    assert compare_transcripts(parsed, again) == []
    other = run_protocol("autha", SAFE64, OracleSuite(14), PW, random.Random(2),
                         InstantiationSpec.parse("randmulhash"))
    assert compare_transcripts(parsed, other)


def test_parse_transcript_errors():
    with pytest.raises(ValueError):
        parse_transcript("2 client gx 01\n")
    with pytest.raises(ValueError):
        parse_transcript("1 client\n")
    with pytest.raises(ValueError):
        parse_transcript("1 nobody gx 01\n")


def test_run_protocol_unknown():
    with pytest.raises(ValueError):
        run_protocol("spake2", MODP23, OracleSuite(0), PW, random.Random(0))
    with pytest.raises(ValueError):
        run_protocol("autha", MODP23, OracleSuite(0), PW, random.Random(0))
