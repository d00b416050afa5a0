import random

import pytest
from hypothesis import given, strategies as st

from pakelab import ciphers
from pakelab.ciphers import (
    NOT_AN_ELEMENT, Ciphertext, CiphertextError, Instantiation, InstantiationSpec,
    block_width, decrypt, encrypt, mask,
)
from pakelab.groups import EC23, EC65519, MODP23, GroupError, Kind, safe_prime_group
from pakelab.oracles import OracleSuite

SAFE64 = safe_prime_group(64)
GROUPS = [MODP23, SAFE64, EC23, EC65519]
CASES = [(P, k) for P in GROUPS for k in Instantiation if InstantiationSpec(k).supports(P)]


def test_mulhash_worked_example(monkeypatch):
    monkeypatch.setattr(ciphers, "hash_output", lambda params, suite, key: bytes([5]))
    spec = InstantiationSpec(Instantiation.MUL_HASH)
    c = encrypt(spec, MODP23, OracleSuite(0), 4, 8, random.Random(0))
    assert c.payload == bytes([17])


def test_mulexphash_exponent_law():
    suite, spec = OracleSuite(1), InstantiationSpec(Instantiation.MUL_EXP_HASH)
    beta, a = SAFE64.gexp(77), 12345
    c = encrypt(spec, SAFE64, suite, beta, SAFE64.gexp(a), random.Random(0))
    h = suite.hash_to_scalar(ciphers.MASK_LABEL, SAFE64.encode(beta), SAFE64.q)
    assert SAFE64.decode(c.payload) == SAFE64.gexp(a + h)


@pytest.mark.parametrize("params,kind", CASES, ids=lambda v: getattr(v, "name", None) or v.value)
def test_roundtrip(params, kind):
    suite, rng, spec = OracleSuite(3), random.Random(4), InstantiationSpec(kind)
    for _ in range(200):
        beta, x = params.gexp(rng.randrange(1, params.q)), params.gexp(rng.randrange(1, params.q))
        c = encrypt(spec, params, suite, beta, x, rng)
        assert (c.nonce is not None) == (kind is Instantiation.RAND_MUL_HASH)
        assert decrypt(spec, params, suite, beta, c) == x
        assert Ciphertext.from_bytes(c.to_bytes(), params) == c


def test_curves_reject_residue_multiplication():
    for kind in (Instantiation.MUL_HASH, Instantiation.RAND_MUL_HASH):
        with pytest.raises(GroupError):
            encrypt(InstantiationSpec(kind), EC23, OracleSuite(0), EC23.g, EC23.g, random.Random(0))


def test_nonce_width_enforced():
    with pytest.raises(ValueError):
        InstantiationSpec(Instantiation.RAND_MUL_HASH, nonce_bits=32)


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_mulhash_projection_independent_of_plaintext(b, a):
    suite, spec = OracleSuite(8), InstantiationSpec(Instantiation.MUL_HASH)
    P = SAFE64
    beta = P.gexp(b)
    c = encrypt(spec, P, suite, beta, P.gexp(a), random.Random(0))
    assert P.cofactor_project(P.decode(c.payload)) == P.cofactor_project(mask(spec, P, suite, beta))


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_muliota_ciphertext_stays_in_subgroup(b, a):
    suite, spec = OracleSuite(8), InstantiationSpec(Instantiation.MUL_IOTA)
    for P in (SAFE64, EC65519):
        c = encrypt(spec, P, suite, P.gexp(b), P.gexp(a), random.Random(0))
        y = P.decode(c.payload)
        assert P.is_subgroup_member(y)
        if P.kind is Kind.MODP:
            assert P.cofactor_project(y) == 1


def test_randmulhash_fixed_nonce_is_mulhash_with_longer_key():
    suite, P = OracleSuite(2), SAFE64
    beta, r = P.gexp(5), b"\x01" * 8
    m = mask(InstantiationSpec(Instantiation.RAND_MUL_HASH), P, suite, beta, r)
    from pakelab.oracles import concat
    expected = int.from_bytes(ciphers.hash_output(P, suite, concat(r, P.encode(beta))), "big") % P.p or 1
    assert m == expected


def test_ec_blockcipher_wrong_key_valid_point_rate():
    P, suite, rng = EC65519, OracleSuite(6), random.Random(6)
    spec = InstantiationSpec(Instantiation.BLOCK_CIPHER)
    assert block_width(P) == P.p_bits + 1
    n, valid = 4000, 0
    for i in range(n):
        c = encrypt(spec, P, suite, P.gexp(3), P.gexp(rng.randrange(1, P.q)), rng)
        valid += decrypt(spec, P, suite, P.gexp(1000 + i), c) is not NOT_AN_ELEMENT
    # valid fraction of the (|p|+1)-bit domain is (q-1) / 2^(|p|+1), close to 1/2 here
    expected = (P.q - 1) / 2 ** block_width(P)
    assert abs(valid / n - expected) < 0.03
    assert abs(expected - 0.5) < 0.01


def test_wire_format_errors():
    with pytest.raises(CiphertextError):
        Ciphertext.from_bytes(b"", MODP23)
    with pytest.raises(CiphertextError):
        Ciphertext.from_bytes(b"\x09\x01", MODP23)
    with pytest.raises(CiphertextError):
        Ciphertext.from_bytes(bytes([Instantiation.MUL_HASH.tag]) + b"\x01\x02", MODP23)
    with pytest.raises(CiphertextError):
        Ciphertext.from_bytes(bytes([Instantiation.RAND_MUL_HASH.tag]) + b"\x00\x08\x01", MODP23)


def test_decrypt_spec_mismatch():
    suite, rng = OracleSuite(0), random.Random(0)
    c = encrypt(InstantiationSpec(Instantiation.MUL_IOTA), MODP23, suite, 2, 3, rng)
    with pytest.raises(CiphertextError):
        decrypt(InstantiationSpec(Instantiation.MUL_HASH), MODP23, suite, 2, c)
