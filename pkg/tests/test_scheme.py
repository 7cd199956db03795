import numpy as np
import pytest
from helpers import random_text

from zsigil.analytic import chain_values
from zsigil.codec import encode_text
from zsigil.errors import CapacityError, IntegrityError
from zsigil.fiber_algebra import derive_operation, star
from zsigil.manifold import TangentVector, TorusModel, sample_point
from zsigil.scheme import (
    CiphertextMessage,
    KeyPair,
    decrypt,
    decrypt_block,
    encrypt,
    encrypt_block,
    keygen,
    recover_blocks,
    round_blocks,
)

SEED = bytes(range(32))
MSG_SEED = bytes(range(32, 64))


@pytest.fixture(scope="module")
def key6():
    return keygen(TorusModel(6), 64, seed=SEED)


def test_keygen_deterministic():
    a = keygen(TorusModel(4), 8, seed=SEED)
    b = keygen(TorusModel(4), 8, seed=SEED)
    assert np.array_equal(a.public.keys, b.public.keys)
    assert a.secret_seed == b.secret_seed


def test_keygen_identity_law(key6):
    for i in range(key6.max_blocks):
        blk = key6.block(i)
        assert np.abs(star(blk.op, blk.public, blk.private) - np.eye(6)).max() < 1e-9


def test_keygen_key_ranges(key6):
    mags = np.abs(key6.public.keys)
    assert mags.min() >= 1e-3 and mags.max() <= 1e3
    for i in range(key6.max_blocks):
        d = np.abs(key6.block(i).private.components)
        assert d.min() >= 0.1 and d.max() <= 10


def test_private_side_reconstructs_from_seed(key6):
    fresh = KeyPair(key6.public, key6.secret_seed)
    for i in (0, 17, 63):
        assert np.array_equal(fresh.block(i).public.components, key6.public.keys[i])
        assert fresh.block(i).op.same_as(key6.block(i).op)


def test_blocks_use_independent_points(key6):
    points = {key6.block(i).point for i in range(key6.max_blocks)}
    assert len(points) == key6.max_blocks


def test_keygen_degenerate_is_reciprocal():
    key = keygen(TorusModel(2), 1, seed=SEED, degenerate=True)
    blk = key.block(0)
    np.testing.assert_array_equal(key.public.keys[0], 1.0 / blk.private.components)


def test_keygen_rejects_bad_input():
    with pytest.raises(ValueError):
        keygen(TorusModel(2), 0, seed=SEED)
    with pytest.raises(ValueError):
        keygen(TorusModel(2), 1, seed=b"123")


def test_encrypt_block_worked_example():
    np.testing.assert_array_equal(encrypt_block(7, 3.0, [2.0, 0.5]), [42.0, 10.5])


def test_decrypt_block_worked_example():
    p = sample_point(TorusModel(2), np.random.default_rng(0))
    op = derive_operation(p.model, p, SEED, degenerate=True)
    d = TangentVector(p, [0.5, 2.0])
    assert decrypt_block(op, d, np.array([42.0, 10.5]), 3.0) == 7.0


def test_encrypt_scales_keys_by_chain(key6):
    text = "Zeta"
    ct = encrypt(key6.public, text, message_seed=MSG_SEED)
    chain = chain_values(MSG_SEED, 4)
    m = encode_text(text).blocks
    for i in range(4):
        np.testing.assert_array_equal(ct.blocks[i], (m[i] * chain[i]) * key6.public.keys[i])


def test_empty_message(key6):
    ct = encrypt(key6.public, "", message_seed=MSG_SEED)
    assert ct.D == 0 and ct.blocks.shape == (0, 6)
    assert decrypt(key6, ct) == ""


def test_round_trip_hello(key6):
    text = "Hello, Z-Sigil! \U0001d11e"
    assert decrypt(key6, encrypt(key6.public, text)) == text


def test_fresh_message_seed_each_time(key6):
    a, b = encrypt(key6.public, "same"), encrypt(key6.public, "same")
    assert a.message_seed != b.message_seed
    assert not np.array_equal(a.blocks, b.blocks)


def test_capacity(key6):
    with pytest.raises(CapacityError):
        encrypt(key6.public, "x" * 65)
    ct = CiphertextMessage(6, MSG_SEED, np.ones((65, 6)))
    with pytest.raises(CapacityError):
        decrypt(key6, ct)


def test_dimension_mismatch(key6):
    with pytest.raises(ValueError):
        decrypt(key6, CiphertextMessage(4, MSG_SEED, np.ones((1, 4))))


def test_float_error_budget():
    rng = np.random.default_rng(4)
    worst = 0.0
    for r in (2, 6, 10):
        key = keygen(TorusModel(r), 400, seed=rng.bytes(32))
        for _ in range(20):
            text = random_text(rng, int(rng.integers(1, 401)))
            ct = encrypt(key.public, text)
            worst = max(worst, np.abs(recover_blocks(key, ct) - encode_text(text).blocks).max())
    assert worst < 1e-6


def test_block_injectivity(key6):
    # fixed chain factor and key: distinct plaintext blocks give distinct ciphertext blocks
    chain = chain_values(MSG_SEED, 1)[0]
    cs = {tuple(encrypt_block(m, chain, key6.public.keys[0])) for m in range(1, 5000)}
    assert len(cs) == 4999


def test_corruption_is_local(key6):
    rng = np.random.default_rng(12)
    text = random_text(rng, 40, astral_fraction=0.0)
    ct = encrypt(key6.public, text)
    blocks = ct.blocks.copy()
    blocks[17] *= 1.1
    bad = CiphertextMessage(6, ct.message_seed, blocks)
    rounded, ok = round_blocks(recover_blocks(key6, bad))
    truth = encode_text(text).blocks
    others = np.arange(40) != 17
    assert np.array_equal(rounded[others], truth[others]) and ok[others].all()
    assert not ok[17] or rounded[17] != truth[17]


def test_wrong_key_rejected():
    rng = np.random.default_rng(13)
    owner = keygen(TorusModel(2), 16, seed=rng.bytes(32))
    rejected = 0
    for _ in range(100):
        text = random_text(rng, 16)
        ct = encrypt(owner.public, text)
        intruder = keygen(TorusModel(2), 16, seed=rng.bytes(32))
        try:
            rejected += decrypt(intruder, ct) != text
        except IntegrityError:
            rejected += 1
    assert rejected >= 99


def test_wrong_chain_rejected(key6):
    rng = np.random.default_rng(14)
    failures = 0
    for _ in range(100):
        ct = encrypt(key6.public, random_text(rng, 2, astral_fraction=0.0))
        chain = chain_values(ct.message_seed, 2)
        # block 0 decrypted against the factor of position 1
        _, ok = round_blocks(recover_blocks(key6, CiphertextMessage(6, ct.message_seed, ct.blocks[:1]), chain[1:]))
        failures += not ok[0]
    assert failures >= 99


def test_integrity_error_on_tampered_message(key6):
    ct = encrypt(key6.public, "abcdef")
    blocks = ct.blocks.copy()
    blocks[2] *= 1.0001
    with pytest.raises(IntegrityError):
        decrypt(key6, CiphertextMessage(6, ct.message_seed, blocks))
