import random

import pytest

from rsaed.core.MacStrategy import ALGORITHM_REGISTRY, MacHashType, get_mac_strategy
from rsaed.core.auth import (AuthKey, KeyRing, Nonce, NonceTable, Tag, outsider_key, sign_for, tag_compute,
                             tag_verify, verify_from)

RFC2202_KEY = bytes([0x0b] * 20)
PART = bytes([0x02, 0x07])


def test_rfc2202_sha1_vector():
    mac = get_mac_strategy(MacHashType.sha1).calculate(RFC2202_KEY, b'Hi There')
    assert mac.hex() == 'b617318655057264e28bc0b6fb378c8ef146be00'


def test_sha256_strategy_truncates_to_20_octets():
    # RFC 4231 第一组向量的前 20 字节
    mac = get_mac_strategy(MacHashType.sha256).calculate(RFC2202_KEY, b'Hi There')
    assert mac.hex() == 'b0344c61d8db38535ca8afceaf0bf12b881dc200'


def test_registry_covers_every_hash_type():
    assert set(ALGORITHM_REGISTRY) == set(MacHashType)
    assert isinstance(get_mac_strategy('sha1'), ALGORITHM_REGISTRY[MacHashType.sha1])


def test_tag_without_nonce_is_plain_hmac(golden_key):
    tag = tag_compute(golden_key, b'Hi There', None)
    assert tag.hex() == 'b617318655057264e28bc0b6fb378c8ef146be00'
    assert not tag.truncated


def test_tag_appends_big_endian_nonce(golden_key):
    assert tag_compute(golden_key, PART, Nonce(0)).hex() == 'f5d1244664bcea65c7e495cb1b75a150d56f7c32'
    assert tag_compute(golden_key, PART, Nonce(1)).hex() == '1be8b554d2463739dac9e577c1dc709301ab8219'
    truncated = tag_compute(golden_key, PART, Nonce(0), truncate=True)
    assert truncated.truncated
    assert truncated.hex() == 'f5d1244664bcea65c7e4'


def test_tag_verify(golden_key):
    tag = tag_compute(golden_key, PART, Nonce(3), truncate=True)
    assert tag_verify(golden_key, PART, Nonce(3), tag)
    assert not tag_verify(golden_key, PART, Nonce(2), tag)
    assert not tag_verify(golden_key, bytes([0x03, 0x07]), Nonce(3), tag)
    other = AuthKey.between(1, 2, bytes(20))
    assert not tag_verify(other, PART, Nonce(3), tag)


def test_mutated_messages_never_verify(golden_key):
    """1000 个随机篡改的消息全部被拒收"""
    rng = random.Random(1000)
    message = bytes(rng.randrange(256) for _ in range(21))
    tag = tag_compute(golden_key, message, Nonce(0), truncate=True)
    for _ in range(1000):
        mutated = bytearray(message)
        index = rng.randrange(len(mutated))
        mutated[index] ^= 1 << rng.randrange(8)
        assert not tag_verify(golden_key, bytes(mutated), Nonce(0), tag)


def test_value_objects_validate_sizes():
    with pytest.raises(ValueError):
        AuthKey.between(1, 2, bytes(19))
    with pytest.raises(ValueError):
        Tag(bytes(11), truncated=True)
    with pytest.raises(ValueError):
        Nonce(-1)
    assert Nonce(0xFFFFFFFF).next() == Nonce(0)
    assert AuthKey.between(5, 3, RFC2202_KEY).key_id == (3, 5)


def test_nonce_lockstep(golden_key):
    sender, receiver = NonceTable(1), NonceTable(2)
    for _ in range(3):
        tag = sign_for(sender, 2, golden_key, PART, truncate=True)
        assert verify_from(receiver, 1, golden_key, PART, tag)
    # 重放上一条消息
    assert not verify_from(receiver, 1, golden_key, PART, tag)
    assert sender.send_nonce(2) == receiver.expected(1) == Nonce(3)


def test_end_round_resynchronises_rejected_channel(golden_key):
    sender, receiver = NonceTable(1), NonceTable(2)
    tag = sign_for(sender, 2, golden_key, PART, truncate=True)
    forged = Tag(bytes(10), truncated=True)
    assert not verify_from(receiver, 1, golden_key, PART, forged)
    sender.end_round()
    receiver.end_round()
    assert sender.send_nonce(2) == receiver.expected(1) == Nonce(1)
    # 旧标签在新一轮被拒收
    assert not verify_from(receiver, 1, golden_key, PART, tag)


def test_end_round_advances_silent_channels():
    table = NonceTable(1)
    table.register([0, 2, 3])
    table.advance_send(2)
    table.end_round()
    assert table.send_nonce(2) == Nonce(1)
    assert table.send_nonce(3) == Nonce(1)
    assert table.expected(0) == Nonce(1)


def test_keyring_pairwise_keys():
    ring = KeyRing.from_seed(9)
    assert ring.key(3, 7) == ring.key(7, 3)
    assert ring.key(3, 7) is ring.key(7, 3)
    assert ring.key(3, 7).key != ring.key(3, 8).key
    assert KeyRing.from_seed(9).key(3, 7) == ring.key(3, 7)
    assert KeyRing.from_seed(10).key(3, 7) != ring.key(3, 7)
    with pytest.raises(ValueError):
        ring.key(4, 4)


def test_outsider_key_is_not_shared():
    ring = KeyRing.from_seed(9)
    fake = outsider_key(3, 7, random.Random(1))
    assert fake.key_id == (3, 7)
    assert fake.key != ring.key(3, 7).key


def test_random_tags_never_accepted():
    """1000 次随机标签猜测，完整与截断标签都不会被接受"""
    rng = random.Random(4242)
    for trial in range(1000):
        key = AuthKey.between(1, 2, rng.randbytes(20))
        message = rng.randbytes(rng.randint(1, 64))
        nonce = Nonce(rng.getrandbits(32))
        truncate = bool(trial % 2)
        guess = Tag(rng.randbytes(10 if truncate else 20), truncated=truncate)
        assert not tag_verify(key, message, nonce, guess)


@pytest.mark.parametrize('hash_type', list(MacHashType))
def test_changed_key_or_nonce_rejected(hash_type):
    rng = random.Random(77)
    for trial in range(1000):
        raw = rng.randbytes(20)
        key = AuthKey.between(1, 2, raw)
        message = rng.randbytes(21)
        nonce = Nonce(rng.getrandbits(32))
        tag = tag_compute(key, message, nonce, truncate=bool(trial % 2), hash_type=hash_type)
        assert tag_verify(key, message, nonce, tag, hash_type=hash_type)

        flipped = bytearray(raw)
        flipped[rng.randrange(20)] ^= 1 << rng.randrange(8)
        assert not tag_verify(AuthKey.between(1, 2, bytes(flipped)), message, nonce, tag, hash_type=hash_type)
        assert not tag_verify(key, message, nonce.next(), tag, hash_type=hash_type)
        other = Nonce(nonce.counter ^ (1 << rng.randrange(32)))
        assert not tag_verify(key, message, other, tag, hash_type=hash_type)
