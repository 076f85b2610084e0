import itertools
import random

import pytest

from rsaed.core.ec_core import INFINITY, CompressedPoint, Point, compress, decompress, scalar_mult_fixed
from rsaed.core.eceg import (Ciphertext, PlaintextBound, ReverseMapMethod, decrypt, encrypt, hom_add, keygen,
                             linear_scan, rerandomize, reverse_map)
from rsaed.core.errors import PlaintextRangeError, ReverseMapError

TOY_BOUND = PlaintextBound(max_single=5, max_sum=12)


def test_keygen_forced_scalar(toy_keys):
    assert toy_keys.x == 6
    assert toy_keys.Y == Point(7, 9)


def test_keygen_rejects_out_of_range(toy):
    with pytest.raises(ValueError):
        keygen(toy, x=13)
    with pytest.raises(ValueError):
        keygen(toy, x=0)


def test_keygen_seeded_is_reproducible(secp):
    assert keygen(secp, rng=random.Random(3)) == keygen(secp, rng=random.Random(3))


def test_worked_example(toy, toy_keys):
    """x=6，读数 5 和 3，k=7 和 4，聚合后解出 8"""
    c1 = encrypt(5, toy_keys.Y, toy, k=7)
    c2 = encrypt(3, toy_keys.Y, toy, k=4)
    assert (decompress(c1.R, toy), decompress(c1.S, toy)) == (Point(7, 2), Point(3, 5))
    assert (decompress(c2.R, toy), decompress(c2.S, toy)) == (Point(10, 2), Point(2, 7))
    assert str(c1) == '((7,0),(3,1))'
    assert str(c2) == '((10,0),(2,1))'

    c = hom_add(c1, c2, toy)
    assert (decompress(c.R, toy), decompress(c.S, toy)) == (Point(5, 9), Point(10, 9))
    M = decrypt(c, toy_keys.x, toy)
    assert M == Point(3, 5)
    assert reverse_map(M, toy, TOY_BOUND) == 8


def test_encrypt_range_checks(toy, toy_keys):
    with pytest.raises(PlaintextRangeError):
        encrypt(6, toy_keys.Y, toy, k=3, bound=TOY_BOUND)
    with pytest.raises(PlaintextRangeError):
        encrypt(-1, toy_keys.Y, toy, k=3)
    with pytest.raises(ValueError):
        encrypt(1, toy_keys.Y, toy, k=0)


def test_encrypt_zero_decrypts_to_infinity(toy, toy_keys):
    c = encrypt(0, toy_keys.Y, toy, k=5)
    assert decrypt(c, toy_keys.x, toy) == INFINITY
    assert reverse_map(INFINITY, toy, TOY_BOUND) == 0


def test_ciphertext_octets(secp, secp_keys, rng):
    c = encrypt(42, secp_keys.Y, secp, rng=rng)
    data = c.to_bytes(secp)
    assert len(data) == 42
    assert Ciphertext.from_bytes(data, secp) == c


def test_rerandomize_keeps_plaintext(secp, secp_keys, rng):
    c = encrypt(77, secp_keys.Y, secp, rng=rng)
    fresh = rerandomize(c, secp_keys.Y, secp, rng=rng)
    assert fresh != c
    bound = PlaintextBound(max_single=1000, max_sum=1000)
    assert reverse_map(decrypt(fresh, secp_keys.x, secp), secp, bound) == 77


def test_homomorphism_randomized(secp, secp_keys):
    """500 次随机试验：最多 32 个贡献者、读数 ≤ 1000，解出的和等于算术和"""
    rng = random.Random(500)
    bound = PlaintextBound(max_single=1000, max_sum=32 * 1000)
    for _ in range(500):
        readings = [rng.randint(0, 1000) for _ in range(rng.randint(1, 32))]
        total = None
        for m in readings:
            c = encrypt(m, secp_keys.Y, secp, rng=rng, bound=bound)
            total = c if total is None else hom_add(total, c, secp)
        assert reverse_map(decrypt(total, secp_keys.x, secp), secp, bound) == sum(readings)


def test_bsgs_matches_linear_scan(secp):
    bound = PlaintextBound(max_single=1000, max_sum=1000)
    for m in range(0, 1001):
        M = scalar_mult_fixed(m, secp.G, secp)
        assert reverse_map(M, secp, bound) == m
        if m % 50 == 0:
            assert linear_scan(M, secp, bound.max_sum) == m


def test_reverse_map_out_of_range(toy):
    M = scalar_mult_fixed(8, toy.G, toy)
    with pytest.raises(ReverseMapError):
        reverse_map(M, toy, PlaintextBound(max_single=4, max_sum=4))
    # 放宽上界后能找到
    assert reverse_map(M, toy, PlaintextBound(max_single=4, max_sum=8)) == 8


@pytest.mark.parametrize('m', [1, 517, 9999, 31999])
def test_kangaroo_matches_bsgs(secp, m):
    bound = PlaintextBound(max_single=1000, max_sum=32000)
    M = scalar_mult_fixed(m, secp.G, secp)
    assert reverse_map(M, secp, bound, method=ReverseMapMethod.kangaroo) == m


def test_kangaroo_not_found(secp):
    bound = PlaintextBound(max_single=100, max_sum=100)
    M = scalar_mult_fixed(5000, secp.G, secp)
    with pytest.raises(ReverseMapError):
        reverse_map(M, secp, bound, method=ReverseMapMethod.kangaroo, attempts=2)


def test_plaintext_bound_must_stay_below_order(toy, secp):
    with pytest.raises(PlaintextRangeError):
        PlaintextBound.for_nodes(3, 5, toy)
    assert PlaintextBound.for_nodes(20, 1000, secp).max_sum == 20000


def test_hom_add_with_infinity_parts(toy, toy_keys):
    # S 分量可能是无穷远点，压缩编码必须能参与点加
    inf = CompressedPoint(infinity=True)
    c = Ciphertext(R=inf, S=inf)
    c1 = encrypt(5, toy_keys.Y, toy, k=7)
    assert hom_add(c, c1, toy) == c1


def test_reverse_map_every_toy_value(toy):
    bound = PlaintextBound(max_single=12, max_sum=12)
    for m in range(toy.n):
        M = scalar_mult_fixed(m, toy.G, toy)
        assert reverse_map(M, toy, bound) == m
        assert linear_scan(M, toy, bound.max_sum) == m


def test_homomorphism_every_toy_combination(toy, toy_keys):
    """最多 3 个贡献者、每个读数 ≤ 4，和不超过 12"""
    bound = PlaintextBound(max_single=4, max_sum=12)
    rng = random.Random(13)
    for t in (1, 2, 3):
        for readings in itertools.product(range(5), repeat=t):
            total = None
            for m in readings:
                c = encrypt(m, toy_keys.Y, toy, rng=rng, bound=bound)
                total = c if total is None else hom_add(total, c, toy)
            assert reverse_map(decrypt(total, toy_keys.x, toy), toy, bound) == sum(readings)


def test_homomorphism_every_toy_scalar_pair(toy, toy_keys):
    bound = PlaintextBound(max_single=6, max_sum=12)
    for m1, m2 in itertools.product(range(7), repeat=2):
        for k1, k2 in itertools.product(range(1, toy.n), repeat=2):
            c = hom_add(encrypt(m1, toy_keys.Y, toy, k=k1), encrypt(m2, toy_keys.Y, toy, k=k2), toy)
            assert reverse_map(decrypt(c, toy_keys.x, toy), toy, bound) == m1 + m2


def test_hom_add_commutes(toy, toy_keys, secp, secp_keys, rng):
    toy_cts = [encrypt(m, toy_keys.Y, toy, k=k) for m in range(4) for k in range(1, toy.n)]
    for c1, c2 in itertools.product(toy_cts, repeat=2):
        assert hom_add(c1, c2, toy) == hom_add(c2, c1, toy)
    for _ in range(100):
        c1 = encrypt(rng.randint(0, 1000), secp_keys.Y, secp, rng=rng)
        c2 = encrypt(rng.randint(0, 1000), secp_keys.Y, secp, rng=rng)
        assert hom_add(c1, c2, secp) == hom_add(c2, c1, secp)


def test_zero_with_complementary_scalar_cancels_r(toy, toy_keys):
    # Enc(m, k) + Enc(0, n-k) = (inf, mG)
    for m in range(toy.n):
        for k in range(1, toy.n):
            c = hom_add(encrypt(m, toy_keys.Y, toy, k=k), encrypt(0, toy_keys.Y, toy, k=toy.n - k), toy)
            assert c.R == CompressedPoint(infinity=True)
            assert c.S == compress(scalar_mult_fixed(m, toy.G, toy), toy)
            assert decrypt(c, toy_keys.x, toy) == scalar_mult_fixed(m, toy.G, toy)


def test_encryption_is_probabilistic(toy, toy_keys, secp, secp_keys, rng):
    for m in range(toy.n):
        assert len({encrypt(m, toy_keys.Y, toy, k=k) for k in range(1, toy.n)}) == toy.n - 1
    assert encrypt(7, secp_keys.Y, secp, rng=rng) != encrypt(7, secp_keys.Y, secp, rng=rng)
