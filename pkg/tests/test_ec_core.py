import random

import pytest

from rsaed.core.ec_core import (INFINITY, CompressedPoint, CurveParams, Point, compress, decompress, is_on_curve,
                                point_add, point_from_bytes, point_negate, point_to_bytes, registry_get, scalar_mult,
                                scalar_mult_fixed, sqrt_mod_prime, validate_curve)
from rsaed.core.errors import CurveError, MalformedPointError, NoSquareRootError, PointNotOnCurveError

# 示例曲线 y^2 = x^3 + x + 6 (mod 11) 上 G 的倍数表
TOY_TABLE = [
    (1, Point(2, 7)), (2, Point(5, 2)), (3, Point(8, 3)), (4, Point(10, 2)),
    (5, Point(3, 6)), (6, Point(7, 9)), (7, Point(7, 2)), (8, Point(3, 5)),
    (9, Point(10, 9)), (10, Point(8, 8)), (11, Point(5, 9)), (12, Point(2, 4)),
]
TOY_POINTS = [INFINITY] + [P for _, P in TOY_TABLE]


def test_registry_toy(toy):
    assert (toy.p, toy.a, toy.b, toy.n) == (11, 1, 6, 13)
    assert toy.G == Point(2, 7)


def test_registry_secp160r1(secp):
    assert secp.n.bit_length() == 161
    assert secp.point_size == 21
    assert is_on_curve(secp.G, secp)


def test_registry_unknown_curve():
    with pytest.raises(CurveError):
        registry_get('toy12')


@pytest.mark.parametrize('k, expected', TOY_TABLE)
def test_toy_group_table(toy, k, expected):
    assert scalar_mult(k, toy.G, toy) == expected
    assert scalar_mult_fixed(k, toy.G, toy) == expected


def test_order_annihilates_generator(toy, secp):
    assert scalar_mult(13, toy.G, toy) == INFINITY
    assert scalar_mult(secp.n, secp.G, secp) == INFINITY


def test_point_add(toy):
    assert point_add(Point(3, 6), Point(8, 3), toy) == Point(3, 5)
    assert point_add(Point(2, 7), INFINITY, toy) == Point(2, 7)
    assert point_add(INFINITY, Point(2, 7), toy) == Point(2, 7)
    assert point_add(Point(2, 7), Point(2, 4), toy) == INFINITY
    # 倍点
    assert point_add(Point(2, 7), Point(2, 7), toy) == Point(5, 2)


def test_toy_group_law_exhaustive(toy):
    assert len(TOY_POINTS) == toy.n
    for P in TOY_POINTS:
        assert point_add(P, INFINITY, toy) == P
        assert point_add(P, point_negate(P, toy), toy) == INFINITY
        for Q in TOY_POINTS:
            PQ = point_add(P, Q, toy)
            assert is_on_curve(PQ, toy)
            assert PQ == point_add(Q, P, toy)
            for R in TOY_POINTS:
                assert point_add(PQ, R, toy) == point_add(P, point_add(Q, R, toy), toy)


def test_point_add_off_curve(toy):
    with pytest.raises(PointNotOnCurveError):
        point_add(Point(1, 1), Point(2, 7), toy)


def test_point_negate(toy):
    assert point_negate(Point(2, 7), toy) == Point(2, 4)
    assert point_negate(Point(5, 9), toy) == Point(5, 2)
    assert point_negate(INFINITY, toy) == INFINITY
    with pytest.raises(PointNotOnCurveError):
        point_negate(Point(0, 0), toy)


def test_scalar_mult_edges(toy):
    assert scalar_mult(6, toy.G, toy) == Point(7, 9)
    assert scalar_mult(0, toy.G, toy) == INFINITY
    with pytest.raises(ValueError):
        scalar_mult(-1, toy.G, toy)


def test_fixed_base_matches_double_and_add(secp):
    rng = random.Random(11)
    for _ in range(1000):
        k = rng.randint(0, secp.n - 1)
        assert scalar_mult_fixed(k, secp.G, secp) == scalar_mult(k, secp.G, secp)


def test_compress(toy):
    assert compress(Point(7, 2), toy) == CompressedPoint(x=7, sign_bit=0)
    assert compress(Point(2, 7), toy) == CompressedPoint(x=2, sign_bit=1)
    assert compress(INFINITY, toy).infinity


def test_decompress_picks_root_by_parity(toy):
    assert decompress(CompressedPoint(x=7, sign_bit=0), toy) == Point(7, 2)
    assert decompress(CompressedPoint(x=7, sign_bit=1), toy) == Point(7, 9)
    assert decompress(CompressedPoint(infinity=True), toy) == INFINITY


def test_decompress_non_residue(toy):
    # x=1: 1 + 1 + 6 = 8 不是模 11 的二次剩余
    with pytest.raises(NoSquareRootError):
        decompress(CompressedPoint(x=1, sign_bit=0), toy)


def test_compression_identity_on_toy(toy):
    for P in TOY_POINTS:
        assert decompress(compress(P, toy), toy) == P


def test_compression_identity_on_secp(secp):
    rng = random.Random(5)
    for _ in range(1000):
        P = scalar_mult_fixed(rng.randint(1, secp.n - 1), secp.G, secp)
        assert decompress(compress(P, secp), secp) == P


def test_point_octets(toy, secp):
    assert point_to_bytes(Point(7, 2), toy) == bytes([0x02, 0x07])
    assert point_to_bytes(INFINITY, toy) == bytes([0x00, 0x00])
    assert point_from_bytes(bytes([0x03, 0x07]), toy) == Point(7, 9)
    assert len(point_to_bytes(secp.G, secp)) == 21


def test_point_octets_malformed(toy):
    with pytest.raises(MalformedPointError):
        CompressedPoint.from_bytes(bytes([0x05, 0x07]), toy)
    with pytest.raises(MalformedPointError):
        CompressedPoint.from_bytes(bytes([0x02]), toy)
    with pytest.raises(MalformedPointError):
        CompressedPoint.from_bytes(bytes([0x00, 0x01]), toy)


def test_sqrt_mod_prime_tonelli_shanks():
    # 13 ≡ 1 (mod 4)，走 sympy 的一般算法
    root = sqrt_mod_prime(10, 13)
    assert root * root % 13 == 10
    with pytest.raises(NoSquareRootError):
        sqrt_mod_prime(5, 13)


def test_validate_curve_rejects_bad_params():
    with pytest.raises(CurveError):
        validate_curve(CurveParams(name='singular', p=11, a=0, b=0, G=Point(0, 0), n=11))
    with pytest.raises(CurveError):
        validate_curve(CurveParams(name='composite', p=15, a=1, b=6, G=Point(2, 7), n=13))
    with pytest.raises(CurveError):
        validate_curve(CurveParams(name='wrong-order', p=11, a=1, b=6, G=Point(2, 7), n=12))
