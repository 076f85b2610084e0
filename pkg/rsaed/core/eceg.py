"""
EC-ElGamal 加法同态加密：密钥生成、消息映射 m -> mG、概率加密、密文相加、解密以及反向映射。
"""
import logging
import math
import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

from rsaed.core.ec_core import (INFINITY, CompressedPoint, CurveParams, Point, compress, decompress, point_add,
                                point_negate, scalar_mult, scalar_mult_fixed)
from rsaed.core.errors import MalformedPointError, NoSquareRootError, PlaintextRangeError, ReverseMapError

logger = logging.getLogger('RSAED.' + __name__)


class ReverseMapMethod(str, Enum):
    bsgs = 'bsgs'
    kangaroo = 'kangaroo'


@dataclass(frozen=True)
class KeyPair:
    x: int
    Y: Point


@dataclass(frozen=True)
class Ciphertext:
    R: CompressedPoint
    S: CompressedPoint

    def to_bytes(self, curve: CurveParams) -> bytes:
        return self.R.to_bytes(curve) + self.S.to_bytes(curve)

    @classmethod
    def from_bytes(cls, data: bytes, curve: CurveParams) -> 'Ciphertext':
        size = curve.point_size
        if len(data) != 2 * size:
            raise MalformedPointError(f"密文长度错误，要求{2 * size}字节，实际{len(data)}字节")
        return cls(R=CompressedPoint.from_bytes(data[:size], curve),
                   S=CompressedPoint.from_bytes(data[size:], curve))

    def __str__(self):
        return f'({self.R},{self.S})'


@dataclass(frozen=True)
class PlaintextBound:
    max_single: int
    max_sum: int

    @classmethod
    def for_nodes(cls, node_count: int, max_single: int, curve: CurveParams) -> 'PlaintextBound':
        """max_sum = 节点数 × max_single，并校验小于群阶"""
        return cls(max_single=max_single, max_sum=node_count * max_single).validated(curve)

    def validated(self, curve: CurveParams) -> 'PlaintextBound':
        if self.max_single < 0 or self.max_sum < self.max_single:
            raise PlaintextRangeError(f"明文上界不合法: max_single={self.max_single}, max_sum={self.max_sum}")
        if self.max_sum >= curve.n:
            raise PlaintextRangeError(f"max_sum={self.max_sum} 必须小于群阶 n={curve.n}，否则反向映射有歧义")
        return self


def _random_scalar(curve: CurveParams, rng: Optional[random.Random]) -> int:
    rng = rng or random.SystemRandom()
    return rng.randint(1, curve.n - 1)


def keygen(curve: CurveParams, rng: Optional[random.Random] = None, x: Optional[int] = None) -> KeyPair:
    """
    生成密钥对。

    Args:
        curve: 曲线参数
        rng: 可复现的随机源；None 时使用系统熵
        x: 强制指定私钥（测试/演示用）
    """
    if x is None:
        x = _random_scalar(curve, rng)
    if not 1 <= x < curve.n:
        raise ValueError(f"私钥必须在 [1, n-1] 内，实际: {x}")
    return KeyPair(x=x, Y=scalar_mult_fixed(x, curve.G, curve))


def encrypt(m: int, Y: Point, curve: CurveParams, k: Optional[int] = None,
            rng: Optional[random.Random] = None, bound: Optional[PlaintextBound] = None) -> Ciphertext:
    """
    C = (R, S) = (kG, kY + mG)，两个分量均以压缩形式返回。

    k 未指定时每次加密重新抽取。
    """
    max_single = bound.max_single if bound else curve.n - 1
    if not 0 <= m <= max_single:
        raise PlaintextRangeError(f"明文 {m} 超出范围 [0, {max_single}]")
    if k is None:
        k = _random_scalar(curve, rng)
    if not 1 <= k < curve.n:
        raise ValueError(f"临时标量 k 必须在 [1, n-1] 内，实际: {k}")
    R = scalar_mult_fixed(k, curve.G, curve)
    S = point_add(scalar_mult_fixed(k, Y, curve), scalar_mult_fixed(m, curve.G, curve), curve)
    return Ciphertext(R=compress(R, curve), S=compress(S, curve))


def is_valid_part(part: CompressedPoint, curve: CurveParams) -> bool:
    """标签只保证来源，分量能否解压成曲线上的点要另行检查"""
    try:
        decompress(part, curve)
    except (MalformedPointError, NoSquareRootError):
        return False
    return True


def add_parts(parts: Iterable[CompressedPoint], curve: CurveParams) -> CompressedPoint:
    """解压后逐个点加，再压缩；RSAED 聚合节点只处理密文的一半"""
    total = INFINITY
    for part in parts:
        total = point_add(total, decompress(part, curve), curve)
    return compress(total, curve)


def hom_add(c1: Ciphertext, c2: Ciphertext, curve: CurveParams) -> Ciphertext:
    return Ciphertext(R=add_parts((c1.R, c2.R), curve), S=add_parts((c1.S, c2.S), curve))


def rerandomize(c: Ciphertext, Y: Point, curve: CurveParams, rng: Optional[random.Random] = None) -> Ciphertext:
    """加上一个 0 的新鲜加密，明文不变而密文改变"""
    return hom_add(c, encrypt(0, Y, curve, rng=rng), curve)


def decrypt(c: Ciphertext, x: int, curve: CurveParams) -> Point:
    """M = S - xR"""
    R = decompress(c.R, curve)
    S = decompress(c.S, curve)
    return point_add(S, point_negate(scalar_mult(x, R, curve), curve), curve)


@lru_cache(maxsize=32)
def _baby_steps(curve: CurveParams, m: int) -> Dict[Point, int]:
    table: Dict[Point, int] = {}
    P = INFINITY
    for j in range(m):
        table.setdefault(P, j)
        P = point_add(P, curve.G, curve)
    return table


def _bsgs(M: Point, curve: CurveParams, max_sum: int) -> Optional[int]:
    m = math.isqrt(max_sum) + 1
    table = _baby_steps(curve, m)
    # 巨步：M - i·m·G
    giant = point_negate(scalar_mult_fixed(m, curve.G, curve), curve)
    gamma = M
    for i in range(m + 1):
        j = table.get(gamma)
        if j is not None:
            value = i * m + j
            if value <= max_sum:
                return value
            return None
        gamma = point_add(gamma, giant, curve)
    return None


def _kangaroo(M: Point, curve: CurveParams, max_sum: int, seed: int) -> Optional[int]:
    """区间 [0, max_sum] 上的 Pollard λ（袋鼠）法，候选值会被重新验证"""
    width = max_sum + 1
    root = math.isqrt(width) + 1
    k = max(4, width.bit_length() // 2)
    jump_rng = random.Random(seed)
    # 平均跳距约为 sqrt(width)/2
    jumps = [jump_rng.randint(1, root) for _ in range(k)]
    jump_points = [scalar_mult_fixed(s, curve.G, curve) for s in jumps]

    def index(P: Point) -> int:
        return 0 if P.is_infinity else P.x % len(jumps)

    # 驯服袋鼠从区间右端出发，留下陷阱
    tame_dist = max_sum
    tame = scalar_mult_fixed(max_sum, curve.G, curve)
    for _ in range(4 * root):
        i = index(tame)
        tame_dist += jumps[i]
        tame = point_add(tame, jump_points[i], curve)
    trap, trap_dist = tame, tame_dist

    wild = M
    wild_dist = 0
    while wild_dist <= trap_dist:
        if wild == trap:
            candidate = trap_dist - wild_dist
            if 0 <= candidate <= max_sum and scalar_mult_fixed(candidate, curve.G, curve) == M:
                return candidate
            return None
        i = index(wild)
        wild_dist += jumps[i]
        wild = point_add(wild, jump_points[i], curve)
    return None


def reverse_map(M: Point, curve: CurveParams, bound: PlaintextBound,
                method: ReverseMapMethod = ReverseMapMethod.bsgs, attempts: int = 8) -> int:
    """
    在 [0, max_sum] 内求 m 使 m·G = M。

    默认使用 baby-step/giant-step；kangaroo 为概率方法，失败时换一组跳跃表重试。

    :raises ReverseMapError: 范围内无解（上界配置错误或聚合值已损坏）
    """
    if M.is_infinity:
        return 0
    if method == ReverseMapMethod.bsgs:
        result = _bsgs(M, curve, bound.max_sum)
    else:
        result = None
        for attempt in range(attempts):
            result = _kangaroo(M, curve, bound.max_sum, seed=attempt)
            if result is not None:
                break
            logger.debug(f"kangaroo 第{attempt + 1}次未命中，更换跳跃表重试")
    if result is None:
        raise ReverseMapError(f"在 [0, {bound.max_sum}] 内找不到 M={M} 的离散对数")
    return result


def linear_scan(M: Point, curve: CurveParams, max_sum: int) -> Optional[int]:
    """暴力线性扫描，用作 BSGS 的对照"""
    P = INFINITY
    for m in range(max_sum + 1):
        if P == M:
            return m
        P = point_add(P, curve.G, curve)
    return None


def encrypt_pair(m: int, k: int, keys: KeyPair, curve: CurveParams) -> Tuple[Point, Point]:
    """未压缩的 (kG, kY + mG)，打印示例向量时使用"""
    R = scalar_mult(k, curve.G, curve)
    S = point_add(scalar_mult(k, keys.Y, curve), scalar_mult(m, curve.G, curve), curve)
    return R, S
