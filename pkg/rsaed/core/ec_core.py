"""
素数域椭圆曲线群运算、点压缩以及曲线参数注册表。

说明：域元素使用 Python 任意精度整数并对 p 取模，不提供任何常数时间保证。
本项目是协议仿真工具，不是生产级密码库。
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional

import sympy
from sympy.ntheory.residue_ntheory import sqrt_mod

from rsaed.core.errors import CurveError, MalformedPointError, NoSquareRootError, PointNotOnCurveError

logger = logging.getLogger('RSAED.' + __name__)

FORMAT_INFINITY = 0x00
FORMAT_EVEN = 0x02
FORMAT_ODD = 0x03

DEFAULT_WINDOW = 4


@dataclass(frozen=True)
class Point:
    """仿射坐标点；x、y 均为 None 时表示无穷远点"""
    x: Optional[int] = None
    y: Optional[int] = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self):
        if self.is_infinity:
            return 'inf'
        return f'({self.x},{self.y})'


INFINITY = Point()


@dataclass(frozen=True)
class CurveParams:
    """y^2 = x^3 + ax + b (mod p) 上的域参数 (a, b, p, G, n)"""
    name: str
    p: int
    a: int
    b: int
    G: Point
    n: int

    @property
    def byte_length(self) -> int:
        """x 坐标编码所需字节数 ceil(bits(p)/8)"""
        return (self.p.bit_length() + 7) // 8

    @property
    def point_size(self) -> int:
        """压缩点的线路长度：1 字节格式 + x"""
        return 1 + self.byte_length


@dataclass(frozen=True)
class CompressedPoint:
    x: int = 0
    sign_bit: int = 0
    infinity: bool = False

    def to_bytes(self, curve: CurveParams) -> bytes:
        if self.infinity:
            return bytes([FORMAT_INFINITY]) + bytes(curve.byte_length)
        fmt = FORMAT_ODD if self.sign_bit else FORMAT_EVEN
        return bytes([fmt]) + self.x.to_bytes(curve.byte_length, byteorder='big')

    @classmethod
    def from_bytes(cls, data: bytes, curve: CurveParams) -> 'CompressedPoint':
        if len(data) != curve.point_size:
            raise MalformedPointError(f"压缩点长度错误，要求{curve.point_size}字节，实际{len(data)}字节: {data.hex()}")
        fmt = data[0]
        x = int.from_bytes(data[1:], byteorder='big')
        if fmt == FORMAT_INFINITY:
            if x != 0:
                raise MalformedPointError(f"无穷远点编码的 x 部分必须为 0: {data.hex()}")
            return cls(infinity=True)
        if fmt not in (FORMAT_EVEN, FORMAT_ODD):
            raise MalformedPointError(f"非法的点格式字节 0x{fmt:02x}")
        if x >= curve.p:
            raise MalformedPointError(f"x 坐标超出域范围: {x}")
        return cls(x=x, sign_bit=fmt - FORMAT_EVEN)

    def __str__(self):
        if self.infinity:
            return 'inf'
        return f'({self.x},{self.sign_bit})'


def is_on_curve(P: Point, curve: CurveParams) -> bool:
    if P.is_infinity:
        return True
    if not (0 <= P.x < curve.p and 0 <= P.y < curve.p):
        return False
    return (P.y * P.y - (P.x * P.x * P.x + curve.a * P.x + curve.b)) % curve.p == 0


def _check(P: Point, curve: CurveParams) -> None:
    if not is_on_curve(P, curve):
        raise PointNotOnCurveError(f"点 {P} 不在曲线 {curve.name} 上")


def point_negate(P: Point, curve: CurveParams) -> Point:
    _check(P, curve)
    if P.is_infinity:
        return INFINITY
    return Point(P.x, (-P.y) % curve.p)


def _add(P1: Point, P2: Point, curve: CurveParams) -> Point:
    # 不做曲线校验的内部加法，供标量乘法循环使用
    if P1.is_infinity:
        return P2
    if P2.is_infinity:
        return P1
    p = curve.p
    if P1.x == P2.x:
        if (P1.y + P2.y) % p == 0:
            return INFINITY
        lam = (3 * P1.x * P1.x + curve.a) * pow(2 * P1.y, -1, p) % p
    else:
        lam = (P2.y - P1.y) * pow(P2.x - P1.x, -1, p) % p
    x3 = (lam * lam - P1.x - P2.x) % p
    y3 = (lam * (P1.x - x3) - P1.y) % p
    return Point(x3, y3)


def point_add(P1: Point, P2: Point, curve: CurveParams) -> Point:
    """
    群加法（弦切法则）。

    斜率：P1 != P2 时 λ = (y2 - y1)/(x2 - x1)，倍点时 λ = (3x1^2 + a)/(2y1)；
    x3 = λ^2 - x1 - x2，y3 = λ(x1 - x3) - y1。P + (-P) 结果为无穷远点。
    """
    _check(P1, curve)
    _check(P2, curve)
    return _add(P1, P2, curve)


def _double_and_add(k: int, P: Point, curve: CurveParams) -> Point:
    result = INFINITY
    addend = P
    while k:
        if k & 1:
            result = _add(result, addend, curve)
        addend = _add(addend, addend, curve)
        k >>= 1
    return result


def scalar_mult(k: int, P: Point, curve: CurveParams) -> Point:
    """
    计算 k·P（从低位开始的 double-and-add）

    :param k: 非负整数
    :raises PointNotOnCurveError: P 不在曲线上
    """
    if k < 0:
        raise ValueError(f"标量必须为非负整数，实际: {k}")
    _check(P, curve)
    return _double_and_add(k, P, curve)


class FixedBaseMultiplier:
    """
    固定基点的窗口预计算表。

    table[i][d] = d · 2^(w·i) · P，乘法只需要按窗口查表并做点加，不再需要倍点。
    基点 G 和基站公钥 Y 在部署前已知，预计算只做一次。
    """

    def __init__(self, P: Point, curve: CurveParams, window: int = DEFAULT_WINDOW):
        _check(P, curve)
        self.P = P
        self.curve = curve
        self.window = window
        self._blocks = (curve.n.bit_length() + window - 1) // window
        self._table: List[List[Point]] = []
        base = P
        for _ in range(self._blocks):
            row = [INFINITY]
            for _d in range(1, 1 << window):
                row.append(_add(row[-1], base, curve))
            self._table.append(row)
            # 下一行的基点 = 2^w · base
            base = _add(row[-1], base, curve)
        logger.debug(f"固定基点预计算完成: curve={curve.name}, P={P}, window={window}, blocks={self._blocks}")

    def mult(self, k: int) -> Point:
        if k < 0:
            raise ValueError(f"标量必须为非负整数，实际: {k}")
        # 基点阶为 n（本项目的曲线余因子都为 1）
        k %= self.curve.n
        mask = (1 << self.window) - 1
        result = INFINITY
        i = 0
        while k:
            digit = k & mask
            if digit:
                result = _add(result, self._table[i][digit], self.curve)
            k >>= self.window
            i += 1
        return result


@lru_cache(maxsize=64)
def fixed_base(P: Point, curve: CurveParams, window: int = DEFAULT_WINDOW) -> FixedBaseMultiplier:
    return FixedBaseMultiplier(P, curve, window)


def scalar_mult_fixed(k: int, P: Point, curve: CurveParams) -> Point:
    """窗口预计算路径，结果必须与 scalar_mult 一致"""
    return fixed_base(P, curve).mult(k)


def sqrt_mod_prime(value: int, p: int) -> int:
    """
    求模 p 平方根，返回其中一个根。

    p ≡ 3 (mod 4) 时直接用 value^((p+1)/4)，否则交给 sympy 的 Tonelli–Shanks。
    """
    value %= p
    if value == 0:
        return 0
    if p % 4 == 3:
        root = pow(value, (p + 1) // 4, p)
    else:
        root = sqrt_mod(value, p)
        if root is None:
            raise NoSquareRootError(f"{value} 不是模 {p} 的二次剩余")
    if root * root % p != value:
        raise NoSquareRootError(f"{value} 不是模 {p} 的二次剩余")
    return root


def compress(P: Point, curve: CurveParams) -> CompressedPoint:
    _check(P, curve)
    if P.is_infinity:
        return CompressedPoint(infinity=True)
    return CompressedPoint(x=P.x, sign_bit=P.y & 1)


def decompress(C: CompressedPoint, curve: CurveParams) -> Point:
    """由 x 与 y 的奇偶位恢复曲线上的唯一点"""
    if C.infinity:
        return INFINITY
    if not 0 <= C.x < curve.p:
        raise MalformedPointError(f"x 坐标超出域范围: {C.x}")
    rhs = (C.x * C.x * C.x + curve.a * C.x + curve.b) % curve.p
    try:
        y = sqrt_mod_prime(rhs, curve.p)
    except NoSquareRootError:
        raise NoSquareRootError(f"曲线 {curve.name} 上不存在 x={C.x} 的点")
    if y == 0 and C.sign_bit:
        raise NoSquareRootError(f"x={C.x} 只有 y=0 一个解，奇偶位不可能为 1")
    if (y & 1) != C.sign_bit:
        y = curve.p - y
    return Point(C.x, y)


def point_to_bytes(P: Point, curve: CurveParams) -> bytes:
    return compress(P, curve).to_bytes(curve)


def point_from_bytes(data: bytes, curve: CurveParams) -> Point:
    return decompress(CompressedPoint.from_bytes(data, curve), curve)


def validate_curve(curve: CurveParams) -> CurveParams:
    """检查 p 为大于 3 的素数、非奇异、G 在曲线上且 n·G = ∞"""
    if curve.p <= 3 or not sympy.isprime(curve.p):
        raise CurveError(f"{curve.name}: p 必须是大于 3 的素数，实际: {curve.p}")
    if (4 * curve.a ** 3 + 27 * curve.b ** 2) % curve.p == 0:
        raise CurveError(f"{curve.name}: 曲线奇异 (4a^3 + 27b^2 ≡ 0)")
    if curve.G.is_infinity or not is_on_curve(curve.G, curve):
        raise CurveError(f"{curve.name}: 基点 {curve.G} 不在曲线上")
    if not _double_and_add(curve.n, curve.G, curve).is_infinity:
        raise CurveError(f"{curve.name}: n·G != ∞，阶 n={curve.n} 错误")
    return curve


TOY11 = CurveParams(name='toy11', p=11, a=1, b=6, G=Point(2, 7), n=13)

# SEC 2 推荐参数
SECP160R1 = CurveParams(
    name='secp160r1',
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFF,
    a=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFC,
    b=0x1C97BEFC54BD7A8B65ACF89F81D4D4ADC565FA45,
    G=Point(0x4A96B5688EF573284664698968C38BB913CBFC82,
            0x23A628553168947D59DCC912042351377AC5FB32),
    n=0x0100000000000000000001F4C8F927AED3CA752257,
)

CURVE_REGISTRY: Dict[str, CurveParams] = {
    TOY11.name: TOY11,
    SECP160R1.name: SECP160R1,
}


@lru_cache(maxsize=8)
def registry_get(name: str) -> CurveParams:
    """按名称取曲线参数，首次获取时校验"""
    curve = CURVE_REGISTRY.get(name)
    if curve is None:
        raise CurveError(f"未知曲线: {name}，可选: {', '.join(CURVE_REGISTRY)}")
    return validate_curve(curve)
