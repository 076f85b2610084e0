from typing import IO, List

from rsaed.core.ec_core import CompressedPoint, CurveParams, Point, compress, decompress
from rsaed.core.eceg import Ciphertext


# ------------------------------
# 工具函数：Hex字符串转bytes，失败抛出异常
# ------------------------------
def hex_str_to_bytes(hex_str: str) -> bytes:
    """
    将十六进制字符串转换为bytes类型，允许空格和 0x 前缀
    :param hex_str: 待转换的Hex字符串
    :return: 转换后的bytes
    :raises ValueError: Hex格式非法时抛出异常
    """
    cleaned = hex_str.strip().replace(' ', '')
    if cleaned.lower().startswith('0x'):
        cleaned = cleaned[2:]
    if not cleaned:
        return b""
    try:
        return bytes.fromhex(cleaned)
    except ValueError as e:
        raise ValueError(f"十六进制转换失败。输入字符串: '{hex_str}'\n详细原因: {str(e)}")


def hex_str_to_int(hex_str: str) -> int:
    """
    将十六进制字符串转换为整数。失败时抛出包含输入str和错误信息的 ValueError。

    Raises:
        TypeError: 输入不是字符串
        ValueError: 如果字符串不是有效的十六进制格式
    """
    if not isinstance(hex_str, str):
        raise TypeError(f"输入类型错误，需要字符串，但收到了 {type(hex_str).__name__}。原始输入: '{hex_str}'")
    cleaned_str = hex_str.strip().lower()
    try:
        return int(cleaned_str, 16)
    except ValueError as e:
        raise ValueError(f"十六进制转换失败。输入字符串: '{hex_str}'\n详细原因: {str(e)}")


def parse_int(text: str) -> int:
    """十进制或带 0x 前缀的十六进制整数"""
    text = text.strip()
    if text.lower().startswith('0x'):
        return hex_str_to_int(text[2:])
    try:
        return int(text, 10)
    except ValueError:
        raise ValueError(f"整数格式非法: '{text}'")


def parse_int_list(text: str) -> List[int]:
    """
    "4,8,16" 或区间写法 "4-64:4"（起点-终点:步长，含终点）
    """
    text = text.strip()
    if '-' in text and ',' not in text:
        span, _, step = text.partition(':')
        start, _, stop = span.partition('-')
        return list(range(parse_int(start), parse_int(stop) + 1, parse_int(step) if step else 1))
    return [parse_int(part) for part in text.split(',') if part.strip()]


def point_to_hex(P: Point, curve: CurveParams) -> str:
    return compress(P, curve).to_bytes(curve).hex()


def hex_to_point(hex_str: str, curve: CurveParams) -> Point:
    return decompress(CompressedPoint.from_bytes(hex_str_to_bytes(hex_str), curve), curve)


def ciphertext_to_hex(c: Ciphertext, curve: CurveParams) -> str:
    return c.to_bytes(curve).hex()


def hex_to_ciphertext(hex_str: str, curve: CurveParams) -> Ciphertext:
    return Ciphertext.from_bytes(hex_str_to_bytes(hex_str), curve)


def read_hex_lines(stream: IO[str]) -> List[str]:
    """逐行读取十六进制文本，跳过空行和 # 注释"""
    lines = []
    for line in stream:
        line = line.strip()
        if line and not line.startswith('#'):
            lines.append(line)
    return lines
