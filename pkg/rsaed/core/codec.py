"""
线路编解码：RSAED 数据包、S-ECEG 包及其两块分片、聚合节点之间的校验消息、聚合报告。

除 S-ECEG 的 62 字节逻辑载荷外，每条消息都以 5 字节头开始：
dest(2) | length(1) | group(1) | type(1)，length 为头之后的字节数，多字节字段一律大端。
"""
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence, Tuple, Type, TypeVar, Union

from rsaed.core.auth import FULL_TAG_SIZE, TRUNCATED_TAG_SIZE, Tag
from rsaed.core.ec_core import CompressedPoint, CurveParams
from rsaed.core.errors import FieldOverflowError, LengthMismatchError, MissingFragmentError

logger = logging.getLogger('RSAED.' + __name__)

HEADER_SIZE = 5
MAX_BLOCK_SIZE = 39  # TinyOS 单包上限
FRAGMENT_INDEX_SIZE = 1
MAX_CHUNK_SIZE = MAX_BLOCK_SIZE - HEADER_SIZE - FRAGMENT_INDEX_SIZE


class MessageType(IntEnum):
    data = 0x01
    verification = 0x02
    aggregate = 0x03
    fragment = 0x04


def _u8(value: int, name: str) -> bytes:
    if not 0 <= value <= 0xFF:
        raise FieldOverflowError(f"{name}={value} 超出 1 字节范围")
    return bytes([value])


def _u16(value: int, name: str) -> bytes:
    if not 0 <= value <= 0xFFFF:
        raise FieldOverflowError(f"{name}={value} 超出 2 字节范围")
    return value.to_bytes(2, byteorder='big')


def _expect_length(data: bytes, size: int, what: str) -> None:
    if len(data) != size:
        raise LengthMismatchError(f"{what}长度错误，要求{size}字节，实际{len(data)}字节: {data.hex()}")


@dataclass(frozen=True)
class Header:
    dest: int
    length: int
    group: int
    type: MessageType

    def to_bytes(self) -> bytes:
        return (_u16(self.dest, 'dest') + _u8(self.length, 'length') + _u8(self.group, 'group')
                + _u8(int(self.type), 'type'))

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Header':
        msg_type = peek_type(data)
        header = cls(dest=int.from_bytes(data[0:2], 'big'), length=data[2], group=data[3], type=msg_type)
        if header.length != len(data) - HEADER_SIZE:
            raise LengthMismatchError(
                f"头部 length={header.length} 与实际载荷 {len(data) - HEADER_SIZE} 字节不一致")
        return header


def _open(data: bytes, expected: MessageType) -> Tuple[Header, bytes]:
    header = Header.from_bytes(data)
    if header.type != expected:
        raise LengthMismatchError(f"消息类型不符，期望{expected.name}，实际{header.type.name}")
    return header, data[HEADER_SIZE:]


def _seal(dest: int, group: int, msg_type: MessageType, body: bytes) -> bytes:
    return Header(dest=dest, length=len(body), group=group, type=msg_type).to_bytes() + body


@dataclass(frozen=True)
class RsaedDataPacket:
    """传感器发往某个聚合节点的半个密文：头(5) | src(1) | part(21) | tag(10)"""
    MESSAGE_TYPE = MessageType.data

    dest: int
    group: int
    src: int
    part: CompressedPoint
    tag: Tag

    @staticmethod
    def size(curve: CurveParams) -> int:
        return HEADER_SIZE + 1 + curve.point_size + TRUNCATED_TAG_SIZE

    def mac_input(self, curve: CurveParams) -> bytes:
        return self.part.to_bytes(curve)

    def to_bytes(self, curve: CurveParams) -> bytes:
        body = _u8(self.src, 'src') + self.part.to_bytes(curve) + self.tag.truncate().value
        return _seal(self.dest, self.group, self.MESSAGE_TYPE, body)

    @classmethod
    def from_bytes(cls, data: bytes, curve: CurveParams) -> 'RsaedDataPacket':
        _expect_length(data, cls.size(curve), 'RSAED 数据包')
        header, body = _open(data, cls.MESSAGE_TYPE)
        size = curve.point_size
        return cls(dest=header.dest, group=header.group, src=body[0],
                   part=CompressedPoint.from_bytes(body[1:1 + size], curve),
                   tag=Tag(body[1 + size:], truncated=True))


@dataclass(frozen=True)
class SecegPacket:
    """S-ECEG 逻辑载荷：R | S | 完整 20 字节标签，不含头"""
    R: CompressedPoint
    S: CompressedPoint
    tag: Tag

    @staticmethod
    def size(curve: CurveParams) -> int:
        return 2 * curve.point_size + FULL_TAG_SIZE

    def mac_input(self, curve: CurveParams) -> bytes:
        return self.R.to_bytes(curve) + self.S.to_bytes(curve)

    def to_bytes(self, curve: CurveParams) -> bytes:
        if self.tag.truncated:
            raise FieldOverflowError("S-ECEG 包需要完整的 20 字节标签")
        return self.mac_input(curve) + self.tag.value

    @classmethod
    def from_bytes(cls, data: bytes, curve: CurveParams) -> 'SecegPacket':
        _expect_length(data, cls.size(curve), 'S-ECEG 载荷')
        size = curve.point_size
        return cls(R=CompressedPoint.from_bytes(data[:size], curve),
                   S=CompressedPoint.from_bytes(data[size:2 * size], curve),
                   tag=Tag(data[2 * size:]))


@dataclass(frozen=True)
class VerificationMessage:
    """兄弟聚合节点之间的校验结果：头 | sender(1) | nlp(1) | count(1) | list(count) | tag(10)"""
    MESSAGE_TYPE = MessageType.verification

    dest: int
    group: int
    sender_id: int
    nlp: int
    accused: Tuple[int, ...] = field(default_factory=tuple)
    tag: Tag = None

    def mac_input(self) -> bytes:
        if len(self.accused) > 0xFF:
            raise FieldOverflowError(f"恶意节点列表过长: {len(self.accused)}")
        return (_u8(self.sender_id, 'sender_id') + _u8(self.nlp, 'nlp') + _u8(len(self.accused), 'count')
                + b''.join(_u8(node, 'accused') for node in self.accused))

    def to_bytes(self, curve: CurveParams = None) -> bytes:
        return _seal(self.dest, self.group, self.MESSAGE_TYPE, self.mac_input() + self.tag.truncate().value)

    @classmethod
    def from_bytes(cls, data: bytes, curve: CurveParams = None) -> 'VerificationMessage':
        header, body = _open(data, cls.MESSAGE_TYPE)
        if len(body) < 3:
            raise LengthMismatchError(f"校验消息过短: {data.hex()}")
        count = body[2]
        _expect_length(body, 3 + count + TRUNCATED_TAG_SIZE, '校验消息体')
        return cls(dest=header.dest, group=header.group, sender_id=body[0], nlp=body[1],
                   accused=tuple(body[3:3 + count]), tag=Tag(body[3 + count:], truncated=True))


@dataclass(frozen=True)
class AggregateReport:
    """聚合节点上报的半个聚合密文：头 | sender(1) | part(21) | tag(10)；group 为来源簇号"""
    MESSAGE_TYPE = MessageType.aggregate

    dest: int
    group: int
    sender_id: int
    part: CompressedPoint
    tag: Tag

    def mac_input(self, curve: CurveParams) -> bytes:
        return _u8(self.sender_id, 'sender_id') + self.part.to_bytes(curve)

    def to_bytes(self, curve: CurveParams) -> bytes:
        return _seal(self.dest, self.group, self.MESSAGE_TYPE, self.mac_input(curve) + self.tag.truncate().value)

    @classmethod
    def from_bytes(cls, data: bytes, curve: CurveParams) -> 'AggregateReport':
        _expect_length(data, HEADER_SIZE + 1 + curve.point_size + TRUNCATED_TAG_SIZE, '聚合报告')
        header, body = _open(data, cls.MESSAGE_TYPE)
        size = curve.point_size
        return cls(dest=header.dest, group=header.group, sender_id=body[0],
                   part=CompressedPoint.from_bytes(body[1:1 + size], curve),
                   tag=Tag(body[1 + size:], truncated=True))


Message = Union[RsaedDataPacket, SecegPacket, VerificationMessage, AggregateReport]
M = TypeVar('M', RsaedDataPacket, SecegPacket, VerificationMessage, AggregateReport)


def encode(msg: Message, curve: CurveParams) -> bytes:
    return msg.to_bytes(curve)


def decode(data: bytes, expected_type: Type[M], curve: CurveParams) -> M:
    """
    按期望的消息类解码

    :raises LengthMismatchError: 长度或头部类型不符
    :raises MalformedPointError: 点格式字节非法
    """
    return expected_type.from_bytes(bytes(data), curve)


def peek_type(data: bytes) -> MessageType:
    """只读头部的类型字节，接收方据此分派解码"""
    if len(data) < HEADER_SIZE:
        raise LengthMismatchError(f"数据不足一个消息头: {bytes(data).hex()}")
    try:
        return MessageType(data[4])
    except ValueError:
        raise LengthMismatchError(f"未知的消息类型 0x{data[4]:02x}")


def _split_point(size: int) -> int:
    if size > 2 * MAX_CHUNK_SIZE:
        raise FieldOverflowError(f"S-ECEG 载荷 {size} 字节，两块分片装不下")
    if size > MAX_CHUNK_SIZE:
        return MAX_CHUNK_SIZE
    return (size + 1) // 2


def fragment_seceg(pkt: SecegPacket, curve: CurveParams, dest: int = 0, group: int = 0) -> Tuple[bytes, bytes]:
    """62 字节载荷拆成 33 + 29 字节两块，每块加头和 1 字节分片序号"""
    payload = pkt.to_bytes(curve)
    split = _split_point(len(payload))
    blocks = []
    for index, chunk in enumerate((payload[:split], payload[split:])):
        block = _seal(dest, group, MessageType.fragment, _u8(index, 'index') + chunk)
        if len(block) > MAX_BLOCK_SIZE:
            raise FieldOverflowError(f"分片{index}长度{len(block)}超过{MAX_BLOCK_SIZE}字节上限")
        blocks.append(block)
    return blocks[0], blocks[1]


def reassemble_seceg(frags: Sequence[bytes], curve: CurveParams) -> SecegPacket:
    """
    两块都到齐才能重组

    :raises MissingFragmentError: 缺少分片 0 或 1
    """
    chunks = {}
    for frag in frags:
        _header, body = _open(bytes(frag), MessageType.fragment)
        if not body:
            raise LengthMismatchError("分片缺少序号字节")
        chunks[body[0]] = body[1:]
    missing = [index for index in (0, 1) if index not in chunks]
    if missing:
        raise MissingFragmentError(f"缺少分片 {missing}，已收到 {sorted(chunks)}")
    logger.debug(f"分片重组完成: {len(chunks[0])} + {len(chunks[1])} 字节")
    return SecegPacket.from_bytes(chunks[0] + chunks[1], curve)


@dataclass(frozen=True)
class Frame:
    """仿真链路上的一帧：链路层给出源地址，载荷为编码后的消息"""
    src: int
    dst: int
    data: bytes
