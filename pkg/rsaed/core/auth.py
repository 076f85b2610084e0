"""
逐跳消息认证：HMAC 标签、按信道锁步前进的 nonce 以及成对密钥预分发。

nonce 不上线路，收发双方各自维护计数器：发送方每发一次加一，接收方验证通过时加一，
每轮结束时双方把本轮未前进的信道统一加一，这样丢包或拒收不会让信道失步。
"""
import hmac
import logging
import random
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Set, Tuple

from rsaed.core.MacStrategy import MacHashType, get_mac_strategy

logger = logging.getLogger('RSAED.' + __name__)

KEY_SIZE = 20
FULL_TAG_SIZE = 20
TRUNCATED_TAG_SIZE = 10
NONCE_SIZE = 4
NONCE_MAX = (1 << 32) - 1


@dataclass(frozen=True)
class AuthKey:
    """两个端点共享的对称密钥；key_id 按 (小 id, 大 id) 归一"""
    key_id: Tuple[int, int]
    key: bytes

    def __post_init__(self):
        if len(self.key) != KEY_SIZE:
            raise ValueError(f"认证密钥必须为{KEY_SIZE}字节，实际{len(self.key)}字节")

    @classmethod
    def between(cls, a: int, b: int, key: bytes) -> 'AuthKey':
        return cls(key_id=(min(a, b), max(a, b)), key=key)

    def shared_by(self, node_id: int) -> bool:
        return node_id in self.key_id


@dataclass(frozen=True)
class Nonce:
    counter: int = 0

    def __post_init__(self):
        if not 0 <= self.counter <= NONCE_MAX:
            raise ValueError(f"nonce 超出 32 位无符号范围: {self.counter}")

    def to_bytes(self) -> bytes:
        return self.counter.to_bytes(NONCE_SIZE, byteorder='big')

    def next(self) -> 'Nonce':
        return Nonce((self.counter + 1) & NONCE_MAX)


@dataclass(frozen=True)
class Tag:
    value: bytes
    truncated: bool = False

    def __post_init__(self):
        expected = TRUNCATED_TAG_SIZE if self.truncated else FULL_TAG_SIZE
        if len(self.value) != expected:
            raise ValueError(f"标签长度错误，要求{expected}字节，实际{len(self.value)}字节")

    def truncate(self) -> 'Tag':
        if self.truncated:
            return self
        return Tag(self.value[:TRUNCATED_TAG_SIZE], truncated=True)

    def hex(self) -> str:
        return self.value.hex()


def tag_compute(key: AuthKey, message: bytes, nonce: Optional[Nonce], truncate: bool = False,
                hash_type: MacHashType = MacHashType.sha1) -> Tag:
    """
    HMAC(key, message || nonce)，nonce 以 4 字节大端追加；nonce 为 None 时不追加。

    Args:
        key: 共享密钥
        message: 待认证数据
        nonce: 当前信道计数器
        truncate: True 时只保留前 10 字节（RSAED 线路格式）
        hash_type: 底层 hash，默认 SHA-1
    """
    data = message if nonce is None else message + nonce.to_bytes()
    tag = Tag(get_mac_strategy(hash_type).calculate(key.key, data))
    return tag.truncate() if truncate else tag


def tag_verify(key: AuthKey, message: bytes, expected_nonce: Nonce, tag: Tag,
               hash_type: MacHashType = MacHashType.sha1) -> bool:
    """重新计算并做定长比较；拒收是返回值，不抛异常"""
    expected = tag_compute(key, message, expected_nonce, truncate=tag.truncated, hash_type=hash_type)
    return hmac.compare_digest(expected.value, tag.value)


class NonceTable:
    """
    单个节点持有的全部信道计数器。

    发送信道 (owner -> peer) 和接收信道 (peer -> owner) 分开计数，
    本轮内前进过的信道记在 _touched 中，end_round() 补齐其余信道。
    """

    def __init__(self, owner: int, initial: int = 0):
        self.owner = owner
        self.initial = initial
        self._send: Dict[int, int] = {}
        self._recv: Dict[int, int] = {}
        self._touched: Set[Tuple[str, int]] = set()

    def register(self, peers: Iterable[int]) -> None:
        for peer in peers:
            if peer == self.owner:
                continue
            self._send.setdefault(peer, self.initial)
            self._recv.setdefault(peer, self.initial)

    def send_nonce(self, peer: int) -> Nonce:
        self.register((peer,))
        return Nonce(self._send[peer])

    def expected(self, peer: int) -> Nonce:
        self.register((peer,))
        return Nonce(self._recv[peer])

    def advance_send(self, peer: int) -> None:
        self._send[peer] = Nonce(self._send[peer]).next().counter
        self._touched.add(('send', peer))

    def advance_recv(self, peer: int) -> None:
        self._recv[peer] = Nonce(self._recv[peer]).next().counter
        self._touched.add(('recv', peer))

    def end_round(self) -> None:
        # 按轮同步：本轮没有前进的信道补加一，收发双方的计数始终对齐
        for peer in self._send:
            if ('send', peer) not in self._touched:
                self._send[peer] = Nonce(self._send[peer]).next().counter
        for peer in self._recv:
            if ('recv', peer) not in self._touched:
                self._recv[peer] = Nonce(self._recv[peer]).next().counter
        self._touched.clear()


def sign_for(table: NonceTable, peer: int, key: AuthKey, message: bytes, truncate: bool,
             hash_type: MacHashType = MacHashType.sha1) -> Tag:
    """用发送信道当前 nonce 计算标签，随后发送计数加一"""
    tag = tag_compute(key, message, table.send_nonce(peer), truncate=truncate, hash_type=hash_type)
    table.advance_send(peer)
    return tag


def verify_from(table: NonceTable, peer: int, key: AuthKey, message: bytes, tag: Tag,
                hash_type: MacHashType = MacHashType.sha1) -> bool:
    """按接收信道期望的 nonce 验证，通过时接收计数加一"""
    nonce = table.expected(peer)
    if not tag_verify(key, message, nonce, tag, hash_type=hash_type):
        logger.debug(f"节点{table.owner}拒收来自节点{peer}的消息, nonce={nonce.counter}")
        return False
    table.advance_recv(peer)
    logger.debug(f"节点{table.owner}接受来自节点{peer}的消息, nonce={nonce.counter}")
    return True


class KeyRing:
    """
    成对密钥预分发：K(a, b) = HMAC-SHA1(master, "pair" || a || b)，a < b。

    密钥建立不属于本项目范围，由一个可复现的主密钥代替部署前的预置。
    """

    def __init__(self, master: bytes):
        if len(master) != KEY_SIZE:
            raise ValueError(f"主密钥必须为{KEY_SIZE}字节，实际{len(master)}字节")
        self._master = master
        self._cache: Dict[Tuple[int, int], AuthKey] = {}

    @classmethod
    def from_seed(cls, seed: int) -> 'KeyRing':
        return cls(random.Random(seed).randbytes(KEY_SIZE))

    def key(self, a: int, b: int) -> AuthKey:
        if a == b:
            raise ValueError(f"节点不能与自己共享密钥: {a}")
        lo, hi = min(a, b), max(a, b)
        cached = self._cache.get((lo, hi))
        if cached is None:
            material = get_mac_strategy(MacHashType.sha1).calculate(self._master, b'pair' + bytes([lo, hi]))
            cached = self._cache[(lo, hi)] = AuthKey(key_id=(lo, hi), key=material)
        return cached


def outsider_key(a: int, b: int, rng: random.Random) -> AuthKey:
    """攻击者伪造的密钥：与任何合法端点都不共享"""
    return AuthKey.between(a, b, rng.randbytes(KEY_SIZE))
