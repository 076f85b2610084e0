"""
节点状态与接收集合。

每个 NodeState 只归一个调用方所有；协议函数修改它并返回要发出的消息，
执行过的密码学操作记入 round_ops，由仿真器换算成能耗和时延。
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional

from rsaed.core.MacStrategy import MacHashType
from rsaed.core.auth import AuthKey, KeyRing, NonceTable
from rsaed.core.ec_core import CompressedPoint, CurveParams, Point
from rsaed.user_data import OpKind

logger = logging.getLogger('RSAED.' + __name__)


class Role(str, Enum):
    sensor = 'sensor'
    aggregator_1 = 'aggregator-1'
    aggregator_2 = 'aggregator-2'
    cluster_head = 'cluster-head'
    base_station = 'base-station'


@dataclass
class NodeState:
    id: int
    curve: CurveParams
    keyring: KeyRing
    bs_public_key: Point
    energy_mj: float = 0.0
    role: Role = Role.sensor
    hash_type: MacHashType = MacHashType.sha1
    failed: bool = False
    keys: Dict[int, AuthKey] = field(default_factory=dict)
    nonces: NonceTable = None
    round_ops: Counter = field(default_factory=Counter)
    messages_received: int = 0
    blocks_received: int = 0

    def __post_init__(self):
        if self.nonces is None:
            self.nonces = NonceTable(self.id)

    def key_for(self, peer: int) -> AuthKey:
        key = self.keys.get(peer)
        if key is None:
            key = self.keyring.key(self.id, peer)
            self.keys[peer] = key
        return key

    def record(self, op: OpKind, count: int = 1) -> None:
        if count > 0:
            self.round_ops[op] += count

    def begin_round(self, role: Role) -> None:
        self.role = role
        self.round_ops = Counter()
        self.messages_received = 0
        self.blocks_received = 0

    def end_round(self) -> None:
        self.nonces.end_round()

    def charge(self, energy_mj: float) -> None:
        """扣除能耗；不够扣时置零并标记失效"""
        if energy_mj > self.energy_mj:
            logger.warning(f"节点{self.id}能量耗尽 (剩余 {self.energy_mj:.3f} mJ，需要 {energy_mj:.3f} mJ)")
            self.energy_mj = 0.0
            self.failed = True
            return
        self.energy_mj -= energy_mj


@dataclass
class AcceptSet:
    """
    一个聚合节点本轮的检查结果。

    accepted: 节点 id -> 密文分量（从校验消息重建时分量为 None）
    malicious: 标签错误、格式错误或缺包的节点 id
    """
    accepted: Dict[int, Optional[CompressedPoint]] = field(default_factory=dict)
    malicious: List[int] = field(default_factory=list)

    @property
    def nlp(self) -> int:
        return len(self.accepted)

    def ids(self) -> FrozenSet[int]:
        return frozenset(self.accepted)

    def accuse(self, node_id: int) -> None:
        if node_id not in self.accepted and node_id not in self.malicious:
            self.malicious.append(node_id)

    def accept(self, node_id: int, part: Optional[CompressedPoint]) -> None:
        self.accepted[node_id] = part
        if node_id in self.malicious:
            self.malicious.remove(node_id)

    def restricted_to(self, ids: Iterable[int]) -> 'AcceptSet':
        keep = set(ids)
        return AcceptSet(accepted={node: part for node, part in self.accepted.items() if node in keep},
                         malicious=sorted(set(self.malicious) | (set(self.accepted) - keep)))

    def check(self) -> None:
        overlap = set(self.accepted) & set(self.malicious)
        if overlap:
            raise ValueError(f"节点同时出现在接受集合与恶意列表中: {sorted(overlap)}")
