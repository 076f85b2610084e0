from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator

from rsaed.core.MacStrategy import MacHashType
from rsaed.core.ec_core import CURVE_REGISTRY, registry_get
from rsaed.core.eceg import PlaintextBound, ReverseMapMethod
from rsaed.core.errors import RsaedError

APP_NAME = 'RSAED'
BASE_STATION_ID = 0
MAX_NODE_ID = 255


class ProtocolMode(str, Enum):
    seceg = 'seceg'
    rsaed = 'rsaed'


class Calibration(str, Enum):
    per_message = 'per-message'  # 按贡献数计时：S-ECEG 1.0 s/个，RSAED 0.5 s/个
    primitive = 'primitive'  # 按实测原语耗时累加


class ElectionMode(str, Enum):
    deterministic = 'deterministic'
    weighted = 'weighted'


class OpKind(str, Enum):
    encrypt = 'encrypt'
    tag = 'tag'
    hom_full = 'hom_full'
    hom_part = 'hom_part'


class AdversaryKind(str, Enum):
    forge = 'forge'
    replay = 'replay'
    unauthorized_aggregation = 'unauthorized-aggregation'
    compromise_aggregator = 'compromise-aggregator'
    fail_node = 'fail-node'


# 目标为节点 id 的攻击；其余攻击的目标是簇号
NODE_TARGETED = (AdversaryKind.forge, AdversaryKind.replay, AdversaryKind.fail_node)


class AggregatorSide(str, Enum):
    agg1 = 'agg1'
    agg2 = 'agg2'


class DropReason(str, Enum):
    tag_reject = 'tag-reject'
    malformed = 'malformed'
    missing = 'missing'
    missing_fragment = 'missing-fragment'
    failed = 'failed'
    cluster_too_small = 'cluster-too-small'
    not_collecting = 'not-collecting'
    brother_reject = 'brother-reject'
    cascade = 'cascade'
    reverse_map = 'reverse-map'
    invalid_point = 'invalid-point'


class CostModel(BaseModel):
    """MicaZ 实测原语耗时（秒）与电源参数，能耗 = U × I × t"""
    t_encrypt: float = Field(default=2.844, ge=0)
    t_hom_full: float = Field(default=1.499, ge=0)
    t_tag: float = Field(default=0.028, ge=0)
    t_hom_part: float = Field(default=0.796, ge=0)
    voltage: float = Field(default=3.0, gt=0)
    current_ma: float = Field(default=8.0, gt=0)
    calibration: Calibration = Calibration.per_message
    seceg_unit_s: float = Field(default=1.0, ge=0)
    rsaed_unit_s: float = Field(default=0.5, ge=0)

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, json_str: str):
        return cls.model_validate_json(json_str)


class ClusterSpec(BaseModel):
    index: int
    chain: int
    depth: int  # 0 表示直接向基站上报
    members: List[int]


class Topology(BaseModel):
    """chains 中每条链从靠近基站的簇开始列出各簇节点数；节点 id 从 1 顺序分配"""
    chains: List[List[int]] = Field(default_factory=lambda: [[10]])

    @field_validator('chains')
    @classmethod
    def check_chains(cls, chains: List[List[int]]) -> List[List[int]]:
        if not chains or any(not chain for chain in chains):
            raise ValueError("拓扑至少需要一条非空的簇链")
        for chain in chains:
            for size in chain:
                if size < 3:
                    raise ValueError(f"簇节点数必须 ≥ 3，实际: {size}")
        total = sum(sum(chain) for chain in chains)
        if total > MAX_NODE_ID:
            raise ValueError(f"节点总数 {total} 超过 {MAX_NODE_ID}（节点 id 只有 1 字节）")
        return chains

    @property
    def total_nodes(self) -> int:
        return sum(sum(chain) for chain in self.chains)

    @property
    def cluster_count(self) -> int:
        return sum(len(chain) for chain in self.chains)

    def layout(self) -> List[ClusterSpec]:
        clusters = []
        next_id = BASE_STATION_ID + 1
        for chain_index, chain in enumerate(self.chains):
            for depth, size in enumerate(chain):
                clusters.append(ClusterSpec(index=len(clusters), chain=chain_index, depth=depth,
                                            members=list(range(next_id, next_id + size))))
                next_id += size
        return clusters

    @classmethod
    def single(cls, nodes: int) -> 'Topology':
        return cls(chains=[[nodes]])


class AdversaryEvent(BaseModel):
    kind: AdversaryKind
    target: int  # 节点 id，或簇号（unauthorized-aggregation / compromise-aggregator）
    round: int = Field(default=1, ge=1)
    side: AggregatorSide = AggregatorSide.agg1

    @property
    def targets_node(self) -> bool:
        return self.kind in NODE_TARGETED


class Scenario(BaseModel):
    curve: str = 'secp160r1'
    mode: ProtocolMode = ProtocolMode.rsaed
    topology: Topology = Field(default_factory=Topology)
    rounds: int = Field(default=1, ge=1)
    seed: int = 0
    max_single: int = Field(default=1000, ge=0)
    max_sum: Optional[int] = None
    readings: Optional[List[int]] = None  # 按节点 id 顺序的固定读数；None 时每轮随机
    initial_energy_mj: float = Field(default=30000.0, gt=0)
    energies: Optional[List[float]] = None
    energy_jitter_mj: float = Field(default=0.0, ge=0)
    election: ElectionMode = ElectionMode.deterministic
    hash: MacHashType = MacHashType.sha1
    reverse_map: ReverseMapMethod = ReverseMapMethod.bsgs
    private_key: Optional[int] = None
    cost: CostModel = Field(default_factory=CostModel)
    adversaries: List[AdversaryEvent] = Field(default_factory=list)

    @field_validator('curve')
    @classmethod
    def check_curve(cls, name: str) -> str:
        if name not in CURVE_REGISTRY:
            raise ValueError(f"未知曲线: {name}，可选: {', '.join(CURVE_REGISTRY)}")
        return name

    @model_validator(mode='after')
    def check_scenario(self) -> 'Scenario':
        total = self.topology.total_nodes
        if self.readings is not None:
            if len(self.readings) != total:
                raise ValueError(f"readings 需要 {total} 个值，实际 {len(self.readings)} 个")
            for node, value in enumerate(self.readings, start=1):
                if not 0 <= value <= self.max_single:
                    raise ValueError(f"节点{node}的读数 {value} 超出 [0, {self.max_single}]")
        if self.energies is not None and len(self.energies) != total:
            raise ValueError(f"energies 需要 {total} 个值，实际 {len(self.energies)} 个")
        try:
            bound = self.plaintext_bound()
        except RsaedError as e:
            raise ValueError(str(e))
        if self.readings is not None and sum(self.readings) > bound.max_sum:
            raise ValueError(f"读数总和 {sum(self.readings)} 超过 max_sum={bound.max_sum}")
        if self.private_key is not None and not 1 <= self.private_key < registry_get(self.curve).n:
            raise ValueError(f"私钥必须在 [1, n-1] 内，实际: {self.private_key}")
        return self

    def plaintext_bound(self) -> PlaintextBound:
        curve = registry_get(self.curve)
        max_sum = self.max_sum if self.max_sum is not None else self.topology.total_nodes * self.max_single
        return PlaintextBound(max_single=self.max_single, max_sum=max_sum).validated(curve)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, json_str: str):
        return cls.model_validate_json(json_str)


class NodeRoundRecord(BaseModel):
    round: int
    node: int
    role: str
    energy_mj: float
    remaining_mj: float
    packets_received: int
    reading: Optional[int] = None


class DropRecord(BaseModel):
    round: int
    receiver: Optional[int] = None
    sender: int
    reason: DropReason

    @field_serializer('reason')
    def serialize_reason(self, reason: DropReason) -> str:
        return reason.value


class RoundOutcome(BaseModel):
    round: int
    delay_s: float
    chain_outputs: List[Optional[int]]
    malicious: List[int] = Field(default_factory=list)
    agg_energy_mj: float = 0.0
    agg_packets_received: int = 0


class Metrics(BaseModel):
    mode: ProtocolMode
    curve: str
    seed: int
    outcomes: List[RoundOutcome] = Field(default_factory=list)
    records: List[NodeRoundRecord] = Field(default_factory=list)
    drops: List[DropRecord] = Field(default_factory=list)
    op_counts: Dict[OpKind, int] = Field(default_factory=dict)
    total_energy_mj: float = 0.0
    injected_frames: int = 0
    injected_accepted: int = 0

    def summary(self) -> dict:
        """不含逐节点记录的汇总，用于 JSON 输出"""
        return self.model_dump(mode='json', exclude={'records'})

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, json_str: str):
        return cls.model_validate_json(json_str)


class SweepRow(BaseModel):
    N: int
    mode: ProtocolMode
    agg_energy_mj: float
    delay_s: float
    packets_received: int
