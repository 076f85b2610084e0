"""
按轮次脚本化的攻击者：伪造、重放、未授权聚合、聚合节点被俘获、节点失效。
"""
import logging
from collections import defaultdict
from typing import Dict, List, Set, Tuple

from rsaed.core.ec_core import CompressedPoint
from rsaed.core.errors import ConfigError, UnknownTargetError
from rsaed.user_data import AdversaryEvent, AdversaryKind, AggregatorSide, Scenario

logger = logging.getLogger('RSAED.' + __name__)


def validate_event(scenario: Scenario, event: AdversaryEvent) -> None:
    """
    :raises UnknownTargetError: 节点 id 或簇号不存在
    :raises ConfigError: 轮次超出场景轮数
    """
    if event.targets_node:
        if not 1 <= event.target <= scenario.topology.total_nodes:
            raise UnknownTargetError(f"{event.kind.value}: 节点{event.target}不存在，"
                                     f"有效范围 [1, {scenario.topology.total_nodes}]")
    elif not 0 <= event.target < scenario.topology.cluster_count:
        raise UnknownTargetError(f"{event.kind.value}: 簇{event.target}不存在，"
                                 f"有效范围 [0, {scenario.topology.cluster_count - 1}]")
    if event.round > scenario.rounds:
        raise ConfigError(f"{event.kind.value}: 第{event.round}轮超出场景轮数 {scenario.rounds}")


def validate_targets(scenario: Scenario) -> None:
    for event in scenario.adversaries:
        validate_event(scenario, event)


def inject_adversary(scenario: Scenario, kind: AdversaryKind, target: int, round: int = 1,
                     side: AggregatorSide = AggregatorSide.agg1) -> Scenario:
    """返回追加了一条攻击事件的新场景，原场景不变"""
    event = AdversaryEvent(kind=kind, target=target, round=round, side=side)
    validate_event(scenario, event)
    logger.warning(f"注入攻击: {event.kind.value} -> {target} (第{round}轮, {side.value})")
    return scenario.model_copy(update={'adversaries': [*scenario.adversaries, event]})


class AdversaryPlan:
    """把事件按轮次索引，仿真器每轮查询"""

    def __init__(self, events: List[AdversaryEvent]):
        self._by_round: Dict[int, List[AdversaryEvent]] = defaultdict(list)
        for event in events:
            self._by_round[event.round].append(event)

    def nodes(self, round: int, kind: AdversaryKind) -> Set[int]:
        return {event.target for event in self._by_round.get(round, []) if event.kind == kind}

    def clusters(self, round: int, kind: AdversaryKind) -> Set[Tuple[int, AggregatorSide]]:
        return {(event.target, event.side) for event in self._by_round.get(round, []) if event.kind == kind}

    def __bool__(self):
        return bool(self._by_round)


def flip_bit(part: CompressedPoint) -> CompressedPoint:
    """翻转格式字节里的 y 奇偶位（0x02 <-> 0x03），得到 -P；无穷远点改成 x=1"""
    if part.infinity:
        return CompressedPoint(x=1, sign_bit=0)
    return CompressedPoint(x=part.x, sign_bit=part.sign_bit ^ 1)
