"""
簇内选举：能量越高越可能成为聚合节点。

默认按剩余能量降序取前几名（同能量时 id 小者优先），保证仿真可复现；
weighted 模式按能量加权、用给定种子的随机源抽取。
"""
import logging
import random
from typing import List, Optional, Sequence, Tuple

from rsaed.core.errors import ClusterTooSmallError
from rsaed.protocol.node import NodeState, Role
from rsaed.user_data import ElectionMode

logger = logging.getLogger('RSAED.' + __name__)


def rank_by_energy(cluster: Sequence[NodeState]) -> List[NodeState]:
    return sorted(cluster, key=lambda node: (-node.energy_mj, node.id))


def _weighted_pick(cluster: Sequence[NodeState], count: int, rng: random.Random) -> List[NodeState]:
    pool = sorted(cluster, key=lambda node: node.id)
    chosen = []
    for _ in range(count):
        weights = [max(node.energy_mj, 0.0) for node in pool]
        if sum(weights) <= 0:
            weights = [1.0] * len(pool)
        pick = rng.choices(range(len(pool)), weights=weights, k=1)[0]
        chosen.append(pool.pop(pick))
    return chosen


def _pick(cluster: Sequence[NodeState], count: int, mode: ElectionMode,
          rng: Optional[random.Random]) -> List[NodeState]:
    if mode == ElectionMode.weighted:
        if rng is None:
            raise ValueError("weighted 选举需要提供随机源")
        return _weighted_pick(cluster, count, rng)
    return rank_by_energy(cluster)[:count]


def elect_aggregators(cluster: Sequence[NodeState], mode: ElectionMode = ElectionMode.deterministic,
                      rng: Optional[random.Random] = None) -> Tuple[int, int]:
    """
    选出 aggJ1 与 aggJ2，并设置簇内所有节点的角色。两者的共享密钥由 KeyRing 预置。

    :raises ClusterTooSmallError: 少于 3 个存活节点时，除两个聚合节点外没有传感器
    """
    if len(cluster) < 3:
        raise ClusterTooSmallError(f"RSAED 簇至少需要 3 个节点，实际 {len(cluster)} 个: "
                                   f"{[node.id for node in cluster]}")
    agg1, agg2 = _pick(cluster, 2, mode, rng)
    for node in cluster:
        if node is agg1:
            node.begin_round(Role.aggregator_1)
        elif node is agg2:
            node.begin_round(Role.aggregator_2)
        else:
            node.begin_round(Role.sensor)
    agg1.key_for(agg2.id)
    agg2.key_for(agg1.id)
    logger.info(f"聚合节点选举: agg1={agg1.id} ({agg1.energy_mj:.3f} mJ), agg2={agg2.id} ({agg2.energy_mj:.3f} mJ)")
    return agg1.id, agg2.id


def elect_cluster_head(cluster: Sequence[NodeState], mode: ElectionMode = ElectionMode.deterministic,
                       rng: Optional[random.Random] = None) -> int:
    """S-ECEG 只有一个簇头：存活节点中能量最高者"""
    if len(cluster) < 2:
        raise ClusterTooSmallError(f"S-ECEG 簇至少需要 2 个节点，实际 {len(cluster)} 个")
    (head,) = _pick(cluster, 1, mode, rng)
    for node in cluster:
        node.begin_round(Role.cluster_head if node is head else Role.sensor)
    logger.info(f"簇头选举: ch={head.id} ({head.energy_mj:.3f} mJ)")
    return head.id
