"""
RSAED：双聚合节点方案。

1. 簇内按能量选出 aggJ1、aggJ2；
2. 传感器把密文的 R 发给 aggJ1、S 发给 aggJ2，各自用对应的成对密钥打截断标签；
3. 两个聚合节点各自验证，再互发校验结果（NLP + 恶意节点列表），
   合并规则为接受集合取交集、恶意列表取并集，只在一致的节点集合上做点加；
4. 两半聚合结果分别上报基站或更靠近基站的同侧聚合节点。
"""
import dataclasses
import logging
import random
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from rsaed.core.auth import sign_for, verify_from
from rsaed.core.codec import AggregateReport, RsaedDataPacket, VerificationMessage
from rsaed.core.eceg import PlaintextBound, add_parts, encrypt, is_valid_part
from rsaed.core.errors import EmptyAggregateError, ProtocolError
from rsaed.protocol.node import AcceptSet, NodeState, Role
from rsaed.user_data import DropReason, OpKind

logger = logging.getLogger('RSAED.' + __name__)

AGGREGATOR_ROLES = (Role.aggregator_1, Role.aggregator_2)


def rsaed_sensor_send(node: NodeState, m: int, agg1: int, agg2: int, group: int = 0,
                      rng: Optional[random.Random] = None, k: Optional[int] = None,
                      bound: Optional[PlaintextBound] = None) -> Tuple[RsaedDataPacket, RsaedDataPacket]:
    """一次加密，R 发往 agg1、S 发往 agg2，MAC 覆盖分量与 nonce"""
    if node.role != Role.sensor:
        raise ProtocolError(f"节点{node.id}当前角色为{node.role.value}，不能作为传感器发送")
    curve = node.curve
    c = encrypt(m, node.bs_public_key, curve, k=k, rng=rng, bound=bound)
    node.record(OpKind.encrypt)
    packets = []
    for dest, part in ((agg1, c.R), (agg2, c.S)):
        tag = sign_for(node.nonces, dest, node.key_for(dest), part.to_bytes(curve), truncate=True,
                       hash_type=node.hash_type)
        node.record(OpKind.tag)
        packets.append(RsaedDataPacket(dest=dest, group=group, src=node.id, part=part, tag=tag))
    logger.debug(f"节点{node.id}: R={c.R} -> {agg1}, S={c.S} -> {agg2}")
    return packets[0], packets[1]


def rsaed_collect(agg: NodeState, expected: Iterable[int], packets: Sequence[RsaedDataPacket],
                  reports: Sequence[Tuple[int, AggregateReport]] = (),
                  on_verdict: Optional[Callable[[int, bool], None]] = None
                  ) -> Tuple[AcceptSet, List[Tuple[int, DropReason]]]:
    """
    逐包验证本侧收到的分量。

    Args:
        agg: 聚合节点
        expected: 本轮应当到达的贡献者（存活的簇成员，以及下游簇的 aggJ1 id）
        packets: 传感器数据包
        reports: (贡献者 id, 下游同侧聚合节点的报告)
        on_verdict: 每个输入处理后回调 (序号, 是否接受)，报告的序号接在数据包之后

    Returns:
        (检查结果, [(发送方, 丢弃原因)])；未到达的贡献者同样记为恶意
    """
    if agg.role not in AGGREGATOR_ROLES:
        raise ProtocolError(f"节点{agg.id}当前不是聚合节点")
    curve = agg.curve
    expected = list(expected)
    result = AcceptSet()
    drops: List[Tuple[int, DropReason]] = []

    def verify(index: int, sender: int, contributor: int, message: bytes, tag, part) -> None:
        agg.record(OpKind.tag)
        ok = verify_from(agg.nonces, sender, agg.key_for(sender), message, tag, agg.hash_type)
        if ok and not is_valid_part(part, curve):
            logger.warning(f"聚合节点{agg.id}丢弃来自{sender}的分量：不是曲线上的点")
            result.accuse(contributor)
            drops.append((sender, DropReason.invalid_point))
            if on_verdict:
                on_verdict(index, False)
            return
        if on_verdict:
            on_verdict(index, ok)
        if ok:
            if contributor in result.accepted:
                logger.warning(f"聚合节点{agg.id}重复收到贡献者{contributor}的合法分量，保留第一个")
                return
            result.accept(contributor, part)
        else:
            logger.warning(f"聚合节点{agg.id}丢弃来自{sender}的分量：标签校验失败")
            result.accuse(contributor)
            drops.append((sender, DropReason.tag_reject))

    for index, pkt in enumerate(packets):
        if pkt.src not in expected:
            if on_verdict:
                on_verdict(index, False)
            drops.append((pkt.src, DropReason.not_collecting))
            continue
        verify(index, pkt.src, pkt.src, pkt.mac_input(curve), pkt.tag, pkt.part)
    for index, (contributor, report) in enumerate(reports, start=len(packets)):
        if contributor not in expected:
            if on_verdict:
                on_verdict(index, False)
            drops.append((report.sender_id, DropReason.not_collecting))
            continue
        verify(index, report.sender_id, contributor, report.mac_input(curve), report.tag, report.part)

    for contributor in expected:
        if contributor not in result.accepted and contributor not in result.malicious:
            result.accuse(contributor)
            drops.append((contributor, DropReason.missing))
    result.malicious.sort()
    result.check()
    return result, drops


def rsaed_verification_message(agg: NodeState, brother: int, result: AcceptSet,
                               group: int = 0) -> VerificationMessage:
    """把本侧检查结果发给兄弟节点"""
    unsigned = VerificationMessage(dest=brother, group=group, sender_id=agg.id, nlp=result.nlp,
                                   accused=tuple(sorted(result.malicious)))
    tag = sign_for(agg.nonces, brother, agg.key_for(brother), unsigned.mac_input(), truncate=True,
                   hash_type=agg.hash_type)
    agg.record(OpKind.tag)
    return dataclasses.replace(unsigned, tag=tag)


def rsaed_read_verification(agg: NodeState, msg: VerificationMessage,
                            expected: Iterable[int]) -> Optional[AcceptSet]:
    """
    验证兄弟节点的校验消息并还原其接受集合（expected 去掉被指控者）。

    标签不符或 NLP 与列表对不上时返回 None。
    """
    agg.record(OpKind.tag)
    if not verify_from(agg.nonces, msg.sender_id, agg.key_for(msg.sender_id), msg.mac_input(), msg.tag,
                       agg.hash_type):
        logger.warning(f"聚合节点{agg.id}拒收兄弟节点{msg.sender_id}的校验消息")
        return None
    expected = list(expected)
    accused = set(msg.accused)
    accepted = {node: None for node in expected if node not in accused}
    if msg.nlp != len(accepted) or msg.nlp + len(msg.accused) != len(expected):
        logger.warning(f"兄弟节点{msg.sender_id}的校验消息不一致: nlp={msg.nlp}, list={list(msg.accused)}, "
                       f"评估节点数={len(expected)}")
        return None
    return AcceptSet(accepted=accepted, malicious=sorted(accused))


def rsaed_verify_exchange(agg1_set: AcceptSet, agg2_set: AcceptSet) -> AcceptSet:
    """
    合并两侧的检查结果：接受集合取交集，恶意列表取两侧列表与接受集合对称差的并集。

    两侧一致时结果与任一侧相同。分量取自 agg1_set，调用方再用 restricted_to 取本侧分量。
    """
    ids1, ids2 = agg1_set.ids(), agg2_set.ids()
    agreed = ids1 & ids2
    malicious = set(agg1_set.malicious) | set(agg2_set.malicious) | (ids1 ^ ids2)
    merged = AcceptSet(accepted={node: agg1_set.accepted[node] for node in sorted(agreed)},
                       malicious=sorted(malicious))
    merged.check()
    if ids1 != ids2:
        logger.warning(f"兄弟聚合节点结果不一致，交集 {sorted(agreed)}，排除 {sorted(ids1 ^ ids2)}")
    return merged


def rsaed_aggregate_and_report(agg: NodeState, own: AcceptSet, agreed: AcceptSet, dest: int,
                               group: int = 0) -> AggregateReport:
    """
    在一致的节点集合上把本侧分量相加，为基站或上游同侧聚合节点打标签

    :raises EmptyAggregateError: 一致集合为空
    """
    ids = sorted(agreed.ids())
    if not ids:
        raise EmptyAggregateError(f"聚合节点{agg.id}没有一致的贡献者，本轮不上报")
    try:
        parts = [own.accepted[node] for node in ids]
    except KeyError as e:
        raise ProtocolError(f"聚合节点{agg.id}缺少贡献者 {e} 的分量")
    if any(part is None for part in parts):
        raise ProtocolError(f"聚合节点{agg.id}的检查结果不含分量，不能聚合")
    total = add_parts(parts, agg.curve)
    agg.record(OpKind.hom_part, len(parts) - 1)
    unsigned = AggregateReport(dest=dest, group=group, sender_id=agg.id, part=total, tag=None)
    tag = sign_for(agg.nonces, dest, agg.key_for(dest), unsigned.mac_input(agg.curve), truncate=True,
                   hash_type=agg.hash_type)
    agg.record(OpKind.tag)
    logger.info(f"聚合节点{agg.id}汇总 {len(ids)} 个贡献者 -> {dest}: {total}")
    return dataclasses.replace(unsigned, tag=tag)
