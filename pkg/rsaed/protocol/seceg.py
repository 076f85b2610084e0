"""
S-ECEG：单簇头方案。传感器整块发送 (R, S, tag)，簇头逐个验证后做完整密文同态加并转发。
"""
import logging
import random
from typing import Callable, List, Optional, Sequence, Tuple

from rsaed.core.auth import sign_for, verify_from
from rsaed.core.codec import SecegPacket
from rsaed.core.eceg import Ciphertext, PlaintextBound, encrypt, hom_add, is_valid_part
from rsaed.core.errors import ProtocolError
from rsaed.protocol.node import NodeState, Role
from rsaed.user_data import DropReason, OpKind

logger = logging.getLogger('RSAED.' + __name__)


def seceg_sensor_send(node: NodeState, m: int, ch_id: int, rng: Optional[random.Random] = None,
                      k: Optional[int] = None, bound: Optional[PlaintextBound] = None) -> SecegPacket:
    """
    用基站公钥加密读数，对 R || S 计算完整标签，发送后本信道 nonce 加一

    :raises PlaintextRangeError: 读数超出 max_single
    """
    if node.role != Role.sensor:
        raise ProtocolError(f"节点{node.id}当前角色为{node.role.value}，不能作为传感器发送")
    c = encrypt(m, node.bs_public_key, node.curve, k=k, rng=rng, bound=bound)
    node.record(OpKind.encrypt)
    tag = sign_for(node.nonces, ch_id, node.key_for(ch_id), c.to_bytes(node.curve), truncate=False,
                   hash_type=node.hash_type)
    node.record(OpKind.tag)
    logger.debug(f"节点{node.id} -> 簇头{ch_id}: C=({c.R},{c.S})")
    return SecegPacket(R=c.R, S=c.S, tag=tag)


def seceg_ch_process(ch: NodeState, packets: Sequence[Tuple[int, SecegPacket]], dest: int,
                     on_verdict: Optional[Callable[[int, bool], None]] = None
                     ) -> Tuple[Optional[SecegPacket], List[Tuple[int, DropReason]]]:
    """
    验证成员（以及下游簇头转发来的）包，丢弃标签不符或分量解压失败者，合法密文逐个同态相加后为下一跳重新打标签。

    Args:
        ch: 簇头状态
        packets: (链路源地址, 包)
        dest: 下一跳（基站或更靠近基站的簇头）
        on_verdict: 每个输入验证后回调 (序号, 是否接受)

    Returns:
        (聚合包，没有合法输入时为 None；[(被丢弃的发送方, 原因)])
    """
    if ch.role != Role.cluster_head:
        raise ProtocolError(f"节点{ch.id}当前不是簇头")
    curve = ch.curve
    valid: List[Ciphertext] = []
    dropped: List[Tuple[int, DropReason]] = []
    for index, (sender, pkt) in enumerate(packets):
        ch.record(OpKind.tag)
        ok = verify_from(ch.nonces, sender, ch.key_for(sender), pkt.mac_input(curve), pkt.tag, ch.hash_type)
        if not ok:
            logger.warning(f"簇头{ch.id}丢弃节点{sender}的包：标签校验失败")
            dropped.append((sender, DropReason.tag_reject))
        elif not (is_valid_part(pkt.R, curve) and is_valid_part(pkt.S, curve)):
            logger.warning(f"簇头{ch.id}丢弃节点{sender}的包：密文分量不是曲线上的点")
            dropped.append((sender, DropReason.invalid_point))
            ok = False
        else:
            valid.append(Ciphertext(R=pkt.R, S=pkt.S))
        if on_verdict:
            on_verdict(index, ok)
    if not valid:
        logger.info(f"簇头{ch.id}本轮没有合法输入，不产生聚合包")
        return None, dropped

    aggregate = valid[0]
    for c in valid[1:]:
        aggregate = hom_add(aggregate, c, curve)
        ch.record(OpKind.hom_full)
    tag = sign_for(ch.nonces, dest, ch.key_for(dest), aggregate.to_bytes(curve), truncate=False,
                   hash_type=ch.hash_type)
    ch.record(OpKind.tag)
    logger.info(f"簇头{ch.id}聚合 {len(valid)} 个密文 -> {dest}: ({aggregate.R},{aggregate.S})")
    return SecegPacket(R=aggregate.R, S=aggregate.S, tag=tag), dropped
