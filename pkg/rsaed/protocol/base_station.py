"""
基站：验证最后一跳的报告，拼出密文后解密并做反向映射。基站能量不受限，不计能耗。
"""
import logging
from typing import Optional

from rsaed.core.auth import verify_from
from rsaed.core.codec import AggregateReport, SecegPacket
from rsaed.core.eceg import (Ciphertext, PlaintextBound, ReverseMapMethod, decrypt, is_valid_part,
                             reverse_map)
from rsaed.protocol.node import NodeState
from rsaed.user_data import OpKind

logger = logging.getLogger('RSAED.' + __name__)


def bs_verify_report(bs: NodeState, report: AggregateReport) -> bool:
    bs.record(OpKind.tag)
    ok = verify_from(bs.nonces, report.sender_id, bs.key_for(report.sender_id), report.mac_input(bs.curve),
                     report.tag, bs.hash_type)
    if not ok:
        logger.warning(f"基站拒收聚合节点{report.sender_id}的报告 (簇{report.group})")
    return ok


def bs_verify_seceg(bs: NodeState, sender: int, pkt: SecegPacket) -> bool:
    bs.record(OpKind.tag)
    ok = verify_from(bs.nonces, sender, bs.key_for(sender), pkt.mac_input(bs.curve), pkt.tag, bs.hash_type)
    if not ok:
        logger.warning(f"基站拒收簇头{sender}的聚合包")
    return ok


def _decryptable(c: Ciphertext, bs: NodeState) -> bool:
    if is_valid_part(c.R, bs.curve) and is_valid_part(c.S, bs.curve):
        return True
    logger.warning(f"基站收到的密文分量不是曲线上的点，本轮无输出: ({c.R},{c.S})")
    return False


def bs_decrypt(bs: NodeState, c: Ciphertext, x: int, bound: PlaintextBound,
               method: ReverseMapMethod = ReverseMapMethod.bsgs) -> int:
    M = decrypt(c, x, bs.curve)
    value = reverse_map(M, bs.curve, bound, method=method)
    logger.info(f"基站解密: M={M}, m={value}")
    return value


def bs_finalize(bs: NodeState, r_report: Optional[AggregateReport], s_report: Optional[AggregateReport],
                x: int, bound: PlaintextBound, method: ReverseMapMethod = ReverseMapMethod.bsgs,
                verified: bool = False) -> Optional[int]:
    """
    一条簇链的 R 侧与 S 侧报告都通过验证才解密；任一侧缺失或被拒收时整条链本轮无输出。

    Args:
        verified: 调用方已经逐个验证过两份报告时为 True，不再重复验证

    :raises ReverseMapError: 解出的点不在 [0, max_sum] 内
    """
    if r_report is None or s_report is None:
        logger.warning(f"基站只收到一侧报告 (R={r_report is not None}, S={s_report is not None})，本轮无输出")
        return None
    if not verified:
        r_ok = bs_verify_report(bs, r_report)
        s_ok = bs_verify_report(bs, s_report)
        if not (r_ok and s_ok):
            logger.warning(f"簇{r_report.group}的报告未通过验证，兄弟报告一并丢弃")
            return None
    c = Ciphertext(R=r_report.part, S=s_report.part)
    return bs_decrypt(bs, c, x, bound, method) if _decryptable(c, bs) else None


def seceg_bs_finalize(bs: NodeState, sender: int, pkt: Optional[SecegPacket], x: int, bound: PlaintextBound,
                      method: ReverseMapMethod = ReverseMapMethod.bsgs, verified: bool = False) -> Optional[int]:
    """S-ECEG 最后一跳：验证完整标签后解密"""
    if pkt is None:
        return None
    if not verified and not bs_verify_seceg(bs, sender, pkt):
        return None
    c = Ciphertext(R=pkt.R, S=pkt.S)
    return bs_decrypt(bs, c, x, bound, method) if _decryptable(c, bs) else None
