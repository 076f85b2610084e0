"""
能耗与时延换算。

能耗 P = U × I × t：电压(V) × 电流(mA) × 时间(s) 得到 mJ。
时延有两种标定：
    per-message: 每个收到的贡献计一个时间单位（S-ECEG 簇头 1.0 s，RSAED 聚合节点 0.5 s），传感器阶段不计；
    primitive: 节点本轮执行的每个原语按实测耗时累加。
"""
from collections import Counter
from typing import Dict, Mapping

from rsaed.user_data import Calibration, CostModel, OpKind, ProtocolMode

OP_TIME_FIELD: Dict[OpKind, str] = {
    OpKind.encrypt: 't_encrypt',
    OpKind.tag: 't_tag',
    OpKind.hom_full: 't_hom_full',
    OpKind.hom_part: 't_hom_part',
}

# 浮点误差截断到 1 nJ
_PRECISION = 9


def time_of(op: OpKind, model: CostModel) -> float:
    return getattr(model, OP_TIME_FIELD[OpKind(op)])


def energy_of(op: OpKind, model: CostModel) -> float:
    """单次操作能耗 (mJ)"""
    return round(model.voltage * model.current_ma * time_of(op, model), _PRECISION)


def energy_of_ops(ops: Mapping[OpKind, int], model: CostModel) -> float:
    return round(sum(count * energy_of(op, model) for op, count in ops.items()), _PRECISION)


def compute_time(ops: Mapping[OpKind, int], model: CostModel) -> float:
    return round(sum(count * time_of(op, model) for op, count in ops.items()), _PRECISION)


def stage_delay(ops: Counter, messages_received: int, is_collector: bool, mode: ProtocolMode,
                model: CostModel) -> float:
    """
    一个节点本轮处理阶段的时长。

    Args:
        ops: 本轮执行过的原语计数
        messages_received: 本轮收到的逻辑消息数（S-ECEG 两块分片算一个）
        is_collector: 是否为簇头或聚合节点
    """
    if model.calibration == Calibration.primitive:
        return compute_time(ops, model)
    if not is_collector:
        return 0.0
    unit = model.seceg_unit_s if mode == ProtocolMode.seceg else model.rsaed_unit_s
    return round(unit * messages_received, _PRECISION)
