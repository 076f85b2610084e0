"""
仿真结果输出：逐轮逐节点 CSV、JSON 汇总、sweep 表。
"""
import csv
import io
import json
import logging
import os
from typing import IO, Iterable, List, Optional, Sequence

from rsaed.user_data import Metrics, SweepRow

logger = logging.getLogger('RSAED.' + __name__)

NODE_COLUMNS = ['round', 'node', 'role', 'energy_mj', 'remaining_mj', 'packets_received']
SWEEP_COLUMNS = ['N', 'mode', 'agg_energy_mj', 'delay_s', 'packets_received']


def _fmt(value) -> str:
    # 浮点统一定宽小数，保证两次运行输出逐字节相同
    if isinstance(value, float):
        return f"{value:.6f}"
    if hasattr(value, 'value'):
        return str(value.value)
    return str(value)


def write_csv(stream: IO[str], headers: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(headers)
    writer.writerows([_fmt(value) for value in row] for row in rows)


def metrics_rows(metrics: Metrics) -> List[list]:
    return [[record.round, record.node, record.role, record.energy_mj, record.remaining_mj, record.packets_received]
            for record in metrics.records]


def sweep_rows(rows: Sequence[SweepRow]) -> List[list]:
    return [[row.N, row.mode, row.agg_energy_mj, row.delay_s, row.packets_received] for row in rows]


def metrics_csv(metrics: Metrics) -> str:
    buffer = io.StringIO()
    write_csv(buffer, NODE_COLUMNS, metrics_rows(metrics))
    return buffer.getvalue()


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    write_csv(buffer, SWEEP_COLUMNS, sweep_rows(rows))
    return buffer.getvalue()


def summary_json(metrics: Metrics) -> str:
    return json.dumps(metrics.summary(), indent=2, sort_keys=True, ensure_ascii=False)


def save_text(path: str, text: str) -> None:
    """写文件，目录不存在时先创建"""
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)
        logger.info(f"输出目录不存在，已自动创建: {directory}")
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info(f"已保存: {path}")


def save_metrics(metrics: Metrics, out_dir: str, prefix: Optional[str] = None) -> List[str]:
    """写出 <prefix>_nodes.csv 与 <prefix>_summary.json，返回文件路径"""
    prefix = prefix or f"{metrics.mode.value}_seed{metrics.seed}"
    csv_path = os.path.join(out_dir, f"{prefix}_nodes.csv")
    json_path = os.path.join(out_dir, f"{prefix}_summary.json")
    save_text(csv_path, metrics_csv(metrics))
    save_text(json_path, summary_json(metrics))
    return [csv_path, json_path]


def format_drops(metrics: Metrics) -> str:
    lines = []
    for drop in metrics.drops:
        receiver = 'BS' if drop.receiver == 0 else ('-' if drop.receiver is None else str(drop.receiver))
        lines.append(f"round={drop.round} receiver={receiver} sender={drop.sender} reason={drop.reason.value}")
    return '\n'.join(lines)
