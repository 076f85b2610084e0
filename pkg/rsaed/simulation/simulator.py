"""
分簇传感网按轮仿真：执行 S-ECEG 或 RSAED，统计能耗、时延、收包数、基站输出与丢包记录。

每轮先同步跑完整个协议（密码学运算是真实的），再把各节点的阶段时长交给 simpy 虚拟时钟求关键路径：
同簇传感器并行，RSAED 两个聚合节点并行，上游簇等下游簇完成后才能上报。
"""
import dataclasses
import logging
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, DefaultDict, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import simpy

from rsaed.core.auth import KeyRing, outsider_key, tag_compute
from rsaed.core.codec import (AggregateReport, Frame, MessageType, RsaedDataPacket, SecegPacket, VerificationMessage,
                              decode, fragment_seceg, peek_type, reassemble_seceg)
from rsaed.core.ec_core import compress, registry_get, scalar_mult_fixed
from rsaed.core.eceg import keygen
from rsaed.core.errors import ClusterTooSmallError, CodecError, EmptyAggregateError, ReverseMapError
from rsaed.protocol.base_station import bs_finalize, bs_verify_report, bs_verify_seceg, seceg_bs_finalize
from rsaed.protocol.election import elect_aggregators, elect_cluster_head
from rsaed.protocol.node import NodeState, Role
from rsaed.protocol.rsaed import (rsaed_aggregate_and_report, rsaed_collect, rsaed_read_verification,
                                  rsaed_sensor_send, rsaed_verification_message, rsaed_verify_exchange)
from rsaed.protocol.seceg import seceg_ch_process, seceg_sensor_send
from rsaed.simulation.adversary import AdversaryPlan, flip_bit, validate_targets
from rsaed.simulation.cost_model import energy_of_ops, stage_delay
from rsaed.user_data import (BASE_STATION_ID, AdversaryKind, AggregatorSide, ClusterSpec, DropReason, DropRecord,
                             Metrics, NodeRoundRecord, ProtocolMode, RoundOutcome, Scenario, SweepRow, Topology)

logger = logging.getLogger('RSAED.' + __name__)

_PRECISION = 9
SIDES = (AggregatorSide.agg1, AggregatorSide.agg2)


@dataclass
class Delivery:
    frame: Frame
    injected: bool = False


@dataclass
class ClusterRound:
    """一个簇在本轮的选举结果与路由"""
    spec: ClusterSpec
    live: List[int]
    collectors: Tuple[int, ...] = ()  # S-ECEG: (ch,)；RSAED: (agg1, agg2)；选举失败时为空
    upstream: Optional[int] = None  # 上报目标簇号，None 表示基站
    downstream: List[int] = field(default_factory=list)

    @property
    def index(self) -> int:
        return self.spec.index

    @property
    def elected(self) -> bool:
        return bool(self.collectors)

    @property
    def sensors(self) -> List[int]:
        return [node for node in self.live if node not in self.collectors]


class Simulator:
    def __init__(self, scenario: Scenario):
        validate_targets(scenario)
        self.scenario = scenario
        self.mode = scenario.mode
        self.curve = registry_get(scenario.curve)
        self.bound = scenario.plaintext_bound()
        self.cost = scenario.cost
        seed = scenario.seed
        self.rng = random.Random(seed)
        self._election_rng = random.Random(f'{seed}-election')
        self._adversary_rng = random.Random(f'{seed}-adversary')
        self.keys = keygen(self.curve, rng=random.Random(f'{seed}-keys'), x=scenario.private_key)
        self.keyring = KeyRing.from_seed(seed)
        self.clusters = scenario.topology.layout()
        self.plan = AdversaryPlan(scenario.adversaries)
        self.env = simpy.Environment()
        self.bs = NodeState(id=BASE_STATION_ID, curve=self.curve, keyring=self.keyring, bs_public_key=self.keys.Y,
                            energy_mj=math.inf, role=Role.base_station, hash_type=scenario.hash)
        self.nodes: Dict[int, NodeState] = {}
        self._init_nodes()
        self.metrics = Metrics(mode=self.mode, curve=self.curve.name, seed=seed)
        self._op_counts: Counter = Counter()
        self._round = 0
        self._mailbox: DefaultDict[int, List[Delivery]] = defaultdict(list)
        self._sent: DefaultDict[int, List[Frame]] = defaultdict(list)
        self._malicious: Set[int] = set()

    def _init_nodes(self) -> None:
        energy_rng = random.Random(f'{self.scenario.seed}-energy')
        jitter = self.scenario.energy_jitter_mj
        ids = [node for spec in self.clusters for node in spec.members]
        for node_id in ids:
            if self.scenario.energies is not None:
                energy = self.scenario.energies[node_id - 1]
            else:
                energy = self.scenario.initial_energy_mj
                if jitter:
                    energy += energy_rng.uniform(-jitter, jitter)
            self.nodes[node_id] = NodeState(id=node_id, curve=self.curve, keyring=self.keyring,
                                            bs_public_key=self.keys.Y, energy_mj=max(energy, 0.0),
                                            hash_type=self.scenario.hash)
        peers = [BASE_STATION_ID, *ids]
        for state in (self.bs, *self.nodes.values()):
            state.nonces.register(peers)
        logger.info(f"仿真初始化: mode={self.mode.value}, curve={self.curve.name}, 节点数={len(ids)}, "
                    f"簇数={len(self.clusters)}, seed={self.scenario.seed}")

    def _state(self, node_id: int) -> NodeState:
        return self.bs if node_id == BASE_STATION_ID else self.nodes[node_id]

    # ------------------------------------------------------------------
    # 运行
    # ------------------------------------------------------------------
    def run(self) -> Metrics:
        for r in range(1, self.scenario.rounds + 1):
            self._run_round(r)
        self.metrics.op_counts = {op: self._op_counts[op] for op in sorted(self._op_counts, key=lambda o: o.value)}
        self.metrics.total_energy_mj = round(sum(record.energy_mj for record in self.metrics.records), _PRECISION)
        logger.info(f"仿真结束: {self.scenario.rounds}轮, 总能耗 {self.metrics.total_energy_mj:.3f} mJ, "
                    f"丢包记录 {len(self.metrics.drops)} 条")
        return self.metrics

    def _run_round(self, r: int) -> None:
        self._round = r
        self._mailbox = defaultdict(list)
        previous = self._sent
        self._sent = defaultdict(list)
        self._malicious = set()
        readings = self._draw_readings()

        for node in self.nodes.values():
            node.begin_round(Role.sensor)
        self.bs.begin_round(Role.base_station)

        rounds = self._elect(self.plan.nodes(r, AdversaryKind.fail_node))
        self._route(rounds)

        sensing: Dict[int, int] = {}
        forgers = self.plan.nodes(r, AdversaryKind.forge)
        for cr in rounds:
            if cr.elected:
                self._sensors_send(cr, readings, forgers, sensing)
        self._replay(self.plan.nodes(r, AdversaryKind.replay), previous)

        for cr in sorted(rounds, key=lambda c: (-c.spec.depth, c.index)):
            if not cr.elected:
                continue
            if self.mode == ProtocolMode.rsaed:
                self._rsaed_aggregators(cr, rounds)
            else:
                self._seceg_cluster_head(cr, rounds)

        outputs = self._base_station(rounds)
        self._drain_mailbox()
        delay = self._critical_path(rounds)
        self._account(r, rounds, sensing, delay, outputs)

        for node in self.nodes.values():
            node.end_round()
        self.bs.end_round()

    def _draw_readings(self) -> Dict[int, int]:
        if self.scenario.readings is not None:
            return {node: value for node, value in enumerate(self.scenario.readings, start=1)}
        return {node: self.rng.randint(0, self.scenario.max_single) for node in sorted(self.nodes)}

    # ------------------------------------------------------------------
    # 选举与路由
    # ------------------------------------------------------------------
    def _elect(self, silenced: Set[int]) -> List[ClusterRound]:
        rounds = []
        for spec in self.clusters:
            live = []
            for node_id in spec.members:
                if node_id in silenced:
                    logger.warning(f"第{self._round}轮节点{node_id}失效（静默）")
                    self._drop(None, node_id, DropReason.failed)
                elif self.nodes[node_id].failed:
                    self._drop(None, node_id, DropReason.failed)
                else:
                    live.append(node_id)
            states = [self.nodes[node_id] for node_id in live]
            try:
                if self.mode == ProtocolMode.rsaed:
                    collectors = elect_aggregators(states, self.scenario.election, self._election_rng)
                else:
                    collectors = (elect_cluster_head(states, self.scenario.election, self._election_rng),)
            except ClusterTooSmallError as e:
                logger.warning(f"第{self._round}轮簇{spec.index}跳过: {e}")
                for node_id in live:
                    self._drop(None, node_id, DropReason.cluster_too_small)
                collectors = ()
            rounds.append(ClusterRound(spec=spec, live=live, collectors=tuple(collectors)))
        return rounds

    @staticmethod
    def _route(rounds: Sequence[ClusterRound]) -> None:
        """每个簇向同一条链上更靠近基站、且本轮选举成功的最近簇上报；没有则直接报基站"""
        chains: DefaultDict[int, List[ClusterRound]] = defaultdict(list)
        for cr in rounds:
            chains[cr.spec.chain].append(cr)
        for chain in chains.values():
            nearest: Optional[ClusterRound] = None
            for cr in sorted(chain, key=lambda c: c.spec.depth):
                if not cr.elected:
                    continue
                if nearest is not None:
                    cr.upstream = nearest.index
                    nearest.downstream.append(cr.index)
                nearest = cr

    def _dest(self, cr: ClusterRound, rounds: Sequence[ClusterRound], side: int = 0) -> int:
        if cr.upstream is None:
            return BASE_STATION_ID
        return rounds[cr.upstream].collectors[side]

    # ------------------------------------------------------------------
    # 链路
    # ------------------------------------------------------------------
    def _send(self, frame: Frame, injected: bool = False) -> None:
        self._mailbox[frame.dst].append(Delivery(frame, injected))
        if injected:
            self.metrics.injected_frames += 1
        else:
            self._sent[frame.src].append(frame)

    def _drop(self, receiver: Optional[int], sender: int, reason: DropReason) -> None:
        self.metrics.drops.append(DropRecord(round=self._round, receiver=receiver, sender=sender, reason=reason))

    def _verdict_hook(self, injected: Sequence[bool]) -> Callable[[int, bool], None]:
        def hook(index: int, ok: bool) -> None:
            if injected[index] and ok:
                self.metrics.injected_accepted += 1
                logger.error(f"第{self._round}轮攻击者注入的消息被接受")
        return hook

    def _decode(self, delivery: Delivery, receiver: int):
        data = delivery.frame.data
        try:
            msg_type = peek_type(data)
            cls = {MessageType.data: RsaedDataPacket, MessageType.verification: VerificationMessage,
                   MessageType.aggregate: AggregateReport}.get(msg_type)
            if cls is None:
                raise CodecError(f"接收方{receiver}不处理 {msg_type.name} 类型的帧")
            return decode(data, cls, self.curve)
        except CodecError as e:
            logger.warning(f"节点{receiver}丢弃来自{delivery.frame.src}的帧: {e}")
            self._drop(receiver, delivery.frame.src, DropReason.malformed)
            return None

    def _reassemble(self, receiver: NodeState,
                    deliveries: Iterable[Delivery]) -> Tuple[List[Tuple[int, SecegPacket]], List[bool]]:
        """按 (源地址, 是否注入) 分组重组 S-ECEG 分片，保持首次到达顺序"""
        groups: Dict[Tuple[int, bool], List[bytes]] = {}
        for delivery in deliveries:
            receiver.blocks_received += 1
            groups.setdefault((delivery.frame.src, delivery.injected), []).append(delivery.frame.data)
        packets, injected = [], []
        for (src, is_injected), frags in groups.items():
            try:
                pkt = reassemble_seceg(frags, self.curve)
            except CodecError as e:
                logger.warning(f"节点{receiver.id}无法重组来自{src}的包: {e}")
                self._drop(receiver.id, src, DropReason.missing_fragment)
                continue
            receiver.messages_received += 1
            packets.append((src, pkt))
            injected.append(is_injected)
        return packets, injected

    def _drain_mailbox(self) -> None:
        for dst in sorted(self._mailbox):
            for delivery in self._mailbox[dst]:
                self._drop(dst, delivery.frame.src, DropReason.not_collecting)
        self._mailbox.clear()

    # ------------------------------------------------------------------
    # 攻击者
    # ------------------------------------------------------------------
    def _replay(self, targets: Set[int], previous: Dict[int, List[Frame]]) -> None:
        for target in sorted(targets):
            frames = previous.get(target, [])
            if not frames:
                logger.warning(f"第{self._round}轮节点{target}上一轮没有可重放的帧")
                continue
            logger.warning(f"第{self._round}轮重放节点{target}上一轮的 {len(frames)} 帧")
            for frame in frames:
                self._send(frame, injected=True)

    def _random_part(self):
        return compress(scalar_mult_fixed(self._adversary_rng.randint(1, self.curve.n - 1), self.curve.G, self.curve),
                        self.curve)

    def _outsider_tag(self, sender: int, dest: int, message: bytes, truncate: bool):
        # 攻击者能猜到计数器，但没有共享密钥
        nonce = self._state(dest).nonces.expected(sender)
        return tag_compute(outsider_key(sender, dest, self._adversary_rng), message, nonce, truncate=truncate,
                           hash_type=self.scenario.hash)

    def _inject_report(self, sender: int, dest: int, group: int) -> None:
        unsigned = AggregateReport(dest=dest, group=group, sender_id=sender, part=self._random_part(), tag=None)
        fake = dataclasses.replace(unsigned, tag=self._outsider_tag(sender, dest, unsigned.mac_input(self.curve), True))
        logger.warning(f"第{self._round}轮未授权聚合: 冒充节点{sender}向{dest}注入报告")
        self._send(Frame(sender, dest, fake.to_bytes(self.curve)), injected=True)

    def _inject_seceg(self, sender: int, dest: int, group: int) -> None:
        R, S = self._random_part(), self._random_part()
        unsigned = SecegPacket(R=R, S=S, tag=None)
        fake = dataclasses.replace(unsigned, tag=self._outsider_tag(sender, dest, unsigned.mac_input(self.curve), False))
        logger.warning(f"第{self._round}轮未授权聚合: 冒充簇头{sender}向{dest}注入聚合包")
        for block in fragment_seceg(fake, self.curve, dest=dest, group=group):
            self._send(Frame(sender, dest, block), injected=True)

    # ------------------------------------------------------------------
    # 传感器
    # ------------------------------------------------------------------
    def _sensors_send(self, cr: ClusterRound, readings: Dict[int, int], forgers: Set[int],
                      sensing: Dict[int, int]) -> None:
        group = cr.index
        for node_id in cr.sensors:
            node = self.nodes[node_id]
            m = readings[node_id]
            sensing[node_id] = m
            if self.mode == ProtocolMode.rsaed:
                agg1, agg2 = cr.collectors
                packets = rsaed_sensor_send(node, m, agg1, agg2, group=group, rng=self.rng, bound=self.bound)
                if node_id in forgers:
                    logger.warning(f"第{self._round}轮节点{node_id}的密文在打标签后被篡改")
                    packets = tuple(dataclasses.replace(pkt, part=flip_bit(pkt.part)) for pkt in packets)
                for pkt in packets:
                    self._send(Frame(node_id, pkt.dest, pkt.to_bytes(self.curve)))
            else:
                (ch,) = cr.collectors
                pkt = seceg_sensor_send(node, m, ch, rng=self.rng, bound=self.bound)
                if node_id in forgers:
                    logger.warning(f"第{self._round}轮节点{node_id}的密文在打标签后被篡改")
                    pkt = dataclasses.replace(pkt, R=flip_bit(pkt.R))
                for block in fragment_seceg(pkt, self.curve, dest=ch, group=group):
                    self._send(Frame(node_id, ch, block))

    # ------------------------------------------------------------------
    # RSAED 聚合节点
    # ------------------------------------------------------------------
    def _rsaed_aggregators(self, cr: ClusterRound, rounds: Sequence[ClusterRound]) -> None:
        agg1, agg2 = (self.nodes[node_id] for node_id in cr.collectors)
        contributor_of = {d: rounds[d].collectors[0] for d in cr.downstream}
        expected = cr.sensors + [contributor_of[d] for d in cr.downstream]
        group = cr.index

        results = []
        for agg in (agg1, agg2):
            packets, reports, injected = [], [], []
            report_flags = []
            for delivery in self._mailbox.pop(agg.id, []):
                agg.messages_received += 1
                msg = self._decode(delivery, agg.id)
                if isinstance(msg, RsaedDataPacket):
                    packets.append(msg)
                    injected.append(delivery.injected)
                elif isinstance(msg, AggregateReport) and msg.group in contributor_of:
                    reports.append((contributor_of[msg.group], msg))
                    report_flags.append(delivery.injected)
                elif msg is not None:
                    self._drop(agg.id, delivery.frame.src, DropReason.not_collecting)
            own, drops = rsaed_collect(agg, expected, packets, reports,
                                       on_verdict=self._verdict_hook(injected + report_flags))
            for sender, reason in drops:
                self._drop(agg.id, sender, reason)
            results.append(own)
        set1, set2 = results

        # 兄弟节点互发校验结果
        msg_for_1 = decode(rsaed_verification_message(agg2, agg1.id, set2, group).to_bytes(self.curve),
                           VerificationMessage, self.curve)
        msg_for_2 = decode(rsaed_verification_message(agg1, agg2.id, set1, group).to_bytes(self.curve),
                           VerificationMessage, self.curve)
        agg1.messages_received += 1
        agg2.messages_received += 1
        view_of_2 = rsaed_read_verification(agg1, msg_for_1, expected)
        view_of_1 = rsaed_read_verification(agg2, msg_for_2, expected)

        compromised = self.plan.clusters(self._round, AdversaryKind.compromise_aggregator)
        unauthorized = self.plan.clusters(self._round, AdversaryKind.unauthorized_aggregation)
        for side, (agg, own, brother, brother_view) in enumerate(((agg1, set1, agg2, view_of_2),
                                                                   (agg2, set2, agg1, view_of_1))):
            if brother_view is None:
                self._drop(agg.id, brother.id, DropReason.brother_reject)
                continue
            agreed = rsaed_verify_exchange(own, brother_view) if side == 0 else rsaed_verify_exchange(brother_view, own)
            self._malicious.update(agreed.malicious)
            for node_id in sorted(own.ids() - agreed.ids()):
                self._drop(agg.id, node_id, DropReason.cascade)
            dest = self._dest(cr, rounds, side)
            try:
                report = rsaed_aggregate_and_report(agg, own, agreed, dest, group)
            except EmptyAggregateError as e:
                logger.info(str(e))
                continue
            if (group, SIDES[side]) in compromised:
                logger.warning(f"第{self._round}轮聚合节点{agg.id}被俘获，报告在打标签后被替换")
                report = dataclasses.replace(report, part=flip_bit(report.part))
            self._send(Frame(agg.id, dest, report.to_bytes(self.curve)))
            if (group, SIDES[side]) in unauthorized:
                self._inject_report(agg.id, dest, group)

    # ------------------------------------------------------------------
    # S-ECEG 簇头
    # ------------------------------------------------------------------
    def _seceg_cluster_head(self, cr: ClusterRound, rounds: Sequence[ClusterRound]) -> None:
        ch = self.nodes[cr.collectors[0]]
        packets, injected = self._reassemble(ch, self._mailbox.pop(ch.id, []))
        verdicts: Dict[int, bool] = {}
        hook = self._verdict_hook(injected)

        def on_verdict(index: int, ok: bool) -> None:
            verdicts[index] = ok
            hook(index, ok)

        dest = self._dest(cr, rounds)
        aggregate, dropped = seceg_ch_process(ch, packets, dest, on_verdict=on_verdict)
        for sender, reason in dropped:
            self._drop(ch.id, sender, reason)
        self._malicious.update(packets[i][0] for i, ok in verdicts.items() if not ok and not injected[i])
        if aggregate is None:
            return
        group = cr.index
        if (group, AggregatorSide.agg1) in self.plan.clusters(self._round, AdversaryKind.compromise_aggregator):
            logger.warning(f"第{self._round}轮簇头{ch.id}被俘获，聚合包在打标签后被替换")
            aggregate = dataclasses.replace(aggregate, R=flip_bit(aggregate.R))
        for block in fragment_seceg(aggregate, self.curve, dest=dest, group=group):
            self._send(Frame(ch.id, dest, block))
        if (group, AggregatorSide.agg1) in self.plan.clusters(self._round, AdversaryKind.unauthorized_aggregation):
            self._inject_seceg(ch.id, dest, group)

    # ------------------------------------------------------------------
    # 基站
    # ------------------------------------------------------------------
    def _select(self, candidates: Sequence[Tuple[object, bool]], verify: Callable[[object], bool],
                sender: int):
        """逐个验证候选报告，返回第一个通过的"""
        chosen = None
        for msg, injected in candidates:
            ok = verify(msg)
            if injected and ok:
                self.metrics.injected_accepted += 1
                logger.error(f"第{self._round}轮攻击者注入的报告被基站接受")
            if not ok:
                self._drop(BASE_STATION_ID, sender, DropReason.tag_reject)
            elif chosen is None:
                chosen = msg
        return chosen

    def _finish(self, cr: ClusterRound, finalize: Callable[[], Optional[int]]) -> Optional[int]:
        try:
            return finalize()
        except ReverseMapError as e:
            logger.error(f"第{self._round}轮簇{cr.index}链路反向映射失败: {e}")
            self._drop(BASE_STATION_ID, cr.collectors[0], DropReason.reverse_map)
            return None

    def _base_station(self, rounds: Sequence[ClusterRound]) -> List[Optional[int]]:
        outputs: List[Optional[int]] = [None] * len(self.scenario.topology.chains)
        tops = [cr for cr in rounds if cr.elected and cr.upstream is None]
        x = self.keys.x
        method = self.scenario.reverse_map

        deliveries = self._mailbox.pop(BASE_STATION_ID, [])
        if self.mode == ProtocolMode.seceg:
            packets, injected = self._reassemble(self.bs, deliveries)
            heads = {cr.collectors[0] for cr in tops}
            for src, _pkt in packets:
                if src not in heads:
                    self._drop(BASE_STATION_ID, src, DropReason.not_collecting)
            for cr in tops:
                (ch,) = cr.collectors
                candidates = [(pkt, flag) for (src, pkt), flag in zip(packets, injected) if src == ch]
                chosen = self._select(candidates, lambda pkt: bs_verify_seceg(self.bs, ch, pkt), ch)
                outputs[cr.spec.chain] = self._finish(
                    cr, lambda: seceg_bs_finalize(self.bs, ch, chosen, x, self.bound, method, verified=True))
            return outputs

        candidates: DefaultDict[Tuple[int, int], List[Tuple[AggregateReport, bool]]] = defaultdict(list)
        top_index = {cr.index: cr for cr in tops}
        for delivery in deliveries:
            self.bs.messages_received += 1
            msg = self._decode(delivery, BASE_STATION_ID)
            if msg is None:
                continue
            cr = top_index.get(msg.group) if isinstance(msg, AggregateReport) else None
            if cr is None or msg.sender_id not in cr.collectors:
                self._drop(BASE_STATION_ID, delivery.frame.src, DropReason.not_collecting)
                continue
            candidates[(cr.index, cr.collectors.index(msg.sender_id))].append((msg, delivery.injected))
        for cr in tops:
            chosen = [self._select(candidates[(cr.index, side)], lambda rpt: bs_verify_report(self.bs, rpt),
                                   cr.collectors[side]) for side in (0, 1)]
            if (chosen[0] is None) != (chosen[1] is None):
                missing = 0 if chosen[0] is None else 1
                logger.warning(f"第{self._round}轮簇{cr.index}缺少 {SIDES[missing].value} 侧报告，兄弟报告一并丢弃")
                self._drop(BASE_STATION_ID, cr.collectors[1 - missing], DropReason.cascade)
            outputs[cr.spec.chain] = self._finish(
                cr, lambda: bs_finalize(self.bs, chosen[0], chosen[1], x, self.bound, method, verified=True))
        return outputs

    # ------------------------------------------------------------------
    # 时延与能耗
    # ------------------------------------------------------------------
    def _stage(self, node_id: int, is_collector: bool) -> float:
        node = self.nodes[node_id]
        return stage_delay(node.round_ops, node.messages_received, is_collector, self.mode, self.cost)

    def _critical_path(self, rounds: Sequence[ClusterRound]) -> float:
        """在 simpy 虚拟时钟上按依赖关系推进，返回本轮端到端时延"""
        env = self.env
        start = env.now
        done: Dict[int, simpy.Process] = {}

        def collector(duration: float):
            yield env.timeout(duration)

        def cluster(cr: ClusterRound):
            yield env.timeout(max((self._stage(node, False) for node in cr.sensors), default=0.0))
            waits = [done[d] for d in cr.downstream]
            if waits:
                yield env.all_of(waits)
            yield env.all_of([env.process(collector(self._stage(node, True))) for node in cr.collectors])

        for cr in sorted(rounds, key=lambda c: (-c.spec.depth, c.index)):
            if cr.elected:
                done[cr.index] = env.process(cluster(cr))
        if done:
            env.run(until=env.all_of(list(done.values())))
        return round(env.now - start, _PRECISION)

    def _account(self, r: int, rounds: Sequence[ClusterRound], sensing: Dict[int, int], delay: float,
                 outputs: List[Optional[int]]) -> None:
        live = {node for cr in rounds for node in cr.live}
        collectors = {node for cr in rounds for node in cr.collectors}
        agg_energy = 0.0
        agg_packets = 0
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            spent = energy_of_ops(node.round_ops, self.cost)
            self._op_counts.update(node.round_ops)
            node.charge(spent)
            packets = node.blocks_received if self.mode == ProtocolMode.seceg else node.messages_received
            if node_id in collectors:
                agg_energy = max(agg_energy, spent)
                agg_packets = max(agg_packets, packets)
            self.metrics.records.append(NodeRoundRecord(
                round=r, node=node_id, role=node.role.value if node_id in live else 'failed', energy_mj=spent,
                remaining_mj=round(node.energy_mj, _PRECISION), packets_received=packets,
                reading=sensing.get(node_id)))
        outcome = RoundOutcome(round=r, delay_s=delay, chain_outputs=outputs, malicious=sorted(self._malicious),
                               agg_energy_mj=round(agg_energy, _PRECISION), agg_packets_received=agg_packets)
        self.metrics.outcomes.append(outcome)
        logger.info(f"第{r}轮完成: 输出={outputs}, 时延={delay:.3f} s, 聚合节点能耗={agg_energy:.3f} mJ, "
                    f"收包={agg_packets}, 恶意={outcome.malicious}")


def run(scenario: Scenario) -> Metrics:
    return Simulator(scenario).run()


def derive(base: Scenario, **updates) -> Scenario:
    """在基础场景上修改字段并重新校验"""
    data = base.model_dump()
    data.update({key: value.model_dump() if hasattr(value, 'model_dump') else value for key, value in updates.items()})
    return Scenario.model_validate(data)


def sweep(base: Scenario, node_counts: Iterable[int],
          modes: Optional[Sequence[ProtocolMode]] = None) -> List[SweepRow]:
    """每个节点数、每种模式各跑一次单簇场景"""
    rows = []
    for n in node_counts:
        for mode in modes or (base.mode,):
            scenario = derive(base, topology=Topology.single(n), mode=mode, readings=None, energies=None,
                              max_sum=None)
            metrics = run(scenario)
            outcomes = metrics.outcomes
            rows.append(SweepRow(
                N=n, mode=mode,
                agg_energy_mj=round(sum(o.agg_energy_mj for o in outcomes) / len(outcomes), _PRECISION),
                delay_s=round(sum(o.delay_s for o in outcomes) / len(outcomes), _PRECISION),
                packets_received=max(o.agg_packets_received for o in outcomes)))
            logger.info(f"sweep N={n} mode={mode.value}: {rows[-1]}")
    return rows
