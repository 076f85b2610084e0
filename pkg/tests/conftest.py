import os
import random
from typing import Dict, List, Optional, Sequence

import pytest

from rsaed.core.auth import AuthKey, KeyRing
from rsaed.core.ec_core import CurveParams, Point, registry_get
from rsaed.core.eceg import keygen
from rsaed.protocol.node import NodeState, Role
from rsaed.user_data import BASE_STATION_ID

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), 'fixtures')

# RFC 2202 HMAC-SHA1 第一组向量的密钥
RFC2202_KEY = bytes([0x0b] * 20)


@pytest.fixture(scope='session')
def toy() -> CurveParams:
    return registry_get('toy11')


@pytest.fixture(scope='session')
def secp() -> CurveParams:
    return registry_get('secp160r1')


@pytest.fixture(scope='session')
def toy_keys(toy):
    """示例中的基站密钥：x=6，Y=6G=(7,9)"""
    return keygen(toy, x=6)


@pytest.fixture(scope='session')
def secp_keys(secp):
    return keygen(secp, rng=random.Random(160))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(2024)


@pytest.fixture
def golden_key():
    return AuthKey.between(1, 2, RFC2202_KEY)


@pytest.fixture(scope='session')
def golden_packets() -> Dict[str, bytes]:
    packets = {}
    with open(os.path.join(FIXTURE_DIR, 'golden_packets.txt'), 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            name, _, hex_str = line.partition(' ')
            packets[name] = bytes.fromhex(hex_str.replace(' ', ''))
    return packets


class Cluster:
    """测试用的一个簇：成员节点与基站共享同一套预置密钥"""

    def __init__(self, curve: CurveParams, Y: Point, energies: Sequence[float], seed: int = 7):
        self.curve = curve
        keyring = KeyRing.from_seed(seed)
        self.nodes: Dict[int, NodeState] = {
            node_id: NodeState(id=node_id, curve=curve, keyring=keyring, bs_public_key=Y, energy_mj=energy)
            for node_id, energy in enumerate(energies, start=1)
        }
        self.bs = NodeState(id=BASE_STATION_ID, curve=curve, keyring=keyring, bs_public_key=Y,
                            energy_mj=float('inf'), role=Role.base_station)

    def __getitem__(self, node_id: int) -> NodeState:
        return self.nodes[node_id]

    def members(self, ids: Optional[List[int]] = None) -> List[NodeState]:
        return [self.nodes[node_id] for node_id in (ids or sorted(self.nodes))]


@pytest.fixture
def make_cluster():
    def factory(curve: CurveParams, Y: Point, energies: Sequence[float], seed: int = 7) -> Cluster:
        return Cluster(curve, Y, energies, seed)
    return factory
