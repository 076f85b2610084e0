import abc
from enum import Enum
from typing import Dict, Type

from Crypto.Hash import HMAC, SHA1, SHA256  # 使用 pycryptodome


class MacHashType(str, Enum):
    # str, Enum 混合对 Pydantic 友好，序列化直接出字符串
    sha1 = 'sha1'
    sha256 = 'sha256'


# 所有 MAC 算法的抽象接口
class MacStrategy(abc.ABC):
    digest_size: int = 0

    @abc.abstractmethod
    def calculate(self, key: bytes, data: bytes) -> bytes:
        """输入密钥和字节数据，返回完整的 MAC"""
        pass


# HMAC-SHA1：20 字节输出，与无线节点上的原始 HMAC 尺寸一致
class HmacSha1Strategy(MacStrategy):
    digest_size = SHA1.digest_size

    def calculate(self, key: bytes, data: bytes) -> bytes:
        return HMAC.new(key, msg=data, digestmod=SHA1).digest()


# HMAC-SHA256：输出截断到 20 字节，线路格式不变
class HmacSha256Strategy(MacStrategy):
    digest_size = SHA1.digest_size

    def calculate(self, key: bytes, data: bytes) -> bytes:
        return HMAC.new(key, msg=data, digestmod=SHA256).digest()[:self.digest_size]


ALGORITHM_REGISTRY: Dict[MacHashType, Type[MacStrategy]] = {
    MacHashType.sha1: HmacSha1Strategy,
    MacHashType.sha256: HmacSha256Strategy,
}


def get_mac_strategy(hash_type: MacHashType = MacHashType.sha1) -> MacStrategy:
    """
    工厂方法：根据 hash 类型返回对应的算法实例
    """
    strategy_class = ALGORITHM_REGISTRY.get(MacHashType(hash_type))
    if not strategy_class:
        raise NotImplementedError(f"算法 {hash_type} 尚未实现")
    return strategy_class()
