class RsaedError(Exception):
    """本项目所有异常的基类"""


class CurveError(RsaedError):
    """未知曲线或曲线参数不合法"""


class PointNotOnCurveError(RsaedError):
    """点不在曲线上"""


class NoSquareRootError(RsaedError):
    """x^3 + ax + b 不是二次剩余，通常意味着线路数据已损坏"""


class PlaintextRangeError(RsaedError):
    """明文超出允许范围"""


class ReverseMapError(RsaedError):
    """在给定范围内找不到 m 使 m·G = M"""


class CodecError(RsaedError):
    pass


class FieldOverflowError(CodecError):
    pass


class LengthMismatchError(CodecError):
    pass


class MalformedPointError(CodecError):
    pass


class MissingFragmentError(CodecError):
    pass


class ProtocolError(RsaedError):
    pass


class ClusterTooSmallError(ProtocolError):
    pass


class EmptyAggregateError(ProtocolError):
    pass


class ConfigError(RsaedError):
    pass


class UnknownTargetError(ConfigError):
    pass
