"""
命令行入口：keygen / vectors / encrypt / aggregate / decrypt / simulate / sweep。

所有八位组输入输出都使用十六进制文本，密文一行一个，可以用管道串接：
    rsaed encrypt --m 5 --k 7 | rsaed encrypt --m 3 --k 4 --append | rsaed aggregate | rsaed decrypt

退出码：0 成功，1 用法错误，2 配置错误，3 协议/反向映射失败。
"""
import argparse
import logging
import os
import random
import sys
from typing import IO, List, Optional, Sequence

from Crypto.Hash import SHA256
from pydantic import ValidationError

from rsaed.core.MacStrategy import MacHashType
from rsaed.core.ec_core import CURVE_REGISTRY, INFINITY, CurveParams, point_add, registry_get, scalar_mult
from rsaed.core.eceg import (Ciphertext, PlaintextBound, ReverseMapMethod, decrypt, encrypt, encrypt_pair, hom_add,
                             keygen, reverse_map)
from rsaed.core.errors import (CodecError, ConfigError, NoSquareRootError, PlaintextRangeError, PointNotOnCurveError,
                               ProtocolError, ReverseMapError)
from rsaed.simulation import reports
from rsaed.simulation.simulator import derive, run, sweep
from rsaed.user_data import APP_NAME, Calibration, ProtocolMode, Scenario, Topology
from rsaed.utils import (ciphertext_to_hex, hex_to_ciphertext, hex_to_point, parse_int, parse_int_list,
                         point_to_hex, read_hex_lines)

logger = logging.getLogger('RSAED.' + __name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3

DEFAULT_CURVE = 'secp160r1'

# --calibration 同样接受的标定别名
CALIBRATION_ALIASES = {'figure5': Calibration.per_message, 'table2': Calibration.primitive}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse 默认以退出码 2 结束进程，这里改为抛异常，由 main 统一映射"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------
# 子命令
# ------------------------------------------------------------------
def _curve(args) -> CurveParams:
    return registry_get(args.curve or DEFAULT_CURVE)


def _public_key(args, curve: CurveParams):
    if args.public_key:
        return hex_to_point(args.public_key, curve)
    if args.x is not None:
        return keygen(curve, x=args.x).Y
    raise UsageError("需要 --public-key 或 --x")


def cmd_keygen(args, stdin: IO[str], stdout: IO[str]) -> int:
    curve = _curve(args)
    rng = random.Random(args.seed) if args.seed is not None else None
    keys = keygen(curve, rng=rng, x=args.x)
    print(f"x={keys.x:x}", file=stdout)
    print(f"Y={point_to_hex(keys.Y, curve)}", file=stdout)
    return EXIT_OK


def _fingerprint(curve: CurveParams) -> str:
    digest = SHA256.new()
    for value in (curve.p, curve.a, curve.b, curve.G.x, curve.G.y, curve.n):
        digest.update(value.to_bytes(curve.byte_length + 1, 'big'))
    return digest.hexdigest()


def _toy_vectors(curve: CurveParams, stdout: IO[str]) -> None:
    for k in range(1, curve.n + 1):
        label = 'G' if k == 1 else f'{k}G'
        print(f"{label}={scalar_mult(k, curve.G, curve)}", file=stdout)
    keys = keygen(curve, x=6)
    print(f"x={keys.x} Y={keys.Y}", file=stdout)
    R, S = INFINITY, INFINITY
    compressed = []
    for index, (m, k) in enumerate(((5, 7), (3, 4)), start=1):
        Ri, Si = encrypt_pair(m, k, keys, curve)
        c = encrypt(m, keys.Y, curve, k=k)
        compressed.append(c)
        print(f"C{index}=({Ri},{Si}) m={m} k={k} compressed={c}", file=stdout)
        R, S = point_add(R, Ri, curve), point_add(S, Si, curve)
    print(f"C=({R},{S})", file=stdout)
    c = hom_add(compressed[0], compressed[1], curve)
    M = decrypt(c, keys.x, curve)
    print(f"M={M}", file=stdout)
    print(f"m={reverse_map(M, curve, PlaintextBound(max_single=5, max_sum=curve.n - 1))}", file=stdout)


def _demo_vectors(curve: CurveParams, seed: int, stdout: IO[str]) -> None:
    rng = random.Random(seed)
    keys = keygen(curve, rng=rng)
    print(f"seed={seed} x={keys.x:x} Y={point_to_hex(keys.Y, curve)}", file=stdout)
    bound = PlaintextBound.for_nodes(2, 1000, curve)
    total = None
    for index, m in enumerate((5, 3), start=1):
        c = encrypt(m, keys.Y, curve, rng=rng, bound=bound)
        print(f"C{index}={ciphertext_to_hex(c, curve)} m={m}", file=stdout)
        total = c if total is None else hom_add(total, c, curve)
    print(f"C={ciphertext_to_hex(total, curve)}", file=stdout)
    print(f"m={reverse_map(decrypt(total, keys.x, curve), curve, bound)}", file=stdout)


def cmd_vectors(args, stdin: IO[str], stdout: IO[str]) -> int:
    curve = registry_get(args.name or args.curve or DEFAULT_CURVE)
    print(f"curve={curve.name} p={curve.p:x} a={curve.a:x} b={curve.b:x} G={curve.G} n={curve.n:x}", file=stdout)
    print(f"fingerprint={_fingerprint(curve)}", file=stdout)
    if curve.n < 1 << 16:
        _toy_vectors(curve, stdout)
    else:
        _demo_vectors(curve, args.seed if args.seed is not None else 0, stdout)
    return EXIT_OK


def cmd_encrypt(args, stdin: IO[str], stdout: IO[str]) -> int:
    curve = _curve(args)
    previous = read_hex_lines(stdin) if args.append else []
    Y = _public_key(args, curve)
    rng = random.Random(args.seed) if args.seed is not None else None
    bound = None
    if args.max_single is not None:
        bound = PlaintextBound(max_single=args.max_single, max_sum=args.max_single)
    c = encrypt(args.m, Y, curve, k=args.k, rng=rng, bound=bound)
    for line in previous:
        print(line, file=stdout)
    print(ciphertext_to_hex(c, curve), file=stdout)
    return EXIT_OK


def _read_ciphertexts(args, stdin: IO[str], curve: CurveParams) -> List[Ciphertext]:
    lines: List[str] = []
    if args.input:
        for path in args.input:
            with open(path, 'r', encoding='utf-8') as f:
                lines.extend(read_hex_lines(f))
    else:
        lines = read_hex_lines(stdin)
    return [hex_to_ciphertext(line, curve) for line in lines]


def cmd_aggregate(args, stdin: IO[str], stdout: IO[str]) -> int:
    curve = _curve(args)
    ciphertexts = _read_ciphertexts(args, stdin, curve)
    if not ciphertexts:
        raise UsageError("没有可聚合的密文")
    total = ciphertexts[0]
    for c in ciphertexts[1:]:
        total = hom_add(total, c, curve)
    logger.info(f"聚合 {len(ciphertexts)} 个密文: {total}")
    print(ciphertext_to_hex(total, curve), file=stdout)
    return EXIT_OK


def cmd_decrypt(args, stdin: IO[str], stdout: IO[str]) -> int:
    curve = _curve(args)
    if args.ciphertext:
        ciphertexts = [hex_to_ciphertext(args.ciphertext, curve)]
    else:
        ciphertexts = _read_ciphertexts(args, stdin, curve)
    if len(ciphertexts) != 1:
        raise UsageError(f"decrypt 需要恰好一个密文，实际 {len(ciphertexts)} 个（多个密文请先 aggregate）")
    max_sum = args.bound if args.bound is not None else min(curve.n - 1, 255 * 1000)
    bound = PlaintextBound(max_single=0, max_sum=max_sum).validated(curve)
    M = decrypt(ciphertexts[0], args.x, curve)
    print(reverse_map(M, curve, bound, method=ReverseMapMethod(args.method)), file=stdout)
    return EXIT_OK


def load_scenario(path: Optional[str]) -> Scenario:
    """
    :raises ConfigError: 配置文件不存在或无法读取
    """
    if not path:
        return Scenario()
    if not os.path.isfile(path):
        raise ConfigError(f"配置文件不存在: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"配置文件读取失败: {path}, 错误: {e}")
    scenario = Scenario.from_json(text)
    logger.info(f"已加载场景配置: {path}")
    return scenario


def scenario_from_args(args) -> Scenario:
    """配置文件打底，命令行参数覆盖"""
    base = load_scenario(args.config)
    updates = {'seed': args.seed}
    if args.curve:
        updates['curve'] = args.curve
    if args.hash:
        updates['hash'] = MacHashType(args.hash)
    if getattr(args, 'mode', None):
        updates['mode'] = ProtocolMode(args.mode)
    if getattr(args, 'rounds', None):
        updates['rounds'] = args.rounds
    if getattr(args, 'nodes', None):
        updates.update(topology=Topology.single(args.nodes), readings=None, energies=None)
    if args.calibration:
        calibration = CALIBRATION_ALIASES.get(args.calibration) or Calibration(args.calibration)
        updates['cost'] = base.cost.model_copy(update={'calibration': calibration})
    return derive(base, **updates)


def cmd_simulate(args, stdin: IO[str], stdout: IO[str]) -> int:
    scenario = scenario_from_args(args)
    metrics = run(scenario)
    if args.out:
        for path in reports.save_metrics(metrics, args.out):
            print(path, file=stdout)
    elif args.format == 'csv':
        stdout.write(reports.metrics_csv(metrics))
    else:
        print(reports.summary_json(metrics), file=stdout)
    if args.verbose and metrics.drops:
        print(reports.format_drops(metrics), file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args, stdin: IO[str], stdout: IO[str]) -> int:
    base = scenario_from_args(args)
    if args.mode:
        modes = [ProtocolMode(args.mode)]
    elif args.modes:
        modes = [ProtocolMode(mode) for mode in args.modes.split(',')]
    else:
        modes = list(ProtocolMode)
    rows = sweep(base, parse_int_list(args.node_counts), modes)
    text = reports.sweep_csv(rows)
    if args.out:
        reports.save_text(args.out, text)
        print(args.out, file=stdout)
    else:
        stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------
# 参数解析
# ------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--curve', choices=sorted(CURVE_REGISTRY), default=None, help=f'曲线，默认 {DEFAULT_CURVE}')
    common.add_argument('--hash', choices=[h.value for h in MacHashType], default=None, help='MAC 底层 hash')
    common.add_argument('--seed', type=int, default=None, help='随机种子')
    common.add_argument('--verbose', '-v', action='store_true', help='输出 DEBUG 日志与丢包记录')

    parser = _Parser(prog=APP_NAME.lower(), description='RSAED 安全数据聚合工具')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('keygen', parents=[common], help='生成基站密钥对')
    p.add_argument('--x', type=parse_int, default=None, help='强制指定私钥')
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser('vectors', parents=[common], help='打印示例向量')
    p.add_argument('name', nargs='?', choices=sorted(CURVE_REGISTRY), default=None)
    p.set_defaults(func=cmd_vectors)

    p = sub.add_parser('encrypt', parents=[common], help='加密一个读数，输出密文十六进制')
    p.add_argument('--m', type=parse_int, required=True, help='明文读数')
    p.add_argument('--k', type=parse_int, default=None, help='临时标量，缺省时随机')
    p.add_argument('--x', type=parse_int, default=None, help='由私钥推导公钥')
    p.add_argument('--public-key', default=None, help='压缩公钥十六进制')
    p.add_argument('--max-single', type=parse_int, default=None)
    p.add_argument('--append', action='store_true', help='先原样输出标准输入中的密文')
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser('aggregate', parents=[common], help='同态相加多个密文')
    p.add_argument('--input', nargs='*', default=None, help='密文文件，缺省读标准输入')
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser('decrypt', parents=[common], help='解密并反向映射')
    p.add_argument('--x', type=parse_int, required=True, help='基站私钥')
    p.add_argument('--ciphertext', default=None)
    p.add_argument('--input', nargs='*', default=None)
    p.add_argument('--bound', type=parse_int, default=None, help='max_sum')
    p.add_argument('--method', choices=[m.value for m in ReverseMapMethod], default=ReverseMapMethod.bsgs.value)
    p.set_defaults(func=cmd_decrypt)

    for name, func, text in (('simulate', cmd_simulate, '运行一次仿真'), ('sweep', cmd_sweep, '按节点数批量仿真')):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument('--config', default=None, help='场景 JSON 文件')
        p.add_argument('--rounds', type=int, default=None)
        p.add_argument('--calibration', choices=[c.value for c in Calibration] + list(CALIBRATION_ALIASES),
                       default=None, help='时延标定，figure5 同 per-message，table2 同 primitive')
        p.add_argument('--out', default=None, help='输出目录（simulate）或 CSV 文件（sweep）')
        p.set_defaults(func=func)
    simulate, sweep_parser = sub.choices['simulate'], sub.choices['sweep']
    for p in (simulate, sweep_parser):
        p.add_argument('--mode', choices=[m.value for m in ProtocolMode], default=None)
    simulate.add_argument('--nodes', type=int, default=None, help='单簇节点数')
    simulate.add_argument('--format', choices=['summary', 'csv'], default='summary')
    sweep_parser.add_argument('--nodes', dest='node_counts', required=True, help='节点数列表，如 4,8,16 或 4-64:4')
    sweep_parser.add_argument('--modes', default=None, help='逗号分隔，缺省两种模式都跑')
    return parser


def _set_verbose() -> None:
    root = logging.getLogger(APP_NAME)
    root.setLevel(logging.DEBUG)
    for handler in root.handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            handler.setLevel(logging.DEBUG)


def main(argv: Optional[Sequence[str]] = None, stdin: Optional[IO[str]] = None,
         stdout: Optional[IO[str]] = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command in ('simulate', 'sweep') and args.seed is None:
            raise UsageError(f"{args.command} 必须指定 --seed")
        if args.verbose:
            _set_verbose()
        return args.func(args, stdin, stdout)
    except UsageError as e:
        print(f"用法错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValidationError) as e:
        print(f"配置错误: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ReverseMapError, ProtocolError) as e:
        print(f"协议失败: {e}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (CodecError, NoSquareRootError, PointNotOnCurveError, PlaintextRangeError, ValueError, OSError) as e:
        print(f"输入错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception(f"未预期的错误: {e}")
        print(f"未预期的错误: {e}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == '__main__':
    sys.exit(main())
