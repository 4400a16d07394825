#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import argparse
import sys

from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from pydantic import ValidationError

from rcnlab import __version__
from rcnlab.app.bench.service.sweep_service import sweep_service
from rcnlab.app.bench.service.train_service import train_service
from rcnlab.app.bench.service.verify_service import verify_service
from rcnlab.app.hardness.schema.hardness import HardDistribution
from rcnlab.app.hardness.service.construction_service import construction_service
from rcnlab.app.hardness.service.correlation_service import correlation_service
from rcnlab.app.hardness.service.kravchuk_service import kravchuk_service
from rcnlab.app.simulate.crud.crud_dataset import dataset_dao
from rcnlab.app.simulate.schema.simulate import SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.enums import HardnessCommand, Learner, OutputFormat, WStarMode
from rcnlab.common.exception import errors
from rcnlab.common.exception.exception_handler import handle_exception
from rcnlab.common.exception.exit_code import CustomExitCode
from rcnlab.common.log import log, set_custom_logfile, setup_logging
from rcnlab.core.conf import settings
from rcnlab.utils.hypercube import parse_signs
from rcnlab.utils.rational import as_fraction
from rcnlab.utils.serializers import encode_json


def _schema_versions() -> str:
    return (
        f'rcnlab {__version__} '
        f'(dataset={settings.SCHEMA_VERSION_DATASET} '
        f'run_record={settings.SCHEMA_VERSION_RUN_RECORD} '
        f'sweep_csv={settings.SCHEMA_VERSION_SWEEP_CSV} '
        f'correlation={settings.SCHEMA_VERSION_CORRELATION})'
    )


def _signs(text: str) -> tuple[int, ...]:
    try:
        return parse_signs(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f'not a rational number: {text!r}') from exc


def _default_eta() -> Fraction:
    return Fraction(settings.HARDNESS_DEFAULT_ETA).limit_denominator(1000)


def _emit(content: bytes | str, out: Path | None) -> None:
    """
    结果写入文件或 stdout，统一 UTF-8

    :param content: 输出内容
    :param out: 输出路径，为空时写 stdout
    :return:
    """
    text = content.decode('utf-8') if isinstance(content, bytes) else content
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding='utf-8')
    log.info(f'结果已写入 {out}')


def _flag_errors(exc: ValidationError) -> errors.RangeError:
    """pydantic 校验失败转换为指明命令行参数的 RangeError"""
    error = exc.errors()[0]
    field = str(error['loc'][0]) if error.get('loc') else 'input'
    return errors.RangeError(msg=f'--{field.replace("_", "-")}: {error.get("msg")}')


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        config = SimulatorConfig(
            d=args.d, gamma=args.gamma, eta=args.eta, n=args.n, seed=args.seed, w_star_mode=args.w_star_mode
        )
    except ValidationError as exc:
        raise _flag_errors(exc) from exc
    dataset, instance = simulate_service.generate_dataset(config=config)
    dataset_dao.write(dataset, args.out)
    _emit(encode_json({'instance': instance.to_dict(), 'dataset': dataset.summary(), 'out': str(args.out)}), None)
    return CustomExitCode.SUCCESS.code


def cmd_train(args: argparse.Namespace) -> int:
    dataset = dataset_dao.read(args.dataset)
    record = train_service.run(
        dataset=dataset,
        eps=args.eps,
        delta=args.delta,
        eta=args.eta,
        gamma=args.gamma,
        T=args.T,
        learner=Learner.jl if args.jl else Learner.psgd,
        m=args.m,
        jl_seed=args.jl_seed,
        holdout=args.holdout,
        test_size=args.test_size,
        timing=not args.no_timing,
    )
    _emit(train_service.dumps(record), args.out)
    return CustomExitCode.SUCCESS.code


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        config = sweep_service.load_config(args.config)
    except ValidationError as exc:
        raise errors.RangeError(msg=f'{args.config}: {exc.errors()[0].get("msg")}') from exc
    rows = sweep_service.run(config, parallel=args.parallel, timing=not args.no_timing)
    _emit(sweep_service.dumps(rows), args.out or config.out)
    return CustomExitCode.SUCCESS.code


def _hard_distributions(args: argparse.Namespace) -> list[HardDistribution]:
    """--v/--u 给定时为单个分布对，否则为随机近正交族"""
    options: dict[str, Any] = {'eta': args.eta}
    if args.s_star is not None:
        options['s_star'] = args.s_star
    else:
        options['target_mass'] = args.target_mass
    if args.v is not None:
        u = args.u if args.u is not None else args.v
        return [correlation_service.make_distribution(v=v, **options) for v in (args.v, u)]
    vectors = construction_service.near_orthogonal_set(d=args.d, c=args.c, count=args.count, seed=args.seed)
    return [correlation_service.make_distribution(v=tuple(v), **options) for v in vectors]


def cmd_hardness_gen(args: argparse.Namespace) -> int:
    vectors = construction_service.near_orthogonal_set(d=args.d, c=args.c, count=args.count, seed=args.seed)
    if args.samples:
        if args.dataset_out is None:
            raise errors.RangeError(msg='--samples requires --dataset-out')
        dist = correlation_service.make_distribution(
            v=tuple(vectors[args.index]), eta=args.eta, target_mass=args.target_mass
        )
        if args.homogenize:
            dataset, _ = construction_service.hard_to_learner_dataset(
                dist=dist, n=args.samples, seed=args.seed, homogenize=True
            )
        else:
            dataset = construction_service.sample_hard_dataset(dist=dist, n=args.samples, seed=args.seed)
        dataset_dao.write(dataset, args.dataset_out)
    _emit(construction_service.family_json(vectors, c=args.c, seed=args.seed), args.out)
    return CustomExitCode.SUCCESS.code


def cmd_hardness_correlate(args: argparse.Namespace) -> int:
    dists = _hard_distributions(args)
    if args.v is not None:
        reports = [
            correlation_service.correlation_pair(
                dists[0], dists[1], C=args.C, approx=args.approx, samples=args.samples, seed=args.seed
            )
        ]
    else:
        reports = correlation_service.correlate_family(
            dists, C=args.C, approx=args.approx, parallel=args.parallel or 1
        )
    if args.format == OutputFormat.csv:
        _emit(correlation_service.reports_csv(reports), args.out)
    else:
        _emit(correlation_service.reports_json(reports), args.out)
    return CustomExitCode.SUCCESS.code


def cmd_hardness_rk(args: argparse.Namespace) -> int:
    if args.v is None:
        raise errors.RangeError(msg='--v is required for the R_k decomposition')
    dist_v, dist_u = _hard_distributions(args)
    report = correlation_service.correlation_pair(dist_v, dist_u, C=args.C)
    _emit(encode_json(correlation_service.rk_report(report, c=args.level)), args.out)
    return CustomExitCode.SUCCESS.code


def cmd_hardness_kravchuk(args: argparse.Namespace) -> int:
    table = kravchuk_service.kravchuk_table(args.n)
    if args.format == OutputFormat.csv:
        _emit(kravchuk_service.table_csv(table), args.out)
    else:
        _emit(kravchuk_service.table_json(table), args.out)
    return CustomExitCode.SUCCESS.code


def cmd_verify(args: argparse.Namespace) -> int:
    results = verify_service.run(quick=args.quick, only=args.only)
    _emit(verify_service.dumps(results, quick=args.quick), args.out)
    for result in results:
        log.info(f'{result.name}: {result.status} ({result.elapsed_ms:.0f} ms)')
    if all(result.passed for result in results):
        return CustomExitCode.SUCCESS.code
    return CustomExitCode.VERIFY_FAILED.code


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--out', type=Path, default=None, help='输出文件，默认写 stdout')


def _add_hard_distribution(parser: argparse.ArgumentParser, *, family: bool) -> None:
    parser.add_argument(
        '--v',
        type=_signs,
        default=None,
        help="符号向量，如 '++-+'、'npnp' 或 '1,1,-1,1'；首坐标为 -1 时写作 'n+-+' 或 --v=-+-+",
    )
    parser.add_argument('--u', type=_signs, default=None, help='第二个符号向量，默认与 --v 相同')
    if family:
        parser.add_argument('--d', type=int, default=20, help='近正交族的维度')
        parser.add_argument('--c', type=float, default=0.25, help='近正交阈值指数')
        parser.add_argument('--count', type=int, default=6, help='近正交族的向量个数')
    parser.add_argument('--seed', type=int, default=0, help='随机种子')
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--s-star', type=int, default=None, help='一致数阈值')
    group.add_argument(
        '--target-mass', type=_rational, default=Fraction(1, 10), help='目标尾部质量 E[f_v]，默认 0.1'
    )
    parser.add_argument('--eta', type=_rational, default=_default_eta(), help='噪声率，可写作分数，如 1/3')
    parser.add_argument('--C', type=float, default=10.0, help='相关界常数')


def build_parser() -> argparse.ArgumentParser:
    """构建命令行解析器"""
    parser = argparse.ArgumentParser(
        prog='rcnlab',
        description='间隔半空间 RCN 学习器与 SQ 硬实例的数值实验工具',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  rcnlab simulate --d 20 --gamma 0.2 --eta 0.2 --n 5000 --seed 7 --out a.ds
  rcnlab train a.ds --eps 0.15
  rcnlab sweep sweep.json --parallel 4 --out sweep.csv
  rcnlab hardness kravchuk --n 4
  rcnlab verify --quick
        """,
    )
    parser.add_argument('--version', action='version', version=_schema_versions())
    parser.add_argument(
        '--log-level',
        choices=['TRACE', 'DEBUG', 'INFO', 'SUCCESS', 'WARNING', 'ERROR', 'CRITICAL'],
        default=None,
        help='stderr 日志级别',
    )
    parser.add_argument('--log-dir', type=Path, default=None, help='额外写入滚动日志文件的目录')
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help='生成带 RCN 噪声的间隔半空间数据集')
    simulate.add_argument('--d', type=int, required=True, help='维度')
    simulate.add_argument('--gamma', type=float, required=True, help='间隔，取值 (0, 1)')
    simulate.add_argument('--eta', type=float, required=True, help='噪声率，取值 [0, 1/2)')
    simulate.add_argument('--n', type=int, required=True, help='样本数')
    simulate.add_argument('--seed', type=int, required=True, help='随机种子')
    simulate.add_argument('--w-star-mode', choices=WStarMode.get_member_values(), default=WStarMode.first_axis.value)
    simulate.add_argument('--out', type=Path, required=True, help='数据集输出路径')
    simulate.set_defaults(handler=cmd_simulate)

    train = commands.add_parser('train', help='投影次梯度学习并在 holdout 上选择假设')
    train.add_argument('dataset', type=Path, help='sphere 格式的数据集文件')
    train.add_argument('--eps', type=float, required=True, help='目标精度')
    train.add_argument('--delta', type=float, default=0.1, help='失败概率')
    train.add_argument('--eta', type=float, default=None, help='噪声率，默认读取数据集来源信息')
    train.add_argument('--gamma', type=float, default=None, help='间隔，默认读取数据集来源信息')
    train.add_argument('--T', type=int, default=None, help='覆盖推导出的迭代次数')
    train.add_argument('--jl', action='store_true', help='使用 JL 降维后的学习器')
    train.add_argument('--m', type=int, default=None, help='覆盖推导出的投影维度')
    train.add_argument('--jl-seed', type=int, default=0, help='投影矩阵的随机种子')
    train.add_argument('--holdout', type=Path, default=None, help='独立的 holdout 数据集文件')
    train.add_argument('--test-size', type=int, default=0, help='新鲜测试集大小，需模拟器来源或齐次化硬实例头部')
    train.add_argument('--no-timing', action='store_true', help='耗时字段置零，使输出逐字节可复现')
    _add_output(train)
    train.set_defaults(handler=cmd_train)

    sweep = commands.add_parser('sweep', help='按 JSON 配置执行网格实验')
    sweep.add_argument('config', type=Path, help='扫描配置 JSON 文件')
    sweep.add_argument('--parallel', type=int, default=None, help='并行进程数')
    sweep.add_argument('--no-timing', action='store_true', help='耗时字段置零，使输出逐字节可复现')
    _add_output(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    hardness = commands.add_parser('hardness', help='SQ 硬实例构造与精确相关性报告')
    hardness_commands = hardness.add_subparsers(dest='hardness_command', required=True)

    gen = hardness_commands.add_parser(HardnessCommand.gen.value, help='生成近正交符号向量族')
    gen.add_argument('--d', type=int, required=True, help='维度')
    gen.add_argument('--c', type=float, default=0.25, help='阈值指数，取值 (0, 1/2)')
    gen.add_argument('--count', type=int, required=True, help='向量个数')
    gen.add_argument('--seed', type=int, default=0, help='随机种子')
    gen.add_argument('--samples', type=int, default=0, help='从 D_v 抽取的样本数')
    gen.add_argument('--index', type=int, default=0, help='用于抽样的向量下标')
    gen.add_argument('--target-mass', type=_rational, default=Fraction(1, 10), help='目标尾部质量 E[f_v]')
    gen.add_argument('--eta', type=_rational, default=_default_eta(), help='噪声率')
    gen.add_argument('--homogenize', action='store_true', help='输出齐次嵌入后的 sphere 数据集')
    gen.add_argument('--dataset-out', type=Path, default=None, help='样本数据集输出路径')
    _add_output(gen)
    gen.set_defaults(handler=cmd_hardness_gen)

    correlate = hardness_commands.add_parser(HardnessCommand.correlate.value, help='成对相关性报告')
    _add_hard_distribution(correlate, family=True)
    correlate.add_argument('--approx', action='store_true', help='超出穷举预算时使用蒙特卡洛估计')
    correlate.add_argument('--samples', type=int, default=None, help='蒙特卡洛样本数')
    correlate.add_argument('--parallel', type=int, default=None, help='并行进程数')
    correlate.add_argument('--format', choices=OutputFormat.get_member_values(), default=OutputFormat.json.value)
    _add_output(correlate)
    correlate.set_defaults(handler=cmd_hardness_correlate)

    rk = hardness_commands.add_parser(HardnessCommand.rk.value, help='R_k 分解与层级衰减检查')
    _add_hard_distribution(rk, family=False)
    rk.add_argument('--level', type=float, default=None, help='低层检查常数 c，默认取衰减搜索结果')
    _add_output(rk)
    rk.set_defaults(handler=cmd_hardness_rk)

    kravchuk = hardness_commands.add_parser(HardnessCommand.kravchuk.value, help='归一化 Kravchuk 精确值表')
    kravchuk.add_argument('--n', type=int, required=True, help='集合大小')
    kravchuk.add_argument('--format', choices=OutputFormat.get_member_values(), default=OutputFormat.json.value)
    _add_output(kravchuk)
    kravchuk.set_defaults(handler=cmd_hardness_kravchuk)

    verify = commands.add_parser('verify', help='执行全部不变量校验套件')
    verify.add_argument('--quick', action='store_true', help='缩减预算')
    verify.add_argument('--only', nargs='+', default=None, help='仅执行指定的套件')
    _add_output(verify)
    verify.set_defaults(handler=cmd_verify)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    命令行入口，返回退出码

    :param argv: 命令行参数，默认读取 sys.argv
    :return:
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    if args.log_dir is not None:
        set_custom_logfile(args.log_dir)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except Exception as exc:
        return handle_exception(exc)


if __name__ == '__main__':
    sys.exit(main())
