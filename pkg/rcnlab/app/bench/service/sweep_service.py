#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

from pathlib import Path
from typing import Sequence

import msgspec

from rcnlab.app.bench.schema.bench import SWEEP_COLUMNS, SweepConfig, SweepRow
from rcnlab.app.bench.service.train_service import train_service
from rcnlab.app.simulate.schema.simulate import SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.exception import errors
from rcnlab.common.exception.errors import BaseExceptionMixin
from rcnlab.common.log import bind_trial, log
from rcnlab.core.conf import settings
from rcnlab.utils.pool import run_ordered
from rcnlab.utils.rng import derive_seed
from rcnlab.utils.serializers import decode_json, encode_csv


@dataclasses.dataclass(frozen=True)
class SweepTrial:
    """一次试验：单元格下标、种子下标与派生种子"""

    cell: int
    seed_index: int
    seed: int
    d: int
    gamma: float
    eta: float
    eps: float
    N: int
    config: SweepConfig
    timing: bool


def run_trial(trial: SweepTrial) -> SweepRow:
    """
    生成数据集并训练，失败时返回带 error 列的行

    :param trial: 试验描述
    :return:
    """
    base = SweepRow(seed=trial.seed, d=trial.d, gamma=trial.gamma, eta=trial.eta, eps=trial.eps, N=trial.N)
    with bind_trial(f'{trial.cell}.{trial.seed_index}'):
        try:
            dataset, _ = simulate_service.generate_dataset(
                config=SimulatorConfig(d=trial.d, gamma=trial.gamma, eta=trial.eta, n=trial.N, seed=trial.seed)
            )
            record = train_service.run(
                dataset=dataset,
                eps=trial.eps,
                delta=trial.config.delta,
                T=trial.config.T,
                learner=trial.config.learner,
                m=trial.config.m,
                jl_seed=trial.seed,
                test_size=trial.config.test_size,
                timing=trial.timing,
            )
        except BaseExceptionMixin as exc:
            log.warning(f'试验失败: {exc.msg}')
            return dataclasses.replace(base, error=f'{type(exc).__name__}: {exc.msg}')
        log.debug(f'试验完成: holdout={record.errors.holdout:.6f} test={record.errors.test}')
        return dataclasses.replace(
            base,
            T=record.params['T'],
            m=record.jl['m'] if record.jl else None,
            err_holdout=record.errors.holdout,
            err_test=record.errors.test,
            min_disagreement=record.min_disagreement,
            wallclock_ms=record.wallclock_ms,
        )


class SweepService:
    """网格扫描服务类"""

    @staticmethod
    def load_config(path: str | Path) -> SweepConfig:
        """
        读取 JSON 配置文件

        :param path: 配置文件路径
        :return:
        """
        try:
            content = decode_json(Path(path).read_bytes())
        except msgspec.DecodeError as exc:
            raise errors.FormatError(msg=f'{path}: {exc}') from exc
        return SweepConfig.model_validate(content)

    @staticmethod
    def trials(config: SweepConfig, *, timing: bool = True) -> list[SweepTrial]:
        """
        按 (单元格, 种子) 顺序展开全部试验，种子由 (master, cell, seed_index) 派生

        :param config: 扫描配置
        :param timing: 是否记录耗时
        :return:
        """
        return [
            SweepTrial(
                cell=cell,
                seed_index=index,
                seed=derive_seed(config.master_seed, cell, index),
                d=d,
                gamma=gamma,
                eta=eta,
                eps=eps,
                N=n,
                config=config,
                timing=timing,
            )
            for cell, (d, gamma, eta, eps, n) in enumerate(config.cells())
            for index in range(config.seeds_per_cell)
        ]

    def run(self, config: SweepConfig, *, parallel: int | None = None, timing: bool = True) -> list[SweepRow]:
        """
        执行扫描，输出顺序与并行度无关

        :param config: 扫描配置
        :param parallel: 并行进程数，默认取配置或物理核心数
        :param timing: 是否记录耗时
        :return:
        """
        parallel = parallel or config.parallel or settings.SWEEP_DEFAULT_PARALLEL
        trials = self.trials(config, timing=timing)
        log.info(f'扫描开始: {config.cell_count} 个单元格, {len(trials)} 次试验, 并行度 {parallel}')
        rows = run_ordered(run_trial, trials, parallel)
        failed = sum(row.error is not None for row in rows)
        if failed:
            log.warning(f'{failed} 次试验失败')
        return rows

    @staticmethod
    def dumps(rows: Sequence[SweepRow]) -> str:
        """扫描结果 CSV 文本"""
        return encode_csv('sweep', settings.SCHEMA_VERSION_SWEEP_CSV, SWEEP_COLUMNS, (row.to_row() for row in rows))


sweep_service: SweepService = SweepService()
