#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

from pathlib import Path

import numpy as np

from rcnlab.app.bench.schema.bench import ErrorSummary, RunRecord
from rcnlab.app.core_model.schema.model import MarginHalfspaceInstance
from rcnlab.app.dimreduce.service.dimreduce_service import dimreduce_service
from rcnlab.app.hardness.service.construction_service import construction_service
from rcnlab.app.learner.schema.learner import LearnerParams
from rcnlab.app.learner.service.learner_service import learner_service
from rcnlab.app.simulate.crud.crud_dataset import dataset_dao
from rcnlab.app.simulate.schema.simulate import Dataset, SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.enums import Learner
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.utils.rng import Stream
from rcnlab.utils.serializers import encode_json
from rcnlab.utils.timer import Stopwatch


@dataclasses.dataclass(frozen=True, eq=False)
class Splits:
    """训练、留出与测试集，instance 仅在数据集带模拟器来源或齐次化硬实例头部时可知"""

    train: Dataset
    holdout: Dataset
    test: Dataset | None
    instance: MarginHalfspaceInstance | None
    holdout_source: str


class TrainService:
    """训练编排服务类：参数解析、留出集构造与运行记录"""

    @staticmethod
    def _resolve(value: float | None, fallback: float | None, flag: str) -> float:
        if value is not None:
            return value
        if fallback is None:
            raise errors.RangeError(msg=f'{flag} is required when the dataset carries no simulator provenance')
        return fallback

    @staticmethod
    def make_splits(
        *,
        dataset: Dataset,
        holdout_size: int,
        holdout: Dataset | str | Path | None = None,
        test_size: int = 0,
    ) -> Splits:
        """
        留出集来源依次为：显式给出的留出集；
        由模拟器来源重新生成（stream 1，测试集为 stream 2）；
        从数据集末尾切分 N' 行。齐次化硬实例数据集由头部还原 w*，测试集取自同一硬分布的 stream 2

        :param dataset: 训练数据集
        :param holdout_size: 推导的留出集大小 N'
        :param holdout: 留出集或其文件路径
        :param test_size: 测试集大小，0 表示不生成
        :return:
        """
        dataset.require_sphere()
        config = dataset.provenance if isinstance(dataset.provenance, SimulatorConfig) else None
        instance = None
        test = None
        if config is not None:
            instance = simulate_service.make_instance(
                d=config.d, gamma=config.gamma, eta=config.eta, seed=config.seed, mode=config.w_star_mode
            )
            if test_size:
                test, _ = simulate_service.generate_dataset(
                    config=config.model_copy(update={'n': test_size}), stream=Stream.test
                )
        else:
            hard = construction_service.distribution_from_meta(dataset.meta)
            if hard is not None:
                instance = construction_service.homogeneous_embedding(hard)
                if instance.d != dataset.d:
                    raise errors.FormatError(
                        msg=f'homogenized header implies d={instance.d}, dataset has d={dataset.d}', line=1
                    )
                if test_size:
                    test, _ = construction_service.hard_to_learner_dataset(
                        dist=hard,
                        n=test_size,
                        seed=int(dataset.meta.get('seed', 0)),
                        homogenize=True,
                        stream=Stream.test,
                    )

        if holdout is not None:
            held = holdout if isinstance(holdout, Dataset) else dataset_dao.read(holdout)
            held.require_sphere()
            if held.d != dataset.d:
                raise errors.DimensionError(msg=f'holdout has d={held.d}, training set has d={dataset.d}')
            return Splits(train=dataset, holdout=held, test=test, instance=instance, holdout_source='file')
        if config is not None:
            held, _ = simulate_service.generate_dataset(
                config=config.model_copy(update={'n': holdout_size}), stream=Stream.holdout
            )
            return Splits(train=dataset, holdout=held, test=test, instance=instance, holdout_source='regenerated')
        if holdout_size >= dataset.n:
            raise errors.LearnerError(
                msg=f'dataset has {dataset.n} rows, too few to split off a holdout of {holdout_size}'
            )
        cut = dataset.n - holdout_size
        log.info(f'从数据集末尾切分 {holdout_size} 行作为留出集')
        return Splits(
            train=dataset.head(cut),
            holdout=dataset.slice(cut),
            test=test,
            instance=instance,
            holdout_source='split',
        )

    def run(
        self,
        *,
        dataset: Dataset,
        eps: float,
        delta: float,
        eta: float | None = None,
        gamma: float | None = None,
        T: int | None = None,
        learner: Learner = Learner.psgd,
        m: int | None = None,
        jl_seed: int = 0,
        holdout: Dataset | str | Path | None = None,
        test_size: int = 0,
        guarantee_rows: int | None = None,
        timing: bool = True,
    ) -> RunRecord:
        """
        训练并选择假设，生成运行记录

        :param dataset: 训练数据集
        :param eps: 精度
        :param delta: 置信度
        :param eta: 噪声率，缺省时取数据集来源
        :param gamma: 间隔，缺省时取数据集来源
        :param T: 覆盖的迭代次数
        :param learner: psgd 或 jl
        :param m: 覆盖的 JL 维度
        :param jl_seed: JL 矩阵种子
        :param holdout: 留出集或其文件路径
        :param test_size: 测试集大小
        :param guarantee_rows: 逐迭代点分歧分解只用测试集前若干行，None 表示全部
        :param timing: 为 False 时 wallclock_ms 置 0
        :return:
        """
        config = dataset.provenance if isinstance(dataset.provenance, SimulatorConfig) else None
        hard = None if config is not None else construction_service.distribution_from_meta(dataset.meta)
        source = config if hard is None else construction_service.homogeneous_embedding(hard)
        eta = self._resolve(eta, None if source is None else source.eta, '--eta')
        gamma = self._resolve(gamma, None if source is None else source.gamma, '--gamma')
        learner = Learner(learner)

        with Stopwatch(enabled=timing) as watch:
            if learner == Learner.jl:
                params = dimreduce_service.derive_reduced_params(eps=eps, delta=delta, eta=eta, gamma=gamma, T=T)
            else:
                params = learner_service.derive_params(eps=eps, delta=delta, eta=eta, gamma=gamma, T=T)
            splits = self.make_splits(
                dataset=dataset, holdout_size=params.holdout_size, holdout=holdout, test_size=test_size
            )
            w_star = splits.instance.w_star if splits.instance is not None else None
            jl_echo = None
            jl_diagnostics = None
            guarantee = None
            if learner == Learner.jl:
                jl = dimreduce_service.derive_jl_config(
                    eps=eps, delta=delta, gamma=gamma, n=splits.train.n, seed=jl_seed, m=m
                )
                result = dimreduce_service.reduced_train(
                    train=splits.train,
                    holdout=splits.holdout,
                    eps=eps,
                    delta=delta,
                    eta=eta,
                    gamma=gamma,
                    jl=jl,
                    T=T,
                    w_star=w_star,
                )
                iterates = result.lifted
                jl_echo = jl.echo()
                if result.diagnostics is not None:
                    jl_diagnostics = result.diagnostics.to_dict()
            else:
                result = learner_service.train_and_select(
                    train=splits.train,
                    holdout=splits.holdout,
                    params=params,
                    w_star=w_star,
                    test=splits.test,
                    gamma=gamma,
                    test_rows=guarantee_rows,
                )
                iterates = result.trace.iterates
                if result.guarantee is not None:
                    guarantee = result.guarantee.to_dict()
            record = self._record(
                learner=learner,
                dataset=dataset,
                splits=splits,
                params=params,
                selected_w=result.selected.w,
                selected=result.selected.to_dict(),
                iterates=iterates,
                w_star=w_star,
                jl_echo=jl_echo,
                jl_diagnostics=jl_diagnostics,
                guarantee=guarantee,
            )
        return record.model_copy(update={'wallclock_ms': watch.elapsed_ms})

    @staticmethod
    def _record(
        *,
        learner: Learner,
        dataset: Dataset,
        splits: Splits,
        params: LearnerParams,
        selected_w: np.ndarray,
        selected: dict,
        iterates: np.ndarray,
        w_star: np.ndarray | None,
        jl_echo: dict | None,
        jl_diagnostics: dict | None,
        guarantee: dict | None,
    ) -> RunRecord:
        test = splits.test
        disagreement = predicted = min_disagreement = None
        if w_star is not None and test is not None:
            disagreement = float(
                learner_service.iterate_disagreements(iterates=selected_w[None, :], X=test.X, w_ref=w_star)[0]
            )
            predicted = params.eta + (1 - 2 * params.eta) * disagreement
            min_disagreement = float(
                learner_service.iterate_disagreements(iterates=iterates, X=test.X, w_ref=w_star).min()
            )
        provenance = dataset.provenance
        return RunRecord(
            learner=learner,
            seed=provenance.seed if isinstance(provenance, SimulatorConfig) else None,
            dataset={**dataset.summary(), 'holdout_source': splits.holdout_source, 'holdout_n': splits.holdout.n},
            params=params.echo(),
            jl=jl_echo,
            selected=selected,
            errors=ErrorSummary(
                train=learner_service.evaluate_error(w=selected_w, data=splits.train),
                holdout=selected['holdout_error'],
                test=None if test is None else learner_service.evaluate_error(w=selected_w, data=test),
            ),
            disagreement=disagreement,
            predicted_error=predicted,
            min_disagreement=min_disagreement,
            guarantee=guarantee,
            jl_diagnostics=jl_diagnostics,
        )

    @staticmethod
    def dumps(record: RunRecord) -> bytes:
        """运行记录的 JSON 文本"""
        return encode_json(record.to_dict())


train_service: TrainService = TrainService()
