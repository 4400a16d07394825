#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

import numpy as np

from rcnlab.app.core_model.schema.model import MarginHalfspaceInstance
from rcnlab.app.hardness.schema.hardness import HardDistribution, ThresholdLtf
from rcnlab.app.hardness.service.fourier_service import fourier_service
from rcnlab.app.simulate.schema.simulate import Dataset
from rcnlab.common.enums import DatasetFormat
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings
from rcnlab.utils.hypercube import format_signs, parse_signs
from rcnlab.utils.rational import as_fraction
from rcnlab.utils.rng import Stream, make_rng
from rcnlab.utils.serializers import encode_json


class ConstructionService:
    """硬实例构造服务类：近正交向量族、硬分布采样与齐次间隔嵌入"""

    @staticmethod
    def near_orthogonal_threshold(d: int, c: float) -> float:
        """成对内积阈值 d^(1/2 + c)"""
        return d ** (0.5 + c)

    def near_orthogonal_set(self, *, d: int, c: float, count: int, seed: int) -> np.ndarray:
        """
        随机贪心构造 count 个两两满足 |v·u| < d^(1/2 + c) 的 ±1 向量

        :param d: 维度
        :param c: 阈值指数常数，取值 (0, 1/2)
        :param count: 向量个数
        :param seed: 随机种子
        :return: int8 矩阵，形状 (count, d)
        """
        if d < 1:
            raise errors.RangeError(msg=f'd must be positive, got {d}')
        if not 0 < c < 0.5:
            raise errors.RangeError(msg=f'c must lie in (0, 1/2), got {c}')
        if not 1 <= count <= settings.NEAR_ORTH_MAX_COUNT:
            raise errors.RangeError(msg=f'count must lie in [1, {settings.NEAR_ORTH_MAX_COUNT}], got {count}')
        threshold = self.near_orthogonal_threshold(d, c)
        if math.floor(threshold) < 1:
            raise errors.RangeError(msg=f'threshold d^(1/2 + c) = {threshold:.4g} admits no pair')
        rng = make_rng(seed, Stream.near_orthogonal)
        accepted = np.empty((count, d), dtype=np.int8)
        size = 0
        attempts = 0
        while size < count:
            if attempts >= settings.NEAR_ORTH_RETRY_BUDGET:
                raise errors.GenerationError(
                    msg=f'near-orthogonal set stalled at {size} of {count} vectors',
                    data={'d': d, 'c': c, 'attempts': attempts},
                )
            attempts += 1
            candidate = np.where(rng.integers(0, 2, size=d, dtype=np.int8) == 1, 1, -1).astype(np.int8)
            if size:
                inner = accepted[:size].astype(np.int64) @ candidate.astype(np.int64)
                if np.any(np.abs(inner) >= threshold):
                    continue
            accepted[size] = candidate
            size += 1
        log.debug(f'近正交向量族：{count} 个向量，尝试 {attempts} 次')
        return accepted

    def verify_near_orthogonal(self, vectors: np.ndarray, c: float) -> tuple[bool, int]:
        """
        检查全部成对内积，返回 (是否满足阈值, 最大 |v·u|)

        :param vectors: ±1 矩阵
        :param c: 阈值指数常数
        :return:
        """
        V = np.asarray(vectors, dtype=np.int64)
        if V.shape[0] < 2:
            return True, 0
        gram = V @ V.T
        off = np.abs(gram[~np.eye(V.shape[0], dtype=bool)])
        worst = int(off.max())
        return worst < self.near_orthogonal_threshold(V.shape[1], c), worst

    def family_json(self, vectors: np.ndarray, *, c: float, seed: int) -> bytes:
        """
        近正交向量族及其成对检查结果的 JSON 文本

        :param vectors: ±1 矩阵
        :param c: 阈值指数常数
        :param seed: 生成时使用的随机种子
        :return:
        """
        ok, worst = self.verify_near_orthogonal(vectors, c)
        d = int(vectors.shape[1])
        return encode_json(
            {
                'schema': 'near_orthogonal',
                'd': d,
                'c': c,
                'seed': seed,
                'count': int(vectors.shape[0]),
                'threshold': self.near_orthogonal_threshold(d, c),
                'max_inner_product': worst,
                'ok': ok,
                'vectors': [format_signs(v) for v in vectors],
            }
        )

    @staticmethod
    def sample_hard_dataset(
        *, dist: HardDistribution, n: int, seed: int, stream: Stream = Stream.hard_sample
    ) -> Dataset:
        """
        x 在 {±1}^d 上均匀，y 以概率 1 - eta 等于 f_v(x)

        :param dist: 硬分布
        :param n: 样本数
        :param seed: 随机种子
        :param stream: 随机流编号，测试集使用 Stream.test
        :return: cube 格式数据集
        """
        if n < 0:
            raise errors.RangeError(msg=f'n must be non-negative, got {n}')
        rng = make_rng(seed, stream)
        d = dist.d
        X = np.where(rng.integers(0, 2, size=(n, d), dtype=np.int8) == 1, 1, -1).astype(np.int64)
        v = np.array(dist.ltf.v, dtype=np.int64)
        clean = (X @ v >= dist.ltf.threshold).astype(np.int64)
        flips = rng.random(n) < float(dist.eta)
        y = np.where(flips, 1 - clean, clean)
        meta = {
            'v': format_signs(dist.ltf.v),
            's_star': str(dist.ltf.s_star),
            'eta': str(dist.eta),
            'seed': str(seed),
        }
        return Dataset(d=d, X=X, y=y, fmt=DatasetFormat.cube, meta=meta)

    @staticmethod
    def embedded_instance(*, v: tuple[int, ...], s_star: int, eta: float) -> MarginHalfspaceInstance:
        """
        阈值函数嵌入 d + 1 维单位球面上的齐次间隔半空间：
        x' = (x, 1) / sqrt(d + 1)，w* = (v, -theta) / sqrt(d + theta^2)，theta = 2 s_star - d - 1

        :param v: 符号向量
        :param s_star: 一致数阈值
        :param eta: 噪声率
        :return:
        """
        d = len(v)
        theta = 2 * s_star - d - 1
        w_star = np.append(np.array(v, dtype=np.float64), -theta) / math.sqrt(d + theta * theta)
        margin = 1 / (math.sqrt(d + theta * theta) * math.sqrt(d + 1))
        # 间隔略微收缩以吸收舍入误差
        return MarginHalfspaceInstance(w_star=w_star, gamma=margin * (1 - 1e-12), eta=float(eta))

    def homogeneous_embedding(self, dist: HardDistribution) -> MarginHalfspaceInstance:
        """硬分布的齐次间隔实例"""
        return self.embedded_instance(v=dist.ltf.v, s_star=dist.ltf.s_star, eta=float(dist.eta))

    @staticmethod
    def distribution_from_meta(meta: dict[str, str]) -> HardDistribution | None:
        """
        由齐次化数据集头部的 v、s_star、eta 还原硬分布，非齐次化数据集返回 None

        :param meta: 数据集头部键值
        :return:
        """
        if meta.get('homogenized') != '1':
            return None
        try:
            ltf = ThresholdLtf(v=parse_signs(meta['v']), s_star=int(meta['s_star']))
            eta = as_fraction(meta['eta'])
        except (KeyError, ValueError) as exc:
            raise errors.FormatError(msg=f'homogenized header is incomplete: {exc}', line=1) from exc
        return HardDistribution(ltf=ltf, eta=eta, eps_actual=fourier_service.tail_mass(ltf.d, ltf.s_star))

    def hard_to_learner_dataset(
        self,
        *,
        dist: HardDistribution,
        n: int,
        seed: int,
        homogenize: bool = False,
        stream: Stream = Stream.hard_sample,
    ) -> tuple[Dataset, MarginHalfspaceInstance | None]:
        """
        硬分布样本转为学习器可用的 sphere 数据集，标签 0 ↦ -1；
        齐次化时头部额外写入 homogenized 与 gamma，读回后可由 distribution_from_meta 还原 w*

        :param dist: 硬分布
        :param n: 样本数
        :param seed: 随机种子
        :param homogenize: 是否追加常数坐标得到齐次间隔实例
        :param stream: 随机流编号
        :return:
        """
        cube = self.sample_hard_dataset(dist=dist, n=n, seed=seed, stream=stream)
        y = np.where(cube.y == 1, 1, -1)
        meta = dict(cube.meta)
        if homogenize:
            X = np.hstack([cube.X, np.ones((n, 1))]) / math.sqrt(dist.d + 1)
            instance = self.homogeneous_embedding(dist)
            meta.update({'homogenized': '1', 'gamma': repr(instance.gamma)})
        else:
            X = cube.X / math.sqrt(dist.d)
            instance = None
        dataset = Dataset(d=X.shape[1], X=X, y=y, fmt=DatasetFormat.sphere, meta=meta)
        return dataset, instance


construction_service: ConstructionService = ConstructionService()
