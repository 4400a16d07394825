#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import numpy as np

from rcnlab.app.core_model.schema.model import MarginHalfspaceInstance, check_eta
from rcnlab.app.core_model.service.primitives import sign_array
from rcnlab.app.simulate.schema.simulate import Dataset, SimulatorConfig
from rcnlab.common.enums import DatasetFormat, SignLabel, WStarMode
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings
from rcnlab.utils.rng import Stream, make_rng


class SimulateService:
    """RCN 间隔半空间数据生成服务类"""

    @staticmethod
    def make_instance(*, d: int, gamma: float, eta: float, seed: int, mode: WStarMode) -> MarginHalfspaceInstance:
        """
        构造真实模型，random_unit 模式使用独立的 w_star 随机流

        :param d: 维度
        :param gamma: 间隔
        :param eta: 噪声率
        :param seed: 种子
        :param mode: w* 生成方式
        :return:
        """
        if WStarMode(mode) == WStarMode.first_axis:
            w_star = np.zeros(d)
            w_star[0] = 1.0
        else:
            z = make_rng(seed, Stream.w_star).standard_normal(d)
            w_star = z / np.linalg.norm(z)
        return MarginHalfspaceInstance(w_star=w_star, gamma=gamma, eta=eta)

    @staticmethod
    def draw_margin_radii(
        *, d: int, gamma: float, size: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        抽取 r = |w*·x| 的候选值，目标是球面均匀分布下 r 在 [gamma, 1) 上的条件密度 ∝ (1 - r^2)^((d-3)/2)

        d <= 3 时直接反演；d > 3 时对数密度是凹的，用切点处的指数包络做一维拒绝，接受率有不依赖 d、gamma 的下界

        :param d: 维度
        :param gamma: 间隔
        :param size: 候选数
        :param rng: 随机数生成器
        :return: 候选值与接受掩码
        """
        U = rng.random(size)
        if d == 1:
            return np.ones(size), np.ones(size, dtype=bool)
        if d == 2:
            return np.cos(U * np.arccos(gamma)), np.ones(size, dtype=bool)
        if d == 3:
            return gamma + U * (1.0 - gamma), np.ones(size, dtype=bool)
        k = (d - 3) / 2
        r0 = max(gamma, 1.0 / np.sqrt(2 * k + 1))
        rate = 2 * k * r0 / (1.0 - r0**2)
        # [gamma, 1) 上截断指数分布的反函数
        r = gamma - np.log1p(U * np.expm1(-rate * (1.0 - gamma))) / rate
        with np.errstate(divide='ignore'):
            log_ratio = k * (np.log1p(-(r**2)) - np.log1p(-(r0**2))) + rate * (r - r0)
            accepted = np.log(rng.random(size)) <= log_ratio
        return r, accepted

    def sample_margin_point(self, *, instance: MarginHalfspaceInstance, rng: np.random.Generator) -> np.ndarray:
        """
        采样一个球面上均匀且满足 |w*·x| >= gamma 的点

        :param instance: 真实模型
        :param rng: 随机数生成器
        :return:
        """
        return self.sample_margin_points(instance=instance, n=1, rng=rng)[0]

    def sample_margin_points(
        self, *, instance: MarginHalfspaceInstance, n: int, rng: np.random.Generator
    ) -> np.ndarray:
        """
        从球面均匀分布在 |w*·x| >= gamma 上的条件分布中抽取 n 个点

        先抽 r = |w*·x| 与符号，再在 w* 的正交补上取均匀方向，x = ±r·w* + sqrt(1 - r^2)·u

        :param instance: 真实模型
        :param n: 样本数
        :param rng: 随机数生成器
        :return:
        """
        d, w_star, gamma = instance.d, instance.w_star, instance.gamma
        out = np.empty((n, d))
        filled = 0
        streak = 0  # 连续拒绝次数
        while filled < n:
            batch = min(settings.SIMULATE_BATCH_SIZE, 2 * (n - filled) + 16)
            r, ok = self.draw_margin_radii(d=d, gamma=gamma, size=batch, rng=rng)
            signs = np.where(rng.random(batch) < 0.5, -1.0, 1.0)
            tail = np.zeros((batch, d))
            if d > 1:
                Z = rng.standard_normal((batch, d))
                Z -= np.outer(Z @ w_star, w_star)
                norms = np.linalg.norm(Z, axis=1)
                ok &= norms > 0
                tail[ok] = Z[ok] / norms[ok, None]
            X = (signs * r)[:, None] * w_star + np.sqrt(1.0 - r**2)[:, None] * tail
            ok &= np.abs(X @ w_star) >= gamma
            idx = np.flatnonzero(ok)
            if idx.size == 0:
                streak += batch
            else:
                gaps = np.diff(np.concatenate(([-1], idx))) - 1
                gaps[0] += streak
                if int(gaps.max()) >= settings.SIMULATE_MAX_REJECTIONS:
                    streak = int(gaps.max())
                else:
                    streak = batch - 1 - int(idx[-1])
                    take = idx[: n - filled]
                    out[filled : filled + take.size] = X[take]
                    filled += take.size
                    continue
            if streak >= settings.SIMULATE_MAX_REJECTIONS:
                raise errors.GenerationError(
                    msg=f'{settings.SIMULATE_MAX_REJECTIONS} consecutive rejections in the margin sampler, '
                    f'd={d}, gamma={gamma}'
                )
        return out

    @staticmethod
    def apply_rcn(*, clean_label: int, eta: float, rng: np.random.Generator) -> SignLabel:
        """
        以概率 eta 翻转标签，只消耗一次均匀分布抽样

        :param clean_label: 干净标签
        :param eta: 噪声率
        :param rng: 随机数生成器
        :return:
        """
        label = SignLabel(int(clean_label))
        return SignLabel(-label) if rng.random() < eta else label

    @staticmethod
    def apply_rcn_batch(*, clean: np.ndarray, eta: float, rng: np.random.Generator) -> np.ndarray:
        """
        向量化的 apply_rcn，每个标签消耗一次均匀分布抽样

        :param clean: 干净标签 ±1
        :param eta: 噪声率
        :param rng: 随机数生成器
        :return:
        """
        flips = rng.random(clean.shape[0]) < eta
        return np.where(flips, -clean, clean)

    def sample_examples(
        self, *, instance: MarginHalfspaceInstance, n: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        从模型中独立同分布抽取 n 个带噪样本

        :param instance: 真实模型
        :param n: 样本数
        :param rng: 随机数生成器
        :return:
        """
        check_eta(instance.eta)
        X = self.sample_margin_points(instance=instance, n=n, rng=rng)
        clean = sign_array(X @ instance.w_star).astype(np.int64)
        return X, self.apply_rcn_batch(clean=clean, eta=instance.eta, rng=rng)

    def generate_dataset(
        self, *, config: SimulatorConfig, stream: Stream = Stream.train
    ) -> tuple[Dataset, MarginHalfspaceInstance]:
        """
        生成数据集，结果只依赖于配置和随机流编号

        :param config: 模拟器参数
        :param stream: 随机流编号，holdout 与 test 使用独立的流
        :return:
        """
        instance = self.make_instance(
            d=config.d, gamma=config.gamma, eta=config.eta, seed=config.seed, mode=config.w_star_mode
        )
        rng = make_rng(config.seed, stream)
        X, y = self.sample_examples(instance=instance, n=config.n, rng=rng)
        log.debug(f'生成数据集 stream={Stream(stream).name} d={config.d} n={config.n}')
        dataset = Dataset(d=config.d, X=X, y=y, fmt=DatasetFormat.sphere, provenance=config)
        return dataset, instance


simulate_service: SimulateService = SimulateService()
