#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from typing import Sequence

import numpy as np

from rcnlab.app.core_model.schema.model import as_vector, check_eta, check_open_unit
from rcnlab.app.dimreduce.schema.dimreduce import JlConfig, JlDiagnostics, JlMatrix, ReducedTrainResult
from rcnlab.app.learner.schema.learner import IterateTrace, LearnerParams
from rcnlab.app.learner.service.learner_service import learner_service
from rcnlab.app.simulate.schema.simulate import Dataset
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings
from rcnlab.utils.rng import Stream, make_rng


class DimreduceService:
    """JL 降维学习服务类"""

    @staticmethod
    def derive_jl_config(
        *, eps: float, delta: float, gamma: float, n: int, seed: int, m: int | None = None
    ) -> JlConfig:
        """
        beta = eps delta / (20 N)，beta' = eps / (2 N)，m = ceil(C_m ln(1 / beta) / gamma^2)

        :param eps: 精度
        :param delta: 置信度
        :param gamma: 间隔
        :param n: 训练样本数 N
        :param seed: 矩阵种子
        :param m: 覆盖的降维维度
        :return:
        """
        check_open_unit(eps, name='eps')
        check_open_unit(delta, name='delta')
        check_open_unit(gamma, name='gamma')
        if n < 1:
            raise errors.RangeError(msg=f'N must be positive, got {n}')
        beta = eps * delta * settings.JL_BETA_FACTOR / n
        beta_prime = eps * settings.JL_BETA_PRIME_FACTOR / n
        m_derived = math.ceil(settings.JL_CONSTANT_C_M * math.log(1 / beta) / gamma**2)
        return JlConfig(
            m=m_derived if m is None else m,
            seed=seed,
            beta=beta,
            gamma=gamma,
            beta_prime=beta_prime,
            m_derived=m_derived,
        )

    @staticmethod
    def sample_jl_matrix(*, config: JlConfig, d: int) -> JlMatrix:
        """
        每个元素独立均匀取 ±1/sqrt(m)

        :param config: JL 参数
        :param d: 原始维度
        :return:
        """
        if d < 1:
            raise errors.RangeError(msg=f'd must be positive, got {d}')
        rng = make_rng(config.seed, Stream.jl_matrix)
        scale = 1 / math.sqrt(config.m)
        bits = rng.integers(0, 2, size=(config.m, d), dtype=np.int8)
        entries = np.where(bits == 1, scale, -scale)
        return JlMatrix(entries=entries, seed=config.seed)

    @staticmethod
    def jl_apply(*, matrix: JlMatrix, x: Sequence[float] | np.ndarray) -> np.ndarray:
        """
        矩阵向量乘 Ax；二维输入按行投影

        :param matrix: JL 矩阵
        :param x: 向量 (d,) 或样本矩阵 (n, d)
        :return:
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != matrix.d:
            raise errors.DimensionError(msg=f'JL matrix expects dimension {matrix.d}, got {x.shape[-1]}')
        if x.ndim == 1:
            return matrix.entries @ x
        return x @ matrix.entries.T

    @staticmethod
    def derive_reduced_params(
        *, eps: float, delta: float, eta: float, gamma: float, T: int | None = None
    ) -> LearnerParams:
        """
        T = ceil((48 (1 - eta) / ((1 - 2 eta) gamma eps))^2 - 1)，mu = 1 / ((1 - eta) sqrt(T + 1))

        :param eps: 精度
        :param delta: 置信度
        :param eta: 噪声率
        :param gamma: 间隔
        :param T: 覆盖的迭代次数
        :return:
        """
        check_open_unit(eps, name='eps')
        check_open_unit(delta, name='delta')
        check_open_unit(gamma, name='gamma')
        check_eta(eta)
        T_derived = max(0, math.ceil((48 * (1 - eta) / ((1 - 2 * eta) * gamma * eps)) ** 2 - 1))
        if T is not None and T < 0:
            raise errors.RangeError(msg=f'T must be non-negative, got {T}')
        T_run = T_derived if T is None else T
        return LearnerParams(
            eps=eps,
            delta=delta,
            eta=eta,
            gamma=gamma,
            T=T_run,
            mu=1 / ((1 - eta) * math.sqrt(T_run + 1)),
            T_derived=T_derived,
            holdout_size=learner_service.holdout_size(eps=eps, delta=delta, T=T_run),
        )

    def _projected_rows(self, matrix: JlMatrix, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0], matrix.m))
        chunk = settings.LEARNER_EVAL_CHUNK
        for start in range(0, X.shape[0], chunk):
            out[start : start + chunk] = self.jl_apply(matrix=matrix, x=X[start : start + chunk])
        return out

    def margin_preservation_fraction(
        self, *, matrix: JlMatrix, w_star: np.ndarray, X: np.ndarray, gamma: float
    ) -> float:
        """
        |w*·x - (Aw*)·(Ax)| >= gamma / 2 的样本比例

        :param matrix: JL 矩阵
        :param w_star: 真实权重
        :param X: 样本矩阵
        :param gamma: 间隔
        :return:
        """
        if X.shape[0] == 0:
            return 0.0
        reduced_w = self.jl_apply(matrix=matrix, x=w_star)
        bad = 0
        chunk = settings.LEARNER_EVAL_CHUNK
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            diff = block @ w_star - self.jl_apply(matrix=matrix, x=block) @ reduced_w
            bad += int(np.count_nonzero(np.abs(diff) >= gamma / 2))
        return bad / X.shape[0]

    def norm_distortion_fraction(self, *, matrix: JlMatrix, X: np.ndarray, gamma: float) -> float:
        """
        | ||x||^2 - ||Ax||^2 | >= gamma / 2 的样本比例

        :param matrix: JL 矩阵
        :param X: 样本矩阵
        :param gamma: 间隔
        :return:
        """
        if X.shape[0] == 0:
            return 0.0
        bad = 0
        chunk = settings.LEARNER_EVAL_CHUNK
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            reduced = self.jl_apply(matrix=matrix, x=block)
            diff = np.einsum('ij,ij->i', block, block) - np.einsum('ij,ij->i', reduced, reduced)
            bad += int(np.count_nonzero(np.abs(diff) >= gamma / 2))
        return bad / X.shape[0]

    def matrix_diagnostics(
        self, *, matrix: JlMatrix, w_star: np.ndarray, X: np.ndarray, gamma: float, beta_prime: float
    ) -> JlDiagnostics:
        """
        好矩阵事件：两类失真比例都不超过 beta'，且 | ||Aw*||^2 - 1 | <= gamma / 2

        :param matrix: JL 矩阵
        :param w_star: 真实权重
        :param X: 样本矩阵
        :param gamma: 间隔
        :param beta_prime: 允许的失真比例
        :return:
        """
        margin_fraction = self.margin_preservation_fraction(matrix=matrix, w_star=w_star, X=X, gamma=gamma)
        norm_fraction = self.norm_distortion_fraction(matrix=matrix, X=X, gamma=gamma)
        reduced_w = self.jl_apply(matrix=matrix, x=w_star)
        w_star_norm_sq = float(reduced_w @ reduced_w)
        good = margin_fraction <= beta_prime and norm_fraction <= beta_prime and abs(w_star_norm_sq - 1) <= gamma / 2
        return JlDiagnostics(
            margin_fraction=margin_fraction,
            norm_fraction=norm_fraction,
            w_star_norm_sq=w_star_norm_sq,
            beta_prime=beta_prime,
            good=good,
        )

    def reduced_train(
        self,
        *,
        train: Dataset,
        holdout: Dataset,
        eps: float,
        delta: float,
        eta: float,
        gamma: float,
        jl: JlConfig,
        T: int | None = None,
        w_star: np.ndarray | None = None,
    ) -> ReducedTrainResult:
        """
        投影训练集，在 m 维空间运行 PSGD，将迭代点提升为 A^T w_t 并投影回单位球，
        在原始空间的留出集上选择假设

        :param train: 训练集
        :param holdout: 原始空间的留出集
        :param eps: 精度
        :param delta: 置信度
        :param eta: 噪声率
        :param gamma: 间隔
        :param jl: JL 参数
        :param T: 覆盖的迭代次数
        :param w_star: 真实权重，提供时计算降维空间的诊断与好矩阵事件
        :return:
        """
        train.require_sphere()
        params = self.derive_reduced_params(eps=eps, delta=delta, eta=eta, gamma=gamma, T=T)
        matrix = self.sample_jl_matrix(config=jl, d=train.d)
        log.info(f'JL 投影: d={train.d} -> m={matrix.m}')
        reduced = Dataset(d=matrix.m, X=self._projected_rows(matrix, train.X), y=train.y)

        reduced_star = None
        diagnostics = None
        if w_star is not None:
            w_star = as_vector(w_star, name='w_star')
            reduced_star = learner_service.project_to_ball(self.jl_apply(matrix=matrix, x=w_star))
            diagnostics = self.matrix_diagnostics(
                matrix=matrix,
                w_star=w_star,
                X=train.X,
                gamma=gamma,
                beta_prime=jl.beta_prime if jl.beta_prime is not None else jl.beta,
            )
            if not diagnostics.good:
                log.warning(f'JL 矩阵未满足好矩阵事件: {diagnostics.to_dict()}')

        trace = learner_service.run_psgd(train=reduced, params=params, w_star=reduced_star)
        lifted = trace.iterates @ matrix.entries
        norms = np.linalg.norm(lifted, axis=1)
        over = norms > 1.0
        lifted[over] /= norms[over, None]
        selected = learner_service.select_hypothesis(
            trace=IterateTrace(iterates=lifted, mu=trace.mu, eta=trace.eta), holdout=holdout
        )
        return ReducedTrainResult(
            config=jl,
            params=params,
            matrix=matrix,
            trace=trace,
            lifted=lifted,
            selected=selected,
            diagnostics=diagnostics,
        )


dimreduce_service: DimreduceService = DimreduceService()
