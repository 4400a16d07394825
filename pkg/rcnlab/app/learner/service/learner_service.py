#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from typing import Sequence

import numpy as np

from rcnlab.app.core_model.schema.model import as_vector, check_eta, check_open_unit
from rcnlab.app.core_model.service.primitives import leaky_relu_loss, sign_array, subgradient_field
from rcnlab.app.learner.schema.learner import (
    GuaranteeReport,
    IterateTrace,
    LearnerParams,
    SelectedHypothesis,
    TrainResult,
)
from rcnlab.app.simulate.schema.simulate import Dataset
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings


class LearnerService:
    """投影次梯度学习器服务类"""

    @staticmethod
    def derive_T(*, eps: float, eta: float, gamma: float) -> int:
        """T = ceil(16 (1 - eta)^2 / (gamma^2 eps^2) - 1)"""
        return max(0, math.ceil(16 * (1 - eta) ** 2 / (gamma**2 * eps**2) - 1))

    @staticmethod
    def step_size(*, eta: float, T: int) -> float:
        """mu = 2 / ((1 - eta) sqrt(T + 1))"""
        return 2 / ((1 - eta) * math.sqrt(T + 1))

    @staticmethod
    def holdout_size(*, eps: float, delta: float, T: int) -> int:
        """
        留出集大小 N' = ceil((2 / eps^2)(ln(T + 1) + ln(2 / delta)))，
        由 Hoeffding 不等式加 T + 1 个假设上的联合界得到

        :param eps: 精度
        :param delta: 置信度
        :param T: 迭代次数
        :return:
        """
        return math.ceil(2 / eps**2 * (math.log(T + 1) + math.log(2 / delta)))

    def derive_params(
        self,
        *,
        eps: float,
        delta: float,
        eta: float,
        gamma: float,
        T: int | None = None,
        w0: Sequence[float] | None = None,
    ) -> LearnerParams:
        """
        按公式推导 T 与 mu，T 可以被显式覆盖

        :param eps: 精度
        :param delta: 置信度
        :param eta: 噪声率
        :param gamma: 间隔
        :param T: 覆盖的迭代次数
        :param w0: 初始点，默认为零向量
        :return:
        """
        check_open_unit(eps, name='eps')
        check_open_unit(delta, name='delta')
        check_open_unit(gamma, name='gamma')
        check_eta(eta)
        T_derived = self.derive_T(eps=eps, eta=eta, gamma=gamma)
        if T is not None and T < 0:
            raise errors.RangeError(msg=f'T must be non-negative, got {T}')
        T_run = T_derived if T is None else T
        return LearnerParams(
            eps=eps,
            delta=delta,
            eta=eta,
            gamma=gamma,
            T=T_run,
            mu=self.step_size(eta=eta, T=T_run),
            w0=None if w0 is None else tuple(float(c) for c in w0),
            T_derived=T_derived,
            holdout_size=self.holdout_size(eps=eps, delta=delta, T=T_run),
        )

    @staticmethod
    def project_to_ball(w: Sequence[float]) -> np.ndarray:
        """
        投影到单位球：范数不超过 1 时原样返回，否则缩放到单位范数；
        范数超出 1 不到 BALL_NORM_SLACK 的向量视为已在球内，保证幂等

        :param w: 向量
        :return:
        """
        w = as_vector(w, name='w')
        norm = float(np.linalg.norm(w))
        if norm <= 1.0 + settings.BALL_NORM_SLACK:
            return w
        return w / norm

    def run_psgd(
        self, *, train: Dataset, params: LearnerParams, w_star: np.ndarray | None = None
    ) -> IterateTrace:
        """
        w_{t+1} = proj_B(w_t - mu g_N(w_t))，共 T + 1 个迭代点

        :param train: 训练集
        :param params: 学习参数
        :param w_star: 真实权重，提供时计算逐步诊断
        :return:
        """
        train.require_sphere()
        if train.n == 0:
            raise errors.LearnerError(msg='training set is empty')
        X, y = train.X, train.signed_y
        w = params.initial_point(train.d)
        T, mu, eta = params.T, params.mu, params.eta
        iterates = np.empty((T + 1, train.d))
        iterates[0] = w

        diagnose = w_star is not None
        if diagnose:
            w_star = as_vector(w_star, name='w_star')
            if w_star.shape[0] != train.d:
                raise errors.DimensionError(msg=f'w_star has dimension {w_star.shape[0]}, dataset has d={train.d}')
            star_signs = sign_array(X @ w_star)
            train_dis = np.empty(T + 1)
            grad_norm = np.empty(T + 1)
            regret = np.empty(T + 1)
            loss = np.empty(T + 1)
            slack = np.empty(T)
            step_sq = mu**2 * (1 - eta) ** 2

        log.info(f'PSGD 开始: N={train.n} d={train.d} T={T} mu={mu:.6g}')
        for t in range(T + 1):
            margins = X @ w
            signs = sign_array(margins)
            coef = 0.5 * ((1 - 2 * eta) * signs - y)
            g = np.einsum('i,ij->j', coef, X) / train.n
            if diagnose:
                train_dis[t] = np.mean(signs != star_signs)
                grad_norm[t] = np.linalg.norm(g)
                regret[t] = g @ (w - w_star)
                loss[t] = leaky_relu_loss(w, X, y, eta)
            if t == T:
                break
            w_next = self.project_to_ball(w - mu * g)
            if diagnose:
                before = float(np.sum((w - w_star) ** 2))
                after = float(np.sum((w_next - w_star) ** 2))
                slack[t] = before + step_sq - 2 * mu * regret[t] - after
            w = w_next
            iterates[t + 1] = w
            if settings.LEARNER_LOG_EVERY and (t + 1) % settings.LEARNER_LOG_EVERY == 0:
                log.debug(f'PSGD t={t + 1}/{T} |w|={np.linalg.norm(w):.6f}')

        if not diagnose:
            return IterateTrace(iterates=iterates, mu=mu, eta=eta)
        return IterateTrace(
            iterates=iterates,
            mu=mu,
            eta=eta,
            train_disagreement=train_dis,
            grad_norm=grad_norm,
            regret_terms=regret,
            contraction_slack=slack,
            loss=loss,
            w_star=w_star,
        )

    @staticmethod
    def iterate_errors(*, iterates: np.ndarray, data: Dataset) -> np.ndarray:
        """
        每个迭代点在数据集上的误分类率，按块计算

        :param iterates: 迭代点矩阵 (k, d)
        :param data: 数据集
        :return:
        """
        y = data.signed_y
        out = np.empty(iterates.shape[0])
        chunk = settings.LEARNER_EVAL_CHUNK
        for start in range(0, iterates.shape[0], chunk):
            block = iterates[start : start + chunk]
            preds = sign_array(data.X @ block.T)
            out[start : start + chunk] = np.count_nonzero(preds != y[:, None], axis=0) / data.n
        return out

    @staticmethod
    def iterate_disagreements(*, iterates: np.ndarray, X: np.ndarray, w_ref: np.ndarray) -> np.ndarray:
        """
        每个迭代点与参考权重在样本矩阵上的分歧率

        :param iterates: 迭代点矩阵 (k, d)
        :param X: 样本矩阵
        :param w_ref: 参考权重
        :return:
        """
        ref = sign_array(X @ w_ref)
        out = np.empty(iterates.shape[0])
        chunk = settings.LEARNER_EVAL_CHUNK
        for start in range(0, iterates.shape[0], chunk):
            block = iterates[start : start + chunk]
            disagree = sign_array(X @ block.T) != ref[:, None]
            out[start : start + chunk] = np.count_nonzero(disagree, axis=0) / X.shape[0]
        return out

    def select_hypothesis(self, *, trace: IterateTrace, holdout: Dataset) -> SelectedHypothesis:
        """
        选取留出集误分类率最小的迭代点，并列时取最小下标

        :param trace: 迭代轨迹
        :param holdout: 留出集
        :return:
        """
        if len(trace) == 0:
            raise errors.LearnerError(msg='cannot select from an empty trace')
        holdout.require_sphere()
        if holdout.n == 0:
            raise errors.LearnerError(msg='holdout set is empty')
        if holdout.d != trace.d:
            raise errors.DimensionError(msg=f'holdout has d={holdout.d}, iterates have d={trace.d}')
        errs = self.iterate_errors(iterates=trace.iterates, data=holdout)
        index = int(np.argmin(errs))
        return SelectedHypothesis(w=trace.iterates[index].copy(), index=index, holdout_error=float(errs[index]))

    @staticmethod
    def evaluate_error(*, w: Sequence[float], data: Dataset) -> float:
        """
        误分类率 Pr[sign(w·x) != y]

        :param w: 权重向量
        :param data: 数据集
        :return:
        """
        if data.n == 0:
            raise errors.LearnerError(msg='cannot evaluate on an empty dataset')
        w = as_vector(w, name='w')
        if w.shape[0] != data.d:
            raise errors.DimensionError(msg=f'w has dimension {w.shape[0]}, dataset has d={data.d}')
        return float(np.count_nonzero(sign_array(data.X @ w) != data.signed_y) / data.n)

    def guarantee_check(
        self,
        *,
        trace: IterateTrace,
        params: LearnerParams,
        train: Dataset,
        test: Dataset,
        gamma: float,
        test_rows: int | None = None,
    ) -> GuaranteeReport:
        """
        遗憾界、逐步收缩不等式以及 min_t 测试分歧 <= E1 + E2 + E3 的分解检查

        :param trace: 带诊断的迭代轨迹
        :param params: 学习参数
        :param train: 训练集
        :param test: 新鲜测试集
        :param gamma: 训练集上 w* 的间隔
        :param test_rows: 只用测试集前 test_rows 行计算逐迭代点分歧，None 表示全部
        :return:
        """
        if not trace.has_diagnostics:
            raise errors.LearnerError(msg='guarantee check requires a trace recorded with w_star')
        eta, T = trace.eta, trace.T
        q = 1 - 2 * eta
        root = math.sqrt(T + 1)
        avg_regret = float(np.mean(trace.regret_terms))
        regret_bound = 2 * (1 - eta) / root
        min_slack = float(trace.contraction_slack.min()) if T > 0 else 0.0
        g_star = subgradient_field(trace.w_star, train.X, train.signed_y, eta)
        X_test = test.X if test_rows is None else test.X[:test_rows]
        test_dis = self.iterate_disagreements(iterates=trace.iterates, X=X_test, w_ref=trace.w_star)
        e1 = 2 * (1 - eta) / (q * gamma * root)
        e2 = 2 * float(np.linalg.norm(g_star)) / (q * gamma)
        e3 = float(np.mean(test_dis - trace.train_disagreement))
        argmin = int(np.argmin(test_dis))
        report = GuaranteeReport(
            T=T,
            avg_regret=avg_regret,
            regret_bound=regret_bound,
            regret_holds=avg_regret <= regret_bound + settings.LEARNER_CHECK_ATOL,
            contraction_min_slack=min_slack,
            contraction_holds=min_slack >= -settings.LEARNER_CHECK_ATOL,
            e1=e1,
            e2=e2,
            e3=e3,
            min_test_disagreement=float(test_dis[argmin]),
            argmin_test_disagreement=argmin,
            decomposition_holds=float(test_dis[argmin]) <= e1 + e2 + e3 + settings.LEARNER_DECOMP_ATOL,
            eps_implied=4 * (1 - eta) / (gamma * root),
            test_rows=int(X_test.shape[0]),
        )
        if not report.holds:
            log.warning(f'保证检查未通过: {report.to_dict()}')
        return report

    def train_and_select(
        self,
        *,
        train: Dataset,
        holdout: Dataset,
        params: LearnerParams,
        w_star: np.ndarray | None = None,
        test: Dataset | None = None,
        gamma: float | None = None,
        test_rows: int | None = None,
    ) -> TrainResult:
        """
        run_psgd 后在留出集上选择假设；已知 w* 且提供测试集时附带保证检查

        :param train: 训练集
        :param holdout: 留出集
        :param params: 学习参数
        :param w_star: 真实权重
        :param test: 测试集
        :param gamma: 真实间隔，默认取 params.gamma
        :param test_rows: 保证检查使用的测试集行数，None 表示全部
        :return:
        """
        trace = self.run_psgd(train=train, params=params, w_star=w_star)
        selected = self.select_hypothesis(trace=trace, holdout=holdout)
        guarantee = None
        if w_star is not None and test is not None:
            guarantee = self.guarantee_check(
                trace=trace,
                params=params,
                train=train,
                test=test,
                gamma=params.gamma if gamma is None else gamma,
                test_rows=test_rows,
            )
        log.info(f'选中迭代点 index={selected.index} holdout_error={selected.holdout_error:.6f}')
        return TrainResult(params=params, trace=trace, selected=selected, guarantee=guarantee)


learner_service: LearnerService = LearnerService()
