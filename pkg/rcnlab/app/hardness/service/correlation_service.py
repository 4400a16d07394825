#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses
import math

from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from rcnlab.app.hardness.schema.hardness import (
    CorrelationBound,
    CorrelationReport,
    DecayReport,
    HardDistribution,
    SmallDegreeReport,
    ThresholdLtf,
)
from rcnlab.app.hardness.service.fourier_service import fourier_service
from rcnlab.app.hardness.service.kravchuk_service import kravchuk_service
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings
from rcnlab.utils.hypercube import agreement, iter_cube
from rcnlab.utils.rational import as_fraction, log_fraction
from rcnlab.utils.pool import run_ordered
from rcnlab.utils.rng import Stream, derive_seed, make_rng
from rcnlab.utils.serializers import encode_csv, encode_json

CORRELATION_COLUMNS = (
    'd',
    's_star',
    'eps_actual',
    'inner_product',
    'e_fvfu',
    'chi_pair',
    'chi_self',
    'bound_rhs',
    'min_C',
)


class CorrelationService:
    """硬分布族的条件概率、成对相关与 R_k 分解服务类"""

    @staticmethod
    def make_distribution(
        *,
        v: Sequence[int],
        eta: float | Fraction | str,
        s_star: int | None = None,
        target_mass: float | Fraction | str | None = None,
    ) -> HardDistribution:
        """
        由 s_star 或目标尾部质量构造 D_v

        :param v: 符号向量
        :param eta: 噪声率，取值 [0, 1/2)
        :param s_star: 一致数阈值
        :param target_mass: 目标质量，与 s_star 二选一
        :return:
        """
        eta = as_fraction(eta)
        if not 0 <= eta < Fraction(1, 2):
            raise errors.RangeError(msg=f'eta must lie in [0, 1/2), got {eta}')
        if (s_star is None) == (target_mass is None):
            raise errors.RangeError(msg='exactly one of s_star and target_mass must be given')
        if s_star is None:
            s_star = fourier_service.threshold_for_mass(len(v), target_mass).s_star
        ltf = ThresholdLtf(v=tuple(v), s_star=s_star)
        return HardDistribution(ltf=ltf, eta=eta, eps_actual=fourier_service.tail_mass(ltf.d, s_star))

    @staticmethod
    def _check_pair(dist_v: HardDistribution, dist_u: HardDistribution) -> None:
        if dist_v.d != dist_u.d:
            raise errors.DimensionError(msg=f'distributions have different d: {dist_v.d} and {dist_u.d}')
        if dist_v.ltf.s_star != dist_u.ltf.s_star or dist_v.eta != dist_u.eta:
            raise errors.RangeError(msg='distributions must share s_star and eta')

    @staticmethod
    def pmf_conditional(dist: HardDistribution, x: Sequence[int], label: int) -> Fraction:
        """
        A_v(x) = (eta + (1 - 2 eta) f_v(x)) / (eta + (1 - 2 eta) E[f_v]) 2^(-d)，
        B_v(x) = (1 - eta - (1 - 2 eta) f_v(x)) / (1 - eta - (1 - 2 eta) E[f_v]) 2^(-d)

        :param dist: 硬分布
        :param x: 超立方体顶点
        :param label: 1 对应 A_v，0 对应 B_v
        :return:
        """
        f = fourier_service.ltf_eval(dist.ltf, x)
        if label == 1:
            num, den = dist.eta + dist.q * f, dist.p1
        elif label == 0:
            num, den = 1 - dist.eta - dist.q * f, dist.p0
        else:
            raise errors.RangeError(msg=f'label must be 0 or 1, got {label}')
        if den == 0:
            raise errors.RangeError(msg=f'label {label} has probability zero under this distribution')
        return num / den / (1 << dist.d)

    @staticmethod
    def indicator_count(dist: HardDistribution) -> int:
        """穷举 f_v = 1 的顶点个数"""
        return sum(int(np.sum(f)) for _, f in fourier_service.indicator_chunks(dist.ltf))

    def pmf_conditional_enumerated(self, dist: HardDistribution, x: Sequence[int], label: int) -> Fraction:
        """
        以穷举求得的 Pr[y = label] 归一化联合概率，作为 pmf_conditional 的对照路径

        :param dist: 硬分布
        :param x: 超立方体顶点
        :param label: 标签 0 / 1
        :return:
        """
        size = 1 << dist.d
        ones = self.indicator_count(dist)
        p1 = (dist.eta * size + dist.q * ones) / size
        f = fourier_service.ltf_eval(dist.ltf, x)
        joint1 = (dist.eta + dist.q * f) / size
        if label == 1:
            return joint1 / p1
        return (Fraction(1, size) - joint1) / (1 - p1)

    def pmf_mass(self, dist: HardDistribution, label: int) -> Fraction:
        """
        穷举 sum_x A_v(x) 或 sum_x B_v(x)

        :param dist: 硬分布
        :param label: 标签 0 / 1
        :return:
        """
        ones = self.indicator_count(dist)
        zeros = (1 << dist.d) - ones
        v = dist.ltf.v
        total = Fraction(0)
        if ones:
            total += ones * self.pmf_conditional(dist, v, label)
        if zeros:
            total += zeros * self.pmf_conditional(dist, tuple(-c for c in v), label)
        return total

    @staticmethod
    def class_counts(dist_v: HardDistribution, dist_u: HardDistribution) -> dict[tuple[int, int], int]:
        """
        穷举 (f_v, f_u) 四类顶点个数

        :param dist_v: 硬分布 D_v
        :param dist_u: 硬分布 D_u
        :return:
        """
        d = dist_v.d
        if d > settings.HARDNESS_ENUM_MAX_D:
            raise errors.BudgetExceededError(
                msg=f'exact correlation enumerates 2^d points and is capped at d={settings.HARDNESS_ENUM_MAX_D}, '
                f'got d={d}; use approximate mode'
            )
        counts = {(1, 1): 0, (1, 0): 0, (0, 1): 0, (0, 0): 0}
        for masks in iter_cube(d, settings.HARDNESS_ENUM_CHUNK):
            fv = agreement(masks, dist_v.ltf.mask, d) >= dist_v.ltf.s_star
            fu = agreement(masks, dist_u.ltf.mask, d) >= dist_u.ltf.s_star
            both = int(np.count_nonzero(fv & fu))
            only_v = int(np.count_nonzero(fv)) - both
            only_u = int(np.count_nonzero(fu)) - both
            counts[1, 1] += both
            counts[1, 0] += only_v
            counts[0, 1] += only_u
            counts[0, 0] += masks.size - both - only_v - only_u
        return counts

    def _chi_direct(self, dist_v: HardDistribution, dist_u: HardDistribution, counts: dict) -> Fraction:
        """按类直接求和 sum_{x, y} D_v(x, y) D_u(x, y) / D_0(x, y) - 1"""
        d = dist_v.d
        size = 1 << d
        total = Fraction(0)
        for (fv, fu), count in counts.items():
            if not count:
                continue
            x_v, x_u = self._representative(dist_v, fv), self._representative(dist_u, fu)
            for label, p in ((1, dist_v.p1), (0, dist_v.p0)):
                if p == 0:
                    continue
                joint_v = p * self.pmf_conditional(dist_v, x_v, label)
                joint_u = p * self.pmf_conditional(dist_u, x_u, label)
                total += count * joint_v * joint_u / (p / size)
        return total - 1

    @staticmethod
    def _representative(dist: HardDistribution, f: int) -> tuple[int, ...]:
        """f_v 取给定值的一个顶点，pmf 只依赖于 f_v(x)"""
        v = dist.ltf.v
        if f:
            return v
        return tuple(-c for c in v)

    @staticmethod
    def rd_bound(d: int, s_star: int) -> Fraction:
        """|R_d| <= 2^(-2d) C(d - 1, s_star - 1)^2"""
        edge = math.comb(d - 1, s_star - 1) if s_star >= 1 else 0
        return Fraction(edge * edge, 1 << (2 * d))

    def rk_decomposition(self, dist_v: HardDistribution, dist_u: HardDistribution) -> tuple[Fraction, ...]:
        """
        R_k = C(d, k) c_k^2 K(d, d - m, k)，m 为 v 与 u 的一致坐标数，sum_k R_k = E[f_v f_u]

        :param dist_v: 硬分布 D_v
        :param dist_u: 硬分布 D_u
        :return:
        """
        self._check_pair(dist_v, dist_u)
        d, s_star = dist_v.d, dist_v.ltf.s_star
        m = d - (dist_v.ltf.mask ^ dist_u.ltf.mask).bit_count()
        return tuple(
            math.comb(d, k)
            * fourier_service.level_coefficient(d, s_star, k) ** 2
            * kravchuk_service.kravchuk(d, d - m, k)
            for k in range(d + 1)
        )

    @staticmethod
    def baseline_error(dist: HardDistribution) -> Fraction:
        """
        最优常数假设的误差 min(Pr[y = 1], Pr[y = 0])，E[f_v] <= 1/2 时为 eta + (1 - 2 eta) E[f_v]

        :param dist: 硬分布
        :return:
        """
        return min(dist.p1, dist.p0)

    @staticmethod
    def correlation_bound_check(
        dist_v: HardDistribution, dist_u: HardDistribution, C: float, e_fvfu: Fraction | float
    ) -> CorrelationBound:
        """
        E[f_v f_u] <= C ln^2(d / eps) eps^2 |v·u| / d + eps^2，eps = eps_actual

        :param dist_v: 硬分布 D_v
        :param dist_u: 硬分布 D_u
        :param C: 常数
        :param e_fvfu: E[f_v f_u]
        :return:
        """
        d, eps = dist_v.d, dist_v.eps_actual
        inner = sum(a * b for a, b in zip(dist_v.ltf.v, dist_u.ltf.v))
        met = inner == 0 or 0 < abs(inner) <= settings.CORRELATION_HYPOTHESIS_RATIO * d
        if eps == 0:
            return CorrelationBound(
                lhs=e_fvfu, rhs=0.0, C=C, holds=None, hypothesis_met=False, min_C=None, ratio=None
            )
        eps_sq = float(eps * eps)
        log_term = log_fraction(Fraction(d) / eps)
        scale = log_term**2 * eps_sq * abs(inner) / d
        rhs = C * scale + eps_sq
        lhs = float(e_fvfu)
        ratio = float(e_fvfu / (eps * eps)) if isinstance(e_fvfu, Fraction) else lhs / eps_sq
        if not met:
            return CorrelationBound(lhs=e_fvfu, rhs=rhs, C=C, holds=None, hypothesis_met=False, min_C=None, ratio=ratio)
        if scale == 0:
            min_C = 0.0 if lhs <= eps_sq else None
        else:
            min_C = max(0.0, (lhs - eps_sq) / scale)
        return CorrelationBound(
            lhs=e_fvfu, rhs=rhs, C=C, holds=lhs <= rhs, hypothesis_met=True, min_C=min_C, ratio=ratio
        )

    def _monte_carlo_joint(
        self, dist_v: HardDistribution, dist_u: HardDistribution, samples: int, seed: int
    ) -> tuple[float, float]:
        rng = make_rng(seed, Stream.verify)
        d = dist_v.d
        v = np.array(dist_v.ltf.v, dtype=np.int8)
        u = np.array(dist_u.ltf.v, dtype=np.int8)
        hits = np.empty(samples, dtype=np.float64)
        chunk = max(1, settings.HARDNESS_ENUM_CHUNK // d)
        for start in range(0, samples, chunk):
            size = min(chunk, samples - start)
            X = np.where(rng.integers(0, 2, size=(size, d), dtype=np.int8) == 1, 1, -1).astype(np.int8)
            fv = np.count_nonzero(X == v, axis=1) >= dist_v.ltf.s_star
            fu = np.count_nonzero(X == u, axis=1) >= dist_u.ltf.s_star
            hits[start : start + size] = fv & fu
        mean = float(hits.mean())
        stderr = float(hits.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
        return mean, stderr

    def correlation_pair(
        self,
        dist_v: HardDistribution,
        dist_u: HardDistribution,
        *,
        C: float = 10.0,
        approx: bool = False,
        samples: int | None = None,
        seed: int = 0,
    ) -> CorrelationReport:
        """
        精确计算 chi_{D_0}(D_v, D_u) 与 chi^2(D_v, D_0)：直接求和与 R_k 公式两条路径必须一致；
        超出穷举预算且 approx=True 时用蒙特卡洛估计 E[f_v f_u]

        :param dist_v: 硬分布 D_v
        :param dist_u: 硬分布 D_u
        :param C: 相关界中的常数
        :param approx: 超出预算时是否允许近似
        :param samples: 蒙特卡洛样本数
        :param seed: 蒙特卡洛种子
        :return:
        """
        self._check_pair(dist_v, dist_u)
        if dist_v.eta == 0:
            raise errors.RangeError(msg='correlations require eta > 0')
        d = dist_v.d
        eps = dist_v.eps_actual
        q, p1, p0 = dist_v.q, dist_v.p1, dist_v.p0
        kappa = 1 / (p0 * p1)  # kappa_0 + kappa_1
        inner = sum(a * b for a, b in zip(dist_v.ltf.v, dist_u.ltf.v))
        variance = eps - eps * eps
        chi_self = q * q * kappa * variance
        noise_floor = dist_v.eta * (1 - dist_v.eta)

        approximate = d > settings.HARDNESS_ENUM_MAX_D
        stderr = None
        rk_terms = None
        if approximate:
            if not approx:
                raise errors.BudgetExceededError(
                    msg=f'exact correlation is capped at d={settings.HARDNESS_ENUM_MAX_D}, got d={d}; '
                    'pass approx to use a Monte-Carlo estimate'
                )
            e_fvfu, stderr = self._monte_carlo_joint(
                dist_v, dist_u, samples or settings.MONTE_CARLO_DEFAULT_SAMPLES, seed
            )
            covariance = e_fvfu - float(eps * eps)
            chi_pair = float(q * q * kappa) * covariance
            log.info(f'蒙特卡洛估计 E[f_v f_u] = {e_fvfu:.6g} ± {stderr:.2g}')
        else:
            counts = self.class_counts(dist_v, dist_u)
            e_fvfu = Fraction(counts[1, 1], 1 << d)
            rk_terms = self.rk_decomposition(dist_v, dist_u)
            covariance = e_fvfu - eps * eps
            chi_pair = q * q * kappa * covariance
            chi_direct = self._chi_direct(dist_v, dist_u, counts)
            ones = counts[1, 1] + counts[1, 0]
            self_counts = {(1, 1): ones, (1, 0): 0, (0, 1): 0, (0, 0): (1 << d) - ones}
            chi_self_direct = self._chi_direct(dist_v, dist_v, self_counts)
            if sum(rk_terms) != e_fvfu or chi_direct != chi_pair or chi_self_direct != chi_self:
                raise errors.VerificationError(
                    msg='formula and enumeration paths disagree',
                    data={
                        'v': dist_v.ltf.v,
                        'u': dist_u.ltf.v,
                        's_star': dist_v.ltf.s_star,
                        'rk_sum': sum(rk_terms),
                        'e_fvfu': e_fvfu,
                        'chi_pair': chi_pair,
                        'chi_pair_direct': chi_direct,
                    },
                )

        chi_pair_lemma_rhs = 2 * q * covariance
        chi_self_lemma_rhs = q * variance
        chi_pair_corrected = q * q * covariance / noise_floor
        chi_self_corrected = q * q * variance / noise_floor
        corrected_holds = (covariance < 0 or chi_pair <= chi_pair_corrected) and chi_self <= chi_self_corrected
        return CorrelationReport(
            d=d,
            s_star=dist_v.ltf.s_star,
            eta=dist_v.eta,
            v=dist_v.ltf.v,
            u=dist_u.ltf.v,
            inner_product=inner,
            agreement=(d + inner) // 2,
            eps_actual=eps,
            e_fv=eps,
            e_fu=dist_u.eps_actual,
            e_fvfu=e_fvfu,
            covariance=covariance,
            chi_pair=chi_pair,
            chi_self=chi_self,
            chi_pair_lemma_rhs=chi_pair_lemma_rhs,
            chi_self_lemma_rhs=chi_self_lemma_rhs,
            chi_pair_lemma_holds=bool(chi_pair <= chi_pair_lemma_rhs),
            chi_self_lemma_holds=bool(chi_self <= chi_self_lemma_rhs),
            chi_pair_corrected_rhs=chi_pair_corrected,
            chi_self_corrected_rhs=chi_self_corrected,
            corrected_holds=bool(corrected_holds),
            baseline_error=self.baseline_error(dist_v),
            rk_terms=rk_terms,
            bound=self.correlation_bound_check(dist_v, dist_u, C, e_fvfu),
            approximate=approximate,
            stderr=stderr,
        )

    @staticmethod
    def rk_decay_search(rk_terms: Sequence[Fraction], d: int, eps: Fraction) -> DecayReport:
        """
        最小的 lo 使 sum_{k=lo}^{d-lo} |R_k| <= eps^2 / d，报告 c = lo / ln(d / eps)

        :param rk_terms: R_0 ... R_d
        :param d: 维度
        :param eps: eps_actual
        :return:
        """
        if eps <= 0:
            raise errors.RangeError(msg='decay search requires eps_actual > 0')
        threshold = eps * eps / d
        log_term = log_fraction(Fraction(d) / eps)
        magnitudes = [abs(r) for r in rk_terms]
        for lo in range(d // 2 + 2):
            band = sum(magnitudes[lo : d - lo + 1], Fraction(0))
            if band <= threshold:
                c = lo / log_term if log_term > 0 else None
                return DecayReport(d=d, log_term=log_term, lo=lo, c=c, band_sum=band, threshold=threshold)
        raise AssertionError('unreachable: the empty band always satisfies the threshold')

    @staticmethod
    def small_degree_check(
        rk_terms: Sequence[Fraction], d: int, eps: Fraction, inner_product: int, c: float
    ) -> SmallDegreeReport:
        """
        低层 1 <= k <= c ln(d / eps) 上 |R_k| / (eps^2 (c ln(d / eps)) |v·u| / d) 的最大值

        :param rk_terms: R_0 ... R_d
        :param d: 维度
        :param eps: eps_actual
        :param inner_product: v·u
        :param c: 层级常数
        :return:
        """
        if eps <= 0:
            raise errors.RangeError(msg='small-degree check requires eps_actual > 0')
        width = c * log_fraction(Fraction(d) / eps)
        k_max = min(d, math.floor(width))
        met = abs(inner_product) / d <= d ** (c - 0.5)
        scale = float(eps * eps) * width * abs(inner_product) / d
        low = [abs(rk_terms[k]) for k in range(1, k_max + 1)]
        if not low:
            multiplier = 0.0
        elif scale == 0:
            multiplier = 0.0 if all(r == 0 for r in low) else None
        else:
            multiplier = max(float(r) for r in low) / scale
        return SmallDegreeReport(
            d=d,
            c=c,
            k_max=k_max,
            hypothesis_met=met,
            multiplier=multiplier,
            holds=multiplier is not None and multiplier <= 4,
        )

    def correlate_family(
        self, dists: Sequence[HardDistribution], *, C: float = 10.0, approx: bool = False, parallel: int = 1
    ) -> list[CorrelationReport]:
        """
        对一族分布的全部无序对 i < j 计算相关性报告，顺序与输入一致

        :param dists: 共享 d、s_star 与 eta 的硬分布
        :param C: 相关界中的常数
        :param approx: 超出穷举预算时是否允许近似
        :param parallel: 最大并行进程数
        :return:
        """
        count = len(dists)
        pairs = [(dists[i], dists[j], C, approx, derive_seed(i, j)) for i in range(count) for j in range(i + 1, count)]
        log.info(f'计算 {len(dists)} 个分布的 {len(pairs)} 个成对相关')
        return run_ordered(_correlate_task, pairs, parallel)

    @staticmethod
    def reports_json(reports: Sequence[CorrelationReport]) -> bytes:
        """相关性报告的 JSON 文本"""
        return encode_json(
            {
                'schema': 'correlation',
                'version': settings.SCHEMA_VERSION_CORRELATION,
                'reports': [report.to_dict() for report in reports],
            }
        )

    @staticmethod
    def reports_csv(reports: Sequence[CorrelationReport]) -> str:
        """相关性报告的 CSV 文本"""
        return encode_csv(
            'correlation',
            settings.SCHEMA_VERSION_CORRELATION,
            CORRELATION_COLUMNS,
            (report.to_row() for report in reports),
        )

    def rk_report(self, report: CorrelationReport, *, c: float | None = None) -> dict[str, Any]:
        """
        R_k 分解、R_d 边界、中间层衰减与低层检查的汇总

        :param report: 精确模式的相关性报告
        :param c: 低层检查使用的常数，默认取衰减搜索得到的 c
        :return:
        """
        if report.rk_terms is None:
            raise errors.RangeError(msg='the R_k decomposition requires an exact report')
        d, eps = report.d, report.eps_actual
        decay = small = None
        if eps > 0:
            decay = self.rk_decay_search(report.rk_terms, d, eps)
            level = c if c is not None else decay.c
            if level is not None and level > 0:
                small = self.small_degree_check(report.rk_terms, d, eps, report.inner_product, level)
        rd = self.rd_bound(d, report.s_star)
        return {
            'schema': 'rk',
            'version': settings.SCHEMA_VERSION_CORRELATION,
            'd': d,
            's_star': report.s_star,
            'eta': report.eta,
            'v': list(report.v),
            'u': list(report.u),
            'inner_product': report.inner_product,
            'eps_actual': eps,
            'e_fvfu': report.e_fvfu,
            'rk_sum': sum(report.rk_terms, Fraction(0)),
            'rk_terms': list(report.rk_terms),
            'rd_bound': rd,
            'rd_holds': abs(report.rk_terms[d]) <= rd,
            'decay': None if decay is None else dataclasses.asdict(decay),
            'small_degree': None if small is None else dataclasses.asdict(small),
        }


def _correlate_task(item: tuple) -> CorrelationReport:
    dist_v, dist_u, C, approx, seed = item
    return correlation_service.correlation_pair(dist_v, dist_u, C=C, approx=approx, seed=seed)


correlation_service: CorrelationService = CorrelationService()
