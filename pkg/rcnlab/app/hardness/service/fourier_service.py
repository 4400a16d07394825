#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from rcnlab.app.hardness.schema.hardness import ThresholdChoice, ThresholdLtf
from rcnlab.app.hardness.service.kravchuk_service import kravchuk_service
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings
from rcnlab.utils.hypercube import agreement, iter_cube, parity, subset_mask, to_mask, walsh_hadamard
from rcnlab.utils.rational import as_fraction


def _check_enum_budget(d: int, cap: int, what: str) -> None:
    if d > cap:
        raise errors.BudgetExceededError(msg=f'{what} is capped at d={cap}, got d={d}')


class FourierService:
    """超立方体阈值函数与其傅里叶系数服务类"""

    @staticmethod
    def tail_mass(d: int, s_star: int) -> Fraction:
        """
        E[f_v] = 2^(-d) sum_{s >= s_star} C(d, s)

        :param d: 维度
        :param s_star: 一致数阈值
        :return:
        """
        return Fraction(sum(math.comb(d, s) for s in range(max(s_star, 0), d + 1)), 1 << d)

    def threshold_for_mass(self, d: int, target_mass: float | Fraction | str) -> ThresholdChoice:
        """
        最小的 s_star 使尾部质量不超过目标值，后续计算一律使用实际质量 eps_actual

        :param d: 维度
        :param target_mass: 目标质量，取值 (0, 1]
        :return:
        """
        if d < 1:
            raise errors.RangeError(msg=f'd must be positive, got {d}')
        target = as_fraction(target_mass)
        if not 0 < target <= 1:
            raise errors.RangeError(msg=f'target_mass must lie in (0, 1], got {target_mass}')
        s_star = next(s for s in range(d + 2) if self.tail_mass(d, s) <= target)
        eps_actual = self.tail_mass(d, s_star)
        degenerate = s_star == d + 1
        if degenerate:
            log.warning(f'目标质量 {target} 小于 2^-{d}，阈值退化为空尾部')
        return ThresholdChoice(d=d, target=target, s_star=s_star, eps_actual=eps_actual, degenerate=degenerate)

    @staticmethod
    def ltf_eval(ltf: ThresholdLtf, x: Sequence[int]) -> int:
        """
        f_v(x) = 1 当且仅当一致坐标数 >= s_star

        :param ltf: 阈值函数
        :param x: 超立方体顶点
        :return:
        """
        if len(x) != ltf.d:
            raise errors.DimensionError(msg=f'point has dimension {len(x)}, ltf has d={ltf.d}')
        mask = to_mask(x)
        return int(ltf.d - (mask ^ ltf.mask).bit_count() >= ltf.s_star)

    @staticmethod
    def level_coefficient(d: int, s_star: int, k: int) -> Fraction:
        """
        c_k = (-1)^k 2^(-d) sum_{s >= s_star} C(d, s) K(d, s, k)，f_hat(T) = chi_T(v) c_|T|

        :param d: 维度
        :param s_star: 一致数阈值
        :param k: 层级 |T|
        :return:
        """
        total = sum(math.comb(d, s) * kravchuk_service.kravchuk(d, s, k) for s in range(s_star, d + 1))
        value = Fraction(total) / (1 << d)
        return -value if k & 1 else value

    def fourier_coefficient(self, ltf: ThresholdLtf, subset: Iterable[int]) -> Fraction:
        """
        Kravchuk 闭式：f_hat(T) = chi_T(v) (-1)^|T| 2^(-d) sum_{s >= s_star} C(d, s) K(d, s, |T|)

        :param ltf: 阈值函数
        :param subset: T ⊆ {0, ..., d - 1}
        :return:
        """
        subset = sorted(set(int(i) for i in subset))
        if subset and not 0 <= subset[0] <= subset[-1] < ltf.d:
            raise errors.RangeError(msg=f'subset indices must lie in [0, {ltf.d})')
        chi_v = -1 if (subset_mask(subset) & ltf.mask).bit_count() & 1 else 1
        return chi_v * self.level_coefficient(ltf.d, ltf.s_star, len(subset))

    @staticmethod
    def indicator_chunks(ltf: ThresholdLtf) -> Iterable[tuple[np.ndarray, np.ndarray]]:
        """按块产出 (顶点掩码, f_v 值)"""
        _check_enum_budget(ltf.d, settings.HARDNESS_ENUM_MAX_D, 'hypercube enumeration')
        for masks in iter_cube(ltf.d, settings.HARDNESS_ENUM_CHUNK):
            yield masks, (agreement(masks, ltf.mask, ltf.d) >= ltf.s_star).astype(np.int64)

    def fourier_coefficient_exhaustive(self, ltf: ThresholdLtf, subset: Iterable[int]) -> Fraction:
        """
        穷举 E[f_v(x) chi_T(x)]

        :param ltf: 阈值函数
        :param subset: T ⊆ {0, ..., d - 1}
        :return:
        """
        tmask = subset_mask(subset)
        total = 0
        for masks, f in self.indicator_chunks(ltf):
            total += int(np.sum(f * (1 - 2 * parity(masks, tmask))))
        return Fraction(total, 1 << ltf.d)

    def fourier_spectrum(self, ltf: ThresholdLtf) -> np.ndarray:
        """
        全部 2^d 个系数的整数分子，f_hat(T) = out[mask(T)] / 2^d

        :param ltf: 阈值函数
        :return:
        """
        _check_enum_budget(ltf.d, settings.HARDNESS_FOURIER_MAX_D, 'exhaustive Fourier spectrum')
        f = np.concatenate([chunk for _, chunk in self.indicator_chunks(ltf)])
        return walsh_hadamard(f)

    def parseval_check(self, ltf: ThresholdLtf) -> tuple[Fraction, Fraction, Fraction, bool]:
        """
        sum_T f_hat(T)^2 = E[f_v]，同时给出穷举值与 Kravchuk 层级公式值

        :param ltf: 阈值函数
        :return: (穷举平方和, 公式平方和, E[f_v], 是否全部相等)
        """
        spectrum = self.fourier_spectrum(ltf)
        d = ltf.d
        exhaustive = Fraction(int(np.sum(spectrum * spectrum)), 1 << (2 * d))
        formula = sum(math.comb(d, k) * self.level_coefficient(d, ltf.s_star, k) ** 2 for k in range(d + 1))
        mass = self.tail_mass(d, ltf.s_star)
        return exhaustive, formula, mass, exhaustive == formula == mass


fourier_service: FourierService = FourierService()
