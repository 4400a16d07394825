#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from rcnlab.app.hardness.schema.hardness import KravchukBound, KravchukTable
from rcnlab.common.exception import errors
from rcnlab.core.conf import settings
from rcnlab.utils.serializers import encode_csv, encode_json

KRAVCHUK_COLUMNS = ('n', 'a', 'b', 'num', 'den', 'value')


@lru_cache(maxsize=None)
def _kravchuk(n: int, a: int, b: int) -> Fraction:
    total = 0
    for j in range(max(0, b - (n - a)), min(a, b) + 1):
        term = math.comb(a, j) * math.comb(n - a, b - j)
        total += -term if j & 1 else term
    return Fraction(total, math.comb(n, b))


class KravchukService:
    """精确组合量与归一化 Kravchuk 多项式服务类"""

    @staticmethod
    def binomial(n: int, k: int) -> int:
        """
        精确二项式系数 C(n, k)

        :param n: 总数
        :param k: 选取数
        :return:
        """
        if n < 0 or not 0 <= k <= n:
            raise errors.RangeError(msg=f'binomial requires 0 <= k <= n, got n={n}, k={k}')
        if n > settings.BINOMIAL_EXACT_MAX_N:
            raise errors.BudgetExceededError(
                msg=f'exact binomial is capped at n={settings.BINOMIAL_EXACT_MAX_N}, use log_binomial'
            )
        return math.comb(n, k)

    @staticmethod
    def log_binomial(n: int, k: int) -> float:
        """
        ln C(n, k) 的浮点近似，适用于任意规模

        :param n: 总数
        :param k: 选取数
        :return:
        """
        if n < 0 or not 0 <= k <= n:
            raise errors.RangeError(msg=f'log_binomial requires 0 <= k <= n, got n={n}, k={k}')
        return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)

    @staticmethod
    def kravchuk(n: int, a: int, b: int) -> Fraction:
        """
        K(n, a, b) = sum_j (-1)^j C(a, j) C(n - a, b - j) / C(n, b)

        :param n: 集合大小
        :param a: 第一个子集大小
        :param b: 第二个子集大小
        :return:
        """
        if n < 0 or not (0 <= a <= n and 0 <= b <= n):
            raise errors.RangeError(msg=f'kravchuk requires 0 <= a, b <= n, got n={n}, a={a}, b={b}')
        if n > settings.HARDNESS_EXACT_MAX_N:
            raise errors.BudgetExceededError(
                msg=f'exact Kravchuk values are capped at n={settings.HARDNESS_EXACT_MAX_N}'
            )
        return _kravchuk(n, a, b)

    @staticmethod
    def kravchuk_brute_force(n: int, a: int, b: int) -> Fraction:
        """
        按定义对全部 (A, B) 子集对平均 (-1)^|A∩B|

        :param n: 集合大小
        :param a: 第一个子集大小
        :param b: 第二个子集大小
        :return:
        """
        if n < 0 or not (0 <= a <= n and 0 <= b <= n):
            raise errors.RangeError(msg=f'kravchuk requires 0 <= a, b <= n, got n={n}, a={a}, b={b}')
        A = np.array([sum(1 << i for i in s) for s in combinations(range(n), a)], dtype=np.uint64)
        B = np.array([sum(1 << i for i in s) for s in combinations(range(n), b)], dtype=np.uint64)
        odd = 0
        for mask in A:
            odd += int(np.count_nonzero(np.bitwise_count(B & mask) & 1))
        pairs = A.size * B.size
        return Fraction(pairs - 2 * odd, pairs)

    def kravchuk_table(self, n: int) -> KravchukTable:
        """
        n 阶全部精确值

        :param n: 集合大小
        :return:
        """
        values = tuple(tuple(self.kravchuk(n, a, b) for b in range(n + 1)) for a in range(n + 1))
        return KravchukTable(n=n, values=values)

    def kravchuk_bound_check(self, d: int, m: int, k: int) -> KravchukBound:
        """
        |K(d, m, k)| <= e^k 2^(3k) ((k/d)^(k/2) + (|d/2 - m|/d)^k)，k <= d/2，约定 0^0 = 1

        :param d: 维度
        :param m: 一致坐标数
        :param k: 傅里叶层级
        :return:
        """
        if not 0 <= k <= d / 2:
            raise errors.RangeError(msg=f'the Kravchuk bound requires 0 <= k <= d/2, got d={d}, k={k}')
        value = abs(self.kravchuk(d, m, k))
        first = 1.0 if k == 0 else (k / d) ** (k / 2)
        second = 1.0 if k == 0 else (abs(d / 2 - m) / d) ** k
        bound = math.exp(k) * 2 ** (3 * k) * (first + second)
        return KravchukBound(d=d, m=m, k=k, value=value, bound=bound, holds=float(value) <= bound)

    @staticmethod
    def table_json(table: KravchukTable) -> bytes:
        return encode_json({'schema': 'kravchuk', **table.to_dict()})

    @staticmethod
    def table_csv(table: KravchukTable) -> str:
        """精确值以分子、分母两列给出，value 列为十进制近似"""
        rows = ([n, a, b, value.numerator, value.denominator, value] for n, a, b, value in table.to_rows())
        return encode_csv('kravchuk', settings.SCHEMA_VERSION_CORRELATION, KRAVCHUK_COLUMNS, rows)


kravchuk_service: KravchukService = KravchukService()
