#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

from fractions import Fraction
from typing import Any

from rcnlab.common.exception import errors
from rcnlab.utils.hypercube import to_mask


@dataclasses.dataclass(frozen=True)
class ThresholdLtf:
    """超立方体阈值函数 f_v(x) = 1{#{i : x_i = v_i} >= s_star}"""

    v: tuple[int, ...]
    s_star: int

    def __post_init__(self) -> None:
        v = tuple(int(c) for c in self.v)
        if not v:
            raise errors.DimensionError(msg='v must have at least one coordinate')
        if any(c not in (1, -1) for c in v):
            raise errors.RangeError(msg='v must be a ±1 sign vector')
        if not 0 <= self.s_star <= len(v) + 1:
            raise errors.RangeError(msg=f's_star must lie in [0, {len(v) + 1}], got {self.s_star}')
        object.__setattr__(self, 'v', v)

    @property
    def d(self) -> int:
        return len(self.v)

    @property
    def mask(self) -> int:
        return to_mask(self.v)

    @property
    def threshold(self) -> int:
        """等价的内积阈值：f_v(x) = 1 当且仅当 v·x >= 2 s_star - d"""
        return 2 * self.s_star - self.d


@dataclasses.dataclass(frozen=True)
class ThresholdChoice:
    """尾部质量离散化结果"""

    d: int
    target: Fraction
    s_star: int
    eps_actual: Fraction
    degenerate: bool


@dataclasses.dataclass(frozen=True)
class HardDistribution:
    """
    D_v：x 在 {±1}^d 上均匀，y 以概率 1 - eta 等于 f_v(x)

    eps_actual = E[f_v] 为精确有理数
    """

    ltf: ThresholdLtf
    eta: Fraction
    eps_actual: Fraction

    @property
    def d(self) -> int:
        return self.ltf.d

    @property
    def q(self) -> Fraction:
        """1 - 2 eta"""
        return 1 - 2 * self.eta

    @property
    def p1(self) -> Fraction:
        """Pr[y = 1] = eta + (1 - 2 eta) E[f_v]"""
        return self.eta + self.q * self.eps_actual

    @property
    def p0(self) -> Fraction:
        return 1 - self.p1


@dataclasses.dataclass(frozen=True)
class KravchukTable:
    """全部 K(n, a, b)，0 <= a, b <= n"""

    n: int
    values: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        a, b = key
        return self.values[a][b]

    def to_dict(self) -> dict[str, Any]:
        return {'n': self.n, 'values': [list(row) for row in self.values]}

    def to_rows(self) -> list[list[Any]]:
        return [[self.n, a, b, value] for a, row in enumerate(self.values) for b, value in enumerate(row)]


@dataclasses.dataclass(frozen=True)
class KravchukBound:
    """|K(d, m, k)| 的上界检查"""

    d: int
    m: int
    k: int
    value: Fraction
    bound: float
    holds: bool


@dataclasses.dataclass(frozen=True)
class CorrelationBound:
    """E[f_v f_u] <= C log^2(d/eps) eps^2 |v·u| / d + eps^2"""

    lhs: Fraction | float
    rhs: float
    C: float
    holds: bool | None
    hypothesis_met: bool
    min_C: float | None
    ratio: float | None  # lhs / eps^2


@dataclasses.dataclass(frozen=True)
class DecayReport:
    """中间层 sum |R_k| <= eps^2 / d 的最小常数 c"""

    d: int
    log_term: float  # ln(d / eps)
    lo: int  # 区间 [lo, d - lo]
    c: float | None
    band_sum: Fraction
    threshold: Fraction


@dataclasses.dataclass(frozen=True)
class SmallDegreeReport:
    """低层 |R_k| <= M eps^2 (c ln(d/eps)) |v·u| / d 所需的最小 M"""

    d: int
    c: float
    k_max: int
    hypothesis_met: bool  # |v·u| / d <= d^(c - 1/2)
    multiplier: float | None
    holds: bool


@dataclasses.dataclass(frozen=True)
class CorrelationReport:
    """
    一对硬分布的相关性报告

    精确模式下数值字段为 Fraction；近似模式（蒙特卡洛）下 e_fvfu 及其派生字段为 float
    """

    d: int
    s_star: int
    eta: Fraction
    v: tuple[int, ...]
    u: tuple[int, ...]
    inner_product: int
    agreement: int
    eps_actual: Fraction
    e_fv: Fraction
    e_fu: Fraction
    e_fvfu: Fraction | float
    covariance: Fraction | float
    chi_pair: Fraction | float
    chi_self: Fraction
    chi_pair_lemma_rhs: Fraction | float  # 2 (1 - 2 eta) cov
    chi_self_lemma_rhs: Fraction  # (1 - 2 eta)(E[f_v] - E[f_v]^2)
    chi_pair_lemma_holds: bool
    chi_self_lemma_holds: bool
    chi_pair_corrected_rhs: Fraction | float  # (1 - 2 eta)^2 cov / (eta (1 - eta))
    chi_self_corrected_rhs: Fraction
    corrected_holds: bool
    baseline_error: Fraction
    rk_terms: tuple[Fraction, ...] | None
    bound: CorrelationBound
    approximate: bool = False
    stderr: float | None = None

    @property
    def bound_rhs(self) -> float:
        return self.bound.rhs

    @property
    def min_C(self) -> float | None:
        return self.bound.min_C

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data['v'] = list(self.v)
        data['u'] = list(self.u)
        data['rk_terms'] = None if self.rk_terms is None else list(self.rk_terms)
        return data

    def to_row(self) -> list[Any]:
        return [
            self.d,
            self.s_star,
            self.eps_actual,
            self.inner_product,
            self.e_fvfu,
            self.chi_pair,
            self.chi_self,
            self.bound_rhs,
            self.min_C,
        ]
