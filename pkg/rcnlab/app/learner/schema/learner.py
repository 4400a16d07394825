#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses
import math

from typing import Annotated, Any

import numpy as np

from pydantic import Field, field_validator

from rcnlab.app.core_model.schema.model import as_ball_vector, frozen
from rcnlab.common.exception import errors
from rcnlab.common.schema import FrozenSchemaBase, NonNegativeInt, OpenUnit, PositiveInt

LearnerEta = Annotated[float, Field(ge=0, lt=0.5)]


class LearnerParams(FrozenSchemaBase):
    """PSGD 参数，w0 为空时表示零向量"""

    eps: OpenUnit
    delta: OpenUnit
    eta: LearnerEta
    gamma: OpenUnit
    T: NonNegativeInt
    mu: Annotated[float, Field(gt=0)]
    w0: tuple[float, ...] | None = None
    T_derived: NonNegativeInt | None = None  # 覆盖 T 时记录公式给出的值
    holdout_size: PositiveInt | None = None

    @field_validator('w0')
    @classmethod
    def check_w0(cls, value: tuple[float, ...] | None) -> tuple[float, ...] | None:
        if value is not None:
            as_ball_vector(value, name='w0')
        return value

    @property
    def overridden(self) -> bool:
        return self.T_derived is not None and self.T_derived != self.T

    def initial_point(self, d: int) -> np.ndarray:
        """
        初始迭代点

        :param d: 维度
        :return:
        """
        if self.w0 is None:
            return np.zeros(d)
        w0 = np.asarray(self.w0, dtype=np.float64)
        if w0.shape != (d,):
            raise errors.DimensionError(msg=f'w0 has dimension {w0.shape[0]} but the dataset has d={d}')
        return w0

    def echo(self) -> dict[str, Any]:
        return {
            'eps': self.eps,
            'delta': self.delta,
            'eta': self.eta,
            'gamma': self.gamma,
            'T': self.T,
            'T_derived': self.T_derived,
            'mu': self.mu,
            'holdout_size': self.holdout_size,
        }


@dataclasses.dataclass(frozen=True, eq=False)
class IterateTrace:
    """
    迭代轨迹 w_0 ... w_T

    诊断数组仅在已知 w* 时填充：
    train_disagreement[t] = P_N(w_t)，grad_norm[t] = ||g_N(w_t)||，
    regret_terms[t] = g_N(w_t)·(w_t - w*)，contraction_slack[t] 为第 t 步收缩不等式右侧减左侧
    """

    iterates: np.ndarray
    mu: float
    eta: float
    train_disagreement: np.ndarray | None = None
    grad_norm: np.ndarray | None = None
    regret_terms: np.ndarray | None = None
    contraction_slack: np.ndarray | None = None
    loss: np.ndarray | None = None
    w_star: np.ndarray | None = None

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, np.ndarray):
                frozen(value)

    def __len__(self) -> int:
        return int(self.iterates.shape[0])

    @property
    def T(self) -> int:
        return len(self) - 1

    @property
    def d(self) -> int:
        return int(self.iterates.shape[1])

    @property
    def has_diagnostics(self) -> bool:
        return self.train_disagreement is not None


@dataclasses.dataclass(frozen=True)
class SelectedHypothesis:
    """留出集上误分类率最小的迭代点"""

    w: np.ndarray
    index: int
    holdout_error: float

    def to_dict(self) -> dict[str, Any]:
        return {
            'index': self.index,
            'holdout_error': self.holdout_error,
            'norm': float(np.linalg.norm(self.w)),
            'w': self.w.tolist(),
        }


@dataclasses.dataclass(frozen=True)
class GuaranteeReport:
    """单次运行的遗憾界与分歧分解检查"""

    T: int
    avg_regret: float
    regret_bound: float
    regret_holds: bool
    contraction_min_slack: float
    contraction_holds: bool
    e1: float
    e2: float
    e3: float
    min_test_disagreement: float
    argmin_test_disagreement: int
    decomposition_holds: bool
    eps_implied: float
    test_rows: int = 0

    @property
    def holds(self) -> bool:
        return self.regret_holds and self.contraction_holds and self.decomposition_holds

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data['holds'] = self.holds
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in data.items()}


@dataclasses.dataclass(frozen=True)
class TrainResult:
    """train_and_select 的完整结果"""

    params: LearnerParams
    trace: IterateTrace
    selected: SelectedHypothesis
    guarantee: GuaranteeReport | None = None
