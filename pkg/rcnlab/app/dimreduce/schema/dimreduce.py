#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

from typing import Any

import numpy as np

from rcnlab.app.core_model.schema.model import frozen
from rcnlab.app.learner.schema.learner import IterateTrace, LearnerParams, SelectedHypothesis
from rcnlab.common.schema import FrozenSchemaBase, OpenUnit, PositiveInt, Seed


class JlConfig(FrozenSchemaBase):
    """JL 投影参数"""

    m: PositiveInt
    seed: Seed
    beta: OpenUnit
    gamma: OpenUnit
    beta_prime: OpenUnit | None = None
    m_derived: PositiveInt | None = None

    def echo(self) -> dict[str, Any]:
        return {
            'm': self.m,
            'm_derived': self.m_derived,
            'beta': self.beta,
            'beta_prime': self.beta_prime,
            'jl_seed': self.seed,
        }


@dataclasses.dataclass(frozen=True, eq=False)
class JlMatrix:
    """m x d 随机符号矩阵，元素取 ±1/sqrt(m)"""

    entries: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        frozen(self.entries)

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])

    @property
    def d(self) -> int:
        return int(self.entries.shape[1])


@dataclasses.dataclass(frozen=True)
class JlDiagnostics:
    """投影矩阵的好矩阵事件 E_A 诊断"""

    margin_fraction: float  # |w*·x - (Aw*)·(Ax)| >= gamma / 2 的比例
    norm_fraction: float  # | ||x||^2 - ||Ax||^2 | >= gamma / 2 的比例
    w_star_norm_sq: float  # ||Aw*||^2
    beta_prime: float
    good: bool

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class ReducedTrainResult:
    """降维学习结果，selected 位于原始 d 维空间"""

    config: JlConfig
    params: LearnerParams
    matrix: JlMatrix
    trace: IterateTrace
    lifted: np.ndarray
    selected: SelectedHypothesis
    diagnostics: JlDiagnostics | None = None
