#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

from typing import Any, Protocol

import numpy as np

from rcnlab.common.enums import SignLabel
from rcnlab.common.exception import errors
from rcnlab.core.conf import settings


class SupportsArrays(Protocol):
    """持有样本矩阵 X (n, d) 与标签向量 y (n,) 的对象"""

    X: np.ndarray
    y: np.ndarray


def as_vector(coords: Any, *, name: str = 'vector') -> np.ndarray:
    """
    转换为有限的一维 float64 向量

    :param coords: 坐标
    :param name: 参数名，用于报错
    :return:
    """
    vec = np.asarray(coords, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 1:
        raise errors.DimensionError(msg=f'{name} must be a non-empty 1-d vector, got shape {vec.shape}')
    if not np.all(np.isfinite(vec)):
        raise errors.RangeError(msg=f'{name} must be finite')
    return vec


def is_unit(vec: np.ndarray, rtol: float | None = None) -> bool:
    """欧氏范数在相对容差内等于 1"""
    rtol = settings.UNIT_NORM_RTOL if rtol is None else rtol
    return abs(float(np.linalg.norm(vec)) - 1.0) <= rtol


def as_unit_vector(coords: Any, *, name: str = 'unit vector') -> np.ndarray:
    """
    转换并校验单位向量

    :param coords: 坐标
    :param name: 参数名，用于报错
    :return:
    """
    vec = as_vector(coords, name=name)
    if not is_unit(vec):
        raise errors.RangeError(msg=f'{name} must have unit norm, got {np.linalg.norm(vec)!r}')
    return vec


def as_ball_vector(coords: Any, *, name: str = 'ball vector') -> np.ndarray:
    """
    转换并校验单位球内向量

    :param coords: 坐标
    :param name: 参数名，用于报错
    :return:
    """
    vec = as_vector(coords, name=name)
    if float(np.linalg.norm(vec)) > 1.0 + settings.BALL_NORM_SLACK:
        raise errors.RangeError(msg=f'{name} must lie in the unit ball, got norm {np.linalg.norm(vec)!r}')
    return vec


def check_eta(eta: float, *, name: str = 'eta') -> float:
    """噪声率取值 [0, 1/2)，0 表示无噪声极限"""
    if not np.isfinite(eta) or not 0 <= eta < 0.5:
        raise errors.RangeError(msg=f'{name} must lie in [0, 1/2), got {eta!r}')
    return float(eta)


def check_open_unit(value: float, *, name: str) -> float:
    """取值 (0, 1)"""
    if not np.isfinite(value) or not 0 < value < 1:
        raise errors.RangeError(msg=f'{name} must lie in (0, 1), got {value!r}')
    return float(value)


def frozen(arr: np.ndarray) -> np.ndarray:
    """返回只读数组"""
    arr.setflags(write=False)
    return arr


@dataclasses.dataclass(frozen=True)
class LabeledExample:
    """带标签样本"""

    x: np.ndarray
    y: SignLabel

    def __post_init__(self) -> None:
        object.__setattr__(self, 'x', frozen(as_vector(self.x, name='x').copy()))
        object.__setattr__(self, 'y', SignLabel(int(self.y)))

    @property
    def d(self) -> int:
        return int(self.x.shape[0])


@dataclasses.dataclass(frozen=True)
class MarginHalfspaceInstance:
    """带 RCN 的 gamma-间隔齐次半空间：真实权重、间隔与噪声率"""

    w_star: np.ndarray
    gamma: float
    eta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, 'w_star', frozen(as_unit_vector(self.w_star, name='w_star').copy()))
        object.__setattr__(self, 'gamma', check_open_unit(self.gamma, name='gamma'))
        object.__setattr__(self, 'eta', check_eta(self.eta))

    @property
    def d(self) -> int:
        return int(self.w_star.shape[0])

    def satisfies_margin(self, x: np.ndarray) -> bool:
        """|w*·x| >= gamma"""
        return abs(float(self.w_star @ x)) >= self.gamma

    def to_dict(self) -> dict[str, Any]:
        return {'d': self.d, 'gamma': self.gamma, 'eta': self.eta, 'w_star': self.w_star.tolist()}
