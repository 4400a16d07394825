#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

from pathlib import Path
from typing import Annotated, Any

import numpy as np

from pydantic import Field

from rcnlab.app.core_model.schema.model import LabeledExample, frozen
from rcnlab.common.enums import DatasetFormat, WStarMode
from rcnlab.common.exception import errors
from rcnlab.common.schema import FrozenSchemaBase, NonNegativeInt, OpenUnit, PositiveInt, Seed

# eta = 0 为无噪声极限
SimulatorEta = Annotated[float, Field(ge=0, lt=0.5)]

# 数据集头部中可还原 SimulatorConfig 的键
PROVENANCE_KEYS = ('gamma', 'eta', 'seed', 'w_star_mode')


class SimulatorConfig(FrozenSchemaBase):
    """模拟器参数"""

    d: PositiveInt
    gamma: OpenUnit
    eta: SimulatorEta
    n: NonNegativeInt
    seed: Seed
    w_star_mode: WStarMode = WStarMode.first_axis

    def header_tokens(self) -> dict[str, str]:
        return {
            'gamma': repr(float(self.gamma)),
            'eta': repr(float(self.eta)),
            'seed': str(self.seed),
            'w_star_mode': str(self.w_star_mode),
        }

    @classmethod
    def from_header_tokens(cls, *, d: int, n: int, tokens: dict[str, str]) -> 'SimulatorConfig | None':
        """头部包含全部模拟器键时还原配置"""
        if not all(key in tokens for key in PROVENANCE_KEYS):
            return None
        return cls(
            d=d,
            n=n,
            gamma=float(tokens['gamma']),
            eta=float(tokens['eta']),
            seed=int(tokens['seed']),
            w_star_mode=tokens['w_star_mode'],
        )


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """
    有序样本集

    sphere 格式：X 为单位球面上的点，y ∈ {+1, -1}
    cube 格式：X 为 {±1}^d 顶点，y ∈ {0, 1}
    相等性只比较格式、维度与数据本身，不比较来源
    """

    d: int
    X: np.ndarray
    y: np.ndarray
    fmt: DatasetFormat = DatasetFormat.sphere
    provenance: SimulatorConfig | Path | None = None
    meta: dict[str, str] = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.size == 0:
            X = X.reshape(0, self.d)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise errors.DimensionError(msg=f'dataset rows must have dimension {self.d}, got shape {X.shape}')
        if y.shape != (X.shape[0],):
            raise errors.DimensionError(msg=f'label count {y.shape} does not match row count {X.shape[0]}')
        object.__setattr__(self, 'X', frozen(X))
        object.__setattr__(self, 'y', frozen(y))
        object.__setattr__(self, 'fmt', DatasetFormat(self.fmt))

    def __len__(self) -> int:
        return int(self.X.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.fmt == other.fmt
            and self.d == other.d
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None

    @property
    def n(self) -> int:
        return len(self)

    @property
    def signed_y(self) -> np.ndarray:
        """float64 的 ±1 标签，cube 格式按 0 ↦ -1 映射"""
        if self.fmt == DatasetFormat.cube:
            return np.where(self.y == 1, 1.0, -1.0)
        return self.y.astype(np.float64)

    @property
    def examples(self) -> list[LabeledExample]:
        self.require_sphere()
        return [LabeledExample(x=x, y=int(label)) for x, label in zip(self.X, self.y)]

    def require_sphere(self) -> None:
        if self.fmt != DatasetFormat.sphere:
            raise errors.FormatError(msg=f'operation requires a sphere-format dataset, got format={self.fmt}')

    def head(self, count: int) -> 'Dataset':
        return self.slice(0, count)

    def slice(self, start: int, stop: int | None = None) -> 'Dataset':
        return dataclasses.replace(self, X=self.X[start:stop].copy(), y=self.y[start:stop].copy())

    def summary(self) -> dict[str, Any]:
        return {'format': str(self.fmt), 'd': self.d, 'n': self.n, **self.meta}
