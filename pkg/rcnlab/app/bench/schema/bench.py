#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses
import itertools

from pathlib import Path
from typing import Annotated, Any

from pydantic import Field, model_validator

from rcnlab.app.simulate.schema.simulate import SimulatorEta
from rcnlab.common.enums import Learner, SuiteStatus
from rcnlab.common.schema import FrozenSchemaBase, OpenUnit, PositiveInt, SchemaBase, Seed
from rcnlab.core.conf import settings

ErrorRate = Annotated[float, Field(ge=0, le=1)]

SWEEP_COLUMNS = (
    'seed',
    'd',
    'gamma',
    'eta',
    'eps',
    'N',
    'T',
    'm',
    'err_holdout',
    'err_test',
    'min_disagreement',
    'wallclock_ms',
    'error',
)


class SweepConfig(SchemaBase):
    """网格实验配置，单元格为 d、gamma、eta、eps、N 的笛卡尔积"""

    d: list[PositiveInt] = Field(min_length=1)
    gamma: list[OpenUnit] = Field(min_length=1)
    eta: list[SimulatorEta] = Field(min_length=1)
    eps: list[OpenUnit] = Field(min_length=1)
    N: list[PositiveInt] = Field(min_length=1)
    seeds_per_cell: PositiveInt = 1
    delta: OpenUnit = 0.1
    master_seed: Seed = 0
    T: Annotated[int, Field(ge=0)] | None = None
    learner: Learner = Learner.psgd
    m: PositiveInt | None = None
    test_size: PositiveInt = 10_000
    out: Path | None = None
    parallel: PositiveInt | None = None

    @model_validator(mode='after')
    def check_cell_count(self) -> 'SweepConfig':
        if self.cell_count * self.seeds_per_cell > settings.SWEEP_MAX_CELLS:
            raise ValueError(
                f'sweep has {self.cell_count} cells x {self.seeds_per_cell} seeds, '
                f'more than the cap of {settings.SWEEP_MAX_CELLS} trials'
            )
        return self

    @property
    def cell_count(self) -> int:
        return len(self.d) * len(self.gamma) * len(self.eta) * len(self.eps) * len(self.N)

    def cells(self) -> list[tuple[int, float, float, float, int]]:
        """按 (d, gamma, eta, eps, N) 字典序排列的单元格"""
        return list(itertools.product(self.d, self.gamma, self.eta, self.eps, self.N))


class ErrorSummary(FrozenSchemaBase):
    """各数据集上的误分类率"""

    train: ErrorRate
    holdout: ErrorRate
    test: ErrorRate | None = None


class RunRecord(FrozenSchemaBase):
    """单次训练运行记录"""

    version: str = settings.SCHEMA_VERSION_RUN_RECORD
    learner: Learner
    seed: int | None = None
    dataset: dict[str, Any]
    params: dict[str, Any]
    jl: dict[str, Any] | None = None
    selected: dict[str, Any]
    errors: ErrorSummary
    disagreement: ErrorRate | None = None  # 选中假设与 w* 在测试集上的分歧率
    predicted_error: ErrorRate | None = None  # eta + (1 - 2 eta) disagreement
    min_disagreement: ErrorRate | None = None
    guarantee: dict[str, Any] | None = None
    jl_diagnostics: dict[str, Any] | None = None
    wallclock_ms: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {'schema': 'run_record', **self.model_dump(mode='python')}


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """扫描 CSV 的一行，失败的试验只填充配置列与 error 列"""

    seed: int
    d: int
    gamma: float
    eta: float
    eps: float
    N: int
    T: int | None = None
    m: int | None = None
    err_holdout: float | None = None
    err_test: float | None = None
    min_disagreement: float | None = None
    wallclock_ms: float = 0.0
    error: str | None = None

    def to_row(self) -> list[Any]:
        return [getattr(self, column) for column in SWEEP_COLUMNS]


@dataclasses.dataclass
class SuiteResult:
    """校验套件结果"""

    name: str
    status: SuiteStatus
    checks: int = 0
    elapsed_ms: float = 0.0
    counterexample: Any = None
    message: str | None = None
    notes: dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == SuiteStatus.passed

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data['status'] = str(self.status)
        return data
