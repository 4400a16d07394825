#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from enum import Enum
from enum import IntEnum as SourceIntEnum
from typing import Type, TypeVar

T = TypeVar('T', bound=Enum)


class _EnumBase:
    """枚举基类，提供通用方法"""

    @classmethod
    def get_member_values(cls: Type[T]) -> list:
        """获取枚举成员值列表"""
        return [item.value for item in cls.__members__.values()]


class IntEnum(_EnumBase, SourceIntEnum):
    """整型枚举基类"""

    pass


class StrEnum(_EnumBase, str, Enum):
    """字符串枚举基类"""

    def __str__(self) -> str:
        return str(self.value)


class SignLabel(IntEnum):
    """二分类标签，sgn(0) = +1"""

    negative = -1
    positive = 1


class WStarMode(StrEnum):
    """真实权重向量的生成方式"""

    first_axis = 'first_axis'
    random_unit = 'random_unit'


class DatasetFormat(StrEnum):
    """数据集文件格式"""

    sphere = 'sphere'  # 单位球面，y ∈ {+1, -1}
    cube = 'cube'  # 超立方体 {±1}^d，y ∈ {0, 1}


class Learner(StrEnum):
    """学习算法"""

    psgd = 'psgd'
    jl = 'jl'


class HardnessCommand(StrEnum):
    """hardness 子命令"""

    gen = 'gen'
    correlate = 'correlate'
    rk = 'rk'
    kravchuk = 'kravchuk'


class OutputFormat(StrEnum):
    """报告输出格式"""

    json = 'json'
    csv = 'csv'


class SuiteStatus(StrEnum):
    """校验套件状态"""

    passed = 'pass'
    failed = 'fail'
