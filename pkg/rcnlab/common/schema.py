#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field

# 常用取值范围
OpenUnit = Annotated[float, Field(gt=0, lt=1)]
NoiseRate = Annotated[float, Field(gt=0, lt=0.5)]
PositiveInt = Annotated[int, Field(gt=0)]
NonNegativeInt = Annotated[int, Field(ge=0)]
Seed = Annotated[int, Field(ge=0, lt=2**64)]


class SchemaBase(BaseModel):
    """基础模型配置"""

    model_config = ConfigDict(
        use_enum_values=True,
        extra='forbid',
    )


class FrozenSchemaBase(SchemaBase):
    """不可变模型"""

    model_config = ConfigDict(
        use_enum_values=True,
        extra='forbid',
        frozen=True,
    )
