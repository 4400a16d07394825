#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from enum import Enum


class CustomCodeBase(Enum):
    """自定义状态码基类"""

    @property
    def code(self) -> int:
        """获取状态码"""
        return self.value[0]

    @property
    def msg(self) -> str:
        """获取状态码信息"""
        return self.value[1]


class CustomExitCode(CustomCodeBase):
    """命令行退出码，退出码是唯一的机器可读失败通道"""

    SUCCESS = (0, '执行成功')
    VERIFY_FAILED = (1, '不变量校验失败')
    USAGE = (2, '参数错误')
    EXECUTION = (3, '生成或训练失败')
    FORMAT = (4, '数据格式不匹配')
    BUDGET = (5, '超出精确计算预算')
