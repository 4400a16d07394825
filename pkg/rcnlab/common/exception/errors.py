#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from typing import Any

from rcnlab.common.exception.exit_code import CustomExitCode


class BaseExceptionMixin(Exception):
    """基础异常混入类"""

    code: int

    def __init__(self, *, msg: str | None = None, data: Any = None):
        self.msg = msg
        self.data = data
        super().__init__(msg)


class CustomError(BaseExceptionMixin):
    """自定义异常"""

    def __init__(self, *, error: CustomExitCode, msg: str | None = None, data: Any = None):
        self.code = error.code
        super().__init__(msg=msg or error.msg, data=data)


class RangeError(BaseExceptionMixin, ValueError):
    """参数超出允许范围，消息中需指明参数名"""

    code = CustomExitCode.USAGE.code

    def __init__(self, *, msg: str = 'Parameter out of range', data: Any = None):
        super().__init__(msg=msg, data=data)


class DimensionError(BaseExceptionMixin, ValueError):
    """维度不匹配"""

    code = CustomExitCode.EXECUTION.code

    def __init__(self, *, msg: str = 'Dimension mismatch', data: Any = None):
        super().__init__(msg=msg, data=data)


class GenerationError(BaseExceptionMixin):
    """数据生成失败"""

    code = CustomExitCode.EXECUTION.code

    def __init__(self, *, msg: str = 'Generation failed', data: Any = None):
        super().__init__(msg=msg, data=data)


class LearnerError(BaseExceptionMixin):
    """学习器执行失败"""

    code = CustomExitCode.EXECUTION.code

    def __init__(self, *, msg: str = 'Learner failed', data: Any = None):
        super().__init__(msg=msg, data=data)


class FormatError(BaseExceptionMixin):
    """数据文件格式错误"""

    code = CustomExitCode.FORMAT.code

    def __init__(self, *, msg: str = 'Malformed dataset', data: Any = None, line: int | None = None):
        self.line = line
        if line is not None:
            msg = f'line {line}: {msg}'
        super().__init__(msg=msg, data=data)


class BudgetExceededError(BaseExceptionMixin):
    """超出精确计算预算"""

    code = CustomExitCode.BUDGET.code

    def __init__(self, *, msg: str = 'Exact budget exceeded', data: Any = None):
        super().__init__(msg=msg, data=data)


class VerificationError(BaseExceptionMixin):
    """不变量校验失败，data 中携带反例"""

    code = CustomExitCode.VERIFY_FAILED.code

    def __init__(self, *, msg: str = 'Invariant violated', data: Any = None):
        super().__init__(msg=msg, data=data)
