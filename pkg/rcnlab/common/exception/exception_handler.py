#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from pydantic import ValidationError

from rcnlab.common.exception.errors import BaseExceptionMixin
from rcnlab.common.exception.exit_code import CustomExitCode
from rcnlab.common.log import log


def _validation_message(exc: ValidationError) -> str:
    """
    获取第一个校验失败字段的信息

    :param exc: pydantic 校验异常
    :return:
    """
    error = exc.errors()[0]
    field = '.'.join(str(loc) for loc in error.get('loc', ())) or 'input'
    return f'{field}: {error.get("msg")}'


def handle_exception(exc: BaseException) -> int:
    """
    将异常映射为命令行退出码并记录日志

    :param exc: 异常
    :return:
    """
    if isinstance(exc, BaseExceptionMixin):
        log.error(f'{type(exc).__name__}: {exc.msg}')
        return exc.code
    if isinstance(exc, ValidationError):
        log.error(f'参数校验失败: {_validation_message(exc)}')
        return CustomExitCode.USAGE.code
    if isinstance(exc, OSError):
        log.error(f'I/O 错误: {exc}')
        return CustomExitCode.EXECUTION.code
    log.exception(f'未知异常: {exc}')
    return CustomExitCode.EXECUTION.code
