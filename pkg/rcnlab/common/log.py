#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import inspect
import logging
import sys

from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path
from typing import Iterator

from loguru import logger

from rcnlab.core import path_conf
from rcnlab.core.conf import settings

# 当前试验 / 运行的标识，相当于请求链路中的 correlation id
trial_id: ContextVar[str] = ContextVar('trial_id', default=settings.LOG_CID_DEFAULT_VALUE)


class InterceptHandler(logging.Handler):
    """
    日志拦截处理器，用于将标准库的日志重定向到 loguru

    参考：https://loguru.readthedocs.io/en/stable/overview.html#entirely-compatible-with-standard-logging
    """

    def emit(self, record: logging.LogRecord):
        # 获取对应的 Loguru 级别（如果存在）
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # 查找记录日志消息的调用者
        frame, depth = inspect.currentframe(), 0
        while frame and (depth == 0 or frame.f_code.co_filename == logging.__file__):
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def _trial_id_filter(record) -> bool:
    record['trial_id'] = trial_id.get()[: settings.LOG_CID_LENGTH]
    return True


def setup_logging(level: str | None = None) -> None:
    """
    设置日志处理器

    stdout 只输出机器可读结果，日志统一写到 stderr

    :param level: 日志级别，默认为 settings.LOG_STD_LEVEL
    :return:
    """
    level = level or settings.LOG_STD_LEVEL
    logging.root.handlers = [InterceptHandler()]
    logging.root.setLevel(level)

    for name in logging.root.manager.loggerDict.keys():
        logging.getLogger(name).handlers = []
        logging.getLogger(name).propagate = True

    logger.remove()  # 移除默认处理器
    logger.configure(
        handlers=[
            {
                'sink': sys.stderr,
                'level': level,
                'filter': _trial_id_filter,
                'format': settings.LOG_STD_FORMAT,
            }
        ]
    )


def set_custom_logfile(log_dir: Path | None = None) -> None:
    """
    设置自定义日志文件

    :param log_dir: 日志目录，默认为 path_conf.LOG_DIR
    :return:
    """
    log_path = Path(log_dir or path_conf.LOG_DIR)
    log_path.mkdir(parents=True, exist_ok=True)

    # https://loguru.readthedocs.io/en/stable/api/logger.html#loguru._logger.Logger.add
    log_config = {
        'format': settings.LOG_FILE_FORMAT,
        'enqueue': True,
        'rotation': '5 MB',
        'retention': '7 days',
        'compression': 'tar.gz',
    }

    logger.add(
        str(log_path / settings.LOG_ACCESS_FILENAME),
        level=settings.LOG_ACCESS_FILE_LEVEL,
        filter=lambda record: _trial_id_filter(record) and record['level'].no <= 25,
        backtrace=False,
        diagnose=False,
        **log_config,
    )

    logger.add(
        str(log_path / settings.LOG_ERROR_FILENAME),
        level=settings.LOG_ERROR_FILE_LEVEL,
        filter=lambda record: _trial_id_filter(record) and record['level'].no >= 30,
        backtrace=True,
        diagnose=True,
        **log_config,
    )


@contextmanager
def bind_trial(value: str) -> Iterator[None]:
    """
    在上下文内为日志绑定试验标识

    :param value: 试验标识
    :return:
    """
    token = trial_id.set(value)
    try:
        yield
    finally:
        trial_id.reset(token)


# 创建 logger 实例
log = logger
