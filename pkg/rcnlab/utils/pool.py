#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from typing import Callable, Iterable, TypeVar

import anyio

from anyio import to_process

from rcnlab.common.log import log

T = TypeVar('T')
R = TypeVar('R')


async def _gather(func: Callable[[T], R], items: list[T], parallel: int) -> list[R]:
    results: list[R | None] = [None] * len(items)
    limiter = anyio.CapacityLimiter(parallel)

    async def worker(index: int, item: T) -> None:
        results[index] = await to_process.run_sync(func, item, limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index, item in enumerate(items):
            tg.start_soon(worker, index, item)
    return results  # type: ignore[return-value]


def run_ordered(func: Callable[[T], R], items: Iterable[T], parallel: int = 1) -> list[R]:
    """
    在进程池中执行相互独立的任务，结果按输入顺序返回

    func 与 items 必须可被 pickle；parallel <= 1 时在当前进程内顺序执行

    :param func: 模块级函数
    :param items: 任务参数
    :param parallel: 最大并行进程数
    :return:
    """
    items = list(items)
    if parallel <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    log.info(f'进程池执行 {len(items)} 个任务，并行度 {parallel}')
    return anyio.run(_gather, func, items, parallel)
