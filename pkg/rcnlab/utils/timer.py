#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import time


class Stopwatch:
    """墙钟计时器"""

    def __init__(self, enabled: bool = True) -> None:
        """
        :param enabled: 为 False 时 elapsed_ms 恒为 0，用于字节级可复现输出
        :return:
        """
        self.enabled = enabled
        self._start: float | None = None
        self._stop: float | None = None

    def __enter__(self) -> 'Stopwatch':
        self._start = time.perf_counter()
        self._stop = None
        return self

    def __exit__(self, *exc) -> None:
        self._stop = time.perf_counter()

    @property
    def elapsed_ms(self) -> float:
        """已耗时（毫秒）"""
        if not self.enabled or self._start is None:
            return 0.0
        end = self._stop if self._stop is not None else time.perf_counter()
        return round((end - self._start) * 1000, 3)
