#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
{±1}^d 顶点的位掩码表示：第 i 位为 1 表示 x_i = -1

于是 agreement(x, v) = d - popcount(x ^ v)，chi_T(x) = (-1)^popcount(x & T)
"""

from typing import Iterator, Sequence

import numpy as np

from rcnlab.common.exception import errors


def to_mask(signs: Sequence[int]) -> int:
    """
    符号向量转位掩码

    :param signs: ±1 序列
    :return:
    """
    mask = 0
    for i, s in enumerate(signs):
        if s == -1:
            mask |= 1 << i
        elif s != 1:
            raise errors.RangeError(msg=f'coordinate {i} must be +1 or -1, got {s!r}')
    return mask


def format_signs(signs: Sequence[int]) -> str:
    """符号向量转 '+-' 字符串"""
    return ''.join('+' if int(s) > 0 else '-' for s in signs)


_SIGN_CHARS = {'+': 1, 'p': 1, '-': -1, 'n': -1}


def parse_signs(text: str) -> tuple[int, ...]:
    """
    解析符号字符串或逗号分隔的 ±1 序列；字符串中 '+'/'p' 表示 +1，'-'/'n' 表示 -1，
    命令行上以 -1 开头的向量可写作 'n+-+' 或 'npnp'

    :param text: 符号文本，如 '++-+'、'ppnp' 或 '1,1,-1,1'
    :return:
    """
    text = text.strip()
    try:
        if ',' in text:
            signs = tuple(int(token) for token in text.split(','))
        else:
            signs = tuple(_SIGN_CHARS.get(ch, 0) for ch in text.lower())
    except ValueError:
        signs = ()
    if not signs or any(s not in (1, -1) for s in signs):
        raise errors.RangeError(msg=f'not a sign vector: {text!r}')
    return signs


def subset_mask(subset: Sequence[int]) -> int:
    """0 起始下标集合转位掩码"""
    mask = 0
    for i in subset:
        mask |= 1 << int(i)
    return mask


def iter_cube(d: int, chunk: int) -> Iterator[np.ndarray]:
    """
    分块枚举 {±1}^d 的全部 2^d 个顶点

    :param d: 维度
    :param chunk: 块大小
    :return:
    """
    total = 1 << d
    for start in range(0, total, chunk):
        yield np.arange(start, min(start + chunk, total), dtype=np.uint64)


def agreement(masks: np.ndarray, vmask: int, d: int) -> np.ndarray:
    """与 v 一致的坐标个数"""
    return d - np.bitwise_count(masks ^ np.uint64(vmask)).astype(np.int64)


def parity(masks: np.ndarray, tmask: int) -> np.ndarray:
    """popcount(x & T) 的奇偶性"""
    return (np.bitwise_count(masks & np.uint64(tmask)) & 1).astype(np.int64)


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """
    整数 Walsh-Hadamard 变换：out[T] = sum_x values[x] (-1)^popcount(x & T)

    :param values: 长度为 2^d 的整数数组
    :return:
    """
    out = np.array(values, dtype=np.int64)
    n = out.shape[0]
    h = 1
    while h < n:
        view = out.reshape(-1, 2, h)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = a + b
        view[:, 1, :] = a - b
        h *= 2
    return out
