#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import numpy as np

from rcnlab.common.enums import IntEnum

_UINT64_MASK = (1 << 64) - 1


class Stream(IntEnum):
    """随机流编号，同一个种子下不同用途互不干扰"""

    train = 0
    holdout = 1
    test = 2
    w_star = 3
    jl_matrix = 4
    hard_sample = 5
    near_orthogonal = 6
    verify = 7


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    创建以 (seed, stream) 为密钥的 Philox 计数器随机数生成器

    :param seed: 64 位无符号种子
    :param stream: 流编号
    :return:
    """
    key = np.array([seed & _UINT64_MASK, stream & _UINT64_MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(*entropy: int) -> int:
    """
    由若干整数派生一个新的 64 位种子，例如 (master, cell, seed_index)

    :param entropy: 熵来源
    :return:
    """
    state = np.random.SeedSequence([int(e) & _UINT64_MASK for e in entropy]).generate_state(1, dtype=np.uint64)
    return int(state[0])
