#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
次梯度与分歧判定原语

所有函数均为输入的纯函数，sgn(0) = +1 在全部模块中保持一致
"""

import math

from typing import Iterable, Sequence

import numpy as np

from rcnlab.app.core_model.schema.model import LabeledExample, SupportsArrays, as_vector, check_eta
from rcnlab.common.enums import SignLabel
from rcnlab.common.exception import errors


def sign_fn(t: float) -> SignLabel:
    """
    符号函数，t >= 0 时返回 +1

    :param t: 实数
    :return:
    """
    if not math.isfinite(t):
        raise errors.RangeError(msg=f'sign_fn expects a finite input, got {t!r}')
    return SignLabel.positive if t >= 0 else SignLabel.negative


def sign_array(t: np.ndarray) -> np.ndarray:
    """向量化的 sign_fn，返回 float64 的 ±1"""
    return np.where(t >= 0, 1.0, -1.0)


def _check_dims(w: np.ndarray, x: np.ndarray) -> None:
    if w.shape[-1] != x.shape[-1]:
        raise errors.DimensionError(msg=f'dimension mismatch: w has {w.shape[-1]}, x has {x.shape[-1]}')


def leaky_relu_subgradient(w: Sequence[float], x: Sequence[float], y: int, eta: float) -> np.ndarray:
    """
    g_eta(w; x, y) = 1/2 [(1 - 2 eta) sign(w·x) - y] x

    :param w: 权重向量
    :param x: 样本点
    :param y: 标签 ±1
    :param eta: 噪声率
    :return:
    """
    w = as_vector(w, name='w')
    x = as_vector(x, name='x')
    _check_dims(w, x)
    y = int(SignLabel(int(y)))
    eta = check_eta(eta)
    coef = 0.5 * ((1 - 2 * eta) * int(sign_fn(float(w @ x))) - y)
    return coef * x


def as_arrays(examples: SupportsArrays | Iterable[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    """
    将样本集合转为 (X, y) 数组

    :param examples: 数据集或样本列表
    :return:
    """
    if hasattr(examples, 'X') and hasattr(examples, 'y'):
        return examples.X, np.asarray(examples.y, dtype=np.float64)
    examples = list(examples)
    if not examples:
        return np.empty((0, 0)), np.empty(0)
    X = np.stack([ex.x for ex in examples])
    y = np.array([int(ex.y) for ex in examples], dtype=np.float64)
    return X, y


def subgradient_field(w: np.ndarray, X: np.ndarray, y: np.ndarray, eta: float) -> np.ndarray:
    """
    经验次梯度 g_N(w) 的数组实现，求和顺序固定

    :param w: 权重向量 (d,)
    :param X: 样本矩阵 (n, d)
    :param y: 标签 (n,)，取值 ±1
    :param eta: 噪声率
    :return:
    """
    coef = 0.5 * ((1 - 2 * eta) * sign_array(X @ w) - y)
    return np.einsum('i,ij->j', coef, X) / X.shape[0]


def empirical_subgradient(
    w: Sequence[float], examples: SupportsArrays | Iterable[LabeledExample], eta: float
) -> np.ndarray:
    """
    经验次梯度：对样本列表上的 leaky_relu_subgradient 取算术平均

    :param w: 权重向量
    :param examples: 数据集或样本列表
    :param eta: 噪声率
    :return:
    """
    w = as_vector(w, name='w')
    eta = check_eta(eta)
    X, y = as_arrays(examples)
    if X.shape[0] == 0:
        raise errors.LearnerError(msg='empirical_subgradient requires a non-empty example list')
    _check_dims(w, X)
    return subgradient_field(w, X, y, eta)


def disagreement_indicator(w: Sequence[float], w_ref: Sequence[float], x: Sequence[float]) -> int:
    """
    sign(w·x) 与 sign(w_ref·x) 不一致时返回 1

    :param w: 权重向量
    :param w_ref: 参考权重向量
    :param x: 样本点
    :return:
    """
    w = as_vector(w, name='w')
    w_ref = as_vector(w_ref, name='w_ref')
    x = as_vector(x, name='x')
    _check_dims(w, x)
    _check_dims(w_ref, x)
    return int(sign_fn(float(w @ x)) != sign_fn(float(w_ref @ x)))


def disagreement_rate(w: np.ndarray, w_ref: np.ndarray, X: np.ndarray) -> float:
    """
    经验分歧概率 P_N(w)

    :param w: 权重向量
    :param w_ref: 参考权重向量
    :param X: 样本矩阵
    :return:
    """
    _check_dims(w, X)
    _check_dims(w_ref, X)
    return float(np.mean(sign_array(X @ w) != sign_array(X @ w_ref)))


def leaky_relu_loss(w: np.ndarray, X: np.ndarray, y: np.ndarray, eta: float) -> float:
    """
    经验 leaky ReLU 损失，LR(z) = (1 - eta) z 1{z >= 0} + eta z 1{z < 0}，z = -y w·x

    :param w: 权重向量
    :param X: 样本矩阵
    :param y: 标签 ±1
    :param eta: 噪声率
    :return:
    """
    _check_dims(w, X)
    z = -np.asarray(y, dtype=np.float64) * (X @ w)
    return float(np.mean(np.where(z >= 0, (1 - eta) * z, eta * z)))
