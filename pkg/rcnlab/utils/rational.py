#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from fractions import Fraction
from numbers import Rational


def as_fraction(value: int | float | str | Fraction) -> Fraction:
    """
    转换为精确有理数，浮点数按其十进制表示解析，即 0.3 -> 3/10

    :param value: 整数、浮点数、'1/3' 形式的字符串或有理数
    :return:
    """
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f'cannot convert {value!r} to a rational')
        return Fraction(repr(value))
    return Fraction(str(value).strip())


def log_fraction(value: Fraction) -> float:
    """
    有理数的自然对数，分子分母过大时不经过浮点转换

    :param value: 正有理数
    :return:
    """
    if value <= 0:
        raise ValueError('log of a non-positive rational')
    return math.log(value.numerator) - math.log(value.denominator)
