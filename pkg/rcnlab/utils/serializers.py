#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import csv
import io

from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from msgspec import json


def fraction_as_dict(value: Fraction) -> dict[str, str]:
    """
    精确有理数序列化为分子 / 分母字符串

    :param value: 有理数
    :return:
    """
    return {'num': str(value.numerator), 'den': str(value.denominator)}


def fraction_from_dict(value: dict[str, str]) -> Fraction:
    """
    从分子 / 分母字符串还原有理数

    :param value: 序列化结果
    :return:
    """
    return Fraction(int(value['num']), int(value['den']))


def _enc_hook(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return fraction_as_dict(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise NotImplementedError(f'Objects of type {type(obj).__name__} are not supported')


_encoder = json.Encoder(enc_hook=_enc_hook)


def encode_json(content: Any) -> bytes:
    """
    使用 msgspec 将数据序列化为带缩进的 JSON，键顺序保持插入顺序

    :param content: 待序列化数据
    :return:
    """
    return json.format(_encoder.encode(content), indent=2) + b'\n'


def decode_json(content: bytes | str) -> Any:
    """
    使用 msgspec 解析 JSON

    :param content: JSON 文本
    :return:
    """
    return json.decode(content)


def format_float(value: float) -> str:
    """17 位有效数字，保证往返精确"""
    return f'{float(value):.17g}'


def format_cell(value: Any) -> str:
    """
    CSV 单元格格式化

    :param value: 单元格值
    :return:
    """
    if value is None:
        return ''
    if isinstance(value, Fraction):
        return format_float(float(value))
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def encode_csv(schema: str, version: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    生成带版本注释行的 CSV 文本

    :param schema: 模式名称
    :param version: 模式版本
    :param columns: 固定列顺序
    :param rows: 数据行
    :return:
    """
    buffer = io.StringIO()
    buffer.write(f'# schema={schema} version={version}\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()
