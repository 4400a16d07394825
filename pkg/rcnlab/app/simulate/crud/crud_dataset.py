#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from pathlib import Path

import numpy as np

from rcnlab.app.simulate.schema.simulate import Dataset, SimulatorConfig
from rcnlab.common.enums import DatasetFormat
from rcnlab.common.exception import errors
from rcnlab.common.log import log
from rcnlab.core.conf import settings
from rcnlab.utils.serializers import format_float

_REQUIRED_KEYS = ('format', 'd', 'n')


class CRUDDataset:
    """数据集文件读写类"""

    @staticmethod
    def _header(dataset: Dataset) -> str:
        tokens = {'format': str(dataset.fmt), 'd': str(dataset.d), 'n': str(dataset.n)}
        if isinstance(dataset.provenance, SimulatorConfig):
            tokens.update(dataset.provenance.header_tokens())
        for key, value in dataset.meta.items():
            tokens.setdefault(key, value)
        return ' '.join(f'{key}={value}' for key, value in tokens.items())

    def dumps(self, dataset: Dataset) -> str:
        """
        序列化数据集为文本

        :param dataset: 数据集
        :return:
        """
        lines = [self._header(dataset)]
        if dataset.fmt == DatasetFormat.cube:
            for x, y in zip(dataset.X, dataset.y):
                lines.append(' '.join([str(int(y)), *(str(int(c)) for c in x)]))
        else:
            for x, y in zip(dataset.X, dataset.y):
                lines.append(' '.join(['+1' if y > 0 else '-1', *(format_float(c) for c in x)]))
        return '\n'.join(lines) + '\n'

    def write(self, dataset: Dataset, path: str | Path) -> None:
        """
        写入数据集文件

        :param dataset: 数据集
        :param path: 文件路径
        :return:
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(dataset), encoding='utf-8')
        log.info(f'数据集已写入 {path} ({dataset.n} 行)')

    @staticmethod
    def _parse_header(line: str) -> tuple[DatasetFormat, int, int, dict[str, str]]:
        tokens: dict[str, str] = {}
        for token in line.split():
            key, sep, value = token.partition('=')
            if not sep or not key:
                raise errors.FormatError(msg=f'malformed header token {token!r}', line=1)
            tokens[key] = value
        missing = [key for key in _REQUIRED_KEYS if key not in tokens]
        if missing:
            raise errors.FormatError(msg=f'header is missing {", ".join(missing)}', line=1)
        try:
            fmt = DatasetFormat(tokens.pop('format'))
        except ValueError:
            raise errors.FormatError(msg='header format must be sphere or cube', line=1)
        try:
            d = int(tokens.pop('d'))
            n = int(tokens.pop('n'))
        except ValueError:
            raise errors.FormatError(msg='header d and n must be integers', line=1)
        if d < 1 or n < 0:
            raise errors.FormatError(msg=f'header has invalid d={d} or n={n}', line=1)
        return fmt, d, n, tokens

    @staticmethod
    def _parse_sphere_row(parts: list[str], lineno: int) -> tuple[int, list[float]]:
        if parts[0] not in ('+1', '-1', '1'):
            raise errors.FormatError(msg=f'label must be +1 or -1, got {parts[0]!r}', line=lineno)
        try:
            coords = [float(c) for c in parts[1:]]
        except ValueError:
            raise errors.FormatError(msg='coordinates must be decimal literals', line=lineno)
        if not all(math.isfinite(c) for c in coords):
            raise errors.FormatError(msg='coordinates must be finite', line=lineno)
        if abs(math.sqrt(math.fsum(c * c for c in coords)) - 1.0) > settings.UNIT_NORM_RTOL:
            raise errors.FormatError(msg='sphere row is not a unit vector', line=lineno)
        return int(parts[0]), coords

    @staticmethod
    def _parse_cube_row(parts: list[str], lineno: int) -> tuple[int, list[float]]:
        if parts[0] not in ('0', '1'):
            raise errors.FormatError(msg=f'label must be 0 or 1, got {parts[0]!r}', line=lineno)
        if any(c not in ('1', '-1', '+1') for c in parts[1:]):
            raise errors.FormatError(msg='cube coordinates must be +1 or -1', line=lineno)
        return int(parts[0]), [float(int(c)) for c in parts[1:]]

    def loads(self, text: str, *, source: Path | None = None) -> Dataset:
        """
        解析数据集文本，错误信息包含行号

        :param text: 文件内容
        :param source: 来源路径
        :return:
        """
        lines = text.splitlines()
        while lines and not lines[-1].strip():
            lines.pop()
        if not lines:
            raise errors.FormatError(msg='empty file, header expected', line=1)
        fmt, d, n, tokens = self._parse_header(lines[0])
        if len(lines) - 1 != n:
            raise errors.FormatError(
                msg=f'header declares n={n} rows but file has {len(lines) - 1}', line=min(len(lines), n + 1) + 1
            )
        parse_row = self._parse_cube_row if fmt == DatasetFormat.cube else self._parse_sphere_row
        X = np.empty((n, d))
        y = np.empty(n, dtype=np.int64)
        for i, line in enumerate(lines[1:]):
            lineno = i + 2
            parts = line.split()
            if len(parts) != d + 1:
                raise errors.FormatError(
                    msg=f'expected {d + 1} fields (label + {d} coordinates), got {len(parts)}', line=lineno
                )
            y[i], X[i] = parse_row(parts, lineno)
        provenance = None
        if fmt == DatasetFormat.sphere:
            try:
                provenance = SimulatorConfig.from_header_tokens(d=d, n=n, tokens=tokens)
            except ValueError:
                raise errors.FormatError(msg='header carries invalid simulator provenance', line=1)
        return Dataset(d=d, X=X, y=y, fmt=fmt, provenance=provenance or source, meta=tokens)

    def read(self, path: str | Path) -> Dataset:
        """
        读取数据集文件

        :param path: 文件路径
        :return:
        """
        path = Path(path)
        text = path.read_text(encoding='utf-8')
        dataset = self.loads(text, source=path)
        log.info(f'读取数据集 {path}: format={dataset.fmt} d={dataset.d} n={dataset.n}')
        return dataset


dataset_dao: CRUDDataset = CRUDDataset()
