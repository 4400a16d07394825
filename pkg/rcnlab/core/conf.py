#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from functools import lru_cache
from typing import Any

import psutil

from pydantic import model_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from rcnlab.core.path_conf import CONFIG_FILENAME


class Settings(BaseSettings):
    """全局配置"""

    model_config = SettingsConfigDict(
        json_file=CONFIG_FILENAME,
        json_file_encoding='utf-8',
        extra='ignore',
        case_sensitive=True,
    )

    # 数值容差
    UNIT_NORM_RTOL: float = 1e-9
    BALL_NORM_SLACK: float = 1e-9

    # Simulate
    SIMULATE_MAX_REJECTIONS: int = 10**6
    SIMULATE_BATCH_SIZE: int = 4096

    # Learner
    LEARNER_CHECK_ATOL: float = 1e-9
    LEARNER_DECOMP_ATOL: float = 1e-6
    LEARNER_LOG_EVERY: int = 1000  # 每隔多少次迭代输出一次 debug 日志
    LEARNER_EVAL_CHUNK: int = 512  # 批量评估迭代点时的分块大小

    # Dimreduce
    JL_CONSTANT_C_M: float = 64.0
    JL_BETA_FACTOR: float = 1 / 20  # beta = eps * delta * factor / N
    JL_BETA_PRIME_FACTOR: float = 1 / 2  # beta' = eps * factor / N

    # Hardness
    HARDNESS_DEFAULT_ETA: float = 1 / 3
    HARDNESS_ENUM_MAX_D: int = 24  # 超立方体穷举上限，约 1.7e7 个点
    HARDNESS_FOURIER_MAX_D: int = 14  # 全部 2^d 个子集的傅里叶穷举上限
    HARDNESS_EXACT_MAX_N: int = 64
    HARDNESS_ENUM_CHUNK: int = 1 << 20
    BINOMIAL_EXACT_MAX_N: int = 1000
    NEAR_ORTH_MAX_COUNT: int = 4096
    NEAR_ORTH_RETRY_BUDGET: int = 100_000
    CORRELATION_HYPOTHESIS_RATIO: float = 0.5
    MONTE_CARLO_DEFAULT_SAMPLES: int = 200_000

    # Bench
    SWEEP_MAX_CELLS: int = 10_000
    SWEEP_DEFAULT_PARALLEL: int = 1
    VERIFY_GUARANTEE_TEST_ROWS: int = 5000  # verify 中分歧分解只取测试集前若干行
    SCHEMA_VERSION_RUN_RECORD: str = '1'
    SCHEMA_VERSION_SWEEP_CSV: str = '1'
    SCHEMA_VERSION_CORRELATION: str = '1'
    SCHEMA_VERSION_DATASET: str = '1'

    # 日志
    LOG_CID_DEFAULT_VALUE: str = '-'
    LOG_CID_LENGTH: int = 16  # 日志 trial id 长度
    LOG_STD_LEVEL: str = 'INFO'
    LOG_ACCESS_FILE_LEVEL: str = 'INFO'
    LOG_ERROR_FILE_LEVEL: str = 'ERROR'
    LOG_STD_FORMAT: str = (
        '<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</> | <lvl>{level: <8}</> | <cyan> {trial_id} </> | <lvl>{message}</>'
    )
    LOG_FILE_FORMAT: str = (
        '<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</> | <lvl>{level: <8}</> | <cyan> {trial_id} </> | <lvl>{message}</>'
    )
    LOG_ACCESS_FILENAME: str = 'rcnlab_access.log'
    LOG_ERROR_FILENAME: str = 'rcnlab_error.log'

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """只使用初始化参数和 JSON 配置文件，不读取环境变量"""
        return init_settings, JsonConfigSettingsSource(settings_cls)

    @model_validator(mode='before')
    @classmethod
    def check_parallel(cls, values: Any) -> Any:
        """未显式配置并行度时，使用物理核心数"""
        if isinstance(values, dict) and 'SWEEP_DEFAULT_PARALLEL' not in values:
            values['SWEEP_DEFAULT_PARALLEL'] = psutil.cpu_count(logical=False) or 1
        return values


@lru_cache
def get_settings() -> Settings:
    """获取全局配置单例"""
    return Settings()


# 创建全局配置实例
settings = get_settings()
